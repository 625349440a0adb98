/* netsynth — sparse dissipativity-certified controller-network synthesis.
 *
 * C interface to the shared library: opaque handles, integer status codes,
 * file-based inputs and outputs. All functions return NETSYNTH_OK on success;
 * netsynth_last_error() describes the most recent failure on this thread.
 */

#ifndef NETSYNTH_H
#define NETSYNTH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define NETSYNTH_OK 0
#define NETSYNTH_ERR 1         /* invalid argument / internal error */
#define NETSYNTH_INFEASIBLE 2  /* no certificate / infeasible program */
#define NETSYNTH_NUMERICAL 3   /* backend did not converge */

typedef struct netsynth_problem netsynth_problem;
typedef struct netsynth_controller netsynth_controller;
typedef struct netsynth_config netsynth_config;

const char* netsynth_version(void);
const char* netsynth_last_error(void);

/* ---- problems ---------------------------------------------------------- */

/* Ten-agent benchmark network: n_agents, coupling decay alpha, entrywise
 * uncertainty fraction on the dynamics. signed_coupling selects the signed
 * exponent variant of the inter-agent weights. */
int netsynth_problem_example(int n_agents, double alpha, double uncertainty,
                             int signed_coupling, netsynth_problem** out);
int netsynth_problem_load(const char* path, netsynth_problem** out);
int netsynth_problem_save(const netsynth_problem* p, const char* path);
int netsynth_problem_agents(const netsynth_problem* p);
void netsynth_problem_free(netsynth_problem* p);

/* ---- configuration ----------------------------------------------------- */

int netsynth_config_create(netsynth_config** out);
/* Keys: penalty (cardinality|l1), gamma, rho, eps, eps_p, eps_d, eps_l,
 * admm_max_iters, ico_max_iters, lqg_state_weight, lqg_input_weight,
 * ctrl_scale, feedforward, escalation_steps, seed, verbose, dump_dir. */
int netsynth_config_set(netsynth_config* cfg, const char* key, const char* value);
int netsynth_config_load(netsynth_config* cfg, const char* path);
void netsynth_config_free(netsynth_config* cfg);

/* ---- synthesis --------------------------------------------------------- */

int netsynth_synthesize(const netsynth_problem* p, const netsynth_config* cfg,
                        netsynth_controller** out);
/* Dense output-feedback design on the nominal model without dissipativity
 * certificates; the robustness comparison baseline. */
int netsynth_baseline(const netsynth_problem* p, const netsynth_config* cfg,
                      netsynth_controller** out);

int netsynth_controller_load(const char* path, netsynth_controller** out);
int netsynth_controller_save(const netsynth_controller* c, const char* path);
double netsynth_controller_nu(const netsynth_controller* c);
int netsynth_controller_nonzero_blocks(const netsynth_controller* c);
/* Per-iteration descent trace of the synthesis run, if any. */
int netsynth_controller_trace_csv(const netsynth_controller* c, const char* path);
void netsynth_controller_free(netsynth_controller* c);

/* ---- evaluation -------------------------------------------------------- */

/* One pipeline run per gamma; rows sorted by nonzero blocks. plot_path may
 * be NULL. */
int netsynth_sweep(const netsynth_problem* p, const netsynth_config* cfg,
                   const double* gammas, int n_gammas, const char* csv_path,
                   const char* plot_path);

/* Monte-Carlo closed-loop norms over sampled true dynamics with the fixed
 * controller; optional baseline columns. */
int netsynth_robustness(const netsynth_problem* p, const netsynth_controller* c,
                        const netsynth_controller* baseline_or_null, int trials,
                        uint64_t seed, const char* csv_path);

/* Re-certifies a fixed controller network against the problem: finds fresh
 * storage matrices, supply rates and an H-infinity bound. Writes a short
 * human-readable report; fails with NETSYNTH_INFEASIBLE when no certificate
 * exists. */
int netsynth_analyze(const netsynth_problem* p, const netsynth_controller* c,
                     char* report, int report_len);

/* Simulates the nominal closed loop (or the open network when c is NULL)
 * under a step or sinusoid on every exogenous channel. */
int netsynth_simulate(const netsynth_problem* p,
                      const netsynth_controller* c_or_null, const char* input_kind,
                      double dt, double t_final, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* NETSYNTH_H */
