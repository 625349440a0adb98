#include "netsynth.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "netsynth/bench.hpp"
#include "netsynth/pipeline.hpp"
#include "netsynth/textio.hpp"

using namespace netsynth;

struct netsynth_problem {
  plant::NetworkProblem problem;
};

struct netsynth_controller {
  plant::ControllerNetwork net;
  double nu = 0.0;
  int nonzero_blocks = 0;
  std::vector<ico::IcoTraceRow> trace;
};

struct netsynth_config {
  pipeline::SynthesisConfig cfg;
};

namespace {

thread_local std::string g_last_error;

int fail(const std::string& msg, int code = NETSYNTH_ERR) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return fail(e.what());
  } catch (...) {
    return fail("unknown error");
  }
}

void save_controller_text(const netsynth_controller& c, const std::string& path) {
  textio::Node root("root");
  auto& cn = root.add_child("controller_network");
  for (const auto& local : c.net.local) {
    auto& ln = cn.add_child("local");
    ln.set_matrix("A", local.A);
    ln.set_matrix("B", local.B);
    ln.set_matrix("C", local.C);
    ln.set_matrix("D", local.D);
  }
  cn.set_matrix("hy", c.net.hy);
  cn.set_matrix("hyhat", c.net.hyhat);
  cn.set_double("nu", c.nu);
  cn.set_int("nonzero_blocks", c.nonzero_blocks);
  textio::save_file(root, path);
}

netsynth_controller load_controller_text(const std::string& path) {
  const textio::Node root = textio::load_file(path);
  const textio::Node* cn = root.child("controller_network");
  require(cn != nullptr, "controller file: missing controller_network group");
  netsynth_controller out;
  for (const auto* ln : cn->children("local"))
    out.net.local.emplace_back(ln->get_matrix("A"), ln->get_matrix("B"),
                               ln->get_matrix("C"), ln->get_matrix("D"));
  out.net.hy = cn->get_matrix("hy");
  out.net.hyhat = cn->get_matrix("hyhat");
  out.nu = cn->get_double_or("nu", 0.0);
  out.nonzero_blocks =
      cn->has("nonzero_blocks") ? static_cast<int>(cn->get_int("nonzero_blocks")) : 0;
  return out;
}

int status_code(const std::string& message) {
  if (message.find("nfeasible") != std::string::npos ||
      message.find("no feasible") != std::string::npos ||
      message.find("no certificate") != std::string::npos)
    return NETSYNTH_INFEASIBLE;
  return NETSYNTH_NUMERICAL;
}

}  // namespace

extern "C" {

const char* netsynth_version(void) { return "netsynth 1.0.0"; }

const char* netsynth_last_error(void) { return g_last_error.c_str(); }

int netsynth_problem_example(int n_agents, double alpha, double uncertainty,
                             int signed_coupling, netsynth_problem** out) {
  return guarded([&] {
    if (!out) return fail("null output pointer");
    bench::ExperimentSpec spec;
    spec.n_agents = n_agents > 0 ? n_agents : 10;
    spec.n_unstable = spec.n_agents / 2;
    spec.alpha = alpha > 0 ? alpha : 0.1823;
    spec.uncertainty = uncertainty;
    spec.signed_coupling = signed_coupling != 0;
    auto* p = new netsynth_problem{bench::build_paper_example(spec)};
    *out = p;
    return NETSYNTH_OK;
  });
}

int netsynth_problem_load(const char* path, netsynth_problem** out) {
  return guarded([&] {
    if (!path || !out) return fail("null argument");
    auto* p = new netsynth_problem{plant::load_problem(path)};
    *out = p;
    return NETSYNTH_OK;
  });
}

int netsynth_problem_save(const netsynth_problem* p, const char* path) {
  return guarded([&] {
    if (!p || !path) return fail("null argument");
    plant::save_problem(p->problem, path);
    return NETSYNTH_OK;
  });
}

int netsynth_problem_agents(const netsynth_problem* p) {
  return p ? p->problem.n_agents() : 0;
}

void netsynth_problem_free(netsynth_problem* p) { delete p; }

int netsynth_config_create(netsynth_config** out) {
  return guarded([&] {
    if (!out) return fail("null output pointer");
    *out = new netsynth_config();
    return NETSYNTH_OK;
  });
}

int netsynth_config_set(netsynth_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    if (!cfg || !key || !value) return fail("null argument");
    auto& c = cfg->cfg;
    const std::string k = key, v = value;
    if (k == "penalty") {
      if (v == "cardinality" || v == "card")
        c.penalty = pipeline::Penalty::Cardinality;
      else if (v == "l1" || v == "weighted-l1")
        c.penalty = pipeline::Penalty::WeightedL1;
      else
        return fail("unknown penalty '" + v + "'");
    } else if (k == "gamma") {
      c.gamma = textio::parse_double(v);
    } else if (k == "rho") {
      c.rho = textio::parse_double(v);
    } else if (k == "eps") {
      c.eps = textio::parse_double(v);
    } else if (k == "eps_p") {
      c.eps_p = textio::parse_double(v);
    } else if (k == "eps_d") {
      c.eps_d = textio::parse_double(v);
    } else if (k == "eps_l") {
      c.eps_l = textio::parse_double(v);
    } else if (k == "admm_max_iters") {
      c.admm_max_iters = std::stoi(v);
    } else if (k == "l1_reweight_iters") {
      c.l1_reweight_iters = std::stoi(v);
    } else if (k == "ico_max_iters") {
      c.ico_max_iters = std::stoi(v);
    } else if (k == "lqg_state_weight") {
      c.lqg_state_weight = textio::parse_double(v);
    } else if (k == "lqg_input_weight") {
      c.lqg_input_weight = textio::parse_double(v);
    } else if (k == "ctrl_scale") {
      c.ctrl_scale = textio::parse_double(v);
    } else if (k == "feedforward") {
      c.feedforward = textio::parse_double(v);
    } else if (k == "escalation_steps") {
      c.escalation_steps = std::stoi(v);
    } else if (k == "seed") {
      c.seed = std::stoull(v);
    } else if (k == "verbose") {
      c.verbose = (v == "1" || v == "true");
    } else if (k == "dump_dir") {
      c.dump_dir = v;
    } else if (k == "solver_max_iters") {
      c.solver.max_iters = std::stoi(v);
    } else if (k == "solver_tol_gap") {
      c.solver.tol_gap = textio::parse_double(v);
    } else {
      return fail("unknown config key '" + k + "'");
    }
    return NETSYNTH_OK;
  });
}

int netsynth_config_load(netsynth_config* cfg, const char* path) {
  return guarded([&] {
    if (!cfg || !path) return fail("null argument");
    const textio::Node root = textio::load_file(path);
    const textio::Node* n = root.child("synthesis");
    if (!n) n = &root;
    int rc = NETSYNTH_OK;
    for (const auto& child : n->all_children()) (void)child;
    // flat key-value entries
    for (const auto& key : {"penalty", "gamma", "rho", "eps", "eps_p", "eps_d", "eps_l",
                            "admm_max_iters", "l1_reweight_iters", "ico_max_iters", "lqg_state_weight",
                            "lqg_input_weight", "ctrl_scale", "feedforward",
                            "escalation_steps", "seed", "verbose", "dump_dir",
                            "solver_max_iters", "solver_tol_gap"}) {
      if (n->has(key)) {
        rc = netsynth_config_set(cfg, key, n->get(key).c_str());
        if (rc != NETSYNTH_OK) return rc;
      }
    }
    return rc;
  });
}

void netsynth_config_free(netsynth_config* cfg) { delete cfg; }

int netsynth_synthesize(const netsynth_problem* p, const netsynth_config* cfg,
                        netsynth_controller** out) {
  return guarded([&] {
    if (!p || !out) return fail("null argument");
    pipeline::SynthesisConfig c = cfg ? cfg->cfg : pipeline::SynthesisConfig();
    auto res = pipeline::run(p->problem, c);
    if (!res.ok) return fail(res.message, status_code(res.message));
    auto* ctrl = new netsynth_controller();
    ctrl->net.local = res.point.controllers;
    ctrl->net.hy = res.point.hy;
    ctrl->net.hyhat = res.point.hyhat;
    ctrl->nu = res.nu_final;
    ctrl->nonzero_blocks = res.nonzero_blocks;
    ctrl->trace = res.dense_trace;
    for (auto row : res.trace) {
      row.iteration += static_cast<int>(ctrl->trace.size());
      ctrl->trace.push_back(row);
    }
    *out = ctrl;
    return NETSYNTH_OK;
  });
}

int netsynth_baseline(const netsynth_problem* p, const netsynth_config* cfg,
                      netsynth_controller** out) {
  return guarded([&] {
    if (!p || !out) return fail("null argument");
    pipeline::SynthesisConfig c = cfg ? cfg->cfg : pipeline::SynthesisConfig();
    auto res = pipeline::nominal_hinf_baseline(p->problem, c);
    if (!res.ok) return fail(res.message, status_code(res.message));
    auto* ctrl = new netsynth_controller();
    ctrl->net.local = res.controllers;
    ctrl->net.hy = res.hy;
    ctrl->net.hyhat = res.hyhat;
    ctrl->nu = res.nu;
    const auto grid = sparsity::BlockGrid::of(p->problem);
    ctrl->nonzero_blocks = sparsity::cardinality(grid, res.hy, res.hyhat);
    *out = ctrl;
    return NETSYNTH_OK;
  });
}

int netsynth_controller_load(const char* path, netsynth_controller** out) {
  return guarded([&] {
    if (!path || !out) return fail("null argument");
    *out = new netsynth_controller(load_controller_text(path));
    return NETSYNTH_OK;
  });
}

int netsynth_controller_save(const netsynth_controller* c, const char* path) {
  return guarded([&] {
    if (!c || !path) return fail("null argument");
    save_controller_text(*c, path);
    return NETSYNTH_OK;
  });
}

double netsynth_controller_nu(const netsynth_controller* c) { return c ? c->nu : 0.0; }

int netsynth_controller_nonzero_blocks(const netsynth_controller* c) {
  return c ? c->nonzero_blocks : 0;
}

int netsynth_controller_trace_csv(const netsynth_controller* c, const char* path) {
  return guarded([&] {
    if (!c || !path) return fail("null argument");
    std::ofstream f(path);
    if (!f) return fail("cannot open " + std::string(path));
    f << "# netsynth descent trace v1: iteration,nu,max_constraint_eig,delta_bank,"
         "delta_routing,delta_lyapunov\n";
    char buf[192];
    for (const auto& r : c->trace) {
      std::snprintf(buf, sizeof(buf), "%d,%.12g,%.3e,%.3e,%.3e,%.3e\n", r.iteration, r.nu,
                    r.worst_constraint_eig, r.delta_bank, r.delta_h, r.delta_y);
      f << buf;
    }
    return NETSYNTH_OK;
  });
}

void netsynth_controller_free(netsynth_controller* c) { delete c; }

int netsynth_sweep(const netsynth_problem* p, const netsynth_config* cfg,
                   const double* gammas, int n_gammas, const char* csv_path,
                   const char* plot_path) {
  return guarded([&] {
    if (!p || !csv_path) return fail("null argument");
    std::vector<double> gs(gammas, gammas + std::max(0, n_gammas));
    pipeline::SynthesisConfig c = cfg ? cfg->cfg : pipeline::SynthesisConfig();
    auto res = bench::sweep(p->problem, c, gs);
    bench::write_sweep_csv(res, csv_path);
    if (plot_path) bench::write_plot_data(res, plot_path);
    return NETSYNTH_OK;
  });
}

int netsynth_robustness(const netsynth_problem* p, const netsynth_controller* c,
                        const netsynth_controller* baseline_or_null, int trials,
                        uint64_t seed, const char* csv_path) {
  return guarded([&] {
    if (!p || !c || !csv_path) return fail("null argument");
    auto mc = bench::robustness_mc(p->problem, c->net, trials, seed);
    if (baseline_or_null) {
      auto mcb = bench::robustness_mc(p->problem, baseline_or_null->net, trials, seed);
      bench::write_mc_csv(mc, &mcb, csv_path);
    } else {
      bench::write_mc_csv(mc, nullptr, csv_path);
    }
    return NETSYNTH_OK;
  });
}

int netsynth_analyze(const netsynth_problem* p, const netsynth_controller* c,
                     char* report, int report_len) {
  return guarded([&] {
    if (!p || !c) return fail("null argument");
    pipeline::SynthesisConfig cfg;
    std::string why;
    auto fp = pipeline::certify_fixed(p->problem, c->net.local, c->net.hy, c->net.hyhat,
                                      cfg, &why);
    if (!fp) return fail("no certificate: " + why, NETSYNTH_INFEASIBLE);
    auto rep = ico::verify_point(p->problem, *fp, 1e-9);
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "certified: nu=%.6f hinf_margin=%.3e kyp_margin=%.3e "
                  "ctrl_margin=%.3e network_margin=%.3e",
                  fp->nu, rep.hinf_margin, rep.kyp_margin, rep.ctrl_margin,
                  rep.ndt_margin);
    if (report && report_len > 0) {
      std::strncpy(report, buf, report_len - 1);
      report[report_len - 1] = '\0';
    }
    return NETSYNTH_OK;
  });
}

int netsynth_simulate(const netsynth_problem* p, const netsynth_controller* c_or_null,
                      const char* input_kind, double dt, double t_final,
                      const char* csv_path) {
  return guarded([&] {
    if (!p || !csv_path || dt <= 0 || t_final <= 0) return fail("bad argument");
    std::vector<plant::StateSpace> nominal;
    for (const auto& a : p->problem.agents) nominal.push_back(a.nominal);
    plant::StateSpace sys;
    if (c_or_null) {
      sys = plant::closed_loop(nominal, p->problem.topology.h.m, c_or_null->net.local,
                               c_or_null->net.hy, c_or_null->net.hyhat);
    } else {
      // open network: u = e + H y
      std::vector<Mat> ab, bb, cb;
      for (const auto& s : nominal) {
        ab.push_back(s.A);
        bb.push_back(s.B);
        cb.push_back(s.C);
      }
      Mat a_d = plant::blkdiag(ab), b_d = plant::blkdiag(bb), c_d = plant::blkdiag(cb);
      sys = plant::StateSpace(Mat(a_d + b_d * p->problem.topology.h.m * c_d), b_d, c_d,
                              Mat::Zero(c_d.rows(), b_d.cols()));
    }
    const std::string kind = input_kind ? input_kind : "step";
    auto input = plant::SampledSignal::zero(sys.m(), dt, t_final);
    if (kind == "step") {
      input.samples.setConstant(1.0);
    } else if (kind == "sin") {
      for (int k = 0; k < input.count(); ++k)
        input.samples.col(k).setConstant(std::sin(1.0 * k * dt));
    } else if (kind == "zero") {
      // leave zero
    } else {
      return fail("unknown input kind '" + kind + "'");
    }
    auto traj = plant::simulate(sys, input, dt, t_final);
    std::ofstream f(csv_path);
    if (!f) return fail("cannot open " + std::string(csv_path));
    f << "# netsynth simulation v1: t";
    for (int i = 0; i < traj.outputs.rows(); ++i) f << ",y" << i;
    f << "\n";
    for (int k = 0; k < traj.outputs.cols(); ++k) {
      f << k * dt;
      for (int i = 0; i < traj.outputs.rows(); ++i) f << "," << traj.outputs(i, k);
      f << "\n";
    }
    return NETSYNTH_OK;
  });
}

}  // extern "C"
