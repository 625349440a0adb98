// Command-line front end for the netsynth shared library.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netsynth.h"

namespace {

struct ProblemArgs {
  std::string model;
  int agents = 10;
  double alpha = 0.1823;
  double uncertainty = 0.04;
  bool signed_coupling = false;
};

netsynth_problem* open_problem(const ProblemArgs& a) {
  netsynth_problem* p = nullptr;
  int rc;
  if (!a.model.empty()) {
    rc = netsynth_problem_load(a.model.c_str(), &p);
  } else {
    rc = netsynth_problem_example(a.agents, a.alpha, a.uncertainty,
                                  a.signed_coupling ? 1 : 0, &p);
  }
  if (rc != NETSYNTH_OK) {
    std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    std::exit(rc);
  }
  return p;
}

void add_problem_flags(CLI::App* cmd, ProblemArgs& a) {
  cmd->add_option("--model", a.model, "model file (omit to build the benchmark network)");
  cmd->add_option("--agents", a.agents, "benchmark network size")->capture_default_str();
  cmd->add_option("--alpha", a.alpha, "coupling decay rate")->capture_default_str();
  cmd->add_option("--uncertainty", a.uncertainty, "entrywise dynamics uncertainty fraction")
      ->capture_default_str();
  cmd->add_flag("--signed-coupling", a.signed_coupling,
                "use the signed-exponent coupling variant");
}

struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::string dump_dir;
  bool verbose = false;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--config", a.config_file, "synthesis config file (nested key-value)");
  cmd->add_option("--set", a.sets, "config override key=value (repeatable)");
  cmd->add_option("--dump-conic", a.dump_dir,
                  "directory for solver-input dumps (SDPA sparse format)");
  cmd->add_flag("--verbose", a.verbose, "progress output on stderr");
}

netsynth_config* open_config(const ConfigArgs& a) {
  netsynth_config* cfg = nullptr;
  if (netsynth_config_create(&cfg) != NETSYNTH_OK) {
    std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    std::exit(NETSYNTH_ERR);
  }
  int rc = NETSYNTH_OK;
  if (!a.config_file.empty()) rc = netsynth_config_load(cfg, a.config_file.c_str());
  if (rc == NETSYNTH_OK && a.verbose) rc = netsynth_config_set(cfg, "verbose", "1");
  if (rc == NETSYNTH_OK && !a.dump_dir.empty())
    rc = netsynth_config_set(cfg, "dump_dir", a.dump_dir.c_str());
  for (const auto& kv : a.sets) {
    if (rc != NETSYNTH_OK) break;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      std::exit(NETSYNTH_ERR);
    }
    rc = netsynth_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
  }
  if (rc != NETSYNTH_OK) {
    std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    std::exit(rc);
  }
  return cfg;
}

void write_manifest(const std::string& out_base, const ProblemArgs& pa,
                    const ConfigArgs& ca, const std::string& command,
                    const std::string& extra) {
  std::ofstream f(out_base + ".manifest.txt");
  if (!f) return;
  f << "tool " << netsynth_version() << "\n";
  f << "command " << command << "\n";
  if (!pa.model.empty()) {
    f << "model " << pa.model << "\n";
  } else {
    f << "model benchmark agents=" << pa.agents << " alpha=" << pa.alpha
      << " uncertainty=" << pa.uncertainty
      << " signed_coupling=" << (pa.signed_coupling ? 1 : 0) << "\n";
  }
  if (!ca.config_file.empty()) f << "config_file " << ca.config_file << "\n";
  for (const auto& kv : ca.sets) f << "config_set " << kv << "\n";
  if (!extra.empty()) f << extra << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse dissipativity-certified controller-network synthesis"};
  app.require_subcommand(1);

  // example-paper
  auto* cmd_example = app.add_subcommand(
      "example-paper", "build the benchmark network and write the model file");
  ProblemArgs ex_p;
  std::string ex_out = "model.txt";
  add_problem_flags(cmd_example, ex_p);
  cmd_example->add_option("--out", ex_out, "output model file")->capture_default_str();

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "one synthesis run");
  ProblemArgs sy_p;
  ConfigArgs sy_c;
  std::string sy_out = "controller.txt", sy_trace, sy_penalty = "cardinality";
  double sy_gamma = 0.1;
  add_problem_flags(cmd_synth, sy_p);
  add_config_flags(cmd_synth, sy_c);
  cmd_synth->add_option("--penalty", sy_penalty, "cardinality | l1")->capture_default_str();
  cmd_synth->add_option("--gamma", sy_gamma, "sparsity weight")->capture_default_str();
  cmd_synth->add_option("--out", sy_out, "output controller file")->capture_default_str();
  cmd_synth->add_option("--trace", sy_trace, "descent trace CSV");

  // sweep
  auto* cmd_sweep = app.add_subcommand("sweep", "gamma sweep of the tradeoff frontier");
  ProblemArgs sw_p;
  ConfigArgs sw_c;
  std::string sw_out = "sweep.csv", sw_plot, sw_penalty = "cardinality";
  double sw_lo = 1e-6, sw_hi = 5.0;
  int sw_points = 20;
  add_problem_flags(cmd_sweep, sw_p);
  add_config_flags(cmd_sweep, sw_c);
  cmd_sweep->add_option("--penalty", sw_penalty, "cardinality | l1")->capture_default_str();
  cmd_sweep->add_option("--gamma-min", sw_lo, "")->capture_default_str();
  cmd_sweep->add_option("--gamma-max", sw_hi, "")->capture_default_str();
  cmd_sweep->add_option("--points", sw_points, "log-spaced gamma count")
      ->capture_default_str();
  cmd_sweep->add_option("--out", sw_out, "sweep CSV")->capture_default_str();
  cmd_sweep->add_option("--plot", sw_plot, "gnuplot-compatible tradeoff data");

  // robustness
  auto* cmd_mc = app.add_subcommand(
      "robustness", "Monte-Carlo closed-loop norms over sampled dynamics");
  ProblemArgs mc_p;
  std::string mc_ctrl, mc_baseline, mc_out = "robustness.csv";
  int mc_trials = 200;
  std::uint64_t mc_seed = 0;
  add_problem_flags(cmd_mc, mc_p);
  cmd_mc->add_option("--controller", mc_ctrl, "synthesized controller file")->required();
  cmd_mc->add_option("--baseline", mc_baseline, "baseline controller file");
  cmd_mc->add_option("--trials", mc_trials, "")->capture_default_str();
  cmd_mc->add_option("--seed", mc_seed, "")->capture_default_str();
  cmd_mc->add_option("--out", mc_out, "robustness CSV")->capture_default_str();

  // baseline
  auto* cmd_base = app.add_subcommand(
      "baseline", "dense nominal-model design without dissipativity certificates");
  ProblemArgs ba_p;
  ConfigArgs ba_c;
  std::string ba_out = "baseline.txt";
  add_problem_flags(cmd_base, ba_p);
  add_config_flags(cmd_base, ba_c);
  cmd_base->add_option("--out", ba_out, "output controller file")->capture_default_str();

  // analyze
  auto* cmd_an = app.add_subcommand("analyze", "re-certify a controller network");
  ProblemArgs an_p;
  std::string an_ctrl;
  add_problem_flags(cmd_an, an_p);
  cmd_an->add_option("--controller", an_ctrl, "controller file")->required();

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "closed-loop time response");
  ProblemArgs si_p;
  std::string si_ctrl, si_out = "trajectory.csv", si_input = "step";
  double si_dt = 1e-3, si_tf = 10.0;
  add_problem_flags(cmd_sim, si_p);
  cmd_sim->add_option("--controller", si_ctrl, "controller file (omit for open network)");
  cmd_sim->add_option("--input", si_input, "step | sin | zero")->capture_default_str();
  cmd_sim->add_option("--dt", si_dt, "")->capture_default_str();
  cmd_sim->add_option("--tf", si_tf, "")->capture_default_str();
  cmd_sim->add_option("--out", si_out, "trajectory CSV")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (cmd_example->parsed()) {
    netsynth_problem* p = open_problem(ex_p);
    const int rc = netsynth_problem_save(p, ex_out.c_str());
    if (rc != NETSYNTH_OK) std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    std::printf("wrote %s (%d agents)\n", ex_out.c_str(), netsynth_problem_agents(p));
    netsynth_problem_free(p);
    return rc;
  }

  if (cmd_synth->parsed()) {
    netsynth_problem* p = open_problem(sy_p);
    netsynth_config* cfg = open_config(sy_c);
    netsynth_config_set(cfg, "penalty", sy_penalty.c_str());
    netsynth_config_set(cfg, "gamma", std::to_string(sy_gamma).c_str());
    netsynth_controller* ctrl = nullptr;
    const int rc = netsynth_synthesize(p, cfg, &ctrl);
    if (rc != NETSYNTH_OK) {
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    } else {
      netsynth_controller_save(ctrl, sy_out.c_str());
      if (!sy_trace.empty()) netsynth_controller_trace_csv(ctrl, sy_trace.c_str());
      write_manifest(sy_out, sy_p, sy_c, "synth",
                     "penalty " + sy_penalty + "\ngamma " + std::to_string(sy_gamma));
      std::printf("nu %.6f\nnonzero_blocks %d\nwrote %s\n",
                  netsynth_controller_nu(ctrl), netsynth_controller_nonzero_blocks(ctrl),
                  sy_out.c_str());
      netsynth_controller_free(ctrl);
    }
    netsynth_config_free(cfg);
    netsynth_problem_free(p);
    return rc;
  }

  if (cmd_sweep->parsed()) {
    netsynth_problem* p = open_problem(sw_p);
    netsynth_config* cfg = open_config(sw_c);
    netsynth_config_set(cfg, "penalty", sw_penalty.c_str());
    std::vector<double> gammas;
    for (int k = 0; k < sw_points; ++k)
      gammas.push_back(sw_points == 1
                           ? sw_lo
                           : sw_lo * std::pow(sw_hi / sw_lo,
                                              static_cast<double>(k) / (sw_points - 1)));
    const int rc = netsynth_sweep(p, cfg, gammas.data(), static_cast<int>(gammas.size()),
                                  sw_out.c_str(), sw_plot.empty() ? nullptr : sw_plot.c_str());
    if (rc != NETSYNTH_OK)
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    else {
      write_manifest(sw_out, sw_p, sw_c, "sweep",
                     "penalty " + sw_penalty + "\npoints " + std::to_string(sw_points));
      std::printf("wrote %s\n", sw_out.c_str());
    }
    netsynth_config_free(cfg);
    netsynth_problem_free(p);
    return rc;
  }

  if (cmd_mc->parsed()) {
    netsynth_problem* p = open_problem(mc_p);
    netsynth_controller* ctrl = nullptr;
    if (netsynth_controller_load(mc_ctrl.c_str(), &ctrl) != NETSYNTH_OK) {
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
      return NETSYNTH_ERR;
    }
    netsynth_controller* base = nullptr;
    if (!mc_baseline.empty() &&
        netsynth_controller_load(mc_baseline.c_str(), &base) != NETSYNTH_OK) {
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
      return NETSYNTH_ERR;
    }
    const int rc =
        netsynth_robustness(p, ctrl, base, mc_trials, mc_seed, mc_out.c_str());
    if (rc != NETSYNTH_OK)
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    else
      std::printf("wrote %s\n", mc_out.c_str());
    netsynth_controller_free(ctrl);
    netsynth_controller_free(base);
    netsynth_problem_free(p);
    return rc;
  }

  if (cmd_base->parsed()) {
    netsynth_problem* p = open_problem(ba_p);
    netsynth_config* cfg = open_config(ba_c);
    netsynth_controller* ctrl = nullptr;
    const int rc = netsynth_baseline(p, cfg, &ctrl);
    if (rc != NETSYNTH_OK) {
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    } else {
      netsynth_controller_save(ctrl, ba_out.c_str());
      write_manifest(ba_out, ba_p, ba_c, "baseline", "");
      std::printf("nu %.6f\nwrote %s\n", netsynth_controller_nu(ctrl), ba_out.c_str());
      netsynth_controller_free(ctrl);
    }
    netsynth_config_free(cfg);
    netsynth_problem_free(p);
    return rc;
  }

  if (cmd_an->parsed()) {
    netsynth_problem* p = open_problem(an_p);
    netsynth_controller* ctrl = nullptr;
    if (netsynth_controller_load(an_ctrl.c_str(), &ctrl) != NETSYNTH_OK) {
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
      return NETSYNTH_ERR;
    }
    char report[512];
    const int rc = netsynth_analyze(p, ctrl, report, sizeof(report));
    if (rc != NETSYNTH_OK)
      std::fprintf(stderr, "not certified: %s\n", netsynth_last_error());
    else
      std::printf("%s\n", report);
    netsynth_controller_free(ctrl);
    netsynth_problem_free(p);
    return rc;
  }

  if (cmd_sim->parsed()) {
    netsynth_problem* p = open_problem(si_p);
    netsynth_controller* ctrl = nullptr;
    if (!si_ctrl.empty() &&
        netsynth_controller_load(si_ctrl.c_str(), &ctrl) != NETSYNTH_OK) {
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
      return NETSYNTH_ERR;
    }
    const int rc =
        netsynth_simulate(p, ctrl, si_input.c_str(), si_dt, si_tf, si_out.c_str());
    if (rc != NETSYNTH_OK)
      std::fprintf(stderr, "error: %s\n", netsynth_last_error());
    else
      std::printf("wrote %s\n", si_out.c_str());
    netsynth_controller_free(ctrl);
    netsynth_problem_free(p);
    return rc;
  }

  return 0;
}
