#include "netsynth/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace netsynth::bench {

using plant::NetworkProblem;
using plant::StateSpace;

ExperimentSpec::ExperimentSpec() {
  a_unstable = (Mat(2, 2) << 1, 1, 1, 2).finished();
  a_stable = (Mat(2, 2) << -2, 1, 1, -3).finished();
}

NetworkProblem build_paper_example(const ExperimentSpec& spec) {
  require(spec.n_agents >= 1, "build_paper_example: need at least one agent");
  require(spec.uncertainty >= 0.0 && spec.uncertainty < 1.0,
          "build_paper_example: uncertainty fraction in [0,1)");
  Mat b = (Mat(2, 1) << 0, 1).finished();
  Mat c = (Mat(1, 2) << 1, 1).finished();

  NetworkProblem problem;
  for (int i = 0; i < spec.n_agents; ++i) {
    const Mat a = i < spec.n_unstable ? spec.a_unstable : spec.a_stable;
    StateSpace nominal(a, b, c, Mat::Zero(1, 1));
    if (spec.uncertainty > 0.0) {
      problem.agents.emplace_back(nominal, plant::box_vertices(a, spec.uncertainty));
    } else {
      problem.agents.emplace_back(nominal, std::vector<Mat>{a});
    }
  }

  const int n = spec.n_agents;
  Mat h = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double e = spec.signed_coupling ? -spec.alpha * static_cast<double>(i - j)
                                            : -spec.alpha * std::abs(static_cast<double>(i - j));
      h(i, j) = std::exp(e);
    }
  problem.topology = plant::NetworkTopology(plant::BlockMat(
      h, numlin::BlockPartition(std::vector<int>(n, 1)),
      numlin::BlockPartition(std::vector<int>(n, 1))));
  return problem;
}

std::vector<double> log_spaced(double lo, double hi, int points) {
  require(lo > 0 && hi > lo && points >= 1, "log_spaced: bad range");
  std::vector<double> out;
  if (points == 1) return {lo};
  for (int k = 0; k < points; ++k)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1)));
  return out;
}

SweepResult sweep(const NetworkProblem& problem, const pipeline::SynthesisConfig& cfg,
                  const std::vector<double>& gammas,
                  std::vector<pipeline::SynthesisResult>* results) {
  SweepResult out;

  // the initialization and the centralized descent are gamma-independent
  auto init = pipeline::init_local(problem, cfg);
  if (!init.ok) {
    for (double gamma : gammas) {
      SweepRow row;
      row.gamma = gamma;
      row.status = "initialization failed: " + init.message;
      out.rows.push_back(row);
    }
    return out;
  }
  ico::IcoOptions dense_opts;
  dense_opts.epsilon = cfg.eps;
  dense_opts.max_iters = cfg.ico_max_iters;
  dense_opts.margins = cfg.margins;
  dense_opts.solver = cfg.solver;
  dense_opts.verbose = cfg.verbose;
  auto dense_res = ico::ico_iterate(
      problem, init.point, ico::SparsityPattern::dense(problem.n_agents()), dense_opts);
  out.nu_decentralized = init.point.nu;
  out.nu_centralized = dense_res.point.nu;

  for (double gamma : gammas) {
    pipeline::SynthesisConfig local = cfg;
    local.gamma = gamma;
    auto res = pipeline::run_from_central(problem, local, dense_res.point, init.point.nu);
    SweepRow row;
    row.gamma = gamma;
    if (res.ok) {
      row.nonzero_blocks = res.nonzero_blocks;
      row.nu = res.nu_final;
      row.admm_iterations = res.admm_iterations;
      row.r_primal = res.r_primal;
      row.r_dual = res.r_dual;
      row.status = "ok";
    } else {
      row.status = res.message.empty() ? "failed" : res.message;
    }
    out.rows.push_back(row);
    if (results) results->push_back(std::move(res));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     return a.nonzero_blocks < b.nonzero_blocks;
                   });
  return out;
}

void write_sweep_csv(const SweepResult& res, const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "write_sweep_csv: cannot open " + path);
  f << "# netsynth sweep csv v1: gamma,nonzero_blocks,nu,admm_iterations,r_primal,"
       "r_dual,status\n";
  char buf[256];
  for (const auto& r : res.rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%d,%.12g,%d,%.6g,%.6g,%s\n", r.gamma,
                  r.nonzero_blocks, r.nu, r.admm_iterations, r.r_primal, r.r_dual,
                  r.status.c_str());
    f << buf;
  }
}

void write_plot_data(const SweepResult& res, const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "write_plot_data: cannot open " + path);
  f << "# nonzero_blocks nu (tradeoff frontier)\n";
  for (const auto& r : res.rows)
    if (r.status == "ok") f << r.nonzero_blocks << " " << r.nu << "\n";
  f << "\n# reference lines: decentralized, centralized\n";
  f << "# " << res.nu_decentralized << " " << res.nu_centralized << "\n";
}

McResult robustness_mc(const NetworkProblem& problem, const plant::ControllerNetwork& ctrl,
                       int trials, std::uint64_t seed) {
  require(trials >= 1, "robustness_mc: trials must be positive");
  McResult out;
  out.best = std::numeric_limits<double>::infinity();
  out.worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<StateSpace> sampled;
    for (std::size_t i = 0; i < problem.agents.size(); ++i) {
      // one deterministic stream per (seed, trial, agent)
      const std::uint64_t s =
          seed * 0x9e3779b97f4a7c15ULL + 0x100000001b3ULL * (t + 1) + 1315423911ULL * i;
      sampled.push_back(plant::sample_uncertain(problem.agents[i], s));
    }
    auto cl = plant::closed_loop(sampled, problem.topology.h.m, ctrl.local, ctrl.hy,
                                 ctrl.hyhat);
    McRow row;
    row.trial = t;
    row.hurwitz = numlin::is_hurwitz(cl.A);
    row.hinf = row.hurwitz ? numlin::hinf_norm(cl.A, cl.B, cl.C, cl.D, 1e-6)
                           : std::numeric_limits<double>::infinity();
    if (row.hurwitz) {
      out.best = std::min(out.best, row.hinf);
      out.worst = std::max(out.worst, row.hinf);
    } else {
      ++out.unstable_count;
    }
    out.rows.push_back(row);
  }
  if (!std::isfinite(out.best)) out.best = 0.0;
  return out;
}

void write_mc_csv(const McResult& synthesized, const McResult* baseline,
                  const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "write_mc_csv: cannot open " + path);
  f << "# netsynth robustness csv v1: trial,hurwitz,hinf"
    << (baseline ? ",baseline_hurwitz,baseline_hinf" : "") << "\n";
  char buf[256];
  for (std::size_t k = 0; k < synthesized.rows.size(); ++k) {
    const auto& r = synthesized.rows[k];
    const double h = std::isfinite(r.hinf) ? r.hinf : -1.0;
    if (baseline && k < baseline->rows.size()) {
      const auto& b = baseline->rows[k];
      const double hb = std::isfinite(b.hinf) ? b.hinf : -1.0;
      std::snprintf(buf, sizeof(buf), "%d,%d,%.12g,%d,%.12g\n", r.trial,
                    r.hurwitz ? 1 : 0, h, b.hurwitz ? 1 : 0, hb);
    } else {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.12g\n", r.trial, r.hurwitz ? 1 : 0, h);
    }
    f << buf;
  }
  std::snprintf(buf, sizeof(buf), "# summary best,worst,unstable: %.12g,%.12g,%d\n",
                synthesized.best, synthesized.worst, synthesized.unstable_count);
  f << buf;
  if (baseline) {
    std::snprintf(buf, sizeof(buf), "# baseline best,worst,unstable: %.12g,%.12g,%d\n",
                  baseline->best, baseline->worst, baseline->unstable_count);
    f << buf;
  }
}

}  // namespace netsynth::bench
