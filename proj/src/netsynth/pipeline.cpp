#include "netsynth/pipeline.hpp"

#include <cmath>
#include <cstdio>

#include "netsynth/hinf.hpp"

namespace netsynth::pipeline {

using conic::LmiExpr;
using conic::VarRef;
using diss::QsrTriple;
using plant::StateSpace;

StateSpace local_controller(const StateSpace& agent, double state_weight,
                            double input_weight, double scale, double feedforward) {
  const int n = agent.n(), m = agent.m(), l = agent.l();
  Mat qn = state_weight * Mat::Identity(n, n);
  Mat rn = input_weight * Mat::Identity(m, m);
  Mat xc = numlin::care_solve(agent.A, agent.B, qn, rn).mat();
  Mat kc = rn.inverse() * agent.B.transpose() * xc;
  Mat xf = numlin::care_solve(Mat(agent.A.transpose()), Mat(agent.C.transpose()),
                              Mat::Identity(n, n), Mat::Identity(l, l))
               .mat();
  Mat kf = xf * agent.C.transpose();
  Mat ahat = agent.A - agent.B * kc - kf * agent.C;
  Mat chat = scale * (-kc);
  Mat dhat = feedforward * Mat::Identity(m, l);
  return StateSpace(std::move(ahat), std::move(kf), std::move(chat), std::move(dhat));
}

std::optional<FeasiblePoint> certify_fixed(const plant::NetworkProblem& problem,
                                           const std::vector<StateSpace>& controllers,
                                           const Mat& hy, const Mat& hyhat,
                                           const SynthesisConfig& cfg,
                                           std::string* fail_reason) {
  const int N = problem.n_agents();
  std::vector<StateSpace> nominal;
  for (const auto& a : problem.agents) nominal.push_back(a.nominal);

  auto cl = plant::closed_loop(nominal, problem.topology.h.m, controllers, hy, hyhat);
  if (!numlin::is_hurwitz(cl.A)) {
    if (fail_reason) *fail_reason = "closed loop not Hurwitz";
    return std::nullopt;
  }

  conic::ConicProblem prob;
  VarRef yv = prob.add_symmetric_var(cl.n(), "Y");
  VarRef nuv = prob.add_scalar_var("nu");
  prob.add_negdef(hinf::bounded_real_expr(cl, yv, nuv),
                  cfg.margins.strict * (1.0 + cl.A.norm()), "bounded_real");
  LmiExpr ypos = conic::affine(Mat::Zero(cl.n(), cl.n()));
  ypos.add_he_term(yv, Mat(0.5 * Mat::Identity(cl.n(), cl.n())),
                   Mat::Identity(cl.n(), cl.n()));
  prob.add_posdef(ypos, cfg.margins.strict, "y_pos");

  std::vector<VarRef> pa, qa, sa, ra, pc, qc, sc, rc;
  std::vector<diss::MatOrVar> qblocks, sblocks, rblocks;
  std::vector<int> out_dims, in_dims;
  for (int i = 0; i < N; ++i) {
    const auto& agent = problem.agents[i];
    const int n = agent.nominal.n(), m = agent.nominal.m(), l = agent.nominal.l();
    pa.push_back(prob.add_symmetric_var(n, "Pa" + std::to_string(i)));
    qa.push_back(prob.add_symmetric_var(l, "Qa" + std::to_string(i)));
    sa.push_back(prob.add_matrix_var(l, m, "Sa" + std::to_string(i)));
    ra.push_back(prob.add_symmetric_var(m, "Ra" + std::to_string(i)));
    int v = 0;
    for (auto& e : diss::certify_polytopic(agent, pa[i], qa[i], sa[i], ra[i]))
      prob.add_negdef(std::move(e), cfg.margins.semidef,
                      "kyp_a" + std::to_string(i) + "v" + std::to_string(v++));
    LmiExpr pp = conic::affine(Mat::Zero(n, n));
    pp.add_he_term(pa[i], Mat(0.5 * Mat::Identity(n, n)), Mat::Identity(n, n));
    prob.add_posdef(pp, cfg.margins.strict, "pa_pos" + std::to_string(i));
  }
  for (int i = 0; i < N; ++i) {
    const auto& c = controllers[i];
    const int nh = c.n(), mo = c.l(), li = c.m();
    pc.push_back(prob.add_symmetric_var(nh, "Pc" + std::to_string(i)));
    qc.push_back(prob.add_symmetric_var(mo, "Qc" + std::to_string(i)));
    sc.push_back(prob.add_matrix_var(mo, li, "Sc" + std::to_string(i)));
    rc.push_back(prob.add_symmetric_var(li, "Rc" + std::to_string(i)));
    prob.add_negdef(diss::controller_diss_expr(plant::bank_matrix({c}), nh, pc[i], qc[i],
                                               sc[i], rc[i]),
                    cfg.margins.semidef, "ctrl_diss" + std::to_string(i));
    LmiExpr pp = conic::affine(Mat::Zero(nh, nh));
    pp.add_he_term(pc[i], Mat(0.5 * Mat::Identity(nh, nh)), Mat::Identity(nh, nh));
    prob.add_posdef(pp, cfg.margins.strict, "pc_pos" + std::to_string(i));
  }
  for (int i = 0; i < N; ++i) {
    qblocks.emplace_back(qa[i]);
    sblocks.emplace_back(sa[i]);
    rblocks.emplace_back(ra[i]);
    out_dims.push_back(problem.agents[i].nominal.l());
    in_dims.push_back(problem.agents[i].nominal.m());
  }
  for (int i = 0; i < N; ++i) {
    qblocks.emplace_back(qc[i]);
    sblocks.emplace_back(sc[i]);
    rblocks.emplace_back(rc[i]);
    out_dims.push_back(controllers[i].l());
    in_dims.push_back(controllers[i].m());
  }
  const int m_tot = static_cast<int>(problem.topology.h.m.rows());
  const int l_tot = static_cast<int>(problem.topology.h.m.cols());
  Mat hbar = Mat::Zero(m_tot + l_tot, l_tot + m_tot);
  hbar.topLeftCorner(m_tot, l_tot) = problem.topology.h.m;
  hbar.topRightCorner(m_tot, m_tot) = hyhat;
  hbar.bottomLeftCorner(l_tot, l_tot) = hy;
  prob.add_negdef(diss::ndt_expr(qblocks, sblocks, rblocks, hbar, out_dims, in_dims),
                  cfg.margins.strict * (1.0 + hbar.norm()), "network_stability");

  prob.add_objective(nuv, 1.0);
  conic::SolveOptions sopts = cfg.solver;
  if (!cfg.dump_dir.empty()) sopts.dump_path = cfg.dump_dir + "/certify_fixed.dat-s";
  auto sol = prob.solve(sopts);
  if (!sol.ok()) {
    if (fail_reason) *fail_reason = "certification solve: " + sol.message;
    return std::nullopt;
  }
  {
    // recentering pass: freeze nu just above its optimum and push every
    // family uniformly into the interior; keeps the certificate well
    // conditioned for the descent stages
    const double nu_fixed = sol.values.at(nuv.id)(0, 0) * (1.0 + 1e-5) + 1e-9;
    conic::ConicProblem prob2;
    VarRef y2 = prob2.add_symmetric_var(cl.n(), "Y");
    VarRef nu2 = prob2.add_scalar_var("nu");
    VarRef t2 = prob2.add_scalar_var("t");
    prob2.add_equality({{nu2, Mat::Ones(1, 1)}}, nu_fixed);
    auto slacken = [&](LmiExpr e, double extra, const std::string& name) {
      const int dim6 = e.dim();
      e.add_scaled_identity_term(t2, Mat(0.5 * Mat::Identity(dim6, dim6)),
                                 Mat::Identity(dim6, dim6));
      prob2.add_negdef(std::move(e), extra, name);
    };
    slacken(hinf::bounded_real_expr(cl, y2, nu2), 0.0, "bounded_real");
    LmiExpr ypos2 = conic::affine(Mat::Zero(cl.n(), cl.n()));
    ypos2.add_he_term(y2, Mat(0.5 * Mat::Identity(cl.n(), cl.n())),
                      Mat::Identity(cl.n(), cl.n()));
    slacken(ypos2.scaled(-1.0), 0.0, "y_pos");
    std::vector<VarRef> pa2, qa2, sa2, ra2, pc2, qc2, sc2, rc2;
    std::vector<diss::MatOrVar> qb2, sb2, rb2;
    for (int i = 0; i < N; ++i) {
      const auto& agent = problem.agents[i];
      const int n = agent.nominal.n(), m = agent.nominal.m(), l = agent.nominal.l();
      pa2.push_back(prob2.add_symmetric_var(n, "Pa"));
      qa2.push_back(prob2.add_symmetric_var(l, "Qa"));
      sa2.push_back(prob2.add_matrix_var(l, m, "Sa"));
      ra2.push_back(prob2.add_symmetric_var(m, "Ra"));
      for (auto& e : diss::certify_polytopic(agent, pa2[i], qa2[i], sa2[i], ra2[i]))
        slacken(std::move(e), 0.0, "kyp");
      LmiExpr pp = conic::affine(Mat::Zero(n, n));
      pp.add_he_term(pa2[i], Mat(0.5 * Mat::Identity(n, n)), Mat::Identity(n, n));
      slacken(pp.scaled(-1.0), 0.0, "pa_pos");
    }
    for (int i = 0; i < N; ++i) {
      const auto& c = controllers[i];
      const int nh = c.n(), mo = c.l(), li = c.m();
      pc2.push_back(prob2.add_symmetric_var(std::max(nh, 1), "Pc"));
      qc2.push_back(prob2.add_symmetric_var(mo, "Qc"));
      sc2.push_back(prob2.add_matrix_var(mo, li, "Sc"));
      rc2.push_back(prob2.add_symmetric_var(li, "Rc"));
      slacken(diss::controller_diss_expr(plant::bank_matrix({c}), nh, pc2[i], qc2[i],
                                         sc2[i], rc2[i]),
              0.0, "ctrl_diss");
      LmiExpr pp = conic::affine(Mat::Zero(std::max(nh, 1), std::max(nh, 1)));
      pp.add_he_term(pc2[i], Mat(0.5 * Mat::Identity(std::max(nh, 1), std::max(nh, 1))),
                     Mat::Identity(std::max(nh, 1), std::max(nh, 1)));
      slacken(pp.scaled(-1.0), 0.0, "pc_pos");
    }
    for (int i = 0; i < N; ++i) {
      qb2.emplace_back(qa2[i]);
      sb2.emplace_back(sa2[i]);
      rb2.emplace_back(ra2[i]);
    }
    for (int i = 0; i < N; ++i) {
      qb2.emplace_back(qc2[i]);
      sb2.emplace_back(sc2[i]);
      rb2.emplace_back(rc2[i]);
    }
    slacken(diss::ndt_expr(qb2, sb2, rb2, hbar, out_dims, in_dims), 0.0,
            "network_stability");
    // certificate magnitudes stay bounded so the margin cannot be inflated
    // by scaling everything up
    auto bound_norm = [&](const VarRef& v, double cap) {
      LmiExpr up = conic::affine(Mat(-cap * Mat::Identity(v.rows, v.rows)));
      up.add_he_term(v, Mat(0.5 * Mat::Identity(v.rows, v.rows)),
                     Mat::Identity(v.rows, v.rows));
      prob2.add_negdef(std::move(up), 0.0, "cap");
    };
    const double y_cap = 10.0 * (1.0 + sol.values.at(yv.id).norm());
    bound_norm(y2, y_cap);
    for (int i = 0; i < N; ++i) {
      bound_norm(qa2[i], 1e3);
      bound_norm(ra2[i], 1e3);
      bound_norm(pa2[i], 1e4);
      bound_norm(qc2[i], 1e3);
      bound_norm(rc2[i], 1e3);
      bound_norm(pc2[i], 1e4);
    }
    // t bounded above
    LmiExpr tcap = conic::affine(Mat(-1e3 * Mat::Ones(1, 1)));
    tcap.add_he_term(t2, Mat(0.5 * Mat::Ones(1, 1)), Mat::Ones(1, 1));
    prob2.add_negdef(std::move(tcap), 0.0, "t_cap");
    prob2.add_objective(t2, -1.0);
    prob2.set_initial(nu2, Mat::Constant(1, 1, nu_fixed));
    auto sol2 = prob2.solve(sopts);
    if (sol2.ok() && sol2.values.at(t2.id)(0, 0) > 0.0) {
      sol.values[yv.id] = sol2.values.at(y2.id);
      sol.values[nuv.id] = Mat::Constant(1, 1, nu_fixed);
      for (int i = 0; i < N; ++i) {
        sol.values[pa[i].id] = sol2.values.at(pa2[i].id);
        sol.values[qa[i].id] = sol2.values.at(qa2[i].id);
        sol.values[sa[i].id] = sol2.values.at(sa2[i].id);
        sol.values[ra[i].id] = sol2.values.at(ra2[i].id);
        sol.values[pc[i].id] = sol2.values.at(pc2[i].id);
        sol.values[qc[i].id] = sol2.values.at(qc2[i].id);
        sol.values[sc[i].id] = sol2.values.at(sc2[i].id);
        sol.values[rc[i].id] = sol2.values.at(rc2[i].id);
      }
    }
  }

  FeasiblePoint fp;
  fp.controllers = controllers;
  fp.hy = hy;
  fp.hyhat = hyhat;
  fp.y = sol.values.at(yv.id);
  fp.nu = sol.values.at(nuv.id)(0, 0);
  for (int i = 0; i < N; ++i) {
    fp.p_agent.push_back(sol.values.at(pa[i].id));
    fp.agent_triples.emplace_back(sol.values.at(qa[i].id), sol.values.at(sa[i].id),
                                  sol.values.at(ra[i].id));
    fp.p_ctrl.push_back(sol.values.at(pc[i].id));
    fp.ctrl_triples.emplace_back(sol.values.at(qc[i].id), sol.values.at(sc[i].id),
                                 sol.values.at(rc[i].id));
  }
  auto check = ico::verify_point(problem, fp, 1e-9);
  if (!check.ok) {
    if (fail_reason) *fail_reason = "certificate verification failed: " + check.detail;
    return std::nullopt;
  }
  return fp;
}

InitResult init_local(const plant::NetworkProblem& problem, const SynthesisConfig& cfg) {
  InitResult res;
  const int N = problem.n_agents();
  int l_tot = 0, m_tot = 0;
  for (const auto& a : problem.agents) {
    l_tot += a.nominal.l();
    m_tot += a.nominal.m();
  }
  const Mat hy = Mat::Identity(l_tot, l_tot);
  const Mat hyhat = Mat::Identity(m_tot, m_tot);

  // stable networks may certify with inert controllers outright
  {
    std::vector<StateSpace> inert;
    for (const auto& a : problem.agents)
      inert.emplace_back(Mat(-Mat::Identity(1, 1)), Mat::Zero(1, a.nominal.l()),
                         Mat::Zero(a.nominal.m(), 1), Mat::Zero(a.nominal.m(), a.nominal.l()));
    std::string why;
    if (auto fp = certify_fixed(problem, inert, hy, hyhat, cfg, &why)) {
      res.ok = true;
      res.point = *fp;
      res.escalations = 0;
      res.feedforward_used = 0.0;
      res.message = "feasible with inert controllers";
      return res;
    }
  }

  double ff = cfg.feedforward;
  std::string last_fail = "no attempts";
  for (int attempt = 0; attempt <= cfg.escalation_steps; ++attempt) {
    std::vector<StateSpace> controllers;
    bool lqg_ok = true;
    for (const auto& a : problem.agents) {
      try {
        controllers.push_back(local_controller(a.nominal, cfg.lqg_state_weight,
                                               cfg.lqg_input_weight, cfg.ctrl_scale, ff));
      } catch (const std::invalid_argument& e) {
        lqg_ok = false;
        last_fail = std::string("local design failed: ") + e.what();
        break;
      }
    }
    if (lqg_ok) {
      std::string why;
      auto fp = certify_fixed(problem, controllers, hy, hyhat, cfg, &why);
      if (fp) {
        res.ok = true;
        res.point = *fp;
        res.escalations = attempt;
        res.feedforward_used = ff;
        res.message = "feasible at feedforward " + std::to_string(ff);
        return res;
      }
      last_fail = why;
      if (cfg.verbose)
        std::fprintf(stderr, "init attempt ff=%.1f failed: %s\n", ff, why.c_str());
    }
    ff *= 2.0;
  }
  res.ok = false;
  res.message = "no feasible initialization after " +
                std::to_string(cfg.escalation_steps + 1) + " attempts (" + last_fail + ")";
  return res;
}

namespace {

ico::IcoOptions ico_options(const SynthesisConfig& cfg) {
  ico::IcoOptions o;
  o.epsilon = cfg.eps;
  o.max_iters = cfg.ico_max_iters;
  o.margins = cfg.margins;
  o.solver = cfg.solver;
  o.verbose = cfg.verbose;
  return o;
}

FeasiblePoint project_to_pattern(const plant::NetworkProblem& problem,
                                 const FeasiblePoint& fp, const SparsityPattern& pattern) {
  const auto grid = sparsity::BlockGrid::of(problem);
  FeasiblePoint out = fp;
  for (int i = 0; i < grid.agents(); ++i)
    for (int j = 0; j < grid.agents(); ++j) {
      if (!pattern.hy(i, j))
        grid.set_hy_block(out.hy, i, j, Mat::Zero(grid.l_i[i], grid.l_i[j]));
      if (!pattern.hyhat(i, j))
        grid.set_hyhat_block(out.hyhat, i, j, Mat::Zero(grid.m_i[i], grid.m_i[j]));
    }
  return out;
}

}  // namespace

FeasiblePoint centralize(const plant::NetworkProblem& problem, const FeasiblePoint& point,
                         const SynthesisConfig& cfg, std::string* message) {
  conic::ConicProblem prob;
  auto dense = SparsityPattern::dense(problem.n_agents());
  auto vars = ico::compose_constraints(prob, problem, point, dense, cfg.margins);
  prob.add_objective(vars.nu, 1.0);
  for (const auto& dk : vars.d_bank)
    prob.add_quadratic_objective(dk, 2e-6, Mat::Zero(dk.rows, dk.cols));
  conic::SolveOptions sopts = cfg.solver;
  if (!cfg.dump_dir.empty()) sopts.dump_path = cfg.dump_dir + "/centralize.dat-s";
  auto sol = prob.solve(sopts);
  if (!sol.ok()) {
    if (message) *message = "centralize solve failed: " + sol.message;
    return point;
  }
  FeasiblePoint next = ico::apply_solution(point, vars, sol.values);
  auto check = ico::verify_point(problem, next, 1e-9);
  if (!check.ok || next.nu > point.nu + 1e-9) {
    if (message) *message = "centralize rejected: " + check.detail;
    return point;
  }
  if (message) *message = "ok";
  return next;
}

SynthesisResult run(const plant::NetworkProblem& problem, const SynthesisConfig& cfg) {
  auto init = init_local(problem, cfg);
  if (!init.ok) {
    SynthesisResult res;
    res.message = "initialization failed: " + init.message;
    return res;
  }

  // dense descent toward the centralized optimum
  auto dense_res =
      ico::ico_iterate(problem, init.point, SparsityPattern::dense(problem.n_agents()),
                       ico_options(cfg));
  SynthesisResult res = run_from_central(problem, cfg, dense_res.point, init.point.nu);
  res.dense_trace = dense_res.trace;
  return res;
}

SynthesisResult run_from_central(const plant::NetworkProblem& problem,
                                 const SynthesisConfig& cfg, const FeasiblePoint& central,
                                 double nu_init) {
  SynthesisResult res;
  res.nu_init = nu_init;
  res.nu_centralized = central.nu;

  // sparsity promotion
  sparsity::SparsityOptions sopts;
  sopts.gamma = cfg.gamma;
  sopts.rho = cfg.rho;
  sopts.eps_p = cfg.eps_p;
  sopts.eps_d = cfg.eps_d;
  sopts.eps_l = cfg.eps_l;
  sopts.max_iters = cfg.admm_max_iters;
  sopts.l1_reweight_iters = cfg.l1_reweight_iters;
  sopts.margins = cfg.margins;
  sopts.solver = cfg.solver;
  sopts.verbose = cfg.verbose;

  sparsity::SparsityResult sres;
  if (cfg.penalty == Penalty::WeightedL1) {
    sres = sparsity::l1_run(problem, central, sopts);
  } else {
    sres = sparsity::admm_run(problem, central, sopts);
  }
  res.admm_iterations = sres.iterations;
  res.r_primal = sres.r_primal;
  res.r_dual = sres.r_dual;
  res.pattern = sres.pattern;
  if (!sres.clean && cfg.verbose)
    std::fprintf(stderr, "sparsity stage degraded: %s\n", sres.message.c_str());

  // keep the support of the achieved routing; never drop the certificate
  FeasiblePoint projected = project_to_pattern(problem, sres.point, sres.pattern);
  std::string recert_fail;
  auto recert = certify_fixed(problem, projected.controllers, projected.hy,
                              projected.hyhat, cfg, &recert_fail);

  FeasiblePoint staged;
  if (recert) {
    staged = *recert;
    res.nu_after_sparsity = staged.nu;
  } else {
    // projection broke feasibility; fall back to the centralized support
    res.message = "projection re-certification failed (" + recert_fail +
                  "); falling back to the unprojected support";
    staged = sres.clean ? sres.point : central;
    auto chk = ico::verify_point(problem, staged, 1e-9);
    if (!chk.ok) staged = central;
    res.pattern = sparsity::pattern_from(sparsity::BlockGrid::of(problem), staged.hy,
                                         staged.hyhat, 1e-12);
    res.nu_after_sparsity = staged.nu;
  }

  // structured descent on the fixed support
  auto final_res = ico::ico_iterate(problem, staged, res.pattern, ico_options(cfg));
  res.trace = final_res.trace;
  res.point = final_res.point;
  res.nu_final = res.point.nu;
  res.nonzero_blocks = res.pattern.nonzero_blocks();
  res.ok = final_res.converged || !final_res.trace.empty() ||
           ico::verify_point(problem, res.point, 1e-9).ok;
  if (res.message.empty()) res.message = final_res.message;
  return res;
}

BaselineResult nominal_hinf_baseline(const plant::NetworkProblem& problem,
                                     const SynthesisConfig& cfg) {
  BaselineResult out;
  auto init = init_local(problem, cfg);
  if (!init.ok) {
    out.message = "initialization failed: " + init.message;
    return out;
  }
  ico::IcoOptions o = ico_options(cfg);
  o.with_dissipativity = false;
  auto res = ico::ico_iterate(problem, init.point,
                              SparsityPattern::dense(problem.n_agents()), o);
  out.ok = true;
  out.controllers = res.point.controllers;
  out.hy = res.point.hy;
  out.hyhat = res.point.hyhat;
  out.nu = res.point.nu;
  out.message = res.message;
  return out;
}

}  // namespace netsynth::pipeline
