// Interior-point backend for ConicProblem: primal-dual path following with
// the HKM direction on the inequality ("dual") form
//
//   min  c'x + (1/2) x'P x   s.t.   S_b(x) = C_b - A_b(x) >= 0,  E x = f,
//
// where A_b(x) collects the structured L*V*R + (L*V*R)' terms of each LMI
// block. Schur-complement entries are assembled from small per-term-pair
// products instead of per-entry coefficient matrices, which keeps matrix
// variables with thousands of scalar entries tractable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "netsynth/conic.hpp"

namespace netsynth::conic {

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct VarLayout {
  int var = -1;
  int offset = 0;
  int rows = 0, cols = 0;
  bool symmetric = false;
  std::vector<std::pair<int, int>> entries;  // (i,j); i<=j for symmetric
};

struct BlockTerm {
  int layout = -1;  // index into layouts (-1: the phase-1 slack scalar)
  Mat left;         // n_b x p
  Mat right;        // q x n_b
  int inflate = 1;

  // support windows: rows [rlo, rlo+lc.rows()) of `left` and columns
  // [clo, clo+rc.cols()) of `right` hold all nonzeros
  Mat lc, rc;
  int rlo = 0, clo = 0;

  void compute_windows() {
    int rhi = -1, r0 = static_cast<int>(left.rows());
    for (int i = 0; i < left.rows(); ++i)
      if (left.row(i).cwiseAbs().maxCoeff() > 0.0) {
        r0 = std::min(r0, i);
        rhi = std::max(rhi, i);
      }
    if (rhi < 0) { r0 = 0; rhi = -1; }
    rlo = r0;
    lc = left.middleRows(rlo, rhi - r0 + 1 < 0 ? 0 : rhi - r0 + 1);
    int chi = -1, c0 = static_cast<int>(right.cols());
    for (int j = 0; j < right.cols(); ++j)
      if (right.col(j).cwiseAbs().maxCoeff() > 0.0) {
        c0 = std::min(c0, j);
        chi = std::max(chi, j);
      }
    if (chi < 0) { c0 = 0; chi = -1; }
    clo = c0;
    rc = right.middleCols(clo, chi - c0 + 1 < 0 ? 0 : chi - c0 + 1);
  }
};

struct Block {
  int dim = 0;
  Mat c;  // S(x) = c - A(x)
  std::vector<BlockTerm> terms;
};

class Assembler {
 public:
  std::vector<VarLayout> layouts;
  std::vector<Block> blocks;
  int nvar = 0;

  Vec lin;          // c
  Vec quad_diag;    // P diagonal
  double obj_const = 0.0;

  Mat eq_mat;  // E (possibly 0 rows)
  Vec eq_rhs;

  // phase-1 slack: variable index nvar-1 when active
  bool phase1 = false;

  Mat assemble_var(const VarLayout& lay, const Vec& x) const {
    Mat v = Mat::Zero(lay.rows, lay.cols);
    for (std::size_t e = 0; e < lay.entries.size(); ++e) {
      const auto [i, j] = lay.entries[e];
      const double val = x(lay.offset + e);
      v(i, j) = val;
      if (lay.symmetric) v(j, i) = val;
    }
    return v;
  }

  Mat block_matrix(const Block& b, const Vec& x) const {
    Mat s = b.c;
    for (const auto& t : b.terms) {
      if (t.lc.rows() == 0 || t.rc.cols() == 0) continue;
      Mat contrib;  // small: lc.rows() x rc.cols()
      if (t.layout < 0) {
        contrib = x(nvar - 1) * t.lc * t.rc;
      } else {
        const auto& lay = layouts[t.layout];
        if (t.inflate > 1) {
          contrib = (x(lay.offset) * t.lc) * t.rc;
        } else {
          contrib = t.lc * assemble_var(lay, x) * t.rc;
        }
      }
      s.block(t.rlo, t.clo, contrib.rows(), contrib.cols()) -= contrib;
      s.block(t.clo, t.rlo, contrib.cols(), contrib.rows()) -= contrib.transpose();
    }
    return 0.5 * (s + s.transpose());
  }

  // adjoint: out_k += sum_b tr(A_kb Z_b)
  void add_adjoint(const Block& b, const Mat& z, Vec& out) const {
    for (const auto& t : b.terms) {
      if (t.lc.rows() == 0 || t.rc.cols() == 0) continue;
      const Mat w =
          t.rc * z.block(t.clo, t.rlo, t.rc.cols(), t.lc.rows()) * t.lc;  // q x p
      if (t.layout < 0) {
        out(nvar - 1) += 2.0 * w.trace();
        continue;
      }
      const auto& lay = layouts[t.layout];
      if (t.inflate > 1) {
        out(lay.offset) += 2.0 * w.trace();
        continue;
      }
      for (std::size_t e = 0; e < lay.entries.size(); ++e) {
        const auto [i, j] = lay.entries[e];
        double v = 2.0 * w(j, i);
        if (lay.symmetric && i != j) v += 2.0 * w(i, j);
        out(lay.offset + e) += v;
      }
    }
  }

  // Schur complement M_jk = sum_b tr(A_jb Sinv_b A_kb Z_b); symmetric since
  // all A, Sinv, Z are symmetric.
  void add_schur(const Block& b, const Mat& sinv, const Mat& z, Mat& m) const {
    const int nt = static_cast<int>(b.terms.size());
    for (int t1 = 0; t1 < nt; ++t1) {
      const auto& a = b.terms[t1];
      if (a.lc.rows() == 0 || a.rc.cols() == 0) continue;
      const int dl1 = static_cast<int>(a.lc.rows());
      const int dr1 = static_cast<int>(a.rc.cols());
      for (int t2 = 0; t2 < nt; ++t2) {
        const auto& c2 = b.terms[t2];
        if (c2.lc.rows() == 0 || c2.rc.cols() == 0) continue;
        const int dl2 = static_cast<int>(c2.lc.rows());
        const int dr2 = static_cast<int>(c2.rc.cols());
        // ordered pair (t1, t2); all products run over support windows
        const Mat ga = a.rc * sinv.block(a.clo, c2.rlo, dr1, dl2) * c2.lc;   // q1 x p2
        const Mat ha = a.rc * sinv.block(a.clo, c2.clo, dr1, dr2) *
                       c2.rc.transpose();                                    // q1 x q2
        const Mat ka = a.lc.transpose() * sinv.block(a.rlo, c2.rlo, dl1, dl2) *
                       c2.lc;                                                // p1 x p2
        const Mat na = a.lc.transpose() * sinv.block(a.rlo, c2.clo, dl1, dr2) *
                       c2.rc.transpose();                                    // p1 x q2
        const Mat gb = c2.rc * z.block(c2.clo, a.rlo, dr2, dl1) * a.lc;      // q2 x p1
        const Mat hb = c2.lc.transpose() * z.block(c2.rlo, a.rlo, dl2, dl1) *
                       a.lc;                                                 // p2 x p1
        const Mat kb = c2.rc * z.block(c2.clo, a.clo, dr2, dr1) *
                       a.rc.transpose();                                     // q2 x q1
        const Mat nb = c2.lc.transpose() * z.block(c2.rlo, a.clo, dl2, dr1) *
                       a.rc.transpose();                                     // p2 x q1

        const bool infl1 = (a.layout < 0) || a.inflate > 1;
        const bool infl2 = (c2.layout < 0) || c2.inflate > 1;
        const int off1 = a.layout < 0 ? nvar - 1 : layouts[a.layout].offset;
        const int off2 = c2.layout < 0 ? nvar - 1 : layouts[c2.layout].offset;

        // only upper-triangle cells (col >= row) are accumulated; the
        // mirrored ordered pair covers the transposed cell.
        if (infl1 && infl2) {
          if (off2 >= off1)
            m(off1, off2) += (ga * gb).trace() + (ha * hb).trace() +
                             (ka * kb).trace() + (na * nb).trace();
          continue;
        }
        if (infl1 && !infl2) {
          // sum over the inflated index of term1
          const Mat p1 = gb * ga;  // (d,c) : q2 x p2
          const Mat p2 = hb * ha;  // (c,d) : p2 x q2
          const Mat p3 = kb * ka;  // (d,c) : q2 x p2
          const Mat p4 = nb * na;  // (c,d) : p2 x q2
          const auto& l2 = layouts[c2.layout];
          for (std::size_t e2 = 0; e2 < l2.entries.size(); ++e2) {
            const int col = l2.offset + static_cast<int>(e2);
            if (col < off1) continue;
            const auto [cc, dd] = l2.entries[e2];
            double v = p1(dd, cc) + p2(cc, dd) + p3(dd, cc) + p4(cc, dd);
            if (l2.symmetric && cc != dd)
              v += p1(cc, dd) + p2(dd, cc) + p3(cc, dd) + p4(dd, cc);
            m(off1, col) += v;
          }
          continue;
        }
        if (!infl1 && infl2) {
          const Mat q1m = ga * gb;  // (b,a): q1 x p1
          const Mat q2m = ha * hb;  // (b,d)->(b,a)? : q1 x p1
          const Mat q3m = ka * kb;  // (a,b): p1 x q1
          const Mat q4m = na * nb;  // (a,b): p1 x q1
          const auto& l1 = layouts[a.layout];
          for (std::size_t e1 = 0; e1 < l1.entries.size(); ++e1) {
            const int row = l1.offset + static_cast<int>(e1);
            if (off2 < row) continue;
            const auto [aa, bb] = l1.entries[e1];
            double v = q1m(bb, aa) + q2m(bb, aa) + q3m(aa, bb) + q4m(aa, bb);
            if (l1.symmetric && aa != bb)
              v += q1m(aa, bb) + q2m(aa, bb) + q3m(bb, aa) + q4m(bb, aa);
            m(row, off2) += v;
          }
          continue;
        }

        const auto& l1 = layouts[a.layout];
        const auto& l2 = layouts[c2.layout];
        const int n1 = static_cast<int>(l1.entries.size());
        const int n2 = static_cast<int>(l2.entries.size());
        for (int e1 = 0; e1 < n1; ++e1) {
          const auto [a0, b0] = l1.entries[e1];
          const int row = l1.offset + e1;
          const int o1 = (l1.symmetric && a0 != b0) ? 2 : 1;
          for (int e2 = 0; e2 < n2; ++e2) {
            const int col = l2.offset + e2;
            if (col < row) continue;  // fill upper triangle; mirrored later
            const auto [c0, d0] = l2.entries[e2];
            const int o2 = (l2.symmetric && c0 != d0) ? 2 : 1;
            double v = 0.0;
            for (int k1 = 0; k1 < o1; ++k1) {
              const int aa = k1 ? b0 : a0;
              const int bb = k1 ? a0 : b0;
              for (int k2 = 0; k2 < o2; ++k2) {
                const int cc = k2 ? d0 : c0;
                const int dd = k2 ? c0 : d0;
                v += ga(bb, cc) * gb(dd, aa) + ha(bb, dd) * hb(cc, aa) +
                     ka(aa, cc) * kb(dd, bb) + na(aa, dd) * nb(cc, bb);
              }
            }
            m(row, col) += v;
          }
        }
      }
    }
  }
};

struct IpmResult {
  bool converged = false;
  bool numerical_failure = false;
  Vec x;
  double gap = 0.0;
  int iterations = 0;
  std::string message;
  Vec x_best_obj;        // iterate with the lowest objective seen
  double best_obj = std::numeric_limits<double>::infinity();
};

// Feasible-start HKM predictor-corrector. x0 must satisfy S_b(x0) > 0 and
// E x0 = f.
IpmResult run_ipm(const Assembler& pb, Vec x0, const SolveOptions& opts,
                  double stop_objective = -std::numeric_limits<double>::infinity()) {
  const int n = pb.nvar;
  const int neq = static_cast<int>(pb.eq_mat.rows());
  IpmResult res;
  res.x = x0;

  const int nb = static_cast<int>(pb.blocks.size());
  std::vector<Mat> s(nb), z(nb), sinv(nb);
  std::vector<Eigen::LLT<Mat>> s_llt(nb);
  int total_dim = 0;
  for (int b = 0; b < nb; ++b) total_dim += pb.blocks[b].dim;

  Vec x = x0;
  for (int b = 0; b < nb; ++b) {
    s[b] = pb.block_matrix(pb.blocks[b], x);
    Eigen::LLT<Mat> llt(s[b]);
    if (llt.info() != Eigen::Success) {
      res.message = "initial point not strictly feasible";
      res.numerical_failure = true;
      return res;
    }
    const int d = pb.blocks[b].dim;
    Mat zb = llt.solve(Mat::Identity(d, d));
    z[b] = 0.5 * (zb + zb.transpose());
  }
  // centered dual start S Z = mu0 I, with mu0 on the objective's scale
  const double mu0 =
      1.0 + std::abs(pb.lin.dot(x)) + pb.lin.cwiseAbs().maxCoeff();
  for (int b = 0; b < nb; ++b) z[b] *= mu0;
  Vec y = Vec::Zero(neq);

  const double cnorm = 1.0 + pb.lin.cwiseAbs().maxCoeff();

  auto max_step = [](const Mat& m, const Mat& dm) -> double {
    // sup alpha : m + alpha dm > 0
    Eigen::LLT<Mat> llt(m);
    Mat l = llt.matrixL();
    Mat w = l.triangularView<Eigen::Lower>().solve(dm);
    w = l.triangularView<Eigen::Lower>().solve(Mat(w.transpose()));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (w + w.transpose()),
                                          Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
  };

  double obj0 = 0.0;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_score = std::numeric_limits<double>::infinity();
  Vec best_x = x;
  double best_rd = std::numeric_limits<double>::infinity();
  int stall = 0;
  int gap_done = 0;

  auto finish_loose = [&](const std::string& why) {
    // fall back to the best interior iterate; callers re-verify feasibility
    if (best_gap <= std::max(1e-5, 300 * opts.tol_gap) &&
        best_rd <= std::max(1e-4, 300 * opts.tol_feas)) {
      res.converged = true;
      res.x = best_x;
      res.gap = best_gap;
      res.message = "loose convergence (" + why + ")";
    } else {
      res.numerical_failure = true;
      res.x = best_x;
      res.message = why;
    }
    return res;
  };

  using Clock = std::chrono::steady_clock;
  auto tick = [] { return Clock::now(); };
  auto tsec = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    res.iterations = iter;
    auto t_f0 = tick();
    // factorizations
    for (int b = 0; b < nb; ++b) {
      s_llt[b].compute(s[b]);
      if (s_llt[b].info() != Eigen::Success)
        return finish_loose("slack factorization failed");
      const int d = pb.blocks[b].dim;
      sinv[b] = s_llt[b].solve(Mat::Identity(d, d));
    }
    auto t_f1 = tick();

    double gap = 0.0;
    for (int b = 0; b < nb; ++b) gap += (s[b].cwiseProduct(z[b])).sum();
    const double mu = gap / std::max(1, total_dim);

    Vec rd = pb.lin + pb.quad_diag.cwiseProduct(x);
    if (neq) rd += pb.eq_mat.transpose() * y;
    for (int b = 0; b < nb; ++b) pb.add_adjoint(pb.blocks[b], z[b], rd);

    const double obj = pb.lin.dot(x) + 0.5 * x.dot(pb.quad_diag.cwiseProduct(x));
    const double gap_rel = gap / (1.0 + std::abs(obj));
    const double rd_rel = rd.cwiseAbs().maxCoeff() / cnorm;
    if (obj < res.best_obj) {
      res.best_obj = obj;
      res.x_best_obj = x;
    }

    if (!std::isfinite(stop_objective) && obj < -1e9 * (1.0 + std::abs(obj0))) {
      res.message = "objective appears unbounded below";
      res.numerical_failure = true;
      res.x = x;
      return res;
    }
    if (iter == 0) obj0 = obj;

    if (opts.verbose)
      std::fprintf(stderr, "  ipm it=%3d mu=%9.2e gap=%9.2e rd=%9.2e obj=%+.9e\n",
                   iter, mu, gap_rel, rd_rel, obj);

    if (gap_rel <= opts.tol_gap && rd_rel <= opts.tol_feas) {
      res.converged = true;
      res.x = x;
      res.gap = gap_rel;
      return res;
    }
    if (obj <= stop_objective) {
      // early exit hook (phase 1: strictly feasible point found)
      res.converged = true;
      res.x = x;
      res.gap = gap_rel;
      return res;
    }
    const double score = std::max(gap_rel / opts.tol_gap, rd_rel / opts.tol_feas);
    if (score < best_score) {
      best_score = score;
      best_gap = gap_rel;
      best_rd = rd_rel;
      best_x = x;
    }
    if (gap_rel <= opts.tol_gap && ++gap_done > 4)
      return finish_loose("dual residual floor");
    if (gap_rel < best_gap * 0.999 || score <= best_score) {
      stall = 0;
    } else if (++stall > 12) {
      return finish_loose("no progress");
    }

    // Schur matrix
    auto t_s0 = tick();
    Mat m = Mat::Zero(n, n);
    for (int b = 0; b < nb; ++b) pb.add_schur(pb.blocks[b], sinv[b], z[b], m);
    auto t_s1 = tick();
    m = Mat(m.selfadjointView<Eigen::Upper>());
    m.diagonal() += pb.quad_diag;
    const double reg = 1e-13 * (1.0 + m.diagonal().cwiseAbs().maxCoeff());
    Mat m_fact = m;
    m_fact.diagonal().array() += reg;

    Eigen::LDLT<Mat> m_ldlt(m_fact);
    if (m_ldlt.info() != Eigen::Success)
      return finish_loose("Schur factorization failed");

    // iterative refinement against the unregularized matrix removes the
    // bias the factorization shift would otherwise leave in the residual
    auto solve_refined = [&](const Vec& rhs) -> Vec {
      Vec dx = m_ldlt.solve(rhs);
      for (int r = 0; r < 3; ++r) {
        Vec resid = rhs - m * dx;
        dx += m_ldlt.solve(resid);
      }
      return dx;
    };
    auto kkt_solve = [&](const Vec& rhs, const Vec& rhs_eq) -> std::pair<Vec, Vec> {
      if (!neq) return {solve_refined(rhs), Vec()};
      Mat minv_et = m_ldlt.solve(Mat(pb.eq_mat.transpose()));
      Vec minv_r = solve_refined(rhs);
      Mat sc = pb.eq_mat * minv_et;
      sc.diagonal().array() += 1e-13 * (1.0 + sc.diagonal().cwiseAbs().maxCoeff());
      Vec dy = sc.ldlt().solve(pb.eq_mat * minv_r - rhs_eq);
      Vec dx = minv_r - minv_et * dy;
      return {dx, dy};
    };

    auto direction = [&](double sigma, const std::vector<Mat>* corr)
        -> std::tuple<Vec, Vec, std::vector<Mat>, std::vector<Mat>> {
      Vec rhs = -rd;
      for (int b = 0; b < nb; ++b) {
        Mat base = sigma * mu * sinv[b] - z[b];
        if (corr) base -= sinv[b] * (*corr)[b];
        Vec add = Vec::Zero(n);
        pb.add_adjoint(pb.blocks[b], Mat(0.5 * (base + base.transpose())), add);
        rhs -= add;
      }
      Vec rhs_eq = Vec::Zero(neq);
      if (neq) rhs_eq = -(pb.eq_mat * x - pb.eq_rhs);
      auto [dx, dy] = kkt_solve(rhs, rhs_eq);
      std::vector<Mat> ds(nb), dz(nb);
      for (int b = 0; b < nb; ++b) {
        // dS = -A(dx); compute via block matrix difference of linear map
        Mat ax = pb.block_matrix(pb.blocks[b], Vec(x + dx)) - s[b];
        ds[b] = ax;  // equals -A(dx)
        Mat dzb = sigma * mu * sinv[b] - z[b] - sinv[b] * ds[b] * z[b];
        if (corr) dzb -= sinv[b] * (*corr)[b];
        dz[b] = 0.5 * (dzb + dzb.transpose());
      }
      return {dx, dy, ds, dz};
    };

    // predictor
    auto t_d0 = tick();
    auto [dx_a, dy_a, ds_a, dz_a] = direction(0.0, nullptr);
    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      ap = std::min(ap, 0.99 * max_step(s[b], ds_a[b]));
      ad = std::min(ad, 0.99 * max_step(z[b], dz_a[b]));
    }
    double gap_aff = 0.0;
    for (int b = 0; b < nb; ++b)
      gap_aff += ((s[b] + ap * ds_a[b]).cwiseProduct(z[b] + ad * dz_a[b])).sum();
    double sigma = std::pow(std::max(0.0, gap_aff / gap), 3.0);
    // keep centering pressure while the dual residual dominates
    if (rd_rel > 1e2 * opts.tol_feas && rd_rel > gap_rel) sigma = std::max(sigma, 0.5);
    sigma = std::clamp(sigma, 1e-6, 0.9);

    // corrector
    std::vector<Mat> corr(nb);
    for (int b = 0; b < nb; ++b) corr[b] = ds_a[b] * dz_a[b];
    auto [dx, dy, ds, dz] = direction(sigma, &corr);

    ap = 1.0;
    ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      ap = std::min(ap, 0.98 * max_step(s[b], ds[b]));
      ad = std::min(ad, 0.98 * max_step(z[b], dz[b]));
    }
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);
    if (rd_rel > 10.0 * opts.tol_feas) {
      // common step keeps the linear dual residual contracting geometrically
      ap = ad = std::min(ap, ad);
    }
    if (std::isfinite(stop_objective)) {
      // cap the primal step so the early-exit objective is not wildly
      // overshot (phase-1 problems are typically unbounded below)
      const double obj_dir = pb.lin.dot(dx);
      const double target = 2.0 * stop_objective - 1.0;
      if (obj_dir < 0 && obj + ap * obj_dir < target)
        ap = std::min(ap, (target - obj) / obj_dir);
    }
    if (ap < 1e-9 && ad < 1e-9) return finish_loose("line search stalled");

    x += ap * dx;
    if (neq) y += ad * dy;
    for (int b = 0; b < nb; ++b) {
      s[b] = pb.block_matrix(pb.blocks[b], x);
      z[b] += ad * dz[b];
    }
    if (opts.verbose && std::getenv("NETSYNTH_IPM_PROFILE"))
      std::fprintf(stderr, "    [profile] factor %.3f schur %.3f dirs %.3f\n",
                   tsec(t_f0, t_f1), tsec(t_s0, t_s1), tsec(t_d0, tick()));
  }
  return finish_loose("iteration limit");
}

}  // namespace

struct SolverImpl {
  static SolveResult solve(const ConicProblem& p, const SolveOptions& opts);
  static void dump_sdpa(const ConicProblem& p, const Assembler& pb,
                        const std::string& path);
};

SolveResult SolverImpl::solve(const ConicProblem& p, const SolveOptions& opts) {
  SolveResult out;

  Assembler pb;
  // layouts
  std::map<int, int> layout_of;
  int offset = 0;
  for (const auto& v : p.vars_) {
    VarLayout lay;
    lay.var = v.id;
    lay.offset = offset;
    lay.rows = v.rows;
    lay.cols = v.cols;
    lay.symmetric = v.symmetric;
    for (int i = 0; i < v.rows; ++i)
      for (int j = (v.symmetric ? i : 0); j < v.cols; ++j) {
        if (v.mask.size() && !v.mask(i, j)) continue;
        lay.entries.emplace_back(i, j);
      }
    offset += static_cast<int>(lay.entries.size());
    layout_of[v.id] = static_cast<int>(pb.layouts.size());
    pb.layouts.push_back(std::move(lay));
  }
  pb.nvar = offset;
  if (pb.nvar == 0) {
    out.status = SolveStatus::NumericalFailure;
    out.message = "no decision variables";
    return out;
  }

  // objective
  pb.lin = Vec::Zero(pb.nvar);
  pb.quad_diag = Vec::Zero(pb.nvar);
  pb.obj_const = p.obj_constant_;
  for (const auto& [id, w] : p.obj_linear_) {
    const auto& lay = pb.layouts[layout_of.at(id)];
    for (std::size_t e = 0; e < lay.entries.size(); ++e) {
      const auto [i, j] = lay.entries[e];
      double coeff = w(i, j);
      if (lay.symmetric && i != j) coeff += w(j, i);
      pb.lin(lay.offset + e) += coeff;
    }
  }
  for (const auto& q : p.obj_quad_) {
    const auto& lay = pb.layouts[layout_of.at(q.var)];
    Mat shift = q.shift;
    if (lay.symmetric) shift = 0.5 * (shift + shift.transpose());
    // (rho/2)||V + shift||_F^2; masked entries of V are fixed at zero.
    double cst = 0.0;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> covered =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(lay.rows, lay.cols,
                                                                      false);
    for (std::size_t e = 0; e < lay.entries.size(); ++e) {
      const auto [i, j] = lay.entries[e];
      const double mult = (lay.symmetric && i != j) ? 2.0 : 1.0;
      pb.quad_diag(lay.offset + e) += q.rho * mult;
      pb.lin(lay.offset + e) += q.rho * mult * shift(i, j);
      cst += 0.5 * q.rho * mult * shift(i, j) * shift(i, j);
      covered(i, j) = true;
      if (lay.symmetric) covered(j, i) = true;
    }
    for (int i = 0; i < lay.rows; ++i)
      for (int j = 0; j < lay.cols; ++j)
        if (!covered(i, j)) cst += 0.5 * q.rho * shift(i, j) * shift(i, j);
    pb.obj_const += cst;
  }

  // constraints
  for (const auto& con : p.constraints_) {
    Block blk;
    blk.dim = con.expr.dim();
    blk.c = -(con.expr.constant() + con.margin * Mat::Identity(blk.dim, blk.dim));
    for (const auto& t : con.expr.terms()) {
      BlockTerm bt;
      bt.layout = layout_of.at(t.var);
      bt.left = t.left;
      bt.right = t.right;
      bt.inflate = t.inflate;
      bt.compute_windows();
      blk.terms.push_back(std::move(bt));
    }
    pb.blocks.push_back(std::move(blk));
  }
  if (pb.blocks.empty()) {
    out.status = SolveStatus::NumericalFailure;
    out.message = "no constraints";
    return out;
  }

  // equalities
  const int neq = static_cast<int>(p.equalities_.size());
  pb.eq_mat = Mat::Zero(neq, pb.nvar);
  pb.eq_rhs = Vec::Zero(neq);
  for (int r = 0; r < neq; ++r) {
    pb.eq_rhs(r) = p.equalities_[r].rhs;
    for (const auto& [id, w] : p.equalities_[r].lhs) {
      const auto& lay = pb.layouts[layout_of.at(id)];
      for (std::size_t e = 0; e < lay.entries.size(); ++e) {
        const auto [i, j] = lay.entries[e];
        double coeff = w(i, j);
        if (lay.symmetric && i != j) coeff += w(j, i);
        pb.eq_mat(r, lay.offset + e) += coeff;
      }
    }
  }

  if (!opts.dump_path.empty()) dump_sdpa(p, pb, opts.dump_path);

  // initial point
  Vec x0 = Vec::Zero(pb.nvar);
  for (const auto& [id, val] : p.initial_) {
    const auto& lay = pb.layouts[layout_of.at(id)];
    for (std::size_t e = 0; e < lay.entries.size(); ++e) {
      const auto [i, j] = lay.entries[e];
      x0(lay.offset + e) = val(i, j);
    }
  }
  if (neq) {
    // project onto the equality manifold (min-norm correction)
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(pb.eq_mat);
    Vec resid = pb.eq_mat * x0 - pb.eq_rhs;
    if (resid.cwiseAbs().maxCoeff() > 1e-12 * (1.0 + pb.eq_rhs.cwiseAbs().maxCoeff())) {
      Vec corr = cod.solve(resid);
      x0 -= corr;
      resid = pb.eq_mat * x0 - pb.eq_rhs;
      if (resid.cwiseAbs().maxCoeff() >
          1e-8 * (1.0 + pb.eq_rhs.cwiseAbs().maxCoeff())) {
        out.status = SolveStatus::Infeasible;
        out.message = "inconsistent equality constraints";
        return out;
      }
    }
  }

  auto extract = [&](const Vec& x) {
    std::map<int, Mat> values;
    for (const auto& v : p.vars_) {
      const auto& lay = pb.layouts[layout_of.at(v.id)];
      values[v.id] = pb.assemble_var(lay, x);
    }
    return values;
  };

  // strict feasibility at x0?
  double worst = -std::numeric_limits<double>::infinity();
  double scale = 1.0;
  int worst_block = -1;
  for (std::size_t bi = 0; bi < pb.blocks.size(); ++bi) {
    const auto& b = pb.blocks[bi];
    Mat s = pb.block_matrix(b, x0);
    scale = std::max(scale, b.c.norm());
    Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
    const double v = -es.eigenvalues().minCoeff();
    if (v > worst) {
      worst = v;
      worst_block = static_cast<int>(bi);
    }
  }
  if (opts.verbose && worst_block >= 0)
    std::fprintf(stderr, "  [start] worst initial slack %.3e on constraint %d (%s)\n",
                 worst, worst_block, p.constraints_[worst_block].name.c_str());

  Vec x_feas = x0;
  if (worst >= 0.0) {
    // phase 1: minimize the uniform slack tau
    Assembler ph1 = pb;
    ph1.nvar += 1;
    ph1.lin = Vec::Zero(ph1.nvar);
    ph1.lin(ph1.nvar - 1) = 1.0;
    ph1.quad_diag = Vec::Zero(ph1.nvar);
    for (auto& b : ph1.blocks) {
      BlockTerm slack;
      slack.layout = -1;
      slack.left = -0.5 * Mat::Identity(b.dim, b.dim);
      slack.right = Mat::Identity(b.dim, b.dim);
      slack.inflate = b.dim;
      slack.compute_windows();
      b.terms.push_back(std::move(slack));
    }
    if (neq) {
      ph1.eq_mat = Mat::Zero(neq, ph1.nvar);
      ph1.eq_mat.leftCols(pb.nvar) = pb.eq_mat;
    }
    Vec x1 = Vec::Zero(ph1.nvar);
    x1.head(pb.nvar) = x0;
    x1(ph1.nvar - 1) = 1.05 * worst + 1.0;

    SolveOptions o1 = opts;
    o1.tol_gap = std::min(opts.tol_gap, 1e-9);
    const double stop_tau = -std::max(1e-6, 0.05 * (1.0 + std::abs(worst)));
    IpmResult r1 = run_ipm(ph1, x1, o1, stop_tau);
    Vec x_ph1 = r1.x;
    if (r1.x_best_obj.size() && r1.best_obj < r1.x(ph1.nvar - 1)) x_ph1 = r1.x_best_obj;
    const double tau = x_ph1(ph1.nvar - 1);
    if (tau >= 0.0) {
      if (r1.converged) {
        out.status = SolveStatus::Infeasible;
        out.message = "no strictly feasible point (phase-1 slack " +
                      std::to_string(tau) + ")";
      } else {
        out.status = SolveStatus::NumericalFailure;
        out.message = "phase-1 failed: " + r1.message;
      }
      out.values = extract(x_ph1.head(pb.nvar));
      out.iterations = r1.iterations;
      return out;
    }
    x_feas = x_ph1.head(pb.nvar);
  }

  IpmResult r2 = run_ipm(pb, x_feas, opts);
  out.values = extract(r2.x);
  out.iterations = r2.iterations;
  out.objective = pb.lin.dot(r2.x) + 0.5 * r2.x.dot(pb.quad_diag.cwiseProduct(r2.x)) +
                  pb.obj_const;
  if (r2.converged) {
    out.status = SolveStatus::Optimal;
    // contract: the assignment satisfies every constraint at its margin
    for (int k = 0; k < p.n_constraints(); ++k) {
      Mat val = p.constraint_value(k, out.values);
      const double lmax = numlin::eig_max_sym(val);
      if (lmax > -p.constraint_margin(k) + 1e-7 * (1.0 + val.norm())) {
        out.status = SolveStatus::NumericalFailure;
        out.message = "post-check failed on constraint " + std::to_string(k) +
                      (p.constraint_name(k).empty() ? "" : " (" + p.constraint_name(k) + ")");
        return out;
      }
    }
  } else {
    out.status = SolveStatus::NumericalFailure;
    out.message = r2.message;
  }
  return out;
}

void SolverImpl::dump_sdpa(const ConicProblem& p, const Assembler& pb,
                           const std::string& path) {
  // SDPA sparse format of the linear part: max b'y s.t. sum_k y_k Abar_k - Cbar >= 0
  // with y = x, Abar_k = -F_k, Cbar = F0 + margin*I, b = -c.
  std::ofstream f(path);
  if (!f) return;
  f << "* netsynth conic dump (linear part; quadratic objective terms omitted)\n";
  f << pb.nvar << " = mDIM\n";
  f << pb.blocks.size() << " = nBLOCK\n";
  for (std::size_t b = 0; b < pb.blocks.size(); ++b)
    f << pb.blocks[b].dim << (b + 1 == pb.blocks.size() ? "\n" : " ");
  for (int k = 0; k < pb.nvar; ++k)
    f << fmt_g(-pb.lin(k)) << (k + 1 == pb.nvar ? "\n" : " ");
  // Cbar = -pb.c per block (pb.c already includes margin with a sign flip)
  for (std::size_t b = 0; b < pb.blocks.size(); ++b) {
    const Mat c = -pb.blocks[b].c;
    for (int i = 0; i < c.rows(); ++i)
      for (int j = i; j < c.cols(); ++j)
        if (c(i, j) != 0.0)
          f << "0 " << (b + 1) << " " << (i + 1) << " " << (j + 1) << " "
            << fmt_g(c(i, j)) << "\n";
  }
  // Abar_k: materialize per scalar entry
  for (const auto& lay : pb.layouts) {
    for (std::size_t e = 0; e < lay.entries.size(); ++e) {
      const int k = lay.offset + static_cast<int>(e) + 1;
      const auto [vi, vj] = lay.entries[e];
      for (std::size_t b = 0; b < pb.blocks.size(); ++b) {
        const auto& blk = pb.blocks[b];
        Mat acc = Mat::Zero(blk.dim, blk.dim);
        for (const auto& t : blk.terms) {
          if (t.layout != static_cast<int>(&lay - pb.layouts.data())) continue;
          Mat contrib;
          if (t.inflate > 1) {
            contrib = t.left * t.right;
          } else {
            Mat basis = Mat::Zero(lay.rows, lay.cols);
            basis(vi, vj) = 1.0;
            if (lay.symmetric) basis(vj, vi) = 1.0;
            contrib = t.left * basis * t.right;
          }
          acc += contrib + contrib.transpose();
        }
        const Mat abar = -acc;
        for (int i = 0; i < abar.rows(); ++i)
          for (int j = i; j < abar.cols(); ++j)
            if (abar(i, j) != 0.0)
              f << k << " " << (b + 1) << " " << (i + 1) << " " << (j + 1) << " "
                << fmt_g(abar(i, j)) << "\n";
      }
    }
  }
}

SolveResult ConicProblem::solve(const SolveOptions& opts) const {
  return SolverImpl::solve(*this, opts);
}

}  // namespace netsynth::conic
