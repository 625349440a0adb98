#include "netsynth/dissipativity.hpp"

#include <cmath>

namespace netsynth::diss {

using conic::LmiExpr;
using conic::VarRef;

QsrTriple::QsrTriple(Mat q_, Mat s_, Mat r_)
    : q(std::move(q_)), s(std::move(s_)), r(std::move(r_)) {
  require(q.rows() == q.cols() && r.rows() == r.cols(), "QsrTriple: Q, R must be square");
  require(s.rows() == q.rows() && s.cols() == r.rows(), "QsrTriple: S shape mismatch");
  require((q - q.transpose()).norm() <= 1e-10 * (1.0 + q.norm()), "QsrTriple: Q not symmetric");
  require((r - r.transpose()).norm() <= 1e-10 * (1.0 + r.norm()), "QsrTriple: R not symmetric");
}

QsrTriple QsrTriple::zero(int l, int m) {
  return QsrTriple(Mat::Zero(l, l), Mat::Zero(l, m), Mat::Zero(m, m));
}

Mat kyp_matrix(const StateSpace& ss, const QsrTriple& t, const Mat& p) {
  const int n = ss.n(), m = ss.m();
  require(t.q.rows() == ss.l() && t.r.rows() == m, "kyp_matrix: triple dims");
  require(p.rows() == n && p.cols() == n, "kyp_matrix: storage dims");
  Mat out(n + m, n + m);
  const Mat& a = ss.A;
  const Mat& b = ss.B;
  const Mat& c = ss.C;
  const Mat& d = ss.D;
  out.topLeftCorner(n, n) = a.transpose() * p + p * a - c.transpose() * t.q * c;
  out.topRightCorner(n, m) =
      p * b - c.transpose() * t.s - c.transpose() * t.q * d;
  out.bottomLeftCorner(m, n) = out.topRightCorner(n, m).transpose();
  out.bottomRightCorner(m, m) =
      -(t.r + d.transpose() * t.s + t.s.transpose() * d + d.transpose() * t.q * d);
  return out;
}

namespace {

// Adds the term weight * He(L * X * R) where X is fixed or a variable.
void add_flex(LmiExpr& e, const MatOrVar& x, const Mat& left, const Mat& right) {
  if (x.is_var) {
    e.add_he_term(x.var, left, right);
  } else {
    const Mat m = left * x.fixed * right;
    e.add_constant(m + m.transpose());
  }
}

// weight * He(L * X' * R) == term in X with flipped factors.
void add_flex_transposed(LmiExpr& e, const MatOrVar& x, const Mat& left, const Mat& right) {
  if (x.is_var) {
    e.add_he_term(x.var, right.transpose(), left.transpose());
  } else {
    const Mat m = left * x.fixed.transpose() * right;
    e.add_constant(m + m.transpose());
  }
}

}  // namespace

LmiExpr kyp_lmi(const StateSpace& ss, const MatOrVar& p, const MatOrVar& q,
                const MatOrVar& s, const MatOrVar& r) {
  const int n = ss.n(), m = ss.m(), l = ss.l();
  require(p.rows() == n && p.cols() == n, "kyp_lmi: storage dims");
  require(q.rows() == l && q.cols() == l, "kyp_lmi: Q dims");
  require(s.rows() == l && s.cols() == m, "kyp_lmi: S dims");
  require(r.rows() == m && r.cols() == m, "kyp_lmi: R dims");

  const int dim = n + m;
  LmiExpr e = conic::affine(Mat::Zero(dim, dim));

  Mat emb_top = Mat::Zero(dim, n);
  emb_top.topRows(n) = Mat::Identity(n, n);
  Mat emb_bot = Mat::Zero(dim, m);
  emb_bot.bottomRows(m) = Mat::Identity(m, m);

  Mat ab(n, dim);
  ab << ss.A, ss.B;
  add_flex(e, p, emb_top, ab);  // He(P [A B]) embedded in the top rows

  Mat cd(l, dim);
  cd << ss.C, ss.D;
  add_flex(e, q, Mat(-0.5 * cd.transpose()), cd);  // -[C D]' Q [C D]

  // -C'S at (1,2), -(D'S + S'D) at (2,2)
  add_flex(e, s, Mat(-cd.transpose()), Mat(emb_bot.transpose()));

  add_flex(e, r, Mat(-0.5 * emb_bot), Mat(emb_bot.transpose()));
  return e;
}

std::vector<LmiExpr> certify_polytopic(const plant::PolytopicAgent& agent,
                                       const MatOrVar& p, const MatOrVar& q,
                                       const MatOrVar& s, const MatOrVar& r) {
  std::vector<LmiExpr> out;
  out.reserve(agent.vertex_a.size());
  for (const auto& va : agent.vertex_a) {
    StateSpace vtx(va, agent.nominal.B, agent.nominal.C, agent.nominal.D);
    out.push_back(kyp_lmi(vtx, p, q, s, r));
  }
  return out;
}

LmiExpr ndt_expr(const std::vector<MatOrVar>& q_blocks,
                 const std::vector<MatOrVar>& s_blocks,
                 const std::vector<MatOrVar>& r_blocks, const Mat& hbar,
                 const std::vector<int>& out_dims, const std::vector<int>& in_dims) {
  const std::size_t nops = out_dims.size();
  require(q_blocks.size() == nops && s_blocks.size() == nops && r_blocks.size() == nops &&
              in_dims.size() == nops,
          "ndt_expr: block count mismatch");
  int ltot = 0, mtot = 0;
  for (std::size_t i = 0; i < nops; ++i) {
    ltot += out_dims[i];
    mtot += in_dims[i];
  }
  require(hbar.rows() == mtot && hbar.cols() == ltot, "ndt_expr: Hbar dims");

  LmiExpr e = conic::affine(Mat::Zero(ltot, ltot));
  int lo = 0, mo = 0;
  for (std::size_t i = 0; i < nops; ++i) {
    const int li = out_dims[i], mi = in_dims[i];
    require(q_blocks[i].rows() == li && q_blocks[i].cols() == li, "ndt_expr: Q block dims");
    require(s_blocks[i].rows() == li && s_blocks[i].cols() == mi, "ndt_expr: S block dims");
    require(r_blocks[i].rows() == mi && r_blocks[i].cols() == mi, "ndt_expr: R block dims");

    Mat emb = Mat::Zero(ltot, li);
    emb.block(lo, 0, li, li) = Mat::Identity(li, li);
    add_flex(e, q_blocks[i], Mat(0.5 * emb), Mat(emb.transpose()));

    const Mat hrow = hbar.middleRows(mo, mi);  // m_i x ltot
    add_flex(e, s_blocks[i], emb, hrow);
    add_flex(e, r_blocks[i], Mat(0.5 * hrow.transpose()), hrow);

    lo += li;
    mo += mi;
  }
  return e;
}

Mat ndt_matrix(const std::vector<Mat>& q_blocks, const std::vector<Mat>& s_blocks,
               const std::vector<Mat>& r_blocks, const Mat& hbar,
               const std::vector<int>& out_dims, const std::vector<int>& in_dims) {
  std::vector<MatOrVar> q, s, r;
  for (const auto& b : q_blocks) q.emplace_back(b);
  for (const auto& b : s_blocks) s.emplace_back(b);
  for (const auto& b : r_blocks) r.emplace_back(b);
  return ndt_expr(q, s, r, hbar, out_dims, in_dims).value({});
}

LmiExpr controller_diss_expr(const Mat& bank, int nstates, const MatOrVar& p,
                             const MatOrVar& q, const MatOrVar& s, const MatOrVar& r) {
  const int nh = nstates;
  const int m = static_cast<int>(bank.rows()) - nh;   // controller outputs
  const int l = static_cast<int>(bank.cols()) - nh;   // controller inputs
  require(m > 0 && l > 0, "controller_diss_expr: bank shape");
  require(p.rows() == nh && q.rows() == m && s.rows() == m && s.cols() == l && r.rows() == l,
          "controller_diss_expr: block dims");

  const int dim = nh + l;
  LmiExpr e = conic::affine(Mat::Zero(dim, dim));

  Mat emb_top = Mat::Zero(dim, nh);
  emb_top.topRows(nh) = Mat::Identity(nh, nh);
  Mat emb_bot = Mat::Zero(dim, l);
  emb_bot.bottomRows(l) = Mat::Identity(l, l);

  const Mat top = bank.topRows(nh);     // [A B]
  const Mat w = bank.bottomRows(m);     // [C D]

  add_flex(e, p, emb_top, top);                                 // He(P [A B])
  add_flex_transposed(e, s, Mat(-emb_bot), w);                  // He(-S' [C D]) rows
  add_flex(e, q, Mat(-0.5 * w.transpose()), w);                 // -[C D]' Q [C D]
  add_flex(e, r, Mat(-0.5 * emb_bot), Mat(emb_bot.transpose())); // -R
  return e;
}

double empirical_dissipation(const StateSpace& ss, const QsrTriple& t,
                             const std::vector<plant::SampledSignal>& inputs,
                             double t_final, double dt) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& input : inputs) {
    auto traj = plant::simulate(ss, input, dt, t_final);
    double acc = 0.0;
    double prev = 0.0;
    for (int k = 0; k < traj.outputs.cols(); ++k) {
      const Vec y = traj.outputs.col(k);
      const Vec u = input.at(k * dt);
      const double rate =
          (y.dot(t.q * y) + 2.0 * y.dot(t.s * u) + u.dot(t.r * u));
      if (k > 0) acc += 0.5 * dt * (prev + rate);
      prev = rate;
    }
    worst = std::min(worst, acc);
  }
  return inputs.empty() ? 0.0 : worst;
}

namespace {

// Gain-bound certificate with common storage: Q = -I/gamma, S = 0,
// R = gamma I certified jointly over the vertex family.
std::optional<Certificate> gain_certificate(const std::vector<StateSpace>& vertices) {
  const int n = vertices[0].n(), m = vertices[0].m(), l = vertices[0].l();
  double gamma0 = 0.0;
  for (const auto& v : vertices) {
    if (!numlin::is_hurwitz(v.A)) return std::nullopt;
    gamma0 = std::max(gamma0, numlin::hinf_norm(v.A, v.B, v.C, v.D, 1e-6));
  }
  for (double factor : {1.25, 2.0, 4.0, 8.0}) {
    const double gamma = std::max(1e-6, gamma0 * factor);
    QsrTriple t(Mat(-Mat::Identity(l, l) / gamma), Mat::Zero(l, m),
                Mat(gamma * Mat::Identity(m, m)));
    conic::ConicProblem prob;
    auto pv = prob.add_symmetric_var(n, "P");
    for (const auto& v : vertices)
      prob.add_negdef(kyp_lmi(v, pv, t.q, t.s, t.r), 1e-8, "kyp");
    conic::LmiExpr ppos = conic::affine(Mat::Zero(n, n));
    ppos.add_he_term(pv, Mat(0.5 * Mat::Identity(n, n)), Mat::Identity(n, n));
    prob.add_posdef(ppos, 1e-8, "p_pos");
    conic::LmiExpr pcap = conic::affine(Mat(-1e5 * Mat::Identity(n, n)));
    pcap.add_he_term(pv, Mat(0.5 * Mat::Identity(n, n)), Mat::Identity(n, n));
    prob.add_negdef(pcap, 0.0, "p_cap");
    prob.add_objective(pv, Mat::Identity(n, n));  // keep P small
    auto res = prob.solve();
    if (!res.ok()) continue;
    Certificate cert;
    cert.triple = t;
    cert.storage = res.values.at(pv.id);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& v : vertices)
      margin = std::min(margin, -numlin::eig_max_sym(kyp_matrix(v, t, cert.storage)));
    cert.margin = margin;
    if (margin >= 0.0) return cert;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Certificate> find_certificate(const std::vector<StateSpace>& vertices,
                                            double norm_bound) {
  require(!vertices.empty(), "find_certificate: no vertices");
  if (auto cert = gain_certificate(vertices)) return cert;
  const int n = vertices[0].n(), m = vertices[0].m(), l = vertices[0].l();
  conic::ConicProblem prob;
  VarRef p = prob.add_symmetric_var(n, "P");
  VarRef q = prob.add_symmetric_var(l, "Q");
  VarRef s = prob.add_matrix_var(l, m, "S");
  VarRef r = prob.add_symmetric_var(m, "R");

  for (const auto& vtx : vertices) {
    LmiExpr e = kyp_lmi(vtx, p, q, s, r);
    prob.add_negdef(e, 1e-7, "kyp");
  }
  LmiExpr ppos = conic::affine(Mat::Zero(n, n));
  ppos.add_he_term(p, Mat(0.5 * Mat::Identity(n, n)), Mat::Identity(n, n));
  prob.add_posdef(ppos, 1e-6, "p_pos");


  // keep the certificate bounded: blkdiag(Q, R, P) within +-norm_bound
  auto bound = [&](const VarRef& v) {
    const int d = v.rows;
    LmiExpr up = conic::affine(Mat(-norm_bound * Mat::Identity(d, d)));
    up.add_he_term(v, Mat(0.5 * Mat::Identity(d, d)), Mat::Identity(d, d));
    prob.add_negdef(up, 0.0, "ub");
    LmiExpr lo = conic::affine(Mat(-norm_bound * Mat::Identity(d, d)));
    lo.add_he_term(v, Mat(-0.5 * Mat::Identity(d, d)), Mat::Identity(d, d));
    prob.add_negdef(lo, 0.0, "lb");
  };
  bound(q);
  bound(r);
  bound(p);

  auto res = prob.solve();
  if (!res.ok()) return std::nullopt;
  Certificate cert;
  cert.triple = QsrTriple(res.values.at(q.id), res.values.at(s.id), res.values.at(r.id));
  cert.storage = res.values.at(p.id);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& vtx : vertices)
    margin = std::min(margin,
                      -numlin::eig_max_sym(kyp_matrix(vtx, cert.triple, cert.storage)));
  cert.margin = margin;
  return cert;
}

}  // namespace netsynth::diss
