#include "netsynth/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "netsynth/textio.hpp"

namespace netsynth::plant {

BlockMat::BlockMat(Mat mat, BlockPartition r, BlockPartition c)
    : m(std::move(mat)), rows(std::move(r)), cols(std::move(c)) {
  require(m.rows() == rows.total() && m.cols() == cols.total(),
          "BlockMat: partition does not match matrix size");
}

BlockMat BlockMat::zero(const BlockPartition& r, const BlockPartition& c) {
  return BlockMat(Mat::Zero(r.total(), c.total()), r, c);
}

Mat BlockMat::block(int i, int j) const {
  return m.block(rows.offset(i), cols.offset(j), rows.size(i), cols.size(j));
}

void BlockMat::set_block(int i, int j, const Mat& b) {
  require(b.rows() == rows.size(i) && b.cols() == cols.size(j),
          "BlockMat: block size mismatch");
  m.block(rows.offset(i), cols.offset(j), rows.size(i), cols.size(j)) = b;
}

StateSpace::StateSpace(Mat a, Mat b, Mat c, Mat d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  require(A.rows() == A.cols(), "StateSpace: A must be square");
  require(B.rows() == A.rows(), "StateSpace: B row mismatch");
  require(C.cols() == A.rows(), "StateSpace: C column mismatch");
  require(D.rows() == C.rows() && D.cols() == B.cols(), "StateSpace: D mismatch");
}

StateSpace StateSpace::scalar(double a, double b, double c, double d) {
  Mat ma(1, 1), mb(1, 1), mc(1, 1), md(1, 1);
  ma << a; mb << b; mc << c; md << d;
  return StateSpace(ma, mb, mc, md);
}

Eigen::MatrixXcd StateSpace::freq_response(double omega) const {
  using CMat = Eigen::MatrixXcd;
  if (n() == 0) return D.cast<std::complex<double>>();
  CMat jw = std::complex<double>(0, omega) * CMat::Identity(n(), n()) -
            A.cast<std::complex<double>>();
  return C.cast<std::complex<double>>() * jw.fullPivLu().solve(B.cast<std::complex<double>>()) +
         D.cast<std::complex<double>>();
}

PolytopicAgent::PolytopicAgent(StateSpace nom, std::vector<Mat> vertices)
    : nominal(std::move(nom)), vertex_a(std::move(vertices)) {
  require(!vertex_a.empty(), "PolytopicAgent: at least one vertex required");
  for (const auto& v : vertex_a)
    require(v.rows() == nominal.A.rows() && v.cols() == nominal.A.cols(),
            "PolytopicAgent: vertex dimension mismatch");
  // Hull membership of the nominal A. Vertex sets produced by entrywise
  // boxes admit an exact interval test; general sets get the LP check in
  // conic-backed callers (see tests), here we enforce the box bound which is
  // necessary for membership in all cases.
  Mat lo = box_lo(), hi = box_hi();
  const double tol = 1e-9 * (1.0 + nominal.A.norm());
  require(((nominal.A.array() >= lo.array() - tol) &&
           (nominal.A.array() <= hi.array() + tol)).all(),
          "PolytopicAgent: nominal A outside the vertex hull bounding box");
}

bool PolytopicAgent::is_entrywise_box() const {
  // Every vertex entry must sit on the interval boundary given by the
  // entrywise min/max, and all sign patterns must be represented if the box
  // is nondegenerate in more than one entry. The sampling path only needs
  // the interval property, which is what we check.
  Mat lo = box_lo(), hi = box_hi();
  for (const auto& v : vertex_a) {
    for (int i = 0; i < v.rows(); ++i)
      for (int j = 0; j < v.cols(); ++j) {
        const double a = v(i, j);
        const double tol = 1e-12 * (1.0 + std::abs(a));
        if (std::abs(a - lo(i, j)) > tol && std::abs(a - hi(i, j)) > tol) return false;
      }
  }
  return true;
}

Mat PolytopicAgent::box_lo() const {
  Mat lo = vertex_a.front();
  for (const auto& v : vertex_a) lo = lo.cwiseMin(v);
  return lo;
}

Mat PolytopicAgent::box_hi() const {
  Mat hi = vertex_a.front();
  for (const auto& v : vertex_a) hi = hi.cwiseMax(v);
  return hi;
}

std::vector<Mat> box_vertices(const Mat& nominal_a, double frac) {
  require(frac >= 0.0 && frac < 1.0, "box_vertices: fraction must be in [0,1)");
  const int k = static_cast<int>(nominal_a.size());
  require(k <= 20, "box_vertices: too many entries for explicit vertex set");
  std::vector<Mat> out;
  out.reserve(std::size_t{1} << k);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
    Mat v = nominal_a;
    for (int e = 0; e < k; ++e) {
      const int i = e / static_cast<int>(nominal_a.cols());
      const int j = e % static_cast<int>(nominal_a.cols());
      const double sign = (bits >> e) & 1 ? 1.0 : -1.0;
      v(i, j) = nominal_a(i, j) * (1.0 + sign * frac);
    }
    out.push_back(v);
  }
  return out;
}

NetworkTopology::NetworkTopology(BlockMat hm) : h(std::move(hm)) {
  require(h.rows.count() == h.cols.count(), "NetworkTopology: block grid must be square");
  for (int i = 0; i < h.rows.count(); ++i)
    require(h.block(i, i).norm() == 0.0,
            "NetworkTopology: diagonal blocks must be zero (no local self-feedback)");
}

namespace {
BlockPartition concat(const BlockPartition& a, const BlockPartition& b) {
  std::vector<int> s = a.sizes();
  s.insert(s.end(), b.sizes().begin(), b.sizes().end());
  return BlockPartition(s);
}
}  // namespace

GlobalInterconnection::GlobalInterconnection(const NetworkTopology& topo, const Mat& hy,
                                             const Mat& hyhat)
    : n_agents(topo.agents()) {
  const BlockPartition mpart = topo.h.rows;  // m_1..m_N
  const BlockPartition lpart = topo.h.cols;  // l_1..l_N
  require(hy.rows() == lpart.total() && hy.cols() == lpart.total(),
          "GlobalInterconnection: hy must be l x l");
  require(hyhat.rows() == mpart.total() && hyhat.cols() == mpart.total(),
          "GlobalInterconnection: hyhat must be m x m");
  Mat full = Mat::Zero(mpart.total() + lpart.total(), lpart.total() + mpart.total());
  full.topLeftCorner(mpart.total(), lpart.total()) = topo.h.m;
  full.topRightCorner(mpart.total(), mpart.total()) = hyhat;
  full.bottomLeftCorner(lpart.total(), lpart.total()) = hy;
  hbar = BlockMat(full, concat(mpart, lpart), concat(lpart, mpart));
}

Mat GlobalInterconnection::hy() const {
  const int mtot = hbar.rows.offset(n_agents);
  const int ltot = hbar.rows.total() - mtot;
  return hbar.m.block(mtot, 0, ltot, ltot);
}

Mat GlobalInterconnection::hyhat() const {
  const int mtot = hbar.rows.offset(n_agents);
  const int ltot = hbar.rows.total() - mtot;
  return hbar.m.block(0, ltot, mtot, mtot);
}

Mat GlobalInterconnection::plant_h() const {
  const int mtot = hbar.rows.offset(n_agents);
  const int ltot = hbar.rows.total() - mtot;
  return hbar.m.topLeftCorner(mtot, ltot);
}

bool GlobalInterconnection::designable(int bi, int bj) const {
  const bool top = bi < n_agents, left = bj < n_agents;
  return top != left;  // exactly the hy / hyhat super-blocks
}

BlockPartition GlobalInterconnection::out_part() const { return hbar.cols; }
BlockPartition GlobalInterconnection::in_part() const { return hbar.rows; }

std::vector<int> NetworkProblem::state_dims() const {
  std::vector<int> out;
  for (const auto& a : agents) out.push_back(a.nominal.n());
  return out;
}
std::vector<int> NetworkProblem::input_dims() const {
  std::vector<int> out;
  for (const auto& a : agents) out.push_back(a.nominal.m());
  return out;
}
std::vector<int> NetworkProblem::output_dims() const {
  std::vector<int> out;
  for (const auto& a : agents) out.push_back(a.nominal.l());
  return out;
}

Mat blkdiag(const std::vector<Mat>& blocks) {
  int r = 0, c = 0;
  for (const auto& b : blocks) { r += static_cast<int>(b.rows()); c += static_cast<int>(b.cols()); }
  Mat out = Mat::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += static_cast<int>(b.rows());
    c += static_cast<int>(b.cols());
  }
  return out;
}

namespace {
Mat diag_of(const std::vector<StateSpace>& ss, char which) {
  std::vector<Mat> blocks;
  for (const auto& s : ss) {
    switch (which) {
      case 'A': blocks.push_back(s.A); break;
      case 'B': blocks.push_back(s.B); break;
      case 'C': blocks.push_back(s.C); break;
      default: blocks.push_back(s.D); break;
    }
  }
  return blkdiag(blocks);
}
}  // namespace

bool well_posed(const std::vector<StateSpace>& controllers, const Mat& hu) {
  const Mat dd = diag_of(controllers, 'D');
  require(hu.rows() == dd.cols() && hu.cols() == dd.rows(), "well_posed: Hu dimension mismatch");
  const Mat w = Mat::Identity(dd.rows(), dd.rows()) - dd * hu;
  Eigen::JacobiSVD<Mat> svd(w);
  const double smin = svd.singularValues().minCoeff();
  const double norm2 = svd.singularValues().maxCoeff();
  return smin > 1e-10 * norm2;
}

StateSpace interconnect(const std::vector<StateSpace>& controllers, const Mat& hu,
                        const Mat& hy, const Mat& hyhat) {
  require(well_posed(controllers, hu), "interconnect: interconnection is not well-posed");
  const Mat ad = diag_of(controllers, 'A');
  const Mat bd = diag_of(controllers, 'B');
  const Mat cd = diag_of(controllers, 'C');
  const Mat dd = diag_of(controllers, 'D');
  const Mat w = Mat::Identity(dd.rows(), dd.rows()) - dd * hu;
  const auto winv = w.fullPivLu();
  const Mat winv_cd = winv.solve(cd);
  const Mat winv_dd = winv.solve(dd);
  Mat a = ad + bd * hu * winv_cd;
  Mat b = (bd + bd * hu * winv_dd) * hy;
  Mat c = hyhat * winv_cd;
  Mat d = hyhat * winv_dd * hy;
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
}

Mat bank_matrix(const std::vector<StateSpace>& controllers) {
  const Mat ad = diag_of(controllers, 'A');
  const Mat bd = diag_of(controllers, 'B');
  const Mat cd = diag_of(controllers, 'C');
  const Mat dd = diag_of(controllers, 'D');
  Mat k(ad.rows() + cd.rows(), ad.cols() + bd.cols());
  k << ad, bd, cd, dd;
  return k;
}

ClosedLoopParts closed_loop_parts(const std::vector<StateSpace>& plants, const Mat& h,
                                  const std::vector<StateSpace>& controllers,
                                  const Mat& hy, const Mat& hyhat, bool exo_premixed) {
  require(plants.size() == controllers.size(),
          "closed_loop_parts: one controller per agent required");
  const Mat a_d = diag_of(plants, 'A');
  const Mat b_d = diag_of(plants, 'B');
  const Mat c_d = diag_of(plants, 'C');
  for (const auto& p : plants)
    require(p.D.norm() == 0.0, "closed_loop_parts: plant agents must have zero feedthrough");
  const int n = static_cast<int>(a_d.rows());
  const int m = static_cast<int>(b_d.cols());
  const int l = static_cast<int>(c_d.rows());
  int nh = 0;
  for (const auto& c : controllers) {
    require(c.m() >= 0, "");
    nh += c.n();
  }
  for (std::size_t i = 0; i < plants.size(); ++i) {
    require(controllers[i].m() == plants[i].l(),
            "closed_loop_parts: controller input dim must match agent output dim");
    require(controllers[i].l() == plants[i].m(),
            "closed_loop_parts: controller output dim must match agent input dim");
  }
  require(h.rows() == m && h.cols() == l, "closed_loop_parts: H must be m x l");
  require(hy.rows() == l && hy.cols() == l, "closed_loop_parts: hy must be l x l");
  require(hyhat.rows() == m && hyhat.cols() == m, "closed_loop_parts: hyhat must be m x m");

  ClosedLoopParts p;
  p.nx = n + nh;
  p.nu = m + l;
  p.ny = l + m;
  p.nk_rows = nh + m;
  p.nk_cols = nh + l;

  p.a_base = Mat::Zero(p.nx, p.nx);
  p.a_base.topLeftCorner(n, n) = a_d + b_d * h * c_d;
  p.b_base = Mat::Zero(p.nx, p.nu);
  p.b_base.topLeftCorner(n, m) = b_d;
  p.c_base = Mat::Zero(p.ny, p.nx);
  p.c_base.topLeftCorner(l, n) = c_d;

  p.b_route = Mat::Zero(p.nx, p.nk_rows);
  p.b_route.topRightCorner(n, m) = b_d * hyhat;
  p.b_route.bottomLeftCorner(nh, nh) = Mat::Identity(nh, nh);

  p.c_route = Mat::Zero(p.nk_cols, p.nx);
  p.c_route.topRightCorner(nh, nh) = Mat::Identity(nh, nh);
  p.c_route.bottomLeftCorner(l, n) = hy * c_d;

  p.out_route = Mat::Zero(p.ny, p.nk_rows);
  p.out_route.bottomRightCorner(m, m) = hyhat;

  p.in_route = Mat::Zero(p.nk_cols, p.nu);
  p.in_route.bottomRightCorner(l, l) = exo_premixed ? Mat::Identity(l, l) : hy;

  return p;
}

StateSpace assemble_closed_loop(const ClosedLoopParts& p, const Mat& bank) {
  require(bank.rows() == p.nk_rows && bank.cols() == p.nk_cols,
          "assemble_closed_loop: bank matrix dimension mismatch");
  Mat a = p.a_base + p.b_route * bank * p.c_route;
  Mat b = p.b_base + p.b_route * bank * p.in_route;
  Mat c = p.c_base + p.out_route * bank * p.c_route;
  Mat d = p.out_route * bank * p.in_route;
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
}

StateSpace closed_loop(const std::vector<StateSpace>& plants, const Mat& h,
                       const std::vector<StateSpace>& controllers, const Mat& hy,
                       const Mat& hyhat, bool exo_premixed) {
  const auto parts = closed_loop_parts(plants, h, controllers, hy, hyhat, exo_premixed);
  return assemble_closed_loop(parts, bank_matrix(controllers));
}

SampledSignal SampledSignal::zero(int dim, double dt, double t_final) {
  SampledSignal s;
  s.dt = dt;
  s.samples = Mat::Zero(dim, static_cast<int>(std::ceil(t_final / dt)) + 2);
  return s;
}

SampledSignal SampledSignal::step(int dim, double dt, double t_final, double level) {
  SampledSignal s = zero(dim, dt, t_final);
  s.samples.setConstant(level);
  return s;
}

Vec SampledSignal::at(double t) const {
  if (samples.cols() == 0) return Vec::Zero(samples.rows());
  const double idx = t / dt;
  const int k0 = std::clamp(static_cast<int>(std::floor(idx)), 0, count() - 1);
  const int k1 = std::min(k0 + 1, count() - 1);
  const double frac = std::clamp(idx - k0, 0.0, 1.0);
  return (1.0 - frac) * samples.col(k0) + frac * samples.col(k1);
}

Trajectory simulate(const StateSpace& ss, const SampledSignal& input, double dt,
                    double t_final, const Vec& x0) {
  require(dt > 0, "simulate: dt must be positive");
  require(input.samples.rows() == ss.m(), "simulate: input dimension mismatch");
  const int steps = static_cast<int>(std::ceil(t_final / dt));
  Vec x = x0.size() ? x0 : Vec::Zero(ss.n());
  require(x.size() == ss.n(), "simulate: initial state dimension mismatch");

  Trajectory traj;
  traj.dt = dt;
  traj.states = Mat::Zero(ss.n(), steps + 1);
  traj.outputs = Mat::Zero(ss.l(), steps + 1);

  auto deriv = [&](const Vec& xs, double t) -> Vec {
    return ss.A * xs + ss.B * input.at(t);
  };
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    traj.states.col(k) = x;
    traj.outputs.col(k) = ss.C * x + ss.D * input.at(t);
    if (k == steps) break;
    const Vec k1 = deriv(x, t);
    const Vec k2 = deriv(x + 0.5 * dt * k1, t + 0.5 * dt);
    const Vec k3 = deriv(x + 0.5 * dt * k2, t + 0.5 * dt);
    const Vec k4 = deriv(x + dt * k3, t + dt);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return traj;
}

double uniform01(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

StateSpace sample_uncertain(const PolytopicAgent& agent, std::uint64_t seed) {
  require(agent.is_entrywise_box(),
          "sample_uncertain: vertices must define an entrywise interval box");
  const Mat lo = agent.box_lo(), hi = agent.box_hi();
  std::mt19937_64 rng(seed);
  Mat a = agent.nominal.A;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const double u = uniform01(rng());
      a(i, j) = lo(i, j) + u * (hi(i, j) - lo(i, j));
    }
  return StateSpace(a, agent.nominal.B, agent.nominal.C, agent.nominal.D);
}

namespace {

void write_state_space(textio::Node& node, const StateSpace& ss) {
  node.set_matrix("A", ss.A);
  node.set_matrix("B", ss.B);
  node.set_matrix("C", ss.C);
  node.set_matrix("D", ss.D);
}

StateSpace read_state_space(const textio::Node& node) {
  return StateSpace(node.get_matrix("A"), node.get_matrix("B"), node.get_matrix("C"),
                    node.get_matrix("D"));
}

}  // namespace

std::string to_text(const NetworkProblem& problem, const ControllerNetwork* ctrl) {
  textio::Node root("root");
  auto& model = root.add_child("model");
  model.set_int("agents", problem.n_agents());
  for (const auto& agent : problem.agents) {
    auto& an = model.add_child("agent");
    write_state_space(an, agent.nominal);
    for (const auto& v : agent.vertex_a) {
      auto& vn = an.add_child("vertex");
      vn.set_matrix("A", v);
    }
  }
  auto& hn = model.add_child("topology");
  hn.set_matrix("H", problem.topology.h.m);
  {
    std::string rsizes, csizes;
    for (int s : problem.topology.h.rows.sizes()) rsizes += std::to_string(s) + " ";
    for (int s : problem.topology.h.cols.sizes()) csizes += std::to_string(s) + " ";
    hn.set("row_blocks", rsizes);
    hn.set("col_blocks", csizes);
  }
  if (ctrl) {
    auto& cn = model.add_child("controller_network");
    for (const auto& c : ctrl->local) {
      auto& ln = cn.add_child("local");
      write_state_space(ln, c);
    }
    cn.set_matrix("hy", ctrl->hy);
    cn.set_matrix("hyhat", ctrl->hyhat);
  }
  return root.to_string();
}

namespace {
std::vector<int> parse_sizes(const std::string& s) {
  std::istringstream is(s);
  std::vector<int> out;
  int v;
  while (is >> v) out.push_back(v);
  return out;
}
}  // namespace

NetworkProblem problem_from_text(const std::string& text,
                                 std::optional<ControllerNetwork>* ctrl_out) {
  const textio::Node root = textio::parse(text);
  const textio::Node* model = root.child("model");
  require(model != nullptr, "model file: missing 'model' group");
  NetworkProblem problem;
  for (const auto* an : model->children("agent")) {
    StateSpace nom = read_state_space(*an);
    std::vector<Mat> verts;
    for (const auto* vn : an->children("vertex")) verts.push_back(vn->get_matrix("A"));
    if (verts.empty()) verts.push_back(nom.A);
    problem.agents.emplace_back(std::move(nom), std::move(verts));
  }
  const textio::Node* hn = model->child("topology");
  require(hn != nullptr, "model file: missing 'topology' group");
  BlockMat h(hn->get_matrix("H"), BlockPartition(parse_sizes(hn->get("row_blocks"))),
             BlockPartition(parse_sizes(hn->get("col_blocks"))));
  problem.topology = NetworkTopology(std::move(h));
  if (ctrl_out) {
    ctrl_out->reset();
    if (const textio::Node* cn = model->child("controller_network")) {
      ControllerNetwork ctrl;
      for (const auto* ln : cn->children("local")) ctrl.local.push_back(read_state_space(*ln));
      ctrl.hy = cn->get_matrix("hy");
      ctrl.hyhat = cn->get_matrix("hyhat");
      *ctrl_out = std::move(ctrl);
    }
  }
  return problem;
}

void save_problem(const NetworkProblem& problem, const std::string& path,
                  const ControllerNetwork* ctrl) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "save_problem: cannot write '" + path + "'");
  out << to_text(problem, ctrl);
}

NetworkProblem load_problem(const std::string& path,
                            std::optional<ControllerNetwork>* ctrl_out) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "load_problem: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return problem_from_text(ss.str(), ctrl_out);
}

}  // namespace netsynth::plant
