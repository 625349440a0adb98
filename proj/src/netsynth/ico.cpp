#include "netsynth/ico.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "netsynth/hinf.hpp"

namespace netsynth::ico {

using diss::QsrTriple;
using plant::StateSpace;

// ---------------------------------------------------------------------------
// OverboundBuilder

OverboundBuilder::OverboundBuilder(int base_dim) {
  require(base_dim > 0, "OverboundBuilder: base dimension must be positive");
  block_dims_.push_back(base_dim);
  aug_dim_ = base_dim;
  body_const_ = Mat::Zero(base_dim, base_dim);
}

int OverboundBuilder::add_symbol(const Mat& base, const VarRef& delta) {
  require(delta.rows == base.rows() && delta.cols == base.cols(),
          "OverboundBuilder: delta shape must match base");
  Symbol s;
  s.id = static_cast<int>(symbols_.size());
  s.base = base;
  s.delta = delta;
  s.has_delta = true;
  symbols_.push_back(std::move(s));
  return symbols_.back().id;
}

int OverboundBuilder::add_fixed_symbol(const Mat& base) {
  Symbol s;
  s.id = static_cast<int>(symbols_.size());
  s.base = base;
  s.has_delta = false;
  symbols_.push_back(std::move(s));
  return symbols_.back().id;
}

int OverboundBuilder::factor_rows(const Factor& f) const {
  if (f.is_const) return static_cast<int>(f.c.rows());
  const auto& s = symbols_[f.sym];
  return f.transposed ? static_cast<int>(s.base.cols()) : static_cast<int>(s.base.rows());
}

int OverboundBuilder::factor_cols(const Factor& f) const {
  if (f.is_const) return static_cast<int>(f.c.cols());
  const auto& s = symbols_[f.sym];
  return f.transposed ? static_cast<int>(s.base.rows()) : static_cast<int>(s.base.cols());
}

std::vector<OverboundBuilder::Factor> OverboundBuilder::flip_chain(
    const std::vector<Factor>& c) {
  std::vector<Factor> out;
  out.reserve(c.size());
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    Factor f = *it;
    if (f.is_const)
      f.c = Mat(f.c.transpose());
    else
      f.transposed = !f.transposed;
    out.push_back(std::move(f));
  }
  return out;
}

void OverboundBuilder::push_mono(Mono m) {
  // canonicalize: merge adjacent constants, drop identity-free chains into
  // the constant body when degree 0
  std::vector<Factor> merged;
  for (auto& f : m.chain) {
    if (f.is_const && !merged.empty() && merged.back().is_const) {
      merged.back().c = merged.back().c * f.c;
    } else {
      merged.push_back(std::move(f));
    }
  }
  m.chain = std::move(merged);
  m.degree = 0;
  for (const auto& f : m.chain)
    if (!f.is_const) ++m.degree;

  if (m.degree == 0 && m.rblk == 0 && m.cblk == 0) {
    Mat prod = m.chain.empty() ? Mat() : m.chain[0].c;
    for (std::size_t k = 1; k < m.chain.size(); ++k) prod = prod * m.chain[k].c;
    require(prod.rows() == block_dims_[0] && prod.cols() == block_dims_[0],
            "OverboundBuilder: constant product dimension mismatch");
    body_const_ += m.coeff * (prod + prod.transpose());
    return;
  }
  if (m.coeff == 0.0) return;
  monos_.push_back(std::move(m));
}

namespace {
void append_mat_bytes(std::string& key, const Mat& m) {
  const long r = m.rows(), c = m.cols();
  key.append(reinterpret_cast<const char*>(&r), sizeof(r));
  key.append(reinterpret_cast<const char*>(&c), sizeof(c));
  key.append(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
}
}  // namespace

// Exact simplification: monomials whose chains differ only in the trailing
// (or leading) constant are summed, since He(L V T1) + He(L V T2) =
// He(L V (T1 + T2)). This keeps border blocks and emitted terms compact.
void OverboundBuilder::merge_monos() {
  for (int side = 0; side < 2; ++side) {
    std::map<std::string, std::size_t> seen;
    std::vector<Mono> out;
    out.reserve(monos_.size());
    for (auto& m : monos_) {
      if (m.degree == 0) {
        out.push_back(std::move(m));
        continue;
      }
      const bool lead_const = m.chain.front().is_const;
      const bool tail_const = m.chain.back().is_const;
      // key over everything except the merged-side constant; fold coeff into
      // that constant
      std::string key;
      key.push_back(static_cast<char>(side));
      key.append(reinterpret_cast<const char*>(&m.rblk), sizeof(int));
      key.append(reinterpret_cast<const char*>(&m.cblk), sizeof(int));
      const std::size_t lo = (side == 1 && lead_const) ? 1 : 0;
      const std::size_t hi = m.chain.size() - ((side == 0 && tail_const) ? 1 : 0);
      for (std::size_t k = lo; k < hi; ++k) {
        const auto& f = m.chain[k];
        if (f.is_const) {
          key.push_back('C');
          append_mat_bytes(key, f.c);
        } else {
          key.push_back(f.transposed ? 'T' : 'V');
          key.append(reinterpret_cast<const char*>(&f.sym), sizeof(int));
        }
      }
      // the merged-side constant, coefficient folded in
      Mat side_const;
      if (side == 0) {
        const int cols = block_dims_[m.cblk];
        side_const = tail_const ? Mat(m.coeff * m.chain.back().c)
                                : Mat(m.coeff * Mat::Identity(cols, cols));
      } else {
        const int rows = block_dims_[m.rblk];
        side_const = lead_const ? Mat(m.coeff * m.chain.front().c)
                                : Mat(m.coeff * Mat::Identity(rows, rows));
      }
      auto it = seen.find(key);
      if (it == seen.end()) {
        Mono canon = std::move(m);
        canon.coeff = 1.0;
        if (side == 0) {
          if (tail_const)
            canon.chain.back().c = side_const;
          else
            canon.chain.push_back({true, side_const, -1, false});
        } else {
          if (lead_const)
            canon.chain.front().c = side_const;
          else
            canon.chain.insert(canon.chain.begin(), {true, side_const, -1, false});
        }
        seen.emplace(std::move(key), out.size());
        out.push_back(std::move(canon));
      } else {
        Mono& dst = out[it->second];
        if (side == 0)
          dst.chain.back().c += side_const;
        else
          dst.chain.front().c += side_const;
      }
    }
    monos_ = std::move(out);
    // drop monomials whose merged constant vanished
    std::vector<Mono> kept;
    kept.reserve(monos_.size());
    for (auto& m : monos_) {
      bool zero = false;
      for (const auto& f : m.chain)
        if (f.is_const && f.c.norm() == 0.0) zero = true;
      if (!zero) kept.push_back(std::move(m));
    }
    monos_ = std::move(kept);
  }
}

void OverboundBuilder::add_product(double coeff, const std::vector<ProductFactor>& factors) {
  require(!factors.empty(), "OverboundBuilder: empty product");
  // dimension check against the body
  {
    int rows = -1, cols = -1;
    for (const auto& f : factors) {
      int fr, fc;
      if (f.is_const) {
        fr = static_cast<int>(f.c.rows());
        fc = static_cast<int>(f.c.cols());
      } else {
        require(f.sym >= 0 && f.sym < static_cast<int>(symbols_.size()),
                "OverboundBuilder: unknown symbol");
        const auto& s = symbols_[f.sym];
        fr = f.transposed ? static_cast<int>(s.base.cols()) : static_cast<int>(s.base.rows());
        fc = f.transposed ? static_cast<int>(s.base.rows()) : static_cast<int>(s.base.cols());
      }
      if (rows < 0) rows = fr;
      require(cols < 0 || cols == fr, "OverboundBuilder: product chain mismatch");
      cols = fc;
    }
    require(rows == block_dims_[0] && cols == block_dims_[0],
            "OverboundBuilder: product must be body-sized");
  }
  original_.emplace_back(coeff, factors);

  // Taylor expansion: each variable factor contributes base + delta.
  std::vector<int> var_pos;
  for (std::size_t k = 0; k < factors.size(); ++k)
    if (!factors[k].is_const) var_pos.push_back(static_cast<int>(k));
  const int nv = static_cast<int>(var_pos.size());
  require(nv <= 20, "OverboundBuilder: too many variable factors");

  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << nv); ++bits) {
    // skip delta choices for symbols without perturbation
    bool valid = true;
    for (int k = 0; k < nv; ++k)
      if (((bits >> k) & 1) && !symbols_[factors[var_pos[k]].sym].has_delta) valid = false;
    if (!valid) continue;

    Mono m;
    m.rblk = m.cblk = 0;
    m.coeff = coeff;
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const auto& f = factors[k];
      if (f.is_const) {
        m.chain.push_back({true, f.c, -1, false});
        continue;
      }
      int vi = -1;
      for (int q = 0; q < nv; ++q)
        if (var_pos[q] == static_cast<int>(k)) vi = q;
      const auto& s = symbols_[f.sym];
      if ((bits >> vi) & 1) {
        m.chain.push_back({false, Mat(), f.sym, f.transposed});
      } else {
        m.chain.push_back({true, f.transposed ? Mat(s.base.transpose()) : s.base, -1, false});
      }
    }
    push_mono(std::move(m));
  }
}

void OverboundBuilder::add_body_constant(const Mat& sym) {
  require(sym.rows() == block_dims_[0] && sym.cols() == block_dims_[0],
          "OverboundBuilder: body constant size");
  body_const_ += 0.5 * (sym + sym.transpose());
}

Mat OverboundBuilder::eval_original(const std::map<int, Mat>& symbol_values) const {
  Mat out = body_const_;
  for (const auto& [coeff, factors] : original_) {
    Mat prod;
    bool first = true;
    for (const auto& f : factors) {
      Mat piece;
      if (f.is_const) {
        piece = f.c;
      } else {
        auto it = symbol_values.find(f.sym);
        const Mat& v = it != symbol_values.end() ? it->second : symbols_[f.sym].base;
        piece = f.transposed ? Mat(v.transpose()) : v;
      }
      prod = first ? piece : Mat(prod * piece);
      first = false;
    }
    out += coeff * (prod + prod.transpose());
  }
  return out;
}

LmiExpr OverboundBuilder::run(const std::vector<int>& order) {
  // peel passes
  merge_monos();
  for (int pass = 0; pass < 6; ++pass) {
    bool any_residual = false;
    for (const auto& m : monos_)
      if (m.degree >= 2) any_residual = true;
    if (!any_residual) break;

    bool progressed = false;
    for (int v : order) {
      merge_monos();
      // collect peelable monomials for symbol v
      struct Group {
        bool transposed;
        Mat tail;  // constant after the peeled factor (identity if empty-size)
        int cblk;
        std::vector<Mono> members;  // with the peeled factor removed -> L chains
      };
      std::vector<Group> groups;
      std::vector<Mono> keep;
      keep.reserve(monos_.size());

      for (auto& m : monos_) {
        if (m.degree < 2) {
          keep.push_back(std::move(m));
          continue;
        }
        int first_var = -1, last_var = -1;
        for (std::size_t k = 0; k < m.chain.size(); ++k)
          if (!m.chain[k].is_const) {
            if (first_var < 0) first_var = static_cast<int>(k);
            last_var = static_cast<int>(k);
          }
        Mono work = m;
        if (m.chain[last_var].sym != v) {
          if (m.chain[first_var].sym == v) {
            work.chain = flip_chain(m.chain);
            std::swap(work.rblk, work.cblk);
            // recompute positions
            first_var = -1;
            last_var = -1;
            for (std::size_t k = 0; k < work.chain.size(); ++k)
              if (!work.chain[k].is_const) {
                if (first_var < 0) first_var = static_cast<int>(k);
                last_var = static_cast<int>(k);
              }
            if (work.chain[last_var].sym != v) {
              keep.push_back(std::move(m));
              continue;
            }
          } else {
            keep.push_back(std::move(m));
            continue;
          }
        }
        progressed = true;
        const Factor peeled = work.chain[last_var];
        Mat tail;
        if (last_var + 1 < static_cast<int>(work.chain.size())) {
          require(work.chain[last_var + 1].is_const, "OverboundBuilder: canonical chain");
          tail = work.chain[last_var + 1].c;
        }
        Mono lpart = work;
        lpart.chain.assign(work.chain.begin(), work.chain.begin() + last_var);
        // find / create group
        Group* g = nullptr;
        for (auto& cand : groups) {
          if (cand.transposed != peeled.transposed || cand.cblk != work.cblk) continue;
          if (cand.tail.size() != tail.size()) continue;
          if (tail.size() && (cand.tail - tail).norm() != 0.0) continue;
          g = &cand;
          break;
        }
        if (!g) {
          groups.push_back({peeled.transposed, tail, work.cblk, {}});
          g = &groups.back();
        }
        g->members.push_back(std::move(lpart));
      }
      monos_ = std::move(keep);
      if (groups.empty()) continue;

      for (auto& g : groups) {
        const auto& sym = symbols_[v];
        const int q = g.transposed ? static_cast<int>(sym.base.cols())
                                   : static_cast<int>(sym.base.rows());
        const int t = static_cast<int>(block_dims_.size());
        block_dims_.push_back(q);
        aug_dim_ += q;

        for (auto& member : g.members) {
          Mono border;
          border.rblk = t;
          border.cblk = member.rblk;
          border.coeff = member.coeff;
          border.chain = flip_chain(member.chain);
          push_mono(std::move(border));
        }
        Mono yside;
        yside.rblk = t;
        yside.cblk = g.cblk;
        yside.coeff = 1.0;
        yside.chain.push_back({false, Mat(), v, g.transposed});
        if (g.tail.size()) yside.chain.push_back({true, g.tail, -1, false});
        push_mono(std::move(yside));

        Mono diag;
        diag.rblk = diag.cblk = t;
        diag.coeff = -1.0;
        diag.chain.push_back({true, Mat::Identity(q, q), -1, false});
        push_mono(std::move(diag));
      }
    }
    if (!progressed) break;
    merge_monos();
  }

  for (const auto& m : monos_)
    require(m.degree <= 1,
            "OverboundBuilder: order does not eliminate all bilinearity");

  // emit
  std::vector<int> off(block_dims_.size(), 0);
  for (std::size_t b = 1; b < block_dims_.size(); ++b)
    off[b] = off[b - 1] + block_dims_[b - 1];

  Mat cst = Mat::Zero(aug_dim_, aug_dim_);
  cst.topLeftCorner(block_dims_[0], block_dims_[0]) = body_const_;

  std::vector<const Mono*> linear;
  for (const auto& m : monos_) {
    if (m.degree == 1) {
      linear.push_back(&m);
      continue;
    }
    // degree-0 monomials outside the body (the -2I diagonals)
    Mat prod = m.chain[0].c;
    for (std::size_t k = 1; k < m.chain.size(); ++k) prod = prod * m.chain[k].c;
    Mat contrib = m.coeff * prod;
    cst.block(off[m.rblk], off[m.cblk], block_dims_[m.rblk], block_dims_[m.cblk]) += contrib;
    cst.block(off[m.cblk], off[m.rblk], block_dims_[m.cblk], block_dims_[m.rblk]) +=
        contrib.transpose();
  }

  LmiExpr expr = conic::affine(cst);
  for (const Mono* pm : linear) {
    const Mono& m = *pm;
    int vpos = -1;
    for (std::size_t k = 0; k < m.chain.size(); ++k)
      if (!m.chain[k].is_const) vpos = static_cast<int>(k);
    const Factor& vf = m.chain[vpos];
    const auto& sym = symbols_[vf.sym];
    require(sym.has_delta, "OverboundBuilder: fixed symbol left in linear term");

    Mat pre = Mat::Identity(block_dims_[m.rblk], block_dims_[m.rblk]);
    for (int k = 0; k < vpos; ++k) pre = (k == 0) ? m.chain[k].c : Mat(pre * m.chain[k].c);
    Mat post = Mat::Identity(block_dims_[m.cblk], block_dims_[m.cblk]);
    for (std::size_t k = vpos + 1; k < m.chain.size(); ++k)
      post = (k == static_cast<std::size_t>(vpos) + 1) ? m.chain[k].c : Mat(post * m.chain[k].c);

    Mat left = Mat::Zero(aug_dim_, pre.cols());
    left.block(off[m.rblk], 0, pre.rows(), pre.cols()) = m.coeff * pre;
    Mat right = Mat::Zero(post.rows(), aug_dim_);
    right.block(0, off[m.cblk], post.rows(), post.cols()) = post;
    if (vf.transposed) {
      expr.add_he_term(sym.delta, Mat(right.transpose()), Mat(left.transpose()));
    } else {
      expr.add_he_term(sym.delta, left, right);
    }
  }
  return expr;
}

LmiExpr overbound(const BmiTerm& term) {
  OverboundBuilder b(static_cast<int>(term.q.rows()));
  b.add_body_constant(term.q);
  int x = b.add_symbol(term.x_base, term.x_delta);
  int y = b.add_symbol(term.y_base, term.y_delta);
  b.add_product(1.0, {ProductFactor::symbol(x), ProductFactor::constant(term.n),
                      ProductFactor::symbol(y)});
  return b.run({y, x});
}

// ---------------------------------------------------------------------------
// Synthesis constraint assembly

namespace {

struct Dims {
  int n = 0, m = 0, l = 0, nh = 0;
  std::vector<int> n_i, m_i, l_i, nh_i;
};

Dims problem_dims(const plant::NetworkProblem& problem,
                  const std::vector<StateSpace>& controllers) {
  Dims d;
  require(problem.agents.size() == controllers.size(),
          "synthesis: one controller per agent required");
  for (std::size_t i = 0; i < problem.agents.size(); ++i) {
    const auto& a = problem.agents[i].nominal;
    const auto& c = controllers[i];
    require(c.m() == a.l() && c.l() == a.m(),
            "synthesis: controller dims must mirror agent dims");
    d.n_i.push_back(a.n());
    d.m_i.push_back(a.m());
    d.l_i.push_back(a.l());
    d.nh_i.push_back(c.n());
    d.n += a.n();
    d.m += a.m();
    d.l += a.l();
    d.nh += c.n();
  }
  return d;
}

Mat hbar_matrix(const Mat& h, const Mat& hy, const Mat& hyhat) {
  const int m = static_cast<int>(h.rows()), l = static_cast<int>(h.cols());
  Mat hbar = Mat::Zero(m + l, l + m);
  hbar.topLeftCorner(m, l) = h;
  hbar.topRightCorner(m, m) = hyhat;
  hbar.bottomLeftCorner(l, l) = hy;
  return hbar;
}

conic::BoolMat expand_mask(const conic::BoolMat& blocks, const std::vector<int>& row_dims,
                           const std::vector<int>& col_dims) {
  int r = 0, c = 0;
  for (int x : row_dims) r += x;
  for (int x : col_dims) c += x;
  conic::BoolMat out = conic::BoolMat::Constant(r, c, false);
  int ro = 0;
  for (int i = 0; i < static_cast<int>(row_dims.size()); ++i) {
    int co = 0;
    for (int j = 0; j < static_cast<int>(col_dims.size()); ++j) {
      if (blocks(i, j))
        out.block(ro, co, row_dims[i], col_dims[j]).setConstant(true);
      co += col_dims[j];
    }
    ro += row_dims[i];
  }
  return out;
}

}  // namespace

SparsityPattern SparsityPattern::dense(int n_agents) {
  SparsityPattern p;
  p.hy = conic::BoolMat::Constant(n_agents, n_agents, true);
  p.hyhat = conic::BoolMat::Constant(n_agents, n_agents, true);
  return p;
}

SparsityPattern SparsityPattern::decentralized(int n_agents) {
  SparsityPattern p;
  p.hy = conic::BoolMat::Constant(n_agents, n_agents, false);
  p.hyhat = conic::BoolMat::Constant(n_agents, n_agents, false);
  for (int i = 0; i < n_agents; ++i) {
    p.hy(i, i) = true;
    p.hyhat(i, i) = true;
  }
  return p;
}

int SparsityPattern::nonzero_blocks() const {
  int c = 0;
  for (int i = 0; i < hy.rows(); ++i)
    for (int j = 0; j < hy.cols(); ++j) c += (hy(i, j) ? 1 : 0) + (hyhat(i, j) ? 1 : 0);
  return c;
}

bool SparsityPattern::contains(const SparsityPattern& other) const {
  for (int i = 0; i < hy.rows(); ++i)
    for (int j = 0; j < hy.cols(); ++j) {
      if (other.hy(i, j) && !hy(i, j)) return false;
      if (other.hyhat(i, j) && !hyhat(i, j)) return false;
    }
  return true;
}

VerifyReport verify_point(const plant::NetworkProblem& problem, const FeasiblePoint& fp,
                          double tol) {
  VerifyReport rep;
  const Dims d = problem_dims(problem, fp.controllers);

  std::vector<StateSpace> nominal;
  for (const auto& a : problem.agents) nominal.push_back(a.nominal);
  auto cl = plant::closed_loop(nominal, problem.topology.h.m, fp.controllers, fp.hy,
                               fp.hyhat);
  rep.hinf_margin = -numlin::eig_max_sym(hinf::bounded_real_matrix(cl, fp.y, fp.nu));
  rep.y_min_eig = -numlin::eig_max_sym(Mat(-fp.y));

  rep.kyp_margin = std::numeric_limits<double>::infinity();
  rep.p_min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < problem.agents.size(); ++i) {
    rep.p_min_eig = std::min(rep.p_min_eig, -numlin::eig_max_sym(Mat(-fp.p_agent[i])));
    for (const auto& va : problem.agents[i].vertex_a) {
      StateSpace vtx(va, problem.agents[i].nominal.B, problem.agents[i].nominal.C,
                     problem.agents[i].nominal.D);
      rep.kyp_margin =
          std::min(rep.kyp_margin,
                   -numlin::eig_max_sym(diss::kyp_matrix(vtx, fp.agent_triples[i],
                                                         fp.p_agent[i])));
    }
  }
  rep.ctrl_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fp.controllers.size(); ++i) {
    rep.p_min_eig = std::min(rep.p_min_eig, -numlin::eig_max_sym(Mat(-fp.p_ctrl[i])));
    rep.ctrl_margin =
        std::min(rep.ctrl_margin,
                 -numlin::eig_max_sym(diss::kyp_matrix(fp.controllers[i],
                                                       fp.ctrl_triples[i], fp.p_ctrl[i])));
  }

  std::vector<Mat> qb, sb, rb;
  std::vector<int> out_dims, in_dims;
  for (std::size_t i = 0; i < problem.agents.size(); ++i) {
    qb.push_back(fp.agent_triples[i].q);
    sb.push_back(fp.agent_triples[i].s);
    rb.push_back(fp.agent_triples[i].r);
    out_dims.push_back(d.l_i[i]);
    in_dims.push_back(d.m_i[i]);
  }
  for (std::size_t i = 0; i < fp.controllers.size(); ++i) {
    qb.push_back(fp.ctrl_triples[i].q);
    sb.push_back(fp.ctrl_triples[i].s);
    rb.push_back(fp.ctrl_triples[i].r);
    out_dims.push_back(d.m_i[i]);
    in_dims.push_back(d.l_i[i]);
  }
  rep.ndt_margin = -numlin::eig_max_sym(diss::ndt_matrix(
      qb, sb, rb, hbar_matrix(problem.topology.h.m, fp.hy, fp.hyhat), out_dims, in_dims));

  rep.ok = rep.hinf_margin >= -tol && rep.kyp_margin >= -tol && rep.ctrl_margin >= -tol &&
           rep.ndt_margin >= -tol && rep.y_min_eig > 0 && rep.p_min_eig > 0;
  if (!rep.ok) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "hinf=%.3e kyp=%.3e ctrl=%.3e ndt=%.3e ymin=%.3e pmin=%.3e",
                  rep.hinf_margin, rep.kyp_margin, rep.ctrl_margin, rep.ndt_margin,
                  rep.y_min_eig, rep.p_min_eig);
    rep.detail = buf;
  }
  return rep;
}

namespace {

// Affine matrix expression: sum of pre * SYMBOL * post summands (sym < 0
// means a constant summand equal to pre * post).
struct Summand {
  Mat pre;
  int sym = -1;
  Mat post;
};
using AffMat = std::vector<Summand>;

AffMat aff_const(const Mat& c) {
  return {Summand{c, -1, Mat::Identity(c.cols(), c.cols())}};
}

// Adds He(emb_row * prod(factors) * emb_col') to the builder, expanding the
// product of affine expressions into elementary chains.
void add_affine_product(OverboundBuilder& ob, const Mat& emb_row,
                        const std::vector<const AffMat*>& factors, const Mat& emb_col,
                        double coeff = 1.0) {
  std::vector<std::size_t> idx(factors.size(), 0);
  while (true) {
    std::vector<ProductFactor> fs;
    fs.push_back(ProductFactor::constant(emb_row));
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const Summand& s = (*factors[k])[idx[k]];
      if (s.sym < 0) {
        fs.push_back(ProductFactor::constant(s.pre * s.post));
      } else {
        fs.push_back(ProductFactor::constant(s.pre));
        fs.push_back(ProductFactor::symbol(s.sym));
        fs.push_back(ProductFactor::constant(s.post));
      }
    }
    fs.push_back(ProductFactor::constant(Mat(emb_col.transpose())));
    ob.add_product(coeff, fs);

    // next choice
    std::size_t k = 0;
    for (; k < factors.size(); ++k) {
      if (++idx[k] < factors[k]->size()) break;
      idx[k] = 0;
    }
    if (k == factors.size()) break;
  }
}

}  // namespace

SynthVars compose_constraints(conic::ConicProblem& prob,
                              const plant::NetworkProblem& problem,
                              const FeasiblePoint& fp, const SparsityPattern& pattern,
                              const SynthMargins& margins, bool with_dissipativity) {
  const Dims d = problem_dims(problem, fp.controllers);
  const int N = problem.n_agents();
  const Mat& h = problem.topology.h.m;

  // the base interconnection must respect the pattern
  {
    int lro = 0, mro = 0;
    for (int i = 0; i < N; ++i) {
      int lco = 0, mco = 0;
      for (int j = 0; j < N; ++j) {
        if (!pattern.hy(i, j))
          require(fp.hy.block(lro, lco, d.l_i[i], d.l_i[j]).norm() == 0.0,
                  "compose_constraints: base hy violates the pattern");
        if (!pattern.hyhat(i, j))
          require(fp.hyhat.block(mro, mco, d.m_i[i], d.m_i[j]).norm() == 0.0,
                  "compose_constraints: base hyhat violates the pattern");
        lco += d.l_i[j];
        mco += d.m_i[j];
      }
      lro += d.l_i[i];
      mro += d.m_i[i];
    }
  }

  SynthVars vars;
  for (int i = 0; i < N; ++i)
    vars.d_bank.push_back(prob.add_matrix_var(d.nh_i[i] + d.m_i[i], d.nh_i[i] + d.l_i[i],
                                              "dK" + std::to_string(i)));
  vars.d_hy = prob.add_matrix_var(d.l, d.l, "dHy", expand_mask(pattern.hy, d.l_i, d.l_i));
  vars.d_hyhat =
      prob.add_matrix_var(d.m, d.m, "dHyhat", expand_mask(pattern.hyhat, d.m_i, d.m_i));
  const int ncl = d.n + d.nh;
  vars.d_y = prob.add_symmetric_var(ncl, "dY");
  vars.nu = prob.add_scalar_var("nu");
  prob.set_initial(vars.nu, Mat::Constant(1, 1, fp.nu * (1.0 + 1e-6) + 1e-9));

  for (int i = 0; with_dissipativity && i < N; ++i) {
    vars.d_p_agent.push_back(prob.add_symmetric_var(d.n_i[i], "dPa" + std::to_string(i)));
    vars.d_q_agent.push_back(prob.add_symmetric_var(d.l_i[i], "dQa" + std::to_string(i)));
    vars.d_s_agent.push_back(
        prob.add_matrix_var(d.l_i[i], d.m_i[i], "dSa" + std::to_string(i)));
    vars.d_r_agent.push_back(prob.add_symmetric_var(d.m_i[i], "dRa" + std::to_string(i)));
    vars.d_p_ctrl.push_back(prob.add_symmetric_var(d.nh_i[i], "dPc" + std::to_string(i)));
    vars.d_q_ctrl.push_back(prob.add_symmetric_var(d.m_i[i], "dQc" + std::to_string(i)));
    vars.d_s_ctrl.push_back(
        prob.add_matrix_var(d.m_i[i], d.l_i[i], "dSc" + std::to_string(i)));
    vars.d_r_ctrl.push_back(prob.add_symmetric_var(d.l_i[i], "dRc" + std::to_string(i)));
  }

  std::vector<Mat> ab, bb, cb;
  for (const auto& a : problem.agents) {
    ab.push_back(a.nominal.A);
    bb.push_back(a.nominal.B);
    cb.push_back(a.nominal.C);
  }
  const Mat a_d = plant::blkdiag(ab), b_d = plant::blkdiag(bb), c_d = plant::blkdiag(cb);

  // --- bounded-real inequality, sequentially overbounded -------------------
  {
    const int dim = ncl + (d.m + d.l) + (d.l + d.m);
    OverboundBuilder ob(dim);

    Mat e0 = Mat::Zero(dim, ncl);
    e0.topRows(ncl) = Mat::Identity(ncl, ncl);
    Mat e1 = Mat::Zero(dim, d.m + d.l);
    e1.block(ncl, 0, d.m + d.l, d.m + d.l) = Mat::Identity(d.m + d.l, d.m + d.l);
    Mat e2 = Mat::Zero(dim, d.l + d.m);
    e2.bottomRows(d.l + d.m) = Mat::Identity(d.l + d.m, d.l + d.m);

    Mat a_bar = Mat::Zero(ncl, ncl);
    a_bar.topLeftCorner(d.n, d.n) = a_d + b_d * h * c_d;
    Mat b_bar = Mat::Zero(ncl, d.m + d.l);
    b_bar.topLeftCorner(d.n, d.m) = b_d;
    Mat c_bar = Mat::Zero(d.l + d.m, ncl);
    c_bar.topLeftCorner(d.l, d.n) = c_d;

    Mat btil_fix = Mat::Zero(ncl, d.nh + d.m);
    btil_fix.block(d.n, 0, d.nh, d.nh) = Mat::Identity(d.nh, d.nh);
    Mat u_b = Mat::Zero(ncl, d.m);
    u_b.topRows(d.n) = b_d;
    Mat w_b = Mat::Zero(d.m, d.nh + d.m);
    w_b.rightCols(d.m) = Mat::Identity(d.m, d.m);

    Mat ctil_fix = Mat::Zero(d.nh + d.l, ncl);
    ctil_fix.block(0, d.n, d.nh, d.nh) = Mat::Identity(d.nh, d.nh);
    Mat u_c = Mat::Zero(d.nh + d.l, d.l);
    u_c.bottomRows(d.l) = Mat::Identity(d.l, d.l);
    Mat w_c = Mat::Zero(d.l, ncl);
    w_c.leftCols(d.n) = c_d;

    Mat u_h = Mat::Zero(d.l + d.m, d.m);
    u_h.bottomRows(d.m) = Mat::Identity(d.m, d.m);
    Mat w_h = Mat::Zero(d.m, d.nh + d.m);
    w_h.rightCols(d.m) = Mat::Identity(d.m, d.m);

    Mat u_t = Mat::Zero(d.nh + d.l, d.l);
    u_t.bottomRows(d.l) = Mat::Identity(d.l, d.l);
    Mat w_t = Mat::Zero(d.l, d.m + d.l);
    w_t.rightCols(d.l) = Mat::Identity(d.l, d.l);

    const int sy = ob.add_symbol(fp.y, vars.d_y);
    const int shy = ob.add_symbol(fp.hy, vars.d_hy);
    const int shyhat = ob.add_symbol(fp.hyhat, vars.d_hyhat);
    std::vector<int> sk(N);
    AffMat bank;
    {
      int so = 0, oo = 0, sc = 0, ic = 0;
      for (int i = 0; i < N; ++i) {
        Mat u = Mat::Zero(d.nh + d.m, d.nh_i[i] + d.m_i[i]);
        u.block(so, 0, d.nh_i[i], d.nh_i[i]) = Mat::Identity(d.nh_i[i], d.nh_i[i]);
        u.block(d.nh + oo, d.nh_i[i], d.m_i[i], d.m_i[i]) =
            Mat::Identity(d.m_i[i], d.m_i[i]);
        Mat w = Mat::Zero(d.nh_i[i] + d.l_i[i], d.nh + d.l);
        w.block(0, sc, d.nh_i[i], d.nh_i[i]) = Mat::Identity(d.nh_i[i], d.nh_i[i]);
        w.block(d.nh_i[i], d.nh + ic, d.l_i[i], d.l_i[i]) =
            Mat::Identity(d.l_i[i], d.l_i[i]);
        sk[i] = ob.add_symbol(plant::bank_matrix({fp.controllers[i]}), vars.d_bank[i]);
        bank.push_back({u, sk[i], w});
        so += d.nh_i[i];
        oo += d.m_i[i];
        sc += d.nh_i[i];
        ic += d.l_i[i];
      }
    }

    AffMat yexp{{Mat::Identity(ncl, ncl), sy, Mat::Identity(ncl, ncl)}};
    AffMat btil = aff_const(btil_fix);
    btil.push_back({u_b, shyhat, w_b});
    AffMat ctil = aff_const(ctil_fix);
    ctil.push_back({u_c, shy, w_c});
    AffMat hhat{{u_h, shyhat, w_h}};
    AffMat htil{{u_t, shy, w_t}};
    AffMat abar_e = aff_const(a_bar);
    AffMat bbar_e = aff_const(b_bar);

    // He(Y (Abar + Btil K Ctil)) at the (state, state) block
    add_affine_product(ob, e0, {&yexp, &abar_e}, e0);
    add_affine_product(ob, e0, {&yexp, &btil, &bank, &ctil}, e0);
    // He on the (state, input) block: Y (Bbar + Btil K Htil)
    add_affine_product(ob, e0, {&yexp, &bbar_e}, e1);
    add_affine_product(ob, e0, {&yexp, &btil, &bank, &htil}, e1);
    // (output, state): Cbar + Hhat K Ctil
    ob.add_body_constant(Mat(e2 * c_bar * e0.transpose() +
                             (e2 * c_bar * e0.transpose()).transpose()));
    add_affine_product(ob, e2, {&hhat, &bank, &ctil}, e0);
    // (output, input): Hhat K Htil
    add_affine_product(ob, e2, {&hhat, &bank, &htil}, e1);

    // peel the Lyapunov variable first so it never enters border rows (it
    // dominates the Schur assembly cost), then the routing and bank factors
    std::vector<int> order{sy, shy};
    for (int i = 0; i < N; ++i) order.push_back(sk[i]);
    order.push_back(shyhat);
    LmiExpr brl = ob.run(order);

    // -nu I on the input and output diagonal blocks of the body
    const int adim = ob.augmented_dim();
    Mat li = Mat::Zero(adim, d.m + d.l + d.l + d.m);
    li.block(ncl, 0, d.m + d.l + d.l + d.m, d.m + d.l + d.l + d.m) =
        -0.5 * Mat::Identity(d.m + d.l + d.l + d.m, d.m + d.l + d.l + d.m);
    Mat ri = Mat::Zero(d.m + d.l + d.l + d.m, adim);
    ri.block(0, ncl, d.m + d.l + d.l + d.m, d.m + d.l + d.l + d.m) =
        Mat::Identity(d.m + d.l + d.l + d.m, d.m + d.l + d.l + d.m);
    brl.add_scaled_identity_term(vars.nu, li, ri);

    prob.add_negdef(brl, margins.strict * (1.0 + a_bar.norm()), "bounded_real");
  }

  // --- Lyapunov variable positivity ---------------------------------------
  {
    LmiExpr ypos = conic::affine(fp.y);
    ypos.add_he_term(vars.d_y, Mat(0.5 * Mat::Identity(ncl, ncl)),
                     Mat::Identity(ncl, ncl));
    prob.add_posdef(ypos, margins.strict, "y_pos");
  }

  // --- agent vertex KYP inequalities (linear) ------------------------------
  for (int i = 0; with_dissipativity && i < N; ++i) {
    const auto& agent = problem.agents[i];
    int vtx = 0;
    for (const auto& va : agent.vertex_a) {
      StateSpace vss(va, agent.nominal.B, agent.nominal.C, agent.nominal.D);
      LmiExpr e = diss::kyp_lmi(vss, vars.d_p_agent[i], vars.d_q_agent[i],
                                vars.d_s_agent[i], vars.d_r_agent[i]);
      e.add_constant(diss::kyp_matrix(vss, fp.agent_triples[i], fp.p_agent[i]));
      prob.add_negdef(e, margins.semidef,
                      "kyp_a" + std::to_string(i) + "v" + std::to_string(vtx++));
    }
    LmiExpr ppos = conic::affine(fp.p_agent[i]);
    ppos.add_he_term(vars.d_p_agent[i], Mat(0.5 * Mat::Identity(d.n_i[i], d.n_i[i])),
                     Mat::Identity(d.n_i[i], d.n_i[i]));
    prob.add_posdef(ppos, margins.strict, "pa_pos" + std::to_string(i));
  }

  // --- controller dissipativity inequalities, overbounded ------------------
  for (int i = 0; with_dissipativity && i < N; ++i) {
    const int nh = d.nh_i[i], mi = d.m_i[i], li = d.l_i[i];
    const int dim = nh + li;
    OverboundBuilder ob(dim);
    const Mat bank_i = plant::bank_matrix({fp.controllers[i]});
    const int sk = ob.add_symbol(bank_i, vars.d_bank[i]);
    const int sp = ob.add_symbol(fp.p_ctrl[i], vars.d_p_ctrl[i]);
    const int sq = ob.add_symbol(fp.ctrl_triples[i].q, vars.d_q_ctrl[i]);
    const int ss = ob.add_symbol(fp.ctrl_triples[i].s, vars.d_s_ctrl[i]);
    const int sr = ob.add_symbol(fp.ctrl_triples[i].r, vars.d_r_ctrl[i]);

    Mat etop = Mat::Zero(dim, nh);
    etop.topRows(nh) = Mat::Identity(nh, nh);
    Mat ebot = Mat::Zero(dim, li);
    ebot.bottomRows(li) = Mat::Identity(li, li);
    Mat pi_t = Mat::Zero(nh, nh + mi);
    pi_t.leftCols(nh) = Mat::Identity(nh, nh);
    Mat pi_b = Mat::Zero(mi, nh + mi);
    pi_b.rightCols(mi) = Mat::Identity(mi, mi);

    using PF = ProductFactor;
    // He(P [A B]) = He(etop P pi_t K)
    ob.add_product(1.0, {PF::constant(etop), PF::symbol(sp), PF::constant(pi_t),
                         PF::symbol(sk)});
    // He(-S' [C D]) rows
    ob.add_product(-1.0, {PF::constant(ebot), PF::symbol(ss, true), PF::constant(pi_b),
                          PF::symbol(sk)});
    // -[C D]' Q [C D]
    ob.add_product(-0.5, {PF::symbol(sk, true), PF::constant(Mat(pi_b.transpose())),
                          PF::symbol(sq), PF::constant(pi_b), PF::symbol(sk)});
    // -R
    ob.add_product(-0.5, {PF::constant(ebot), PF::symbol(sr), PF::constant(Mat(ebot.transpose()))});

    LmiExpr e = ob.run({sk, sq, ss, sp});
    prob.add_negdef(e, margins.semidef, "ctrl_diss" + std::to_string(i));

    LmiExpr ppos = conic::affine(fp.p_ctrl[i]);
    ppos.add_he_term(vars.d_p_ctrl[i], Mat(0.5 * Mat::Identity(nh, nh)),
                     Mat::Identity(nh, nh));
    prob.add_posdef(ppos, margins.strict, "pc_pos" + std::to_string(i));
  }

  // --- network stability inequality, overbounded ---------------------------
  if (with_dissipativity) {
    const int dim = d.l + d.m;   // stacked operator outputs
    const int idim = d.m + d.l;  // stacked operator inputs
    OverboundBuilder ob(dim);

    Mat hbar_fix = Mat::Zero(idim, dim);
    hbar_fix.topLeftCorner(d.m, d.l) = h;
    Mat u1 = Mat::Zero(idim, d.m);
    u1.topRows(d.m) = Mat::Identity(d.m, d.m);
    Mat w1 = Mat::Zero(d.m, dim);
    w1.rightCols(d.m) = Mat::Identity(d.m, d.m);
    Mat u2 = Mat::Zero(idim, d.l);
    u2.bottomRows(d.l) = Mat::Identity(d.l, d.l);
    Mat w2 = Mat::Zero(d.l, dim);
    w2.leftCols(d.l) = Mat::Identity(d.l, d.l);

    const int shy = ob.add_symbol(fp.hy, vars.d_hy);
    const int shyhat = ob.add_symbol(fp.hyhat, vars.d_hyhat);
    AffMat hbar = aff_const(hbar_fix);
    hbar.push_back({u1, shyhat, w1});
    hbar.push_back({u2, shy, w2});
    // per-operator embeddings: agent outputs first, controller outputs second
    int lo = 0, mo = 0;
    for (int i = 0; i < 2 * N; ++i) {
      const bool agent = i < N;
      const int k = agent ? i : i - N;
      const int odim = agent ? d.l_i[k] : d.m_i[k];
      const int idim_i = agent ? d.m_i[k] : d.l_i[k];
      const int sq = ob.add_symbol(agent ? fp.agent_triples[k].q : fp.ctrl_triples[k].q,
                                   agent ? vars.d_q_agent[k] : vars.d_q_ctrl[k]);
      const int ssym = ob.add_symbol(agent ? fp.agent_triples[k].s : fp.ctrl_triples[k].s,
                                     agent ? vars.d_s_agent[k] : vars.d_s_ctrl[k]);
      const int sr = ob.add_symbol(agent ? fp.agent_triples[k].r : fp.ctrl_triples[k].r,
                                   agent ? vars.d_r_agent[k] : vars.d_r_ctrl[k]);

      Mat emb_out = Mat::Zero(dim, odim);
      emb_out.block(lo, 0, odim, odim) = Mat::Identity(odim, odim);
      Mat emb_in = Mat::Zero(idim, idim_i);
      emb_in.block(mo, 0, idim_i, idim_i) = Mat::Identity(idim_i, idim_i);

      using PF = ProductFactor;
      // (1/2) Q_i
      ob.add_product(0.5, {PF::constant(emb_out), PF::symbol(sq),
                           PF::constant(Mat(emb_out.transpose()))});
      // S_i (block-row i of Hbar): He(emb_out S_i emb_in' Hbar)
      for (const auto& sm : hbar) {
        if (sm.sym < 0) {
          ob.add_product(1.0, {PF::constant(emb_out), PF::symbol(ssym),
                               PF::constant(Mat(emb_in.transpose() * sm.pre * sm.post))});
        } else {
          ob.add_product(1.0, {PF::constant(emb_out), PF::symbol(ssym),
                               PF::constant(Mat(emb_in.transpose() * sm.pre)),
                               PF::symbol(sm.sym), PF::constant(sm.post)});
        }
      }
      // (1/2) Hbar' emb_in R_i emb_in' Hbar
      for (const auto& sl : hbar)
        for (const auto& sr2 : hbar) {
          std::vector<PF> fs;
          if (sl.sym < 0) {
            fs.push_back(PF::constant(Mat((sl.pre * sl.post).transpose() * emb_in)));
          } else {
            fs.push_back(PF::constant(Mat(sl.post.transpose())));
            fs.push_back(PF::symbol(sl.sym, true));
            fs.push_back(PF::constant(Mat(sl.pre.transpose() * emb_in)));
          }
          fs.push_back(PF::symbol(sr));
          if (sr2.sym < 0) {
            fs.push_back(PF::constant(Mat(emb_in.transpose() * sr2.pre * sr2.post)));
          } else {
            fs.push_back(PF::constant(Mat(emb_in.transpose() * sr2.pre)));
            fs.push_back(PF::symbol(sr2.sym));
            fs.push_back(PF::constant(sr2.post));
          }
          ob.add_product(0.5, fs);
        }

      lo += odim;
      mo += idim_i;
    }

    LmiExpr e = ob.run({shy, shyhat});
    prob.add_negdef(e, margins.strict * (1.0 + h.norm()), "network_stability");
  }

  return vars;
}

FeasiblePoint apply_solution(const FeasiblePoint& fp, const SynthVars& vars,
                             const std::map<int, Mat>& values) {
  FeasiblePoint out = fp;
  for (std::size_t i = 0; i < fp.controllers.size(); ++i) {
    const int nh = fp.controllers[i].n();
    const int mi = fp.controllers[i].l();
    const int li = fp.controllers[i].m();
    Mat bank = plant::bank_matrix({fp.controllers[i]}) + values.at(vars.d_bank[i].id);
    out.controllers[i] = plant::StateSpace(
        bank.topLeftCorner(nh, nh), bank.topRightCorner(nh, li),
        bank.bottomLeftCorner(mi, nh), bank.bottomRightCorner(mi, li));
  }
  out.hy = fp.hy + values.at(vars.d_hy.id);
  out.hyhat = fp.hyhat + values.at(vars.d_hyhat.id);
  out.y = fp.y + values.at(vars.d_y.id);
  out.nu = values.at(vars.nu.id)(0, 0);
  for (std::size_t i = 0; i < vars.d_p_agent.size(); ++i) {
    out.p_agent[i] = fp.p_agent[i] + values.at(vars.d_p_agent[i].id);
    out.agent_triples[i] =
        diss::QsrTriple(fp.agent_triples[i].q + values.at(vars.d_q_agent[i].id),
                        fp.agent_triples[i].s + values.at(vars.d_s_agent[i].id),
                        fp.agent_triples[i].r + values.at(vars.d_r_agent[i].id));
    out.p_ctrl[i] = fp.p_ctrl[i] + values.at(vars.d_p_ctrl[i].id);
    out.ctrl_triples[i] =
        diss::QsrTriple(fp.ctrl_triples[i].q + values.at(vars.d_q_ctrl[i].id),
                        fp.ctrl_triples[i].s + values.at(vars.d_s_ctrl[i].id),
                        fp.ctrl_triples[i].r + values.at(vars.d_r_ctrl[i].id));
  }
  return out;
}

IcoResult ico_iterate(const plant::NetworkProblem& problem, const FeasiblePoint& base,
                      const SparsityPattern& pattern, const IcoOptions& opts) {
  IcoResult res;
  res.point = base;

  auto accept = [&](const VerifyReport& rep) {
    if (opts.with_dissipativity) return rep.ok;
    return rep.hinf_margin >= -1e-9 && rep.y_min_eig > 0;
  };

  auto base_check = verify_point(problem, base);
  if (!opts.allow_infeasible_start)
    require(accept(base_check), "ico_iterate: base point fails verification (" +
                                    base_check.detail + ")");

  bool have_feasible = accept(base_check);
  FeasiblePoint current = base;
  for (int it = 0; it < opts.max_iters; ++it) {
    conic::ConicProblem prob;
    SynthVars vars = compose_constraints(prob, problem, current, pattern, opts.margins,
                                         opts.with_dissipativity);
    prob.add_objective(vars.nu, 1.0);
    for (const auto& dk : vars.d_bank)
      prob.add_quadratic_objective(dk, 2e-6, Mat::Zero(dk.rows, dk.cols));

    auto sol = prob.solve(opts.solver);
    if (sol.status != conic::SolveStatus::Optimal) {
      res.message = "solver: " + sol.message;
      res.converged = have_feasible && !res.trace.empty();
      return res;
    }
    FeasiblePoint next = apply_solution(current, vars, sol.values);
    auto check = verify_point(problem, next, 1e-9);
    if (!accept(check)) {
      res.message = "iterate failed verification (" + check.detail + ")";
      res.converged = have_feasible && !res.trace.empty();
      return res;
    }
    if (have_feasible && next.nu > current.nu + 1e-9) {
      res.message = "no descent";
      res.converged = true;
      return res;
    }
    have_feasible = true;

    IcoTraceRow row;
    row.iteration = it;
    row.nu = next.nu;
    row.worst_constraint_eig =
        -std::min({check.hinf_margin, check.kyp_margin, check.ctrl_margin, check.ndt_margin});
    for (const auto& dk : vars.d_bank)
      row.delta_bank = std::max(row.delta_bank, sol.values.at(dk.id).norm());
    row.delta_h = std::hypot(sol.values.at(vars.d_hy.id).norm(),
                             sol.values.at(vars.d_hyhat.id).norm());
    row.delta_y = sol.values.at(vars.d_y.id).norm();
    res.trace.push_back(row);

    const double decrease = (current.nu - next.nu) / std::max(next.nu, 1e-12);
    current = next;
    res.point = current;
    if (opts.verbose)
      std::fprintf(stderr, "  ico it=%2d nu=%.6f rel_decrease=%.3e\n", it, next.nu,
                   decrease);
    if (decrease <= opts.epsilon) {
      res.converged = true;
      res.message = "relative decrease below threshold";
      return res;
    }
  }
  res.converged = true;
  res.message = "iteration limit";
  return res;
}

}  // namespace netsynth::ico
