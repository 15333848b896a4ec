#include "parafoil/socp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>

namespace parafoil {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
  int offset{0};
  int dim{0};
  bool soc{false};
};

std::vector<Block> make_blocks(const ConeDims& dims) {
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(dims.nonneg) + dims.soc.size());
  int off = 0;
  for (int i = 0; i < dims.nonneg; ++i) blocks.push_back({off++, 1, false});
  for (int m : dims.soc) {
    blocks.push_back({off, m, true});
    off += m;
  }
  return blocks;
}

// (t, x) -> t^2 - |x|^2 without cancellation.
double soc_residual(const VectorXd& v, const Block& b) {
  const double t = v[b.offset];
  const double nx = b.dim > 1 ? v.segment(b.offset + 1, b.dim - 1).norm() : 0.0;
  return (t - nx) * (t + nx);
}

// Nesterov-Todd scaling: W z = W^{-1} s = lambda. For an orthant row W is the
// scalar sqrt(s/z); for a second-order cone W = beta (2 v v' - J) with
// J = diag(1, -I) and v'Jv = 1.
struct Scaling {
  VectorXd diag;   // orthant rows
  VectorXd wbar;   // stacked hyperbolic unit vectors for SOC blocks
  VectorXd beta;   // per block (unused for orthant rows)
};

bool compute_scaling(const std::vector<Block>& blocks, const VectorXd& s, const VectorXd& z,
                     Scaling& w) {
  const auto m = s.size();
  w.diag.setZero(m);
  w.wbar.setZero(m);
  w.beta.setZero(static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Block& b = blocks[k];
    if (!b.soc) {
      const double sv = s[b.offset];
      const double zv = z[b.offset];
      if (!(sv > 0.0) || !(zv > 0.0)) return false;
      w.diag[b.offset] = std::sqrt(sv / zv);
      continue;
    }
    const double s2 = soc_residual(s, b);
    const double z2 = soc_residual(z, b);
    if (!(s2 > 0.0) || !(z2 > 0.0) || !(s[b.offset] > 0.0) || !(z[b.offset] > 0.0)) return false;
    const double sn = std::sqrt(s2);
    const double zn = std::sqrt(z2);
    const auto ss = s.segment(b.offset, b.dim) / sn;
    const auto zs = z.segment(b.offset, b.dim) / zn;
    const double dot = ss.dot(zs);
    const double gamma = std::sqrt(0.5 * (1.0 + dot));
    auto wb = w.wbar.segment(b.offset, b.dim);
    wb = ss;
    wb[0] += zs[0];
    if (b.dim > 1) wb.tail(b.dim - 1) -= zs.tail(b.dim - 1);
    wb /= 2.0 * gamma;
    // v = (wbar + e) / sqrt(2 (wbar_0 + 1)) so that W = beta (2 v v' - J).
    const double w0 = wb[0];
    wb[0] += 1.0;
    wb /= std::sqrt(2.0 * (w0 + 1.0));
    w.beta[static_cast<Eigen::Index>(k)] = std::sqrt(sn / zn);
  }
  return true;
}

// out = W v (inverse = false) or W^{-1} v (inverse = true), block by block.
void apply_scaling(const std::vector<Block>& blocks, const Scaling& w, const VectorXd& v, VectorXd& out,
                   bool inverse) {
  out.resize(v.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Block& b = blocks[k];
    if (!b.soc) {
      out[b.offset] = inverse ? v[b.offset] / w.diag[b.offset] : v[b.offset] * w.diag[b.offset];
      continue;
    }
    const auto wb = w.wbar.segment(b.offset, b.dim);
    const auto vb = v.segment(b.offset, b.dim);
    auto ob = out.segment(b.offset, b.dim);
    const double beta = w.beta[static_cast<Eigen::Index>(k)];
    if (!inverse) {
      // beta (2 w (w'v) - J v)
      const double wv = wb.dot(vb);
      ob = 2.0 * wv * wb;
      ob[0] -= vb[0];
      if (b.dim > 1) ob.tail(b.dim - 1) += vb.tail(b.dim - 1);
      ob *= beta;
    } else {
      // (1/beta) (2 Jw (w'J v) - J v)
      double wjv = wb[0] * vb[0];
      if (b.dim > 1) wjv -= wb.tail(b.dim - 1).dot(vb.tail(b.dim - 1));
      ob[0] = 2.0 * wjv * wb[0] - vb[0];
      if (b.dim > 1) ob.tail(b.dim - 1) = -2.0 * wjv * wb.tail(b.dim - 1) + vb.tail(b.dim - 1);
      ob /= beta;
    }
  }
}

// Jordan product u o v.
VectorXd jordan_product(const std::vector<Block>& blocks, const VectorXd& u, const VectorXd& v) {
  VectorXd out(u.size());
  for (const Block& b : blocks) {
    if (!b.soc) {
      out[b.offset] = u[b.offset] * v[b.offset];
      continue;
    }
    const auto ub = u.segment(b.offset, b.dim);
    const auto vb = v.segment(b.offset, b.dim);
    out[b.offset] = ub.dot(vb);
    if (b.dim > 1) out.segment(b.offset + 1, b.dim - 1) = ub[0] * vb.tail(b.dim - 1) + vb[0] * ub.tail(b.dim - 1);
  }
  return out;
}

// Solves lambda o x = r for x.
VectorXd jordan_divide(const std::vector<Block>& blocks, const VectorXd& lambda, const VectorXd& r) {
  VectorXd out(r.size());
  for (const Block& b : blocks) {
    if (!b.soc) {
      out[b.offset] = r[b.offset] / lambda[b.offset];
      continue;
    }
    const double l0 = lambda[b.offset];
    const double r0 = r[b.offset];
    if (b.dim == 1) {
      out[b.offset] = r0 / l0;
      continue;
    }
    const auto l1 = lambda.segment(b.offset + 1, b.dim - 1);
    const auto r1 = r.segment(b.offset + 1, b.dim - 1);
    const double det = soc_residual(lambda, b);
    const double x0 = (l0 * r0 - l1.dot(r1)) / det;
    out[b.offset] = x0;
    out.segment(b.offset + 1, b.dim - 1) = (r1 - x0 * l1) / l0;
  }
  return out;
}

void add_identity(const std::vector<Block>& blocks, VectorXd& v, double scale) {
  for (const Block& b : blocks) v[b.offset] += scale;
}

// Largest alpha with x + alpha d in K for x in int K (infinity if unbounded).
double max_step(const std::vector<Block>& blocks, const VectorXd& x, const VectorXd& d) {
  double alpha = kInf;
  for (const Block& b : blocks) {
    if (!b.soc || b.dim == 1) {
      const double dv = d[b.offset];
      if (dv < 0.0) alpha = std::min(alpha, -x[b.offset] / dv);
      continue;
    }
    const double r2 = soc_residual(x, b);
    if (!(r2 > 0.0)) return 0.0;
    const double norm = std::sqrt(r2);
    const auto xb = x.segment(b.offset, b.dim) / norm;
    const auto db = d.segment(b.offset, b.dim);
    const double rho0 = (xb[0] * db[0] - xb.tail(b.dim - 1).dot(db.tail(b.dim - 1))) / norm;
    const double factor = (rho0 + db[0] / norm) / (xb[0] + 1.0);
    const double rho1 = (db.tail(b.dim - 1) / norm - factor * xb.tail(b.dim - 1)).norm();
    const double t = rho1 - rho0;
    if (t > 0.0) alpha = std::min(alpha, 1.0 / t);
  }
  return alpha;
}

// Smallest t making v + t e interior, CVXOPT-style: returns max(-eig(v)).
double max_negative_eigen(const std::vector<Block>& blocks, const VectorXd& v) {
  double t = -kInf;
  for (const Block& b : blocks) {
    if (!b.soc || b.dim == 1) {
      t = std::max(t, -v[b.offset]);
      continue;
    }
    const double nx = v.segment(b.offset + 1, b.dim - 1).norm();
    t = std::max(t, nx - v[b.offset]);
  }
  return t;
}

// Reduced KKT system
//   [ G'W^{-2}G  A' ] [dx]   [rhs_x]
//   [ A          0  ] [dy] = [rhs_y]
// factored with static regularization and refined against the exact matrix.
class KktSolver {
 public:
  KktSolver(const ConeProgram& p, const std::vector<Block>& blocks, double reg, int refine)
      : p_(p), blocks_(blocks), reg_(reg), refine_(refine) {
    n_ = p.num_vars();
    me_ = static_cast<int>(p.A.rows());
    // Row-major copy of G for per-block column gathering.
    Eigen::SparseMatrix<double, Eigen::RowMajor> gr = p.G;
    block_cols_.resize(blocks.size());
    block_dense_.resize(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const Block& b = blocks[k];
      std::vector<int> cols;
      for (int r = b.offset; r < b.offset + b.dim; ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, r); it; ++it) {
          cols.push_back(static_cast<int>(it.col()));
        }
      }
      std::sort(cols.begin(), cols.end());
      cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
      Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(b.dim, static_cast<Eigen::Index>(cols.size()));
      for (int r = b.offset; r < b.offset + b.dim; ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, r); it; ++it) {
          const auto pos = std::lower_bound(cols.begin(), cols.end(), static_cast<int>(it.col())) - cols.begin();
          dense(r - b.offset, pos) += it.value();
        }
      }
      block_cols_[k] = std::move(cols);
      block_dense_[k] = std::move(dense);
    }
  }

  // Factor with the given scaling (nullptr means W = I).
  bool factor(const Scaling* w) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4096);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const Block& b = blocks_[k];
      const auto& cols = block_cols_[k];
      if (cols.empty()) continue;
      Eigen::MatrixXd scaled = block_dense_[k];
      if (w != nullptr) {
        if (!b.soc) {
          scaled /= w->diag[b.offset];
        } else {
          VectorXd tmp(b.dim), out(b.dim);
          const auto wb = w->wbar.segment(b.offset, b.dim);
          const double beta = w->beta[static_cast<Eigen::Index>(k)];
          for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
            tmp = scaled.col(c);
            double wjv = wb[0] * tmp[0];
            if (b.dim > 1) wjv -= wb.tail(b.dim - 1).dot(tmp.tail(b.dim - 1));
            out[0] = 2.0 * wjv * wb[0] - tmp[0];
            if (b.dim > 1) out.tail(b.dim - 1) = -2.0 * wjv * wb.tail(b.dim - 1) + tmp.tail(b.dim - 1);
            scaled.col(c) = out / beta;
          }
        }
      }
      const Eigen::MatrixXd gram = scaled.transpose() * scaled;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
          trip.emplace_back(cols[i], cols[j], gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
      }
    }
    for (int k = 0; k < p_.A.outerSize(); ++k) {
      for (SpMat::InnerIterator it(p_.A, k); it; ++it) {
        trip.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        trip.emplace_back(static_cast<int>(it.col()), n_ + static_cast<int>(it.row()), it.value());
      }
    }
    const int dim = n_ + me_;
    for (int i = 0; i < dim; ++i) trip.emplace_back(i, i, 0.0);
    exact_.resize(dim, dim);
    exact_.setFromTriplets(trip.begin(), trip.end());
    // Escalate the static regularization when a pivot breaks down; the
    // refinement against exact_ recovers the accuracy.
    double reg = reg_;
    for (int attempt = 0; attempt < 3; ++attempt, reg *= 1e3) {
      regularized_ = exact_;
      for (int i = 0; i < dim; ++i) regularized_.coeffRef(i, i) += (i < n_) ? reg : -reg;
      if (!analyzed_) {
        ldlt_.analyzePattern(regularized_);
        analyzed_ = true;
      }
      ldlt_.factorize(regularized_);
      if (ldlt_.info() == Eigen::Success) return true;
    }
    return false;
  }

  VectorXd solve_reduced(const VectorXd& rhs) const {
    VectorXd sol = ldlt_.solve(rhs);
    for (int it = 0; it < refine_; ++it) {
      const VectorXd res = rhs - exact_ * sol;
      if (res.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
      sol += ldlt_.solve(res);
    }
    return sol;
  }

  // Solves [0 A' G'; A 0 0; G 0 -W'W] [dx; dy; dz] = [bx; by; bz], refined
  // against the full system so accuracy survives ill-conditioned scalings.
  void solve(const Scaling* w, const VectorXd& bx, const VectorXd& by, const VectorXd& bz, VectorXd& dx,
             VectorXd& dy, VectorXd& dz) const {
    solve_once(w, bx, by, bz, dx, dy, dz);
    const double scale = 1.0 + std::max({bx.lpNorm<Eigen::Infinity>(), by.size() ? by.lpNorm<Eigen::Infinity>() : 0.0,
                                         bz.lpNorm<Eigen::Infinity>()});
    VectorXd cx, cy, cz, w2dz;
    for (int it = 0; it < refine_; ++it) {
      VectorXd rx = bx - p_.G.transpose() * dz;
      if (me_ > 0) rx -= p_.A.transpose() * dy;
      const VectorXd ry = by - p_.A * dx;
      apply_w2(w, dz, w2dz);
      const VectorXd rz = bz - p_.G * dx + w2dz;
      const double res = std::max({rx.lpNorm<Eigen::Infinity>(), ry.size() ? ry.lpNorm<Eigen::Infinity>() : 0.0,
                                   rz.lpNorm<Eigen::Infinity>()});
      if (res <= 1e-14 * scale) break;
      solve_once(w, rx, ry, rz, cx, cy, cz);
      dx += cx;
      dy += cy;
      dz += cz;
    }
  }

 private:
  void apply_w2(const Scaling* w, const VectorXd& v, VectorXd& out) const {
    if (w == nullptr) {
      out = v;
      return;
    }
    VectorXd tmp;
    apply_scaling(blocks_, *w, v, tmp, false);
    apply_scaling(blocks_, *w, tmp, out, false);
  }

  void solve_once(const Scaling* w, const VectorXd& bx, const VectorXd& by, const VectorXd& bz, VectorXd& dx,
                  VectorXd& dy, VectorXd& dz) const {
    VectorXd winv2_bz = bz;
    if (w != nullptr) {
      VectorXd tmp;
      apply_scaling(blocks_, *w, bz, tmp, true);
      apply_scaling(blocks_, *w, tmp, winv2_bz, true);
    }
    VectorXd rhs(n_ + me_);
    rhs.head(n_) = bx + p_.G.transpose() * winv2_bz;
    rhs.tail(me_) = by;
    const VectorXd sol = solve_reduced(rhs);
    dx = sol.head(n_);
    dy = sol.tail(me_);
    const VectorXd gdx_minus = p_.G * dx - bz;
    if (w != nullptr) {
      VectorXd tmp;
      apply_scaling(blocks_, *w, gdx_minus, tmp, true);
      apply_scaling(blocks_, *w, tmp, dz, true);
    } else {
      dz = gdx_minus;
    }
  }

  const ConeProgram& p_;
  const std::vector<Block>& blocks_;
  double reg_;
  int refine_;
  int n_{0};
  int me_{0};
  std::vector<std::vector<int>> block_cols_;
  std::vector<Eigen::MatrixXd> block_dense_;
  SpMat exact_;
  SpMat regularized_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
  bool analyzed_{false};
};

bool all_finite(const VectorXd& v) { return v.allFinite(); }

}  // namespace

double cone_violation(const ConeDims& dims, const Eigen::VectorXd& v) {
  const auto blocks = make_blocks(dims);
  double worst = 0.0;
  for (const Block& b : blocks) {
    if (!b.soc || b.dim == 1) {
      worst = std::max(worst, -v[b.offset]);
      continue;
    }
    const double nx = v.segment(b.offset + 1, b.dim - 1).norm();
    worst = std::max(worst, nx - v[b.offset]);
  }
  return worst;
}

KktResiduals kkt_residuals(const ConeProgram& p, const VectorXd& x, const VectorXd& s, const VectorXd& y,
                           const VectorXd& z) {
  KktResiduals r;
  const VectorXd ry = p.A * x - p.b;
  const VectorXd rz = p.G * x + s - p.h;
  VectorXd rx = p.c + p.G.transpose() * z;
  if (p.A.rows() > 0) rx += p.A.transpose() * y;
  r.primal_equality = ry.size() > 0 ? ry.norm() / std::max(1.0, p.b.norm()) : 0.0;
  r.equality_abs = ry.size() > 0 ? ry.lpNorm<Eigen::Infinity>() : 0.0;
  r.primal_cone = rz.size() > 0 ? rz.norm() / std::max(1.0, p.h.norm()) : 0.0;
  r.dual = rx.norm() / std::max(1.0, p.c.norm());
  r.gap = s.dot(z);
  const double pcost = p.c.dot(x);
  const double dcost = -p.b.dot(y) - p.h.dot(z);
  r.relative_gap = r.gap / std::max({std::abs(pcost), std::abs(dcost), 1e-300});
  r.cone_violation = p.G.rows() > 0 ? cone_violation(p.dims, p.h - p.G * x) : 0.0;
  return r;
}

ConicSolution solve(const ConeProgram& problem, double gap_tol) {
  SolverSettings s;
  s.gap_tol = gap_tol;
  return SocpSolver(s).solve(problem);
}

ConicSolution SocpSolver::solve(const ConeProgram& p) const {
  const auto start = std::chrono::steady_clock::now();
  p.validate();
  ConicSolution out;
  const int n = p.num_vars();
  const int me = static_cast<int>(p.A.rows());
  const int m = static_cast<int>(p.G.rows());
  const auto blocks = make_blocks(p.dims);
  const double degree = std::max(1, p.dims.degree());

  auto finish = [&](SolveStatus status, const VectorXd& x, const VectorXd& s, const VectorXd& y,
                    const VectorXd& z, int iters) {
    out.primal = x;
    out.slack = s;
    out.eq_dual = y;
    out.cone_dual = z;
    out.objective = p.c.dot(x) + p.offset;
    out.dual_objective = -p.b.dot(y) - p.h.dot(z) + p.offset;
    out.status = status;
    out.iterations = iters;
    out.residuals = kkt_residuals(p, x, s, y, z);
    out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };

  VectorXd x = VectorXd::Zero(n), y = VectorXd::Zero(me), s = VectorXd::Zero(m), z = VectorXd::Zero(m);
  if (m == 0) {
    // No cones: the problem is bounded only if c lies in range(A').
    return finish(SolveStatus::NumericalFailure, x, s, y, z, 0);
  }

  KktSolver kkt(p, blocks, settings_.regularization, settings_.refinement_steps);
  if (!kkt.factor(nullptr)) return finish(SolveStatus::NumericalFailure, x, s, y, z, 0);

  // Least-squares primal and dual starting points, shifted into the cone.
  {
    VectorXd dx, dy, dz;
    kkt.solve(nullptr, VectorXd::Zero(n), p.b, p.h, dx, dy, dz);
    x = dx;
    s = -dz;
    kkt.solve(nullptr, -p.c, VectorXd::Zero(me), VectorXd::Zero(m), dx, dy, dz);
    y = dy;
    z = dz;
    const double ts = max_negative_eigen(blocks, s);
    if (ts >= -1e-8 * std::max(s.norm(), 1.0)) add_identity(blocks, s, 1.0 + ts);
    const double tz = max_negative_eigen(blocks, z);
    if (tz >= -1e-8 * std::max(z.norm(), 1.0)) add_identity(blocks, z, 1.0 + tz);
  }
  if (!all_finite(x) || !all_finite(s) || !all_finite(z)) {
    return finish(SolveStatus::NumericalFailure, x, s, y, z, 0);
  }

  const double resx0 = std::max(1.0, p.c.norm());
  const double resy0 = std::max(1.0, p.b.norm());
  const double resz0 = std::max(1.0, p.h.norm());

  // Last iterate meeting the relaxed tolerances, returned when the solve
  // breaks down before reaching full accuracy.
  struct Fallback {
    VectorXd x, s, y, z;
    int iter{-1};
  } fallback;
  auto fail = [&](SolveStatus status, int iter) {
    if (fallback.iter < 0) return finish(status, x, s, y, z, iter);
    finish(SolveStatus::Optimal, fallback.x, fallback.s, fallback.y, fallback.z, iter);
    out.reduced_accuracy = true;
    return out;
  };

  Scaling w;
  int stalls = 0;
  for (int iter = 0; iter <= settings_.max_iter; ++iter) {
    VectorXd rx = p.c + p.G.transpose() * z;
    if (me > 0) rx += p.A.transpose() * y;
    const VectorXd ry = p.A * x - p.b;
    const VectorXd rz = p.G * x + s - p.h;
    const double gap = s.dot(z);
    const double pcost = p.c.dot(x);
    const double dcost = -p.b.dot(y) - p.h.dot(z);
    double relgap = kInf;
    if (pcost < 0.0) relgap = gap / -pcost;
    else if (dcost > 0.0) relgap = gap / dcost;
    const double pres = std::max(me > 0 ? ry.norm() / resy0 : 0.0, rz.norm() / resz0);
    const double dres = rx.norm() / resx0;

    if (pres <= settings_.feas_tol && dres <= settings_.feas_tol &&
        (gap <= settings_.abs_gap_tol || relgap <= settings_.gap_tol)) {
      return finish(SolveStatus::Optimal, x, s, y, z, iter);
    }
    if (pres <= settings_.reduced_feas_tol && dres <= settings_.reduced_feas_tol &&
        (gap <= settings_.reduced_gap_tol || relgap <= settings_.reduced_gap_tol)) {
      fallback = {x, s, y, z, iter};
    }
    if (iter == settings_.max_iter) return fail(SolveStatus::MaxIter, iter);

    if (!compute_scaling(blocks, s, z, w)) return fail(SolveStatus::NumericalFailure, iter);
    VectorXd lambda;
    apply_scaling(blocks, w, z, lambda, false);
    if (!kkt.factor(&w)) return fail(SolveStatus::NumericalFailure, iter);

    const double mu = gap / degree;
    const VectorXd lambda_sq = jordan_product(blocks, lambda, lambda);

    // Newton direction for a given complementarity right-hand side bs.
    auto direction = [&](const VectorXd& bs, VectorXd& dx, VectorXd& dy, VectorXd& dz, VectorXd& ds) {
      const VectorXd tmp = jordan_divide(blocks, lambda, bs);
      VectorXd w_tmp;
      apply_scaling(blocks, w, tmp, w_tmp, false);
      kkt.solve(&w, -rx, -ry, -rz - w_tmp, dx, dy, dz);
      VectorXd wdz;
      apply_scaling(blocks, w, dz, wdz, false);
      apply_scaling(blocks, w, tmp - wdz, ds, false);
    };

    VectorXd dx, dy, dz, ds;
    direction(-lambda_sq, dx, dy, dz, ds);
    if (!all_finite(dx) || !all_finite(dz) || !all_finite(ds)) return fail(SolveStatus::NumericalFailure, iter);
    const double alpha_aff = std::min({1.0, max_step(blocks, s, ds), max_step(blocks, z, dz)});
    const double gap_aff = (s + alpha_aff * ds).dot(z + alpha_aff * dz);
    const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

    // Mehrotra correction in the scaled space.
    VectorXd ds_scaled, dz_scaled;
    apply_scaling(blocks, w, ds, ds_scaled, true);
    apply_scaling(blocks, w, dz, dz_scaled, false);
    VectorXd bs = -lambda_sq - jordan_product(blocks, ds_scaled, dz_scaled);
    add_identity(blocks, bs, sigma * mu);
    direction(bs, dx, dy, dz, ds);
    if (!all_finite(dx) || !all_finite(dz) || !all_finite(ds)) return fail(SolveStatus::NumericalFailure, iter);
    const double alpha_max = std::min(max_step(blocks, s, ds), max_step(blocks, z, dz));
    const double alpha = std::min(1.0, settings_.step_fraction * alpha_max);
    if (!(alpha > 1e-12)) {
      if (++stalls >= 3) {
        return fail(pres > 1e-6 ? SolveStatus::Infeasible : SolveStatus::NumericalFailure, iter);
      }
    } else {
      stalls = 0;
    }
    x += alpha * dx;
    y += alpha * dy;
    s += alpha * ds;
    z += alpha * dz;
  }
  return fail(SolveStatus::MaxIter, settings_.max_iter);
}

}  // namespace parafoil
