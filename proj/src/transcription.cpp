#include "parafoil/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace parafoil {

namespace {

// Heading-rate cones are tightened by this fraction so solver round-off can
// never push a recovered turn rate past the limit.
constexpr double kRateMargin = 1e-7;

}  // namespace

double Mesh::v_max() const { return *std::max_element(v.begin(), v.end()); }

double Mesh::min_dt() const { return *std::min_element(dt.begin(), dt.end()); }

double Mesh::smoothing_weight(int k) const {
  const auto i = static_cast<std::size_t>(k);
  const double vv = v[i] * v[i + 1];
  return vv * vv / (std::pow(v_tilde[i], 6) * dt[i]);
}

Mesh build_mesh(const TimeAltitudeMap& map, const WindProfile& wind, int nodes, double ratio) {
  if (nodes < 3) throw std::invalid_argument("a mesh needs at least 3 nodes");
  if (!(ratio > 0.0)) throw std::invalid_argument("mesh ratio must be positive");
  const double t0 = map.t0();
  const double tf = map.t_final();
  const double span = tf - t0;
  const int intervals = nodes - 1;

  Mesh m;
  m.node_times.resize(static_cast<std::size_t>(nodes));
  m.node_times.front() = t0;
  if (ratio == 1.0) {
    for (int k = 1; k < intervals; ++k) m.node_times[static_cast<std::size_t>(k)] = t0 + span * k / intervals;
  } else {
    // Interval k has length proportional to ratio^k.
    const double total = (1.0 - std::pow(ratio, intervals)) / (1.0 - ratio);
    double acc = 0.0;
    for (int k = 1; k < intervals; ++k) {
      acc += std::pow(ratio, k - 1);
      m.node_times[static_cast<std::size_t>(k)] = t0 + span * (acc / total);
    }
  }
  m.node_times.back() = tf;

  const SpeedProfile& speeds = map.speed_profile();
  m.node_altitudes.reserve(static_cast<std::size_t>(nodes));
  m.v.reserve(static_cast<std::size_t>(nodes));
  for (int k = 0; k < nodes; ++k) {
    const double z = k + 1 == nodes ? map.z_final() : map.altitude_of_time(m.node_times[static_cast<std::size_t>(k)]);
    m.node_altitudes.push_back(z);
    m.v.push_back(speeds.horizontal(z));
  }
  m.dt.reserve(static_cast<std::size_t>(intervals));
  m.v_tilde.reserve(static_cast<std::size_t>(intervals));
  m.wind_drift.resize(2, intervals);
  for (int k = 0; k < intervals; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double dt = m.node_times[i + 1] - m.node_times[i];
    if (!(dt > 0.0)) throw std::invalid_argument("mesh times must increase strictly");
    m.dt.push_back(dt);
    // v / r is constant, so the mean of v over the interval is the glide
    // ratio times the altitude lost per unit time.
    m.v_tilde.push_back(speeds.glide_ratio() * (m.node_altitudes[i] - m.node_altitudes[i + 1]) / dt);
    m.wind_drift.col(k) = integrated_wind(wind, map, m.node_times[i], m.node_times[i + 1]);
  }
  return m;
}

ScpWeights ScpWeights::defaults(const Mesh& mesh) {
  ScpWeights w;
  w.eps_h = 0.05 * mesh.v.back();
  w.eps_u = 0.3 * mesh.v.front();
  return w;
}

void ScpWeights::validate() const {
  if (!(alpha2 >= 100.0) || !(alpha1 >= 10.0 * alpha2)) {
    throw std::invalid_argument("weights must satisfy alpha1 >= 10 alpha2 >= 100");
  }
  if (!(alpha5 > 0.0)) throw std::invalid_argument("alpha5 must be positive");
  if (!(eps_h > 0.0)) throw std::invalid_argument("eps_h must be positive");
  if (!(eps_u > 0.0)) throw std::invalid_argument("eps_u must be positive");
  if (!(conv_tol > 0.0)) throw std::invalid_argument("conv_tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (phase2_max_iter < 0) throw std::invalid_argument("phase2_max_iter must be nonnegative");
}

BoundaryData BoundaryData::make(const Mesh& mesh, const Eigen::Vector2d& x0, double psi0, const Eigen::Vector2d& xf,
                                double psi_f, double psi_dot_max) {
  BoundaryData b;
  b.x0 = x0;
  b.u0 = mesh.v.front() * Eigen::Vector2d(std::cos(psi0), std::sin(psi0));
  b.xf = xf;
  b.uf = -mesh.v.back() * Eigen::Vector2d(std::cos(psi_f), std::sin(psi_f));
  b.psi_dot_max = psi_dot_max;
  return b;
}

double rate_chord(const Mesh& mesh, int k, double psi_dot_max, double eps) {
  const auto i = static_cast<std::size_t>(k);
  const double angle = std::min(mesh.dt[i] * psi_dot_max, std::numbers::pi) * (1.0 - kRateMargin);
  const double floor_speed = std::min(mesh.v[i], mesh.v[i + 1]) - eps;
  return 2.0 * std::sin(0.5 * angle) * std::max(floor_speed, 0.0);
}

namespace {

void check_inputs(const Mesh& mesh, const SubstitutedTrajectory& lin) {
  if (lin.positions.cols() != mesh.nodes() || lin.inputs.cols() != mesh.nodes()) {
    throw std::invalid_argument("linearization and mesh disagree in size");
  }
  for (int k = 0; k < mesh.nodes(); ++k) {
    if (!(lin.inputs.col(k).norm() >= 1e-6)) {
      throw std::domain_error("degenerate linearization at node " + std::to_string(k));
    }
  }
}

ConvexSubproblem build(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                       const SubstitutedTrajectory& lin, bool phase2) {
  weights.validate();
  check_inputs(mesh, lin);
  const int n = mesh.nodes();
  ConvexSubproblem out;
  out.phase = phase2 ? 2 : 1;
  out.layout = {n, phase2};
  const VariableLayout& L = out.layout;

  ConeProgramBuilder b;
  b.add_variables(L.count());

  // eps as an affine expression: constant in phase one, a variable in phase two.
  auto eps_times = [&](double coeff, AffineExpr e) {
    if (phase2) e.add(L.slack(), coeff);
    else e.plus(coeff * weights.eps_h);
    return e;
  };

  const double vf2 = mesh.v.back() * mesh.v.back();
  b.add_cost(L.terminal(), weights.alpha1);
  b.add_cost(L.u(n - 1), weights.alpha2 * bounds.uf.x() / vf2);
  b.add_cost(L.u(n - 1) + 1, weights.alpha2 * bounds.uf.y() / vf2);
  b.add_cost_offset(weights.alpha2);
  for (int k = 0; k + 1 < n; ++k) b.add_cost(L.smoothing(k), 1.0);
  if (phase2) b.add_cost(L.slack(), weights.alpha5);

  for (int d = 0; d < 2; ++d) {
    b.add_equality(AffineExpr::var(L.x(0) + d).plus(-bounds.x0[d]));
    b.add_equality(AffineExpr::var(L.u(0) + d).plus(-bounds.u0[d]));
  }
  for (int k = 0; k + 1 < n; ++k) {
    const double half = 0.5 * mesh.dt[static_cast<std::size_t>(k)];
    for (int d = 0; d < 2; ++d) {
      AffineExpr e = AffineExpr::var(L.x(k + 1) + d);
      e.add(L.x(k) + d, -1.0).add(L.u(k) + d, -half).add(L.u(k + 1) + d, -half);
      e.plus(-mesh.wind_drift(d, k));
      b.add_equality(e);
    }
    ++out.counts.dynamics;
  }

  b.add_soc({AffineExpr::var(L.terminal()), AffineExpr::var(L.x(n - 1)).plus(-bounds.xf.x()),
             AffineExpr::var(L.x(n - 1) + 1).plus(-bounds.xf.y())});

  // s_k >= c_k |du|^2  <=>  |(sqrt(c_k) du, (s_k - 1) / 2)| <= (s_k + 1) / 2.
  for (int k = 0; k + 1 < n; ++k) {
    const double rc = std::sqrt(mesh.smoothing_weight(k));
    std::vector<AffineExpr> rows;
    rows.push_back(AffineExpr::var(L.smoothing(k), 0.5).plus(0.5));
    for (int d = 0; d < 2; ++d) rows.push_back(AffineExpr::var(L.u(k + 1) + d, rc).add(L.u(k) + d, -rc));
    rows.push_back(AffineExpr::var(L.smoothing(k), 0.5).plus(-0.5));
    b.add_soc(std::move(rows));
  }

  for (int k = 0; k < n; ++k) {
    const double vk = mesh.v[static_cast<std::size_t>(k)];
    const Eigen::Vector2d dir = lin.inputs.col(k).normalized();
    AffineExpr lower = AffineExpr::var(L.u(k), dir.x()).add(L.u(k) + 1, dir.y()).plus(-vk);
    b.add_nonneg(eps_times(1.0, lower));
    ++out.counts.lower_bounds;

    b.add_soc({eps_times(1.0, AffineExpr(vk)), AffineExpr::var(L.u(k)), AffineExpr::var(L.u(k) + 1)});
    ++out.counts.norm_bounds;
  }
  if (phase2) {
    b.add_nonneg(AffineExpr::var(L.slack()));
    b.add_nonneg(AffineExpr::var(L.slack(), -1.0).plus(weights.eps_h));
  }

  for (int k = 0; k + 1 < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double angle = std::min(mesh.dt[i] * bounds.psi_dot_max, std::numbers::pi) * (1.0 - kRateMargin);
    const double chord = 2.0 * std::sin(0.5 * angle);
    const double floor_speed = std::min(mesh.v[i], mesh.v[i + 1]);
    std::vector<AffineExpr> rows;
    rows.push_back(eps_times(-chord, AffineExpr(chord * floor_speed)));
    for (int d = 0; d < 2; ++d) rows.push_back(AffineExpr::var(L.u(k + 1) + d).add(L.u(k) + d, -1.0));
    b.add_soc(std::move(rows));
    ++out.counts.rate_cones;
  }

  for (int k = 0; k < n; ++k) {
    b.add_soc({AffineExpr(weights.eps_u), AffineExpr::var(L.u(k)).plus(-lin.inputs(0, k)),
               AffineExpr::var(L.u(k) + 1).plus(-lin.inputs(1, k))});
    ++out.counts.trust_cones;
  }

  out.program = b.build();
  return out;
}

}  // namespace

ConvexSubproblem build_phase1(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                              const SubstitutedTrajectory& linearization) {
  return build(mesh, bounds, weights, linearization, false);
}

ConvexSubproblem build_phase2(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                              const SubstitutedTrajectory& linearization) {
  return build(mesh, bounds, weights, linearization, true);
}

SubstitutedTrajectory extract_trajectory(const VariableLayout& layout, const Eigen::VectorXd& primal) {
  SubstitutedTrajectory t;
  t.positions.resize(2, layout.nodes);
  t.inputs.resize(2, layout.nodes);
  for (int k = 0; k < layout.nodes; ++k) {
    t.positions.col(k) = primal.segment<2>(layout.x(k));
    t.inputs.col(k) = primal.segment<2>(layout.u(k));
  }
  return t;
}

double input_residual(const Mesh& mesh, const SubstitutedTrajectory& traj) {
  double worst = 0.0;
  for (int k = 0; k < mesh.nodes(); ++k) {
    worst = std::max(worst, std::abs(traj.inputs.col(k).norm() - mesh.v[static_cast<std::size_t>(k)]));
  }
  return worst;
}

CostTerms evaluate_cost(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                        const SubstitutedTrajectory& traj, double slack) {
  const int n = mesh.nodes();
  CostTerms c;
  c.terminal = weights.alpha1 * (traj.positions.col(n - 1) - bounds.xf).norm();
  const double vf2 = mesh.v.back() * mesh.v.back();
  c.heading = weights.alpha2 * (traj.inputs.col(n - 1).dot(bounds.uf) / vf2 + 1.0);
  for (int k = 0; k + 1 < n; ++k) {
    c.smoothing += mesh.smoothing_weight(k) * (traj.inputs.col(k + 1) - traj.inputs.col(k)).squaredNorm();
  }
  c.slack = weights.alpha5 * slack;
  return c;
}

double phase1_violation(const Mesh& mesh, const BoundaryData& bounds, const ScpWeights& weights,
                        const SubstitutedTrajectory& lin, const SubstitutedTrajectory& traj) {
  const int n = mesh.nodes();
  double worst = 0.0;
  auto note = [&](double v) { worst = std::max(worst, v); };
  note((traj.positions.col(0) - bounds.x0).lpNorm<Eigen::Infinity>());
  note((traj.inputs.col(0) - bounds.u0).lpNorm<Eigen::Infinity>());
  for (int k = 0; k + 1 < n; ++k) {
    const DiscreteTransition tr{mesh.dt[static_cast<std::size_t>(k)], mesh.wind_drift.col(k)};
    const Eigen::Vector2d next = discrete_step(tr, traj.positions.col(k), traj.inputs.col(k), traj.inputs.col(k + 1));
    note((traj.positions.col(k + 1) - next).lpNorm<Eigen::Infinity>());
    note((traj.inputs.col(k + 1) - traj.inputs.col(k)).norm() - rate_chord(mesh, k, bounds.psi_dot_max, weights.eps_h));
  }
  for (int k = 0; k < n; ++k) {
    const double vk = mesh.v[static_cast<std::size_t>(k)];
    const Eigen::Vector2d u = traj.inputs.col(k);
    note(vk - weights.eps_h - lin.inputs.col(k).normalized().dot(u));
    note(u.norm() - vk - weights.eps_h);
    note((u - lin.inputs.col(k)).norm() - weights.eps_u);
  }
  return worst;
}

}  // namespace parafoil
