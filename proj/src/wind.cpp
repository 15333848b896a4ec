#include "parafoil/wind.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "parafoil/random.hpp"

namespace parafoil {

namespace {

constexpr std::uint64_t kLowFrequencyTag = 0x4c46'0000'0000'0001ULL;
constexpr std::uint64_t kHighFrequencyTag = 0x4846'0000'0000'0002ULL;

// Unit-variance first-order (Dryden longitudinal) gust sampled along a
// descending altitude grid. The state is propagated with the exact
// discretization of the Ornstein-Uhlenbeck process, so its stationary
// variance is one regardless of the step.
std::vector<double> unit_gust(const std::vector<double>& grid, const SpeedProfile& speeds,
                              double length_scale, std::uint64_t seed) {
  const std::size_t n = grid.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  Random rng(seed);
  double state = rng.normal();
  out[n - 1] = state;
  for (std::size_t i = n - 1; i > 0; --i) {
    const double dt = speeds.descent_time(grid[i - 1], grid[i]);
    const double airspeed = speeds.airspeed(0.5 * (grid[i - 1] + grid[i]));
    const double decay = std::exp(-airspeed * dt / length_scale);
    state = decay * state + std::sqrt(1.0 - decay * decay) * rng.normal();
    out[i - 1] = state;
  }
  return out;
}

WindProfile gust_profile(const DrydenParams& p, const SpeedProfile& speeds,
                         const std::vector<double>& grid, double sigma, double length,
                         std::uint64_t tag) {
  std::vector<double> wx(grid.size(), 0.0);
  std::vector<double> wy(grid.size(), 0.0);
  if (sigma > 0.0) {
    const auto gx = unit_gust(grid, speeds, length, Random::mix(p.seed_x) ^ tag);
    const auto gy = unit_gust(grid, speeds, length, Random::mix(p.seed_y) ^ tag);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double s = sigma * p.gust_scale(grid[i]);
      wx[i] = s * gx[i];
      wy[i] = s * gy[i];
    }
  }
  return {grid, std::move(wx), std::move(wy)};
}

}  // namespace

void DrydenParams::validate() const {
  if (!(z_ref > 0.0)) throw std::invalid_argument("wind z_ref must be positive");
  if (sigma_lf < 0.0 || sigma_hf < 0.0) throw std::invalid_argument("gust intensities must be >= 0");
  if (!(length_lf > 0.0) || !(length_hf > 0.0)) {
    throw std::invalid_argument("gust length scales must be positive");
  }
  if (!std::isfinite(w_ref) || !std::isfinite(shear_exponent) || !std::isfinite(direction)) {
    throw std::invalid_argument("wind parameters must be finite");
  }
}

double DrydenParams::steady_speed(double z) const {
  if (z <= 0.0 || w_ref == 0.0) return 0.0;
  return w_ref * std::pow(z / z_ref, shear_exponent);
}

double DrydenParams::gust_scale(double z) const {
  return std::pow(std::max(z, z_ref) / z_ref, shear_exponent);
}

WindProfile::WindProfile(std::vector<double> grid, std::vector<double> wx, std::vector<double> wy)
    : grid_(std::move(grid)), wx_(std::move(wx)), wy_(std::move(wy)) {
  if (grid_.empty()) throw std::invalid_argument("wind profile needs at least one node");
  if (wx_.size() != grid_.size() || wy_.size() != grid_.size()) {
    throw std::invalid_argument("wind profile columns differ in length");
  }
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i]) || !std::isfinite(wx_[i]) || !std::isfinite(wy_[i])) {
      throw std::invalid_argument("wind profile contains non-finite values");
    }
    if (i > 0 && !(grid_[i] > grid_[i - 1])) {
      throw std::invalid_argument("wind profile grid must be strictly increasing");
    }
  }
}

WindProfile WindProfile::calm(double z_low, double z_high) {
  return uniform(z_low, z_high, Eigen::Vector2d::Zero());
}

WindProfile WindProfile::uniform(double z_low, double z_high, Eigen::Vector2d wind) {
  return {{z_low, z_high}, {wind.x(), wind.x()}, {wind.y(), wind.y()}};
}

bool WindProfile::covers(double z) const {
  return !grid_.empty() && z >= grid_.front() && z <= grid_.back();
}

WindSample WindProfile::sample(double z) const {
  WindSample s;
  if (grid_.empty()) {
    s.clamped = true;
    return s;
  }
  if (z <= grid_.front()) {
    s.value = {wx_.front(), wy_.front()};
    s.clamped = z < grid_.front();
    return s;
  }
  if (z >= grid_.back()) {
    s.value = {wx_.back(), wy_.back()};
    s.clamped = z > grid_.back();
    return s;
  }
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), z);
  const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
  const std::size_t lo = hi - 1;
  if (z == grid_[lo]) {
    s.value = {wx_[lo], wy_[lo]};
    return s;
  }
  const double f = (z - grid_[lo]) / (grid_[hi] - grid_[lo]);
  s.value = {wx_[lo] + f * (wx_[hi] - wx_[lo]), wy_[lo] + f * (wy_[hi] - wy_[lo])};
  return s;
}

WindProfile WindProfile::operator+(const WindProfile& other) const {
  if (grid_ != other.grid_) throw std::invalid_argument("cannot superpose wind profiles on different grids");
  std::vector<double> x(grid_.size()), y(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    x[i] = wx_[i] + other.wx_[i];
    y[i] = wy_[i] + other.wy_[i];
  }
  return {grid_, std::move(x), std::move(y)};
}

void WindProfile::write_csv(std::ostream& out) const {
  out << "z_m,wx_ms,wy_ms\n";
  char line[96];
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", grid_[i], wx_[i], wy_[i]);
    out << line;
  }
}

WindProfile WindProfile::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("wind CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "z_m,wx_ms,wy_ms") throw std::runtime_error("wind CSV header must be z_m,wx_ms,wy_ms");
  std::vector<double> z, wx, wy;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::istringstream fields(line);
    double a = 0, b = 0, c = 0;
    char comma1 = 0, comma2 = 0;
    if (!(fields >> a >> comma1 >> b >> comma2 >> c) || comma1 != ',' || comma2 != ',') {
      throw std::runtime_error("malformed wind CSV row " + std::to_string(row));
    }
    z.push_back(a);
    wx.push_back(b);
    wy.push_back(c);
  }
  return {std::move(z), std::move(wx), std::move(wy)};
}

std::vector<double> altitude_grid(double z_low, double z_high, double spacing) {
  if (!(z_high > z_low) || !(spacing > 0.0)) throw std::invalid_argument("invalid altitude grid bounds");
  const auto cells = static_cast<std::size_t>(std::ceil((z_high - z_low) / spacing - 1e-9));
  std::vector<double> grid(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) grid[i] = z_low + static_cast<double>(i) * spacing;
  grid.back() = z_high;
  return grid;
}

WindComponents generate_components(const DrydenParams& params, const SpeedProfile& speeds,
                                   const std::vector<double>& grid) {
  params.validate();
  std::vector<double> sx(grid.size()), sy(grid.size());
  const double cx = std::cos(params.direction);
  const double cy = std::sin(params.direction);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = params.steady_speed(grid[i]);
    sx[i] = w * cx;
    sy[i] = w * cy;
  }
  WindComponents c;
  c.steady = WindProfile(grid, std::move(sx), std::move(sy));
  c.low_frequency = gust_profile(params, speeds, grid, params.sigma_lf, params.length_lf, kLowFrequencyTag);
  c.high_frequency = gust_profile(params, speeds, grid, params.sigma_hf, params.length_hf, kHighFrequencyTag);
  return c;
}

WindProfile generate_profile(const DrydenParams& params, const SpeedProfile& speeds,
                             const std::vector<double>& grid) {
  const WindComponents c = generate_components(params, speeds, grid);
  return c.steady + c.low_frequency + c.high_frequency;
}

WindSample wind_at(const WindProfile& profile, double z) { return profile.sample(z); }

Eigen::Vector2d integrated_wind(const WindProfile& profile, const TimeAltitudeMap& map, double t_a,
                                double t_b) {
  if (!(t_a < t_b)) throw std::domain_error("integrated_wind expects t_a < t_b");
  const double z_top = map.altitude_of_time(t_a);
  const double z_bottom = map.altitude_of_time(t_b);
  const SpeedProfile& speeds = map.speed_profile();

  // dt = dz / r(z): integrate w(z) / r(z) over altitude, splitting at the grid
  // nodes so every piece has a linear wind and a smooth weight.
  std::vector<double> cuts{z_bottom};
  const auto& grid = profile.grid();
  auto first = std::upper_bound(grid.begin(), grid.end(), z_bottom);
  for (auto it = first; it != grid.end() && *it < z_top; ++it) cuts.push_back(*it);
  cuts.push_back(z_top);

  const std::size_t pieces = cuts.size() - 1;
  const std::size_t panels = std::max<std::size_t>(1, (8 + pieces - 1) / pieces);
  Eigen::Vector2d total = Eigen::Vector2d::Zero();
  for (std::size_t p = 0; p < pieces; ++p) {
    const double lo = cuts[p];
    const double h = (cuts[p + 1] - lo) / static_cast<double>(panels);
    if (!(h > 0.0)) continue;
    for (std::size_t j = 0; j < panels; ++j) {
      const double a = lo + static_cast<double>(j) * h;
      const double b = (j + 1 == panels) ? cuts[p + 1] : a + h;
      const double m = 0.5 * (a + b);
      const Eigen::Vector2d fa = profile.at(a) / speeds.sink(a);
      const Eigen::Vector2d fm = profile.at(m) / speeds.sink(m);
      const Eigen::Vector2d fb = profile.at(b) / speeds.sink(b);
      total += (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }
  }
  return total;
}

}  // namespace parafoil
