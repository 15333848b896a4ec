#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "parafoil/atmosphere.hpp"

namespace parafoil {

/// Parameters of the three-term wind generator: a power-law steady shear
/// profile plus low-frequency and high-frequency first-order gust filters.
/// Gust intensities are given at z_ref and grow with altitude like the shear.
struct DrydenParams {
  double w_ref{3.0};           // m/s, steady wind at z_ref
  double z_ref{10.0};          // m
  double shear_exponent{0.14};
  double direction{0.0};       // rad, direction the steady wind blows toward
  double sigma_lf{0.5};        // m/s
  double sigma_hf{0.15};       // m/s
  double length_lf{600.0};     // m
  double length_hf{60.0};      // m
  std::uint64_t seed_x{1};
  std::uint64_t seed_y{2};

  void validate() const;
  /// w_ref * (z / z_ref)^shear_exponent, zero at and below sea level.
  [[nodiscard]] double steady_speed(double z) const;
  /// Altitude growth factor applied to both gust intensities.
  [[nodiscard]] double gust_scale(double z) const;
};

struct WindSample {
  Eigen::Vector2d value{Eigen::Vector2d::Zero()};
  bool clamped{false};
};

/// Tabulated horizontal wind on a strictly increasing altitude grid, linearly
/// interpolated in between and held constant beyond the ends.
class WindProfile {
 public:
  WindProfile() = default;
  WindProfile(std::vector<double> grid, std::vector<double> wx, std::vector<double> wy);

  static WindProfile calm(double z_low, double z_high);
  static WindProfile uniform(double z_low, double z_high, Eigen::Vector2d wind);

  [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
  [[nodiscard]] const std::vector<double>& wx() const { return wx_; }
  [[nodiscard]] const std::vector<double>& wy() const { return wy_; }
  [[nodiscard]] bool empty() const { return grid_.empty(); }

  [[nodiscard]] bool covers(double z) const;
  [[nodiscard]] WindSample sample(double z) const;
  [[nodiscard]] Eigen::Vector2d at(double z) const { return sample(z).value; }

  /// Node-wise sum; both profiles must share the same grid.
  [[nodiscard]] WindProfile operator+(const WindProfile& other) const;

  void write_csv(std::ostream& out) const;
  static WindProfile read_csv(std::istream& in);

  friend bool operator==(const WindProfile&, const WindProfile&) = default;

 private:
  std::vector<double> grid_;
  std::vector<double> wx_;
  std::vector<double> wy_;
};

struct WindComponents {
  WindProfile steady;
  WindProfile low_frequency;
  WindProfile high_frequency;
};

/// Uniform altitude grid from z_low to z_high (inclusive) with the given spacing.
[[nodiscard]] std::vector<double> altitude_grid(double z_low, double z_high, double spacing = 1.0);

/// The three generator terms evaluated separately on the grid.
[[nodiscard]] WindComponents generate_components(const DrydenParams& params,
                                                 const SpeedProfile& speeds,
                                                 const std::vector<double>& grid);

/// Steady shear plus both gust terms. Deterministic for fixed seeds.
[[nodiscard]] WindProfile generate_profile(const DrydenParams& params, const SpeedProfile& speeds,
                                           const std::vector<double>& grid);

[[nodiscard]] WindSample wind_at(const WindProfile& profile, double z);

/// Integral of w(z(t)) dt over [t_a, t_b], i.e. the drift accumulated by the
/// wind while descending through that interval.
[[nodiscard]] Eigen::Vector2d integrated_wind(const WindProfile& profile, const TimeAltitudeMap& map,
                                              double t_a, double t_b);

}  // namespace parafoil
