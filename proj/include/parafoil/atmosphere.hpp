#pragma once

#include <utility>

namespace parafoil {

/// Power-law air density rho(z) = c_h * (1 - z * c_rho)^c_e.
///
/// Valid only for altitudes where 1 - z * c_rho is strictly positive. Every
/// evaluation outside that domain throws std::domain_error.
class AtmosphereModel {
 public:
  static constexpr double kSeaLevelDensity = 1.225;    // kg/m^3
  static constexpr double kInverseLengthScale = 2.256e-5;  // 1/m
  static constexpr double kExponent = 4.2559;

  AtmosphereModel() = default;
  AtmosphereModel(double c_h, double c_rho, double c_e);

  [[nodiscard]] double c_h() const { return c_h_; }
  [[nodiscard]] double c_rho() const { return c_rho_; }
  [[nodiscard]] double c_e() const { return c_e_; }

  /// 1 - z * c_rho, checked against the singular altitude.
  [[nodiscard]] double base(double z) const;
  [[nodiscard]] bool in_domain(double z) const;
  /// Highest altitude the model accepts.
  [[nodiscard]] double ceiling() const { return 1.0 / c_rho_; }

  [[nodiscard]] double density(double z) const;

 private:
  double c_h_{kSeaLevelDensity};
  double c_rho_{kInverseLengthScale};
  double c_e_{kExponent};
};

struct Speeds {
  double horizontal{};  // v, m/s
  double sink{};        // r, m/s, positive down
};

/// Horizontal airspeed and sink rate as functions of altitude, anchored at a
/// measurement (v0, r0) taken at altitude z0. Both speeds scale with
/// sqrt(rho(z0) / rho(z)) so the glide ratio v / r is constant.
class SpeedProfile {
 public:
  SpeedProfile(AtmosphereModel atmosphere, double z0, double v0, double r0);

  [[nodiscard]] const AtmosphereModel& atmosphere() const { return atmosphere_; }
  [[nodiscard]] double z0() const { return z0_; }
  [[nodiscard]] double v0() const { return v0_; }
  [[nodiscard]] double r0() const { return r0_; }
  [[nodiscard]] double glide_ratio() const { return v0_ / r0_; }

  /// sqrt(rho(z0) / rho(z)).
  [[nodiscard]] double scale(double z) const;
  [[nodiscard]] Speeds at(double z) const;
  [[nodiscard]] double horizontal(double z) const { return v0_ * scale(z); }
  [[nodiscard]] double sink(double z) const { return r0_ * scale(z); }
  /// Airspeed magnitude sqrt(v^2 + r^2); nondecreasing in z.
  [[nodiscard]] double airspeed(double z) const;

  /// Same physical profile re-anchored at another altitude.
  [[nodiscard]] SpeedProfile anchored_at(double z) const;

  /// Descent time from z_high down to z_low, i.e. the integral of 1 / r(z)
  /// over [z_low, z_high], in closed form.
  [[nodiscard]] double descent_time(double z_low, double z_high) const;

 private:
  AtmosphereModel atmosphere_;
  double z0_;
  double v0_;
  double r0_;
};

/// Free function forms used throughout the guidance code.
[[nodiscard]] double density(const AtmosphereModel& model, double z);
[[nodiscard]] Speeds speeds_at(const SpeedProfile& profile, double z);

/// Bijection between altitude and time during a descent that starts at
/// profile.z0() at time t0 and lands at z_f. Time increases as altitude drops.
class TimeAltitudeMap {
 public:
  TimeAltitudeMap(SpeedProfile profile, double t0, double z_final);

  [[nodiscard]] const SpeedProfile& speed_profile() const { return profile_; }
  [[nodiscard]] double t0() const { return t0_; }
  [[nodiscard]] double z0() const { return profile_.z0(); }
  [[nodiscard]] double z_final() const { return z_final_; }
  [[nodiscard]] double t_final() const { return t_final_; }

  /// Domain: [z_f, z0].
  [[nodiscard]] double time_of_altitude(double z) const;
  /// Domain: [t0, t_f].
  [[nodiscard]] double altitude_of_time(double t) const;
  [[nodiscard]] double final_time() const { return t_final_; }

 private:
  // Unchecked closed forms shared by the checked accessors.
  [[nodiscard]] double elapsed(double z) const;
  [[nodiscard]] double altitude_after(double elapsed) const;

  SpeedProfile profile_;
  double t0_;
  double z_final_;
  double t_final_;
};

[[nodiscard]] double time_of_altitude(const TimeAltitudeMap& map, double z);
[[nodiscard]] double altitude_of_time(const TimeAltitudeMap& map, double t);
[[nodiscard]] double final_time(const TimeAltitudeMap& map);

}  // namespace parafoil
