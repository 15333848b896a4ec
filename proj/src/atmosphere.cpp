#include "parafoil/atmosphere.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace parafoil {

namespace {

constexpr double kDomainGuard = 1e-12;

[[noreturn]] void throw_domain(const std::string& what) { throw std::domain_error(what); }

}  // namespace

AtmosphereModel::AtmosphereModel(double c_h, double c_rho, double c_e)
    : c_h_(c_h), c_rho_(c_rho), c_e_(c_e) {
  if (!(c_h > 0.0) || !(c_rho > 0.0) || !(c_e > 0.0)) {
    throw std::invalid_argument("atmosphere constants must be strictly positive");
  }
}

double AtmosphereModel::base(double z) const {
  const double b = 1.0 - z * c_rho_;
  if (!(b > kDomainGuard)) {
    throw_domain("altitude " + std::to_string(z) + " m is outside the density model domain");
  }
  return b;
}

bool AtmosphereModel::in_domain(double z) const { return 1.0 - z * c_rho_ > kDomainGuard; }

double AtmosphereModel::density(double z) const { return c_h_ * std::pow(base(z), c_e_); }

SpeedProfile::SpeedProfile(AtmosphereModel atmosphere, double z0, double v0, double r0)
    : atmosphere_(atmosphere), z0_(z0), v0_(v0), r0_(r0) {
  if (!(v0 > 0.0) || !(r0 > 0.0)) {
    throw std::invalid_argument("reference speeds must be strictly positive");
  }
  (void)atmosphere_.base(z0);
}

double SpeedProfile::scale(double z) const {
  // sqrt(rho(z0)/rho(z)) = (b(z0)/b(z))^(c_e/2); c_h cancels.
  return std::pow(atmosphere_.base(z0_) / atmosphere_.base(z), 0.5 * atmosphere_.c_e());
}

Speeds SpeedProfile::at(double z) const {
  const double s = scale(z);
  return {v0_ * s, r0_ * s};
}

double SpeedProfile::airspeed(double z) const {
  const Speeds s = at(z);
  return std::hypot(s.horizontal, s.sink);
}

SpeedProfile SpeedProfile::anchored_at(double z) const {
  const Speeds s = at(z);
  return {atmosphere_, z, s.horizontal, s.sink};
}

double SpeedProfile::descent_time(double z_low, double z_high) const {
  if (z_low > z_high) throw std::invalid_argument("descent_time expects z_low <= z_high");
  const double c_rho = atmosphere_.c_rho();
  const double p = 0.5 * atmosphere_.c_e() + 1.0;
  const double b_ref = atmosphere_.base(z0_);
  const double b_high = atmosphere_.base(z_high);
  (void)atmosphere_.base(z_low);
  // b_low^p - b_high^p written as b_high^p * expm1(p * log(b_low / b_high)).
  const double log_ratio = std::log1p(c_rho * (z_high - z_low) / b_high);
  const double weight = std::pow(b_high / b_ref, 0.5 * atmosphere_.c_e()) * b_high;
  return weight * std::expm1(p * log_ratio) / (c_rho * p * r0_);
}

double density(const AtmosphereModel& model, double z) { return model.density(z); }

Speeds speeds_at(const SpeedProfile& profile, double z) { return profile.at(z); }

TimeAltitudeMap::TimeAltitudeMap(SpeedProfile profile, double t0, double z_final)
    : profile_(profile), t0_(t0), z_final_(z_final), t_final_(t0) {
  if (z_final > profile_.z0()) {
    throw std::invalid_argument("landing altitude lies above the start altitude");
  }
  (void)profile_.atmosphere().base(z_final);
  t_final_ = t0_ + elapsed(z_final_);
}

double TimeAltitudeMap::elapsed(double z) const {
  const AtmosphereModel& atm = profile_.atmosphere();
  const double c_rho = atm.c_rho();
  const double p = 0.5 * atm.c_e() + 1.0;
  const double b0 = atm.base(profile_.z0());
  const double log_ratio = std::log1p(c_rho * (profile_.z0() - z) / b0);
  return b0 * std::expm1(p * log_ratio) / (c_rho * p * profile_.r0());
}

double TimeAltitudeMap::altitude_after(double elapsed) const {
  const AtmosphereModel& atm = profile_.atmosphere();
  const double c_rho = atm.c_rho();
  const double p = 0.5 * atm.c_e() + 1.0;
  const double b0 = atm.base(profile_.z0());
  const double q = elapsed * profile_.r0() * c_rho * p / b0;
  return profile_.z0() - b0 * std::expm1(std::log1p(q) / p) / c_rho;
}

double TimeAltitudeMap::time_of_altitude(double z) const {
  if (z < z_final_ || z > profile_.z0()) {
    throw_domain("altitude " + std::to_string(z) + " m outside [z_f, z0]");
  }
  if (z == profile_.z0()) return t0_;
  return t0_ + elapsed(z);
}

double TimeAltitudeMap::altitude_of_time(double t) const {
  if (t < t0_ || t > t_final_) {
    throw_domain("time " + std::to_string(t) + " s outside [t0, t_f]");
  }
  if (t == t0_) return profile_.z0();
  if (t == t_final_) return z_final_;
  return altitude_after(t - t0_);
}

double time_of_altitude(const TimeAltitudeMap& map, double z) { return map.time_of_altitude(z); }
double altitude_of_time(const TimeAltitudeMap& map, double t) { return map.altitude_of_time(t); }
double final_time(const TimeAltitudeMap& map) { return map.final_time(); }

}  // namespace parafoil
