#include "parafoil/scenario_config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace parafoil {

namespace {

using nlohmann::json;

// Strict view of one JSON object: every key read is recorded so leftovers can
// be reported by name.
class Reader {
 public:
  Reader(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ != nullptr && !node_->is_object()) throw ConfigError(path_, "expected an object");
  }

  void number(const char* key, double& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number()) throw ConfigError(at(key), "expected a number");
    out = v->get<double>();
    if (!std::isfinite(out)) throw ConfigError(at(key), "must be finite");
  }

  void integer(const char* key, int& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
    out = v->get<int>();
  }

  void seed(const char* key, std::uint64_t& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number_unsigned()) throw ConfigError(at(key), "expected an unsigned integer");
    out = v->get<std::uint64_t>();
  }

  void boolean(const char* key, bool& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
    out = v->get<bool>();
  }

  void optional(const char* key, std::optional<double>& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (v->is_null()) {
      out.reset();
      return;
    }
    double x = 0.0;
    number(key, x);
    out = x;
  }

  // null means +infinity.
  void number_or_inf(const char* key, double& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (v->is_null()) {
      out = std::numeric_limits<double>::infinity();
      return;
    }
    number(key, out);
  }

  void vec2(const char* key, Eigen::Vector2d& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
      throw ConfigError(at(key), "expected an array of two numbers");
    }
    out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
  }

  Reader child(const char* key) { return Reader(find(key), at(key)); }

  // Call after all reads.
  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& item : node_->items()) {
      if (seen_.count(item.key()) == 0) throw ConfigError(at(item.key()), "unknown key");
    }
  }

 private:
  const json* find(const std::string& key) {
    seen_.insert(key);
    if (node_ == nullptr) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }
  [[nodiscard]] std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

json inf_or_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

template <class F>
void check(const char* key, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

SpeedProfile ScenarioConfig::speeds() const {
  return SpeedProfile(atmosphere, speed_altitude, v_measured, r_measured).anchored_at(z0);
}

PlanningProblem ScenarioConfig::problem() const {
  const SpeedProfile sp = speeds();
  WindProfile profile = generate_profile(wind, sp, altitude_grid(z_final - 50.0, z0 + 10.0, wind_spacing));
  return PlanningProblem{sp,  t0,     z_final, std::move(profile), x0, psi0, target, psi_f, psi_dot_max,
                         nodes, mesh_ratio};
}

FlightConfig ScenarioConfig::flight() const {
  FlightConfig f{problem(), planner, gains, dispersions, wind};
  f.replan_threshold = replan_threshold;
  f.replan_margin = replan_margin;
  f.replan_cooldown = replan_cooldown;
  f.substeps = substeps;
  return f;
}

CampaignConfig ScenarioConfig::campaign_config() const {
  CampaignConfig c(flight());
  c.runs = campaign.runs;
  c.base_seed = campaign.base_seed;
  c.radius_min = campaign.radius_min;
  c.radius_max = campaign.radius_max;
  c.altitude_min = campaign.altitude_min;
  c.altitude_max = campaign.altitude_max;
  c.randomize_wind = campaign.randomize_wind;
  c.wind_spacing = wind_spacing;
  c.threads = campaign.threads;
  return c;
}

void ScenarioConfig::validate() const {
  check("atmosphere", [&] { AtmosphereModel(atmosphere.c_h(), atmosphere.c_rho(), atmosphere.c_e()); });
  check("speeds", [&] { (void)speeds(); });
  require(z0 > z_final, "boundary.z0", "must exceed z_final");
  require(atmosphere.in_domain(z0), "boundary.z0", "outside the atmosphere domain");
  require(psi_dot_max > 0.0, "psi_dot_max", "must be positive");
  require(nodes >= 3, "mesh.nodes", "must be at least 3");
  require(mesh_ratio > 0.0, "mesh.ratio", "must be positive");
  require(planner.alpha1 >= 0.0 && planner.alpha2 >= 0.0 && planner.alpha5 >= 0.0, "planner",
          "weights must be nonnegative");
  require(!planner.eps_h || *planner.eps_h > 0.0, "planner.eps_h", "must be positive");
  require(!planner.eps_u || *planner.eps_u > 0.0, "planner.eps_u", "must be positive");
  require(planner.conv_tol > 0.0, "planner.conv_tol", "must be positive");
  require(planner.max_iter >= 1, "planner.max_iter", "must be at least 1");
  require(planner.phase2_max_iter >= 0, "planner.phase2_max_iter", "must be nonnegative");
  require(planner.solver.max_iter >= 1, "planner.solver.max_iter", "must be at least 1");
  check("wind", [&] { wind.validate(); });
  require(wind_spacing > 0.0, "wind.spacing", "must be positive");
  check("controller", [&] { gains.validate(); });
  check("truth", [&] { dispersions.validate(); });
  require(replan_threshold > 0.0, "flight.replan_threshold", "must be positive or null");
  require(replan_margin >= 0.0, "flight.replan_margin", "must be nonnegative");
  require(replan_cooldown >= 0.0, "flight.replan_cooldown", "must be nonnegative");
  require(substeps >= 1, "flight.substeps", "must be at least 1");
  check("campaign", [&] { campaign_config().validate(); });
}

ScenarioConfig parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  ScenarioConfig c;
  Reader root(&doc, "");
  int version = 0;
  root.integer("version", version);
  if (version != ScenarioConfig::kVersion) {
    throw ConfigError("version", "unsupported schema version, expected " + std::to_string(ScenarioConfig::kVersion));
  }
  {
    Reader r = root.child("atmosphere");
    double c_h = c.atmosphere.c_h(), c_rho = c.atmosphere.c_rho(), c_e = c.atmosphere.c_e();
    r.number("c_h", c_h);
    r.number("c_rho", c_rho);
    r.number("c_e", c_e);
    r.finish();
    check("atmosphere", [&] { c.atmosphere = AtmosphereModel(c_h, c_rho, c_e); });
  }
  {
    Reader r = root.child("speeds");
    r.number("v", c.v_measured);
    r.number("r", c.r_measured);
    r.number("z", c.speed_altitude);
    r.finish();
  }
  {
    Reader r = root.child("boundary");
    r.number("t0", c.t0);
    r.number("z0", c.z0);
    r.number("z_final", c.z_final);
    r.vec2("x0", c.x0);
    r.number("psi0", c.psi0);
    r.vec2("target", c.target);
    r.number("psi_f", c.psi_f);
    r.finish();
  }
  root.number("psi_dot_max", c.psi_dot_max);
  {
    Reader r = root.child("mesh");
    r.integer("nodes", c.nodes);
    r.number("ratio", c.mesh_ratio);
    r.finish();
  }
  {
    Reader r = root.child("planner");
    PlannerSettings& p = c.planner;
    r.number("alpha1", p.alpha1);
    r.number("alpha2", p.alpha2);
    r.number("alpha5", p.alpha5);
    r.optional("eps_h", p.eps_h);
    r.optional("eps_u", p.eps_u);
    r.number("conv_tol", p.conv_tol);
    r.integer("max_iter", p.max_iter);
    r.integer("phase2_max_iter", p.phase2_max_iter);
    Reader s = r.child("solver");
    s.number("gap_tol", p.solver.gap_tol);
    s.number("abs_gap_tol", p.solver.abs_gap_tol);
    s.number("feas_tol", p.solver.feas_tol);
    s.integer("max_iter", p.solver.max_iter);
    s.finish();
    r.finish();
  }
  {
    Reader r = root.child("wind");
    DrydenParams& w = c.wind;
    r.number("w_ref", w.w_ref);
    r.number("z_ref", w.z_ref);
    r.number("shear_exponent", w.shear_exponent);
    r.number("direction", w.direction);
    r.number("sigma_lf", w.sigma_lf);
    r.number("sigma_hf", w.sigma_hf);
    r.number("length_lf", w.length_lf);
    r.number("length_hf", w.length_hf);
    r.seed("seed_x", w.seed_x);
    r.seed("seed_y", w.seed_y);
    r.number("spacing", c.wind_spacing);
    r.finish();
  }
  {
    Reader r = root.child("controller");
    r.number("k_cross", c.gains.k_cross);
    r.number("k_heading", c.gains.k_heading);
    r.number("k_long", c.gains.k_long);
    r.number("sink_authority", c.gains.sink_authority);
    r.finish();
  }
  {
    Reader r = root.child("truth");
    r.number("v_bias", c.dispersions.v_bias);
    r.number("r_bias", c.dispersions.r_bias);
    r.number("actuator_tau", c.dispersions.actuator_tau);
    r.number("gust_sigma", c.dispersions.gust_sigma);
    r.number("gust_length", c.dispersions.gust_length);
    r.finish();
  }
  {
    Reader r = root.child("flight");
    r.number_or_inf("replan_threshold", c.replan_threshold);
    r.number("replan_margin", c.replan_margin);
    r.number("replan_cooldown", c.replan_cooldown);
    r.integer("substeps", c.substeps);
    r.finish();
  }
  {
    Reader r = root.child("campaign");
    CampaignBlock& b = c.campaign;
    r.integer("runs", b.runs);
    r.seed("base_seed", b.base_seed);
    r.number("radius_min", b.radius_min);
    r.number("radius_max", b.radius_max);
    r.number("altitude_min", b.altitude_min);
    r.number("altitude_max", b.altitude_max);
    r.boolean("randomize_wind", b.randomize_wind);
    r.integer("threads", b.threads);
    r.finish();
  }
  root.finish();
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const ScenarioConfig& c) {
  const PlannerSettings& p = c.planner;
  const DrydenParams& w = c.wind;
  json doc = {
      {"version", ScenarioConfig::kVersion},
      {"atmosphere", {{"c_h", c.atmosphere.c_h()}, {"c_rho", c.atmosphere.c_rho()}, {"c_e", c.atmosphere.c_e()}}},
      {"speeds", {{"v", c.v_measured}, {"r", c.r_measured}, {"z", c.speed_altitude}}},
      {"boundary",
       {{"t0", c.t0},
        {"z0", c.z0},
        {"z_final", c.z_final},
        {"x0", {c.x0.x(), c.x0.y()}},
        {"psi0", c.psi0},
        {"target", {c.target.x(), c.target.y()}},
        {"psi_f", c.psi_f}}},
      {"psi_dot_max", c.psi_dot_max},
      {"mesh", {{"nodes", c.nodes}, {"ratio", c.mesh_ratio}}},
      {"planner",
       {{"alpha1", p.alpha1},
        {"alpha2", p.alpha2},
        {"alpha5", p.alpha5},
        {"eps_h", optional_number(p.eps_h)},
        {"eps_u", optional_number(p.eps_u)},
        {"conv_tol", p.conv_tol},
        {"max_iter", p.max_iter},
        {"phase2_max_iter", p.phase2_max_iter},
        {"solver",
         {{"gap_tol", p.solver.gap_tol},
          {"abs_gap_tol", p.solver.abs_gap_tol},
          {"feas_tol", p.solver.feas_tol},
          {"max_iter", p.solver.max_iter}}}}},
      {"wind",
       {{"w_ref", w.w_ref},
        {"z_ref", w.z_ref},
        {"shear_exponent", w.shear_exponent},
        {"direction", w.direction},
        {"sigma_lf", w.sigma_lf},
        {"sigma_hf", w.sigma_hf},
        {"length_lf", w.length_lf},
        {"length_hf", w.length_hf},
        {"seed_x", w.seed_x},
        {"seed_y", w.seed_y},
        {"spacing", c.wind_spacing}}},
      {"controller",
       {{"k_cross", c.gains.k_cross},
        {"k_heading", c.gains.k_heading},
        {"k_long", c.gains.k_long},
        {"sink_authority", c.gains.sink_authority}}},
      {"truth",
       {{"v_bias", c.dispersions.v_bias},
        {"r_bias", c.dispersions.r_bias},
        {"actuator_tau", c.dispersions.actuator_tau},
        {"gust_sigma", c.dispersions.gust_sigma},
        {"gust_length", c.dispersions.gust_length}}},
      {"flight",
       {{"replan_threshold", inf_or_number(c.replan_threshold)},
        {"replan_margin", c.replan_margin},
        {"replan_cooldown", c.replan_cooldown},
        {"substeps", c.substeps}}},
      {"campaign",
       {{"runs", c.campaign.runs},
        {"base_seed", c.campaign.base_seed},
        {"radius_min", c.campaign.radius_min},
        {"radius_max", c.campaign.radius_max},
        {"altitude_min", c.campaign.altitude_min},
        {"altitude_max", c.campaign.altitude_max},
        {"randomize_wind", c.campaign.randomize_wind},
        {"threads", c.campaign.threads}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace parafoil
