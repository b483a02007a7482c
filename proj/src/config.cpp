#include "gpe_optctl/config.hpp"

#include <fstream>
#include <set>
#include <type_traits>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

using nlohmann::json;

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::grape: return "grape";
    case OptimizerKind::krotov: return "krotov";
    case OptimizerKind::hybrid: return "hybrid";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  problem.validate();
  grape.validate();
  krotov.validate();
  if (switch_after < 0) throw ConfigError("optimizer.switch_after must be >= 0");
  if (output.density_stride < 1) throw ConfigError("output.density_stride must be >= 1");
}

ExperimentConfig default_config(const std::string& preset) {
  ExperimentConfig c;
  c.problem = preset_problem(preset);
  c.krotov.k = preset == "shaking" ? 5e-3 : 1e-3;
  return c;
}

namespace {

std::string search_name(SearchKind s) { return s == SearchKind::bfgs ? "bfgs" : "conjugate_gradient"; }
std::string norm_name(NormKind n) { return n == NormKind::H1 ? "H1" : "L2"; }
std::string shape_name(ShapeKind s) { return s == ShapeKind::flat ? "flat" : "sine_ramp"; }

json state_json(const StateSpec& s) {
  json j{{"kind", to_string(s.kind)}, {"lambda", s.lambda}};
  if (s.kind == StateKind::excited) j["order"] = s.order;
  return j;
}

/// Walks one JSON object and rejects keys that nobody read.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Reader() = default;

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      const auto& v = j_.at(key);
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where(key) + ": expected a non-negative integer");
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(j_.at(key), where(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + where(key) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_state(Reader r, StateSpec& s) {
  std::string kind = to_string(s.kind);
  r.get("kind", kind);
  s.kind = parse_state_kind(kind);
  r.get("lambda", s.lambda);
  r.get("order", s.order);
  r.finish();
}

void read_problem(Reader r, ProblemSpec& p) {
  r.get("preset", p.name);
  if (r.has("potential")) {
    auto pr = r.child("potential");
    pr.get("kind", p.potential_kind);
    if (pr.has("coefficients")) {
      std::map<std::string, double> coeffs;
      pr.get("coefficients", coeffs);
      p.coefficients = coeffs;
    }
    pr.finish();
  }
  r.get("mass", p.phys.mass);
  r.get("kappa", p.phys.kappa);
  if (r.has("grid")) {
    auto g = r.child("grid");
    g.get("x_min", p.x_min);
    g.get("x_max", p.x_max);
    g.get("n_points", p.n_points);
    g.finish();
  }
  if (r.has("time")) {
    auto t = r.child("time");
    t.get("t_final", p.t_final);
    t.get("n_steps", p.n_steps);
    t.finish();
  }
  if (r.has("initial")) read_state(r.child("initial"), p.initial);
  if (r.has("desired")) read_state(r.child("desired"), p.desired);
  if (r.has("guess")) {
    auto g = r.child("guess");
    std::string kind = to_string(p.guess.kind);
    g.get("kind", kind);
    p.guess.kind = parse_guess_kind(kind);
    g.get("lambda_start", p.guess.lambda_start);
    g.get("lambda_end", p.guess.lambda_end);
    g.get("kick_amplitude", p.guess.kick_amplitude);
    g.get("kick_periods", p.guess.kick_periods);
    g.get("noise_amplitude", p.guess.noise_amplitude);
    g.finish();
  }
  if (r.has("stationary")) {
    auto s = r.child("stationary");
    s.get("residual_tolerance", p.stationary.residual_tolerance);
    s.get("mixing", p.stationary.mixing);
    s.get("max_iterations", p.stationary.max_iterations);
    s.finish();
  }
  if (r.has("propagator")) {
    auto s = r.child("propagator");
    s.get("norm_check_tol", p.propagator.norm_check_tol);
    s.get("sequential_tol", p.propagator.sequential_tol);
    s.get("sequential_max_iterations", p.propagator.sequential_max_iterations);
    s.finish();
  }
  r.finish();
}

void read_grape(Reader r, GrapeConfig& g) {
  std::string search = search_name(g.search);
  r.get("search", search);
  if (search == "bfgs") {
    g.search = SearchKind::bfgs;
  } else if (search == "conjugate_gradient" || search == "cg") {
    g.search = SearchKind::conjugate_gradient;
  } else {
    throw ConfigError("optimizer.grape.search: unknown value '" + search + "'");
  }
  std::string norm = norm_name(g.norm);
  r.get("norm", norm);
  if (norm == "H1") {
    g.norm = NormKind::H1;
  } else if (norm == "L2") {
    g.norm = NormKind::L2;
  } else {
    throw ConfigError("optimizer.grape.norm: unknown value '" + norm + "'");
  }
  r.get("gamma", g.gamma);
  r.get("max_equations", g.max_equations);
  r.get("stop_JT", g.stop_JT);
  r.get("max_iterations", g.max_iterations);
  r.get("cg_restart", g.cg_restart);
  if (r.has("line_search")) {
    auto l = r.child("line_search");
    l.get("c1", g.line_search.c1);
    l.get("c2", g.line_search.c2);
    l.get("max_trials", g.line_search.max_trials);
    l.get("rel_tol", g.line_search.rel_tol);
    l.get("expand", g.line_search.expand);
    l.get("initial_step_inf", g.line_search.initial_step_inf);
    l.finish();
  }
  r.finish();
}

void read_krotov(Reader r, KrotovConfig& k) {
  r.get("k", k.k);
  std::string shape = shape_name(k.shape);
  r.get("shape", shape);
  if (shape == "flat") {
    k.shape = ShapeKind::flat;
  } else if (shape == "sine_ramp") {
    k.shape = ShapeKind::sine_ramp;
  } else {
    throw ConfigError("optimizer.krotov.shape: unknown value '" + shape + "'");
  }
  r.get("ramp_fraction", k.ramp_fraction);
  std::string mode = to_string(k.update_mode);
  r.get("update_mode", mode);
  if (mode == "newton") {
    k.update_mode = UpdateMode::newton;
  } else if (mode == "explicit") {
    k.update_mode = UpdateMode::explicit_update;
  } else {
    throw ConfigError("optimizer.krotov.update_mode: unknown value '" + mode + "'");
  }
  r.get("newton_tol", k.newton_tol);
  r.get("newton_max_iterations", k.newton_max_iterations);
  if (r.has("adaptive")) {
    const json& a = r.raw("adaptive");
    if (a.is_null() || (a.is_boolean() && !a.get<bool>())) {
      k.adaptive.reset();
    } else if (a.is_boolean()) {
      k.adaptive = AdaptiveK{};
    } else {
      AdaptiveK ad = k.adaptive.value_or(AdaptiveK{});
      Reader ar(a, "optimizer.krotov.adaptive");
      ar.get("k0", ad.k0);
      ar.get("growth", ad.growth);
      ar.get("target_decrease", ad.target_decrease);
      ar.finish();
      k.adaptive = ad;
    }
  }
  r.get("max_equations", k.max_equations);
  r.get("stop_JT", k.stop_JT);
  r.get("max_iterations", k.max_iterations);
  r.get("rise_limit", k.rise_limit);
  r.get("max_halvings", k.max_halvings);
  r.finish();
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  const auto& p = c.problem;
  json problem{
      {"preset", p.name},
      {"potential", {{"kind", p.potential_kind}, {"coefficients", p.coefficients}}},
      {"mass", p.phys.mass},
      {"kappa", p.phys.kappa},
      {"grid", {{"x_min", p.x_min}, {"x_max", p.x_max}, {"n_points", p.n_points}}},
      {"time", {{"t_final", p.t_final}, {"n_steps", p.n_steps}}},
      {"initial", state_json(p.initial)},
      {"desired", state_json(p.desired)},
      {"guess",
       {{"kind", to_string(p.guess.kind)},
        {"lambda_start", p.guess.lambda_start},
        {"lambda_end", p.guess.lambda_end},
        {"kick_amplitude", p.guess.kick_amplitude},
        {"kick_periods", p.guess.kick_periods},
        {"noise_amplitude", p.guess.noise_amplitude}}},
      {"stationary",
       {{"residual_tolerance", p.stationary.residual_tolerance},
        {"mixing", p.stationary.mixing},
        {"max_iterations", p.stationary.max_iterations}}},
      {"propagator",
       {{"norm_check_tol", p.propagator.norm_check_tol},
        {"sequential_tol", p.propagator.sequential_tol},
        {"sequential_max_iterations", p.propagator.sequential_max_iterations}}},
  };
  const auto& g = c.grape;
  json grape{{"search", search_name(g.search)},
             {"norm", norm_name(g.norm)},
             {"gamma", g.gamma},
             {"max_equations", g.max_equations},
             {"stop_JT", g.stop_JT},
             {"max_iterations", g.max_iterations},
             {"cg_restart", g.cg_restart},
             {"line_search",
              {{"c1", g.line_search.c1},
               {"c2", g.line_search.c2},
               {"max_trials", g.line_search.max_trials},
               {"rel_tol", g.line_search.rel_tol},
               {"expand", g.line_search.expand},
               {"initial_step_inf", g.line_search.initial_step_inf}}}};
  const auto& k = c.krotov;
  json adaptive = nullptr;
  if (k.adaptive) {
    adaptive = {{"k0", k.adaptive->k0}, {"growth", k.adaptive->growth}, {"target_decrease", k.adaptive->target_decrease}};
  }
  json krotov{{"k", k.k},
              {"shape", shape_name(k.shape)},
              {"ramp_fraction", k.ramp_fraction},
              {"update_mode", to_string(k.update_mode)},
              {"newton_tol", k.newton_tol},
              {"newton_max_iterations", k.newton_max_iterations},
              {"adaptive", adaptive},
              {"max_equations", k.max_equations},
              {"stop_JT", k.stop_JT},
              {"max_iterations", k.max_iterations},
              {"rise_limit", k.rise_limit},
              {"max_halvings", k.max_halvings}};
  return json{{"problem", problem},
              {"optimizer",
               {{"kind", to_string(c.optimizer)}, {"grape", grape}, {"krotov", krotov}, {"switch_after", c.switch_after}}},
              {"output", {{"density_stride", c.output.density_stride}, {"snapshot_every", c.output.snapshot_every}}},
              {"seed", c.seed}};
}

ExperimentConfig config_from_json(const json& raw) {
  if (!raw.is_object()) throw ConfigError("config must be a JSON object");
  std::string preset = "splitting";
  if (raw.contains("problem") && raw["problem"].is_object() && raw["problem"].contains("preset")) {
    if (!raw["problem"]["preset"].is_string()) throw ConfigError("problem.preset must be a string");
    preset = raw["problem"]["preset"].get<std::string>();
  }
  ExperimentConfig c = default_config(preset);

  Reader top(raw, "");
  if (top.has("problem")) read_problem(top.child("problem"), c.problem);
  if (top.has("optimizer")) {
    auto o = top.child("optimizer");
    std::string kind = to_string(c.optimizer);
    o.get("kind", kind);
    if (kind == "grape") {
      c.optimizer = OptimizerKind::grape;
    } else if (kind == "krotov") {
      c.optimizer = OptimizerKind::krotov;
    } else if (kind == "hybrid") {
      c.optimizer = OptimizerKind::hybrid;
    } else {
      throw ConfigError("optimizer.kind: unknown value '" + kind + "'");
    }
    if (o.has("grape")) read_grape(o.child("grape"), c.grape);
    if (o.has("krotov")) read_krotov(o.child("krotov"), c.krotov);
    o.get("switch_after", c.switch_after);
    o.finish();
  }
  if (top.has("output")) {
    auto o = top.child("output");
    o.get("density_stride", c.output.density_stride);
    o.get("snapshot_every", c.output.snapshot_every);
    o.finish();
  }
  top.get("seed", c.seed);
  top.finish();
  c.grape.snapshot_every = c.output.snapshot_every;
  c.krotov.snapshot_every = c.output.snapshot_every;
  c.validate();
  return c;
}

void apply_override(json& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  if (!raw.is_object()) raw = json::object();
  json* node = &raw;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("override key '" + key + "' descends into a non-object value");
    node = &next;
    start = dot + 1;
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
}

ExperimentConfig resolve_config(const json& raw, const std::vector<std::string>& overrides) {
  json merged = raw;
  for (const auto& o : overrides) apply_override(merged, o);
  return config_from_json(merged);
}

std::vector<SweepRun> expand_sweep(const json& sweep, const std::vector<std::string>& overrides) {
  if (!sweep.is_object()) throw ConfigError("sweep file must be a JSON object");
  for (const auto& [key, _] : sweep.items()) {
    if (key != "base" && key != "grid") throw ConfigError("unknown sweep key '" + key + "'");
  }
  const json base = sweep.value("base", json::object());
  const json grid = sweep.value("grid", json::object());
  if (!grid.is_object()) throw ConfigError("sweep grid must be an object of value lists");

  std::vector<std::pair<std::string, std::vector<json>>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) throw ConfigError("sweep grid '" + key + "' must be a non-empty list");
    axes.emplace_back(key, std::vector<json>(values.begin(), values.end()));
  }

  std::vector<SweepRun> runs;
  std::vector<std::size_t> index(axes.size(), 0);
  for (;;) {
    std::vector<std::string> assignments = overrides;
    std::vector<std::string> grid_assignments;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      grid_assignments.push_back(axes[a].first + "=" + axes[a].second[index[a]].dump());
    }
    assignments.insert(assignments.end(), grid_assignments.begin(), grid_assignments.end());
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", runs.size());
    runs.push_back({name, grid_assignments, resolve_config(base, assignments)});

    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++index[a] < axes[a].second.size()) break;
      index[a] = 0;
    }
    if (a == axes.size()) break;
  }
  return runs;
}

}  // namespace gpe_optctl
