#include "selmut/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace selmut {
namespace {

using nlohmann::json;

std::string join_issues(const std::vector<std::string>& issues) {
  std::string s = "configuration errors:";
  for (const std::string& e : issues) s += "\n  - " + e;
  return s;
}

// Typed, defaulting accessors over one JSON object; records type errors and
// unknown keys instead of throwing so a single pass reports everything.
class ObjReader {
 public:
  ObjReader(const json* j, std::string path, bool strict, std::vector<std::string>& errors,
            std::vector<std::string>& warnings)
      : j_(j), path_(std::move(path)), strict_(strict), errors_(errors), warnings_(warnings) {}

  bool has(const char* key) const { return j_ && j_->contains(key); }

  double number(const char* key, double dflt) {
    if (!has(key)) return dflt;
    mark(key);
    const json& v = (*j_)[key];
    if (!v.is_number()) {
      type_error(key, "a number");
      return dflt;
    }
    return v.get<double>();
  }

  // `null` selects `null_value` (used for "measure it from the data" knobs).
  double number_or_null(const char* key, double dflt, double null_value) {
    if (!has(key)) return dflt;
    mark(key);
    const json& v = (*j_)[key];
    if (v.is_null()) return null_value;
    if (!v.is_number()) {
      type_error(key, "a number or null");
      return dflt;
    }
    return v.get<double>();
  }

  long long integer(const char* key, long long dflt) {
    if (!has(key)) return dflt;
    mark(key);
    const json& v = (*j_)[key];
    if (!v.is_number_integer()) {
      type_error(key, "an integer");
      return dflt;
    }
    return v.get<long long>();
  }

  bool boolean(const char* key, bool dflt) {
    if (!has(key)) return dflt;
    mark(key);
    const json& v = (*j_)[key];
    if (!v.is_boolean()) {
      type_error(key, "a boolean");
      return dflt;
    }
    return v.get<bool>();
  }

  std::string str(const char* key, std::string dflt) {
    if (!has(key)) return dflt;
    mark(key);
    const json& v = (*j_)[key];
    if (!v.is_string()) {
      type_error(key, "a string");
      return dflt;
    }
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key, std::vector<double> dflt) {
    if (!has(key)) return dflt;
    mark(key);
    const json& v = (*j_)[key];
    if (!v.is_array()) {
      type_error(key, "an array of numbers");
      return dflt;
    }
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) {
        type_error(key, "an array of numbers");
        return dflt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const char* key, std::vector<std::string> dflt) {
    if (!has(key)) return dflt;
    mark(key);
    const json& v = (*j_)[key];
    if (!v.is_array()) {
      type_error(key, "an array of strings");
      return dflt;
    }
    std::vector<std::string> out;
    for (const json& e : v) {
      if (!e.is_string()) {
        type_error(key, "an array of strings");
        return dflt;
      }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  const json* object(const char* key) {
    if (!has(key)) return nullptr;
    mark(key);
    const json& v = (*j_)[key];
    if (!v.is_object()) {
      type_error(key, "an object");
      return nullptr;
    }
    return &v;
  }

  void finish() {
    if (!j_) return;
    for (const auto& item : j_->items()) {
      if (seen_.count(item.key())) continue;
      std::string msg = "unknown key '" + path_ + "." + item.key() + "'";
      if (strict_)
        errors_.push_back(msg);
      else
        warnings_.push_back(msg + " (ignored)");
    }
  }

  void record(const std::string& msg) { errors_.push_back(path_ + ": " + msg); }

 private:
  void mark(const std::string& key) { seen_.insert(key); }
  void type_error(const char* key, const char* want) {
    errors_.push_back(path_ + "." + key + " must be " + want);
  }

  const json* j_;
  std::string path_;
  bool strict_;
  std::set<std::string> seen_;
  std::vector<std::string>& errors_;
  std::vector<std::string>& warnings_;
};

BoundedFunction parse_rate(const json* jr, const std::string& path, const char* dflt_family,
                           BoundedFunction dflt, bool strict, std::vector<std::string>& errors,
                           std::vector<std::string>& warnings) {
  if (!jr) return dflt;
  ObjReader r(jr, path, strict, errors, warnings);
  std::string family = r.str("family", dflt_family);
  BoundedFunction out = dflt;
  try {
    if (family == "constant") {
      out = BoundedFunction::constant(r.number("value", 1.0));
    } else if (family == "rational_bump") {
      out = BoundedFunction::rational_bump(r.number("amp", 1.0), r.number("center", 0.0),
                                           r.number("width", 1.0), r.number("base", 0.0));
    } else if (family == "sinusoidal") {
      out = BoundedFunction::sinusoidal(r.number("offset", 0.0), r.number("amp", 0.5),
                                        r.number("freq", 1.0));
    } else {
      r.record("family '" + family + "' unknown (constant, rational_bump, sinusoidal)");
    }
  } catch (const std::exception& e) {
    r.record(e.what());
  }
  r.finish();
  return out;
}

InitialDataSpec parse_initial(const json* ji, bool strict, std::vector<std::string>& errors,
                              std::vector<std::string>& warnings, InitialDataSpec dflt) {
  if (!ji) return dflt;
  ObjReader r(ji, "initial", strict, errors, warnings);
  std::string family = r.str("family", "cone");
  InitialDataSpec out = dflt;
  try {
    if (family == "cone") {
      out = InitialDataSpec::cone(r.number("height", 0.0), r.number("slope", 0.5),
                                  r.number("center", 0.0));
    } else if (family == "smoothed_cone") {
      out = InitialDataSpec::smoothed_cone(r.number("height", 0.0), r.number("slope", 0.5),
                                           r.number("center", 0.0), r.number("eps", 0.1));
    } else if (family == "two_cones") {
      out = InitialDataSpec::two_cones(r.number("height1", 0.0), r.number("slope1", 0.5),
                                       r.number("center1", -1.0), r.number("height2", -0.2),
                                       r.number("slope2", 0.7), r.number("center2", 1.0));
    } else if (family == "flat") {
      out = InitialDataSpec::flat(r.number("level", 0.0));
    } else {
      r.record("family '" + family + "' unknown (cone, smoothed_cone, two_cones, flat)");
    }
  } catch (const std::exception& e) {
    r.record(e.what());
  }
  r.finish();
  return out;
}

const std::set<std::string> kKnownChecks{"mass_bound", "positivity", "comparison", "sandwich",
                                         "lipschitz"};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues_)
    : std::runtime_error(join_issues(issues_)), issues(std::move(issues_)) {}

RateSpec default_rates() {
  return RateSpec(BoundedFunction::rational_bump(1.0, 0.0, 1.0, 0.0),
                  BoundedFunction::constant(1.0));
}

ParsedConfig parse_config(const std::string& json_text, bool strict) {
  std::vector<std::string> errors, warnings;
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("invalid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"the configuration must be a JSON object"});

  ExperimentConfig cfg;
  ObjReader top(&root, "config", strict, errors, warnings);

  if (const json* jk = top.object("kernel")) {
    ObjReader r(jk, "kernel", strict, errors, warnings);
    std::string family = r.str("family", "exponential");
    if (family == "exponential") {
      cfg.kernel = KernelSpec::exponential();
    } else if (family == "cosine") {
      double beta = r.number("beta", 0.5);
      try {
        cfg.kernel = KernelSpec::cosine(beta);
      } catch (const std::exception& e) {
        r.record(e.what());
      }
    } else {
      r.record("family '" + family + "' unknown (exponential, cosine)");
    }
    r.finish();
  }

  if (const json* jr = top.object("rates")) {
    ObjReader r(jr, "rates", strict, errors, warnings);
    BoundedFunction R = parse_rate(r.object("R"), "rates.R", "rational_bump",
                                   cfg.rates.R, strict, errors, warnings);
    BoundedFunction p = parse_rate(r.object("p"), "rates.p", "constant", cfg.rates.p, strict,
                                   errors, warnings);
    try {
      cfg.rates = RateSpec(R, p);
    } catch (const std::exception& e) {
      errors.push_back(std::string("rates: ") + e.what());
    }
    r.finish();
  }

  cfg.initial = parse_initial(top.object("initial"), strict, errors, warnings, cfg.initial);

  cfg.K_list = top.numbers("K_list", cfg.K_list);
  if (cfg.K_list.empty()) errors.push_back("K_list must hold at least one carrying capacity");
  for (double K : cfg.K_list)
    if (!(K > 1.0)) errors.push_back("K_list entries must exceed 1 (the scaling needs log K > 0)");
  cfg.K = top.number("K", cfg.K);
  if (!(cfg.K > 1.0)) errors.push_back("K must exceed 1 (the scaling needs log K > 0)");

  if (const json* jd = top.object("delta_rule")) {
    ObjReader r(jd, "delta_rule", strict, errors, warnings);
    std::string kind = r.str("kind", "power_law");
    if (kind == "power_law") {
      double expo = r.number("exponent", 2.0);
      if (!(expo > 0.0))
        r.record("exponent must be positive so the lattice refines as K grows");
      else
        cfg.delta_rule = DeltaRule::power_law(expo);
    } else if (kind == "explicit_step") {
      double step = r.number("step", 0.0);
      if (!(step > 0.0))
        r.record("step must be positive");
      else
        cfg.delta_rule = DeltaRule::explicit_step(step);
    } else {
      r.record("kind '" + kind + "' unknown (power_law, explicit_step)");
    }
    r.finish();
  }

  if (const json* jw = top.object("window")) {
    ObjReader r(jw, "window", strict, errors, warnings);
    cfg.x_min = r.number("x_min", cfg.x_min);
    cfg.x_max = r.number("x_max", cfg.x_max);
    r.finish();
  }
  if (const json* jo = top.object("observation")) {
    ObjReader r(jo, "observation", strict, errors, warnings);
    cfg.obs_min = r.number("x_min", cfg.obs_min);
    cfg.obs_max = r.number("x_max", cfg.obs_max);
    r.finish();
  }
  if (!(cfg.x_min < cfg.x_max)) errors.push_back("window.x_min must lie below window.x_max");
  if (!(cfg.obs_min < cfg.obs_max))
    errors.push_back("observation.x_min must lie below observation.x_max");
  else if (cfg.x_min < cfg.x_max && !(cfg.x_min <= cfg.obs_min && cfg.obs_max <= cfg.x_max))
    errors.push_back("the observation interval must lie inside the simulation window");

  cfg.T = top.number("T", cfg.T);
  if (!(cfg.T > 0.0)) errors.push_back("T must be positive");
  cfg.output_times = top.numbers("output_times", cfg.output_times);
  if (!cfg.output_times.empty()) {
    if (std::abs(cfg.output_times.front()) > 1e-12 * std::max(1.0, cfg.T))
      errors.push_back("output_times must start at 0");
    for (std::size_t k = 1; k < cfg.output_times.size(); ++k)
      if (!(cfg.output_times[k] > cfg.output_times[k - 1])) {
        errors.push_back("output_times must increase strictly");
        break;
      }
    if (cfg.T > 0.0 &&
        std::abs(cfg.output_times.back() - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
      errors.push_back("output_times must end at T");
  }

  if (const json* jint = top.object("integrator")) {
    ObjReader r(jint, "integrator", strict, errors, warnings);
    std::string method = r.str("method", "rk45_adaptive");
    if (method == "rk45_adaptive")
      cfg.integrator.method = Method::rk45_adaptive;
    else if (method == "rk4")
      cfg.integrator.method = Method::rk4;
    else
      r.record("method '" + method + "' unknown (rk45_adaptive, rk4)");
    cfg.integrator.dt_init = r.number("dt_init", cfg.integrator.dt_init);
    cfg.integrator.dt_max = r.number("dt_max", cfg.integrator.dt_max);
    cfg.integrator.rel_tol = r.number("rel_tol", cfg.integrator.rel_tol);
    cfg.integrator.abs_tol = r.number("abs_tol", cfg.integrator.abs_tol);
    cfg.integrator.truncation_M = r.number("truncation_M", cfg.integrator.truncation_M);
    cfg.integrator.tail_tol = r.number("tail_tol", cfg.integrator.tail_tol);
    std::string boundary = r.str("boundary", "decay_extrapolation");
    if (boundary == "decay_extrapolation")
      cfg.integrator.boundary = Boundary::decay_extrapolation;
    else if (boundary == "frozen")
      cfg.integrator.boundary = Boundary::frozen;
    else
      r.record("boundary '" + boundary + "' unknown (decay_extrapolation, frozen)");
    cfg.integrator.boundary_slope = r.number_or_null("boundary_slope", cfg.integrator.boundary_slope,
                                                     std::numeric_limits<double>::quiet_NaN());
    cfg.integrator.mutation_enabled = r.boolean("mutation_enabled", cfg.integrator.mutation_enabled);
    cfg.integrator.use_fft = r.boolean("use_fft", cfg.integrator.use_fft);
    if (!(cfg.integrator.dt_max > 0.0)) r.record("dt_max must be positive");
    if (cfg.integrator.dt_init < 0.0) r.record("dt_init must be >= 0 (0 = automatic)");
    if (!(cfg.integrator.rel_tol > 0.0) || !(cfg.integrator.abs_tol > 0.0))
      r.record("rel_tol and abs_tol must be positive");
    if (!(cfg.integrator.tail_tol > 0.0)) r.record("tail_tol must be positive");
    if (cfg.integrator.truncation_M < 0.0) r.record("truncation_M must be >= 0 (0 = automatic)");
    r.finish();
  }

  cfg.hj.x_min = cfg.x_min;
  cfg.hj.x_max = cfg.x_max;
  if (const json* jh = top.object("hj")) {
    ObjReader r(jh, "hj", strict, errors, warnings);
    cfg.hj.x_min = r.number("x_min", cfg.hj.x_min);
    cfg.hj.x_max = r.number("x_max", cfg.hj.x_max);
    cfg.hj.dx = r.number("dx", cfg.hj.dx);
    cfg.hj.dt = r.number("dt", cfg.hj.dt);
    cfg.hj.epsilon_clamp = r.number("epsilon_clamp", cfg.hj.epsilon_clamp);
    cfg.hj.viscosity_theta = r.number("viscosity_theta", cfg.hj.viscosity_theta);
    std::string scheme = r.str("scheme", to_string(cfg.hj.scheme));
    try {
      cfg.hj.scheme = hj_scheme_from_string(scheme);
    } catch (const std::exception& e) {
      r.record(e.what());
    }
    if (!(cfg.hj.dx > 0.0)) r.record("dx must be positive");
    if (cfg.hj.dt < 0.0) r.record("dt must be >= 0 (0 = automatic)");
    if (!(cfg.hj.epsilon_clamp > 0.0) || !(cfg.hj.epsilon_clamp < 1.0))
      r.record("epsilon_clamp must lie in (0, 1)");
    if (cfg.hj.viscosity_theta < 0.0) r.record("viscosity_theta must be >= 0 (0 = automatic)");
    if (!(cfg.hj.x_min < cfg.hj.x_max)) r.record("x_min must lie below x_max");
    r.finish();
  }

  cfg.checks = top.strings("checks", cfg.checks);
  for (const std::string& c : cfg.checks)
    if (!kKnownChecks.count(c))
      errors.push_back("unknown check '" + c +
                       "'; known checks: mass_bound, positivity, comparison, sandwich, lipschitz");

  long long nr = top.integer("n_random", cfg.n_random);
  if (nr < 0)
    errors.push_back("n_random must be >= 0");
  else
    cfg.n_random = static_cast<int>(nr);
  cfg.comparison_slack = top.number("comparison_slack", cfg.comparison_slack);
  if (!(cfg.comparison_slack >= 0.0)) errors.push_back("comparison_slack must be >= 0");
  cfg.slack = top.number("slack", cfg.slack);
  if (!(cfg.slack >= 0.0)) errors.push_back("slack must be >= 0");
  cfg.sup_error_threshold = top.number("sup_error_threshold", cfg.sup_error_threshold);
  if (!(cfg.sup_error_threshold > 0.0)) errors.push_back("sup_error_threshold must be positive");
  cfg.slope_cap = top.number("slope_cap", cfg.slope_cap);
  if (!(cfg.slope_cap > 0.0)) errors.push_back("slope_cap must be positive");
  long long seed = top.integer("seed", cfg.seed);
  if (seed < 0)
    errors.push_back("seed must be >= 0");
  else
    cfg.seed = static_cast<unsigned>(seed);
  std::string space = top.str("space", to_string(cfg.sim_space));
  try {
    Space s = space_from_string(space);
    if (s == Space::hj)
      errors.push_back("space must be u or n: lattice runs carry a carrying capacity");
    else
      cfg.sim_space = s;
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  cfg.timing = top.boolean("timing", cfg.timing);
  cfg.input_trajectory = top.str("input_trajectory", cfg.input_trajectory);
  top.finish();

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return ParsedConfig{std::move(cfg), std::move(warnings)};
}

ParsedConfig load_config(const std::string& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open configuration file '" + path + "'"});
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), strict);
}

std::vector<RandomScenario> random_scenarios(unsigned seed, int count) {
  if (count < 0) throw std::invalid_argument("scenario count must be >= 0");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * unif(rng); };

  std::vector<RandomScenario> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    KernelSpec kernel =
        (k % 4 == 3) ? KernelSpec::cosine(in(0.0, 0.8)) : KernelSpec::exponential();

    BoundedFunction R =
        (k % 3 == 2)
            ? BoundedFunction::sinusoidal(in(-0.8, 0.2), in(0.1, 0.6), in(0.5, 2.0))
            : BoundedFunction::rational_bump(in(0.4, 1.4), in(-1.0, 1.0), in(0.7, 1.6),
                                             in(-1.0, -0.1));
    BoundedFunction p;
    if (k % 2 == 0) {
      p = BoundedFunction::constant(in(0.4, 1.8));
    } else {
      double base = in(0.5, 1.5);
      p = BoundedFunction::rational_bump(in(0.0, 0.8) * base, in(-1.0, 1.0), in(0.7, 1.6), base);
    }

    InitialDataSpec init = InitialDataSpec::cone(0.0, 0.5);
    int style = k % 5;
    if (style == 4) {
      init = InitialDataSpec::two_cones(in(-0.3, 0.3), in(0.35, 0.85), in(-1.5, 0.0),
                                        in(-0.3, 0.3), in(0.35, 0.85), in(0.0, 1.5));
    } else if (style == 2) {
      init = InitialDataSpec::smoothed_cone(in(-0.3, 0.3), in(0.35, 0.85), in(-1.0, 1.0),
                                            in(0.05, 0.3));
    } else {
      init = InitialDataSpec::cone(in(-0.5, 0.5), in(0.35, 0.85), in(-1.5, 1.5));
    }
    out.push_back(RandomScenario{std::move(kernel), RateSpec(std::move(R), std::move(p)),
                                 std::move(init)});
  }
  return out;
}

}  // namespace selmut
