#pragma once

// Flat `key = value` experiment configs with dotted sections, e.g.
//
//   scale = vlasov
//   grid.dx = 0.01
//   params.beta = 0.05
//
// Lines starting with '#' are comments. Lists are comma separated.

#include <chemoflock/compare.hpp>
#include <chemoflock/grid.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chemoflock {

/// Insertion-ordered key/value list; later assignments replace earlier ones.
class KeyValues {
public:
  void set(const std::string& key, const std::string& value) {
    for (auto& kv : items_)
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    items_.emplace_back(key, value);
  }

  const std::string* find(std::string_view key) const {
    for (const auto& kv : items_)
      if (kv.first == key) return &kv.second;
    return nullptr;
  }

  bool contains(std::string_view key) const { return find(key) != nullptr; }
  const auto& items() const { return items_; }
  bool empty() const { return items_.empty(); }

private:
  std::vector<std::pair<std::string, std::string>> items_;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error(source + ":" + std::to_string(no) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw Error(source + ":" + std::to_string(no) + ": empty key");
    kv.set(key, value);
  }
  return kv;
}

inline KeyValues parse_key_values(const std::string& text, const std::string& source = "<string>") {
  std::istringstream in(text);
  return parse_key_values(in, source);
}

inline double parse_number(const std::string& key, const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw Error(key + ": not a number: '" + s + "'");
  return v;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(key + ": not a nonnegative integer: '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(key + ": not a boolean: '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

inline std::vector<double> parse_number_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_number(key, item));
  return out;
}

enum class Scale { particle, vlasov, euler, compare };
enum class InitialKind { two_bump_v, monokinetic_gauss, two_bump_xv, cosine_density, custom_csv };

inline const char* to_string(Scale s) {
  switch (s) {
    case Scale::particle: return "particle";
    case Scale::vlasov: return "vlasov";
    case Scale::euler: return "euler";
    case Scale::compare: return "compare";
  }
  return "?";
}

struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_x = 0;
  double v_min = 0.0;
  double v_max = 0.0;
  std::size_t n_v = 0;
  std::size_t euler_n_x = 0;

  SpatialGrid spatial() const { return SpatialGrid(x_min, x_max, n_x); }
  PhaseGrid phase() const { return PhaseGrid(spatial(), v_min, v_max, n_v); }
  SpatialGrid euler() const { return SpatialGrid(x_min, x_max, euler_n_x); }
};

struct ModelParams {
  bool alignment = true;
  double beta = 0.5;
  double R_k = 1.0;
  double eta = 0.0;
  double kappa = 0.01;
  double D = 1.0;
  double R = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  double p = 2.0;

  std::optional<AlignmentKernel> kernel() const {
    if (!alignment) return std::nullopt;
    return AlignmentKernel{beta, R_k};
  }
  ChemoParams chemo() const { return ChemoParams{D, kappa, R, eta}; }
};

struct InitialDataSpec {
  InitialKind kind = InitialKind::two_bump_v;
  std::map<std::string, double> values;
  std::string path;

  double get(const std::string& name, double fallback) const {
    auto it = values.find(name);
    return it == values.end() ? fallback : it->second;
  }
};

struct ExperimentConfig {
  std::string name;
  Scale scale = Scale::vlasov;
  GridSpec grid;
  ModelParams params;
  InitialDataSpec initial;
  double dt = 0.0;
  double T = 0.0;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 1;
  std::string output_dir;

  std::size_t particles = 100;
  bool normalize_source = true;
  double outflow_tolerance = 1e-3;
  bool store_density = false;
  double blowup_factor = 20.0;
  double dt_cap = std::numeric_limits<double>::infinity();

  std::vector<double> epsilons;
  std::vector<double> search_times;
  EpsilonSearch search;

  std::vector<std::string> inferred;
  KeyValues resolved;
};

namespace detail {

struct KeySpec {
  const char* key;
  const char* fallback;  // nullptr: no default
};

// Keys accepted at top level, with the default used when a config omits them.
inline const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"name", "unnamed"},
      {"scale", nullptr},
      {"grid.x_min", nullptr},
      {"grid.x_max", nullptr},
      {"grid.n_x", nullptr},
      {"grid.dx", nullptr},
      {"grid.v_min", nullptr},
      {"grid.v_max", nullptr},
      {"grid.n_v", nullptr},
      {"grid.dv", nullptr},
      {"euler.n_x", nullptr},
      {"euler.blowup_factor", "20"},
      {"euler.dt_cap", "inf"},
      {"params.alignment", "true"},
      {"params.beta", nullptr},
      {"params.R_k", "1"},
      {"params.eta", "0"},
      {"params.kappa", "0.01"},
      {"params.D", "1"},
      {"params.R", nullptr},
      {"params.alpha", "0"},
      {"params.epsilon", "0"},
      {"params.p", "2"},
      {"initial.kind", nullptr},
      {"initial.path", nullptr},
      {"dt", nullptr},
      {"T", nullptr},
      {"snapshot_times", nullptr},
      {"seed", "1"},
      {"output_dir", nullptr},
      {"particles.n", "100"},
      {"particles.normalize_source", "true"},
      {"vlasov.outflow_tolerance", "1e-3"},
      {"vlasov.store_density", "false"},
      {"compare.epsilons", nullptr},
      {"search.times", nullptr},
      {"search.lo", "0"},
      {"search.hi", "0.05"},
      {"search.tol", "1e-3"},
      {"search.objective", "E0"},
      {"search.scan_points", "9"},
      {"inferred", nullptr},
  };
  return specs;
}

inline const std::map<std::string, std::vector<std::string>>& initial_fields() {
  static const std::map<std::string, std::vector<std::string>> fields = {
      {"two_bump_v", {"v0", "sigma_x", "sigma_v", "scale"}},
      {"monokinetic_gauss", {"x0", "v0", "sigma_x", "sigma_v"}},
      {"two_bump_xv", {"x1", "v1", "x2", "v2", "sigma_x", "sigma_v", "scale"}},
      {"cosine_density", {"c1", "c2"}},
      {"custom_csv", {}},
  };
  return fields;
}

inline InitialKind parse_kind(const std::string& s) {
  if (s == "two_bump_v") return InitialKind::two_bump_v;
  if (s == "monokinetic_gauss") return InitialKind::monokinetic_gauss;
  if (s == "two_bump_xv") return InitialKind::two_bump_xv;
  if (s == "cosine_density") return InitialKind::cosine_density;
  if (s == "custom_csv") return InitialKind::custom_csv;
  throw Error("initial.kind: unknown kind '" + s + "'");
}

inline Scale parse_scale(const std::string& s) {
  if (s == "particle") return Scale::particle;
  if (s == "vlasov") return Scale::vlasov;
  if (s == "euler") return Scale::euler;
  if (s == "compare") return Scale::compare;
  throw Error("scale: expected particle, vlasov, euler or compare, got '" + s + "'");
}

// Cell count from either `count_key` or the spacing under `spacing_key`.
inline std::size_t cells_from(const KeyValues& kv, const char* count_key, const char* spacing_key, double lo,
                              double hi) {
  const auto* n = kv.find(count_key);
  const auto* h = kv.find(spacing_key);
  if (n && h) throw Error(std::string("give only one of ") + count_key + " and " + spacing_key);
  if (n) return parse_count(count_key, *n);
  const double dx = parse_number(spacing_key, *h);
  if (!(dx > 0.0)) throw Error(std::string(spacing_key) + ": must be positive");
  const double ratio = (hi - lo) / dx;
  const auto cells = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(cells)) > 1e-6 * std::max(1.0, ratio))
    throw Error(std::string(spacing_key) + ": does not divide the interval");
  return cells;
}

}  // namespace detail

/// Validate a key/value set and build the typed config. Unknown keys and
/// missing required keys are reported together, by field path.
inline ExperimentConfig parse_config(const KeyValues& raw) {
  using detail::key_specs;
  std::vector<std::string> problems;

  std::set<std::string> known;
  for (const auto& s : key_specs()) known.insert(s.key);
  const auto* kind_str = raw.find("initial.kind");
  std::vector<std::string> kind_fields;
  if (kind_str) {
    auto it = detail::initial_fields().find(*kind_str);
    if (it != detail::initial_fields().end()) kind_fields = it->second;
  }
  for (const auto& [key, value] : raw.items()) {
    if (known.count(key)) continue;
    if (key.rfind("initial.", 0) == 0 &&
        std::find(kind_fields.begin(), kind_fields.end(), key.substr(8)) != kind_fields.end())
      continue;
    problems.push_back("unknown key '" + key + "'");
  }

  const auto* scale_str = raw.find("scale");
  const bool needs_v = !scale_str || *scale_str != "euler";
  std::vector<std::string> required = {"scale", "grid.x_min", "grid.x_max", "initial.kind", "T"};
  if (!raw.contains("grid.n_x") && !raw.contains("grid.dx")) required.push_back("grid.n_x");
  if (needs_v) {
    for (const char* k : {"grid.v_min", "grid.v_max", "dt"}) required.push_back(k);
    if (!raw.contains("grid.n_v") && !raw.contains("grid.dv")) required.push_back("grid.n_v");
  }
  const auto* align = raw.find("params.alignment");
  if (!align || *align != "false") required.push_back("params.beta");
  if (const auto* eta = raw.find("params.eta"); eta && *eta != "0") required.push_back("params.R");
  if (kind_str && *kind_str == "custom_csv") required.push_back("initial.path");
  if (scale_str && *scale_str == "compare" && !raw.contains("compare.epsilons") && !raw.contains("search.times"))
    required.push_back("compare.epsilons");
  for (const auto& k : required)
    if (!raw.contains(k)) problems.push_back("missing required field '" + k + "'");

  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(msg);
  }

  KeyValues kv;
  for (const auto& s : key_specs()) {
    if (const auto* v = raw.find(s.key))
      kv.set(s.key, *v);
    else if (s.fallback)
      kv.set(s.key, s.fallback);
  }
  for (const auto& [key, value] : raw.items())
    if (!kv.contains(key)) kv.set(key, value);

  auto num = [&](const char* k) { return parse_number(k, *kv.find(k)); };
  auto count = [&](const char* k) { return static_cast<std::size_t>(parse_count(k, *kv.find(k))); };
  auto flag = [&](const char* k) { return parse_bool(k, *kv.find(k)); };

  ExperimentConfig c;
  c.name = *kv.find("name");
  c.scale = detail::parse_scale(*kv.find("scale"));
  auto& g = c.grid;
  g.x_min = num("grid.x_min");
  g.x_max = num("grid.x_max");
  if (!(g.x_max > g.x_min)) throw Error("grid.x_max: must exceed grid.x_min");
  g.n_x = detail::cells_from(kv, "grid.n_x", "grid.dx", g.x_min, g.x_max);
  if (g.n_x < 2) throw Error("grid.n_x: need at least 2 cells");
  if (c.scale != Scale::euler) {
    g.v_min = num("grid.v_min");
    g.v_max = num("grid.v_max");
    if (!(g.v_max > g.v_min)) throw Error("grid.v_max: must exceed grid.v_min");
    g.n_v = detail::cells_from(kv, "grid.n_v", "grid.dv", g.v_min, g.v_max);
    if (g.n_v < 2) throw Error("grid.n_v: need at least 2 cells");
  }
  g.euler_n_x = kv.contains("euler.n_x") ? count("euler.n_x") : g.n_x;
  if (g.euler_n_x < 2) throw Error("euler.n_x: need at least 2 cells");
  // Echo the derived counts so the header is complete.
  kv.set("grid.n_x", std::to_string(g.n_x));
  if (c.scale != Scale::euler) kv.set("grid.n_v", std::to_string(g.n_v));
  kv.set("euler.n_x", std::to_string(g.euler_n_x));

  auto& p = c.params;
  p.alignment = flag("params.alignment");
  if (p.alignment) p.beta = num("params.beta");
  p.R_k = num("params.R_k");
  p.eta = num("params.eta");
  p.kappa = num("params.kappa");
  p.D = num("params.D");
  if (kv.contains("params.R")) p.R = num("params.R");
  p.alpha = num("params.alpha");
  p.epsilon = num("params.epsilon");
  p.p = num("params.p");
  if (p.alignment) p.kernel()->validate();
  p.chemo().validate();
  if (p.alpha < 0.0) throw Error("params.alpha: must be nonnegative");
  if (p.epsilon < 0.0) throw Error("params.epsilon: must be nonnegative");
  if (!(p.p > 1.0)) throw Error("params.p: must exceed 1");

  c.initial.kind = detail::parse_kind(*kv.find("initial.kind"));
  for (const auto& f : kind_fields) {
    const std::string key = "initial." + f;
    if (const auto* v = kv.find(key)) c.initial.values[f] = parse_number(key, *v);
  }
  for (const char* s : {"sigma_x", "sigma_v"}) {
    auto it = c.initial.values.find(s);
    if (it != c.initial.values.end() && !(it->second > 0.0)) throw Error(std::string("initial.") + s + ": must be positive");
  }
  if (c.initial.get("c2", 0.0) < 0.0) throw Error("initial.c2: must be nonnegative");
  if (const auto* v = kv.find("initial.path")) c.initial.path = *v;
  const bool phase_data = c.initial.kind != InitialKind::cosine_density;
  if (c.scale == Scale::euler && c.initial.kind != InitialKind::cosine_density &&
      c.initial.kind != InitialKind::custom_csv)
    throw Error("initial.kind: euler runs take cosine_density or custom_csv data");
  if (c.scale != Scale::euler && !phase_data)
    throw Error("initial.kind: cosine_density is hydrodynamic data; use scale = euler");

  c.T = num("T");
  if (!(c.T > 0.0)) throw Error("T: must be positive");
  if (kv.contains("dt")) {
    c.dt = num("dt");
    if (!(c.dt > 0.0)) throw Error("dt: must be positive");
  }
  if (const auto* v = kv.find("snapshot_times")) c.snapshot_times = parse_number_list("snapshot_times", *v);
  if (c.snapshot_times.empty()) c.snapshot_times = {0.0, c.T};
  for (double t : c.snapshot_times)
    if (t < 0.0 || t > c.T * (1.0 + 1e-12)) throw Error("snapshot_times: " + std::to_string(t) + " outside [0, T]");
  c.seed = parse_count("seed", *kv.find("seed"));
  c.output_dir = kv.contains("output_dir") ? *kv.find("output_dir") : "out/" + c.name;

  c.particles = count("particles.n");
  if (c.particles == 0) throw Error("particles.n: must be positive");
  c.normalize_source = flag("particles.normalize_source");
  c.outflow_tolerance = num("vlasov.outflow_tolerance");
  c.store_density = flag("vlasov.store_density");
  c.blowup_factor = num("euler.blowup_factor");
  if (!(c.blowup_factor > 1.0)) throw Error("euler.blowup_factor: must exceed 1");
  c.dt_cap = num("euler.dt_cap");
  if (!(c.dt_cap > 0.0)) throw Error("euler.dt_cap: must be positive");

  if (const auto* v = kv.find("compare.epsilons")) c.epsilons = parse_number_list("compare.epsilons", *v);
  if (const auto* v = kv.find("search.times")) c.search_times = parse_number_list("search.times", *v);
  c.search.lo = num("search.lo");
  c.search.hi = num("search.hi");
  c.search.tol = num("search.tol");
  c.search.scan_points = count("search.scan_points");
  const std::string obj = *kv.find("search.objective");
  if (obj != "E0" && obj != "E1") throw Error("search.objective: expected E0 or E1");
  c.search.objective = obj == "E0" ? Objective::E0 : Objective::E1;
  c.search.validate();
  for (double t : c.search_times)
    if (t < 0.0 || t > c.T * (1.0 + 1e-12)) throw Error("search.times: " + std::to_string(t) + " outside [0, T]");

  if (const auto* v = kv.find("inferred")) {
    c.inferred = split_list(*v);
    for (const auto& k : c.inferred)
      if (!kv.contains(k)) throw Error("inferred: '" + k + "' is not a config key");
  }
  c.resolved = std::move(kv);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  return parse_config(parse_key_values(in, path));
}

/// Apply `key=value` overrides on top of a key/value set.
inline void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw Error("override '" + o + "': expected key=value");
    kv.set(trim(std::string_view(o).substr(0, eq)), trim(std::string_view(o).substr(eq + 1)));
  }
}

}  // namespace chemoflock
