#ifndef FRACSPEC_CONFIG_HPP
#define FRACSPEC_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracspec/errors.hpp"
#include "fracspec/grid_function.hpp"
#include "fracspec/specmodel.hpp"
#include "fracspec/verify.hpp"

namespace fracspec {

/**
 * Everything a CLI run needs: the Monte Carlo configuration plus the
 * per-verb settings. Parsed from flat `key = value` text with `[section]`
 * headers; '#' and ';' start comments.
 *
 *   [model]       kind, c, rho, grid_csv_path
 *   [experiment]  alpha, n_list, replications, probe_lambdas, seed,
 *                 tail_u_grid, holder_delta, holder_h, delta_confidence,
 *                 confidence, calibration_draws, confidence_probes,
 *                 grid_points, threads
 *   [simulate]    paths, mean, center
 *   [truth]       points
 *   [fejer]       n_list
 *
 * Real-valued lists accept `pi` forms: `pi`, `3*pi`, `pi/2`, `3*pi/4`.
 */
struct Settings {
  McConfig mc;
  std::size_t simulate_paths = 1;
  double simulate_mean = 0.0;
  bool simulate_center = false;
  std::size_t truth_points = 4097;
  std::vector<std::size_t> fejer_n_list = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::string model_grid_path;  // as written in the file, for the resolved echo
};

/// Documented defaults, printed by `--help`.
inline const char* config_reference() {
  return R"(Configuration file (key = value, [section] headers, '#' comments):
  [model]
    kind               constant | ar1 | custom_grid            (required)
    c                  level of the constant density (> 0)     (kind = constant)
    rho                AR(1) coefficient in (-1, 1)             (kind = ar1)
    grid_csv_path      lambda,value CSV of an even density on the shared
                       grid, relative to the config file        (kind = custom_grid)
  [experiment]
    alpha              order in (0, 1/2)                        default 0.25
    n_list             sample sizes                             default 1024
    replications       Monte Carlo replications R (>= 2)        default 100
    probe_lambdas      increasing probes in (0, 2pi]            default pi/2, pi
    seed               64-bit seed                              default 1
    tail_u_grid        increasing thresholds u > 0              default 0.5, 1, ..., 4
    holder_delta       in (0, 1/2 - alpha)                      default 1/2 - alpha - 0.05
    holder_h           Hölder steps as fractions of 2pi          default 2^-7 .. 2^-3
    delta_confidence   band level delta in (0, 1)               default 0.05
    confidence         true | false                             default true
    calibration_draws  limit-process draws (>= 1000)            default 5000
    confidence_probes  uniform probes for the limit sup         default 64
    grid_points        evaluation grid, 0 = 4 max(n, 1024) + 1  default 0
    threads            worker threads, 0 = all cores            default 0
  [simulate]
    paths              paths per sample size                    default 1
    mean               constant added to every path             default 0
    center             subtract the sample mean                 default false
  [truth]
    points             grid points of the truth curves          default 4097
  [fejer]
    n_list             sample sizes of the bias sweep           default 16, 32, ..., 4096
)";
}

namespace detail {

inline double parse_real(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  try {
    const auto pi_pos = s.find("pi");
    if (pi_pos == std::string::npos) return parse_double(s);
    double factor = 1.0;
    double divisor = 1.0;
    const std::string before = trim(s.substr(0, pi_pos));
    const std::string after = trim(s.substr(pi_pos + 2));
    if (!before.empty()) {
      if (before.back() != '*') throw domain_error("bad pi form");
      factor = parse_double(before.substr(0, before.size() - 1));
    }
    if (!after.empty()) {
      if (after.front() != '/') throw domain_error("bad pi form");
      divisor = parse_double(after.substr(1));
    }
    return factor * std::numbers::pi / divisor;
  } catch (const domain_error&) {
    throw config_error(key, "not a number: '" + s + "'");
  }
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw config_error(key, "expected a non-negative integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw config_error(key, "integer out of range: '" + s + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw config_error(key, "expected true or false, got '" + s + "'");
}

inline std::vector<std::string> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::string> out;
  for (auto& item : split(text, ',')) {
    item = trim(item);
    if (item.empty()) throw config_error(key, "empty list element");
    out.push_back(item);
  }
  if (out.empty()) throw config_error(key, "empty list");
  return out;
}

inline std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : parse_list(key, text)) out.push_back(parse_real(key, item));
  return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : parse_list(key, text)) out.push_back(parse_unsigned(key, item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      s += format_double(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

}  // namespace detail

/// Parses configuration text; `base_dir` resolves grid_csv_path.
inline Settings parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {}) {
  static const std::map<std::string, std::set<std::string>> known = {
      {"model", {"kind", "c", "rho", "grid_csv_path"}},
      {"experiment",
       {"alpha", "n_list", "replications", "probe_lambdas", "seed", "tail_u_grid", "holder_delta",
        "holder_h", "delta_confidence", "confidence", "calibration_draws", "confidence_probes",
        "grid_points", "threads"}},
      {"simulate", {"paths", "mean", "center"}},
      {"truth", {"points"}},
      {"fejer", {"n_list"}},
  };
  std::map<std::string, std::string> values;  // "section.key" -> value
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw config_error("line " + std::to_string(line_no), "malformed section header");
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      if (!known.count(section)) throw config_error(section, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw config_error(key, "key outside of any [section]");
    if (!known.at(section).count(key)) {
      throw config_error(key, "unknown key '" + key + "' in [" + section + "]");
    }
    const std::string full = section + "." + key;
    if (values.count(full)) throw config_error(key, "duplicate key in [" + section + "]");
    if (value.empty()) throw config_error(key, "missing value");
    values[full] = value;
  }

  auto get = [&](const std::string& full) -> std::optional<std::string> {
    const auto it = values.find(full);
    if (it == values.end()) return std::nullopt;
    return it->second;
  };

  Settings s;
  // [model]
  const auto kind = get("model.kind");
  if (!kind) throw config_error("kind", "missing required key [model] kind");
  auto reject = [&](const char* full, const char* key, const std::string& why) {
    if (get(full)) throw config_error(key, why);
  };
  try {
    if (*kind == "constant") {
      const auto c = get("model.c");
      if (!c) throw config_error("c", "kind = constant requires c");
      reject("model.rho", "rho", "rho is only valid for kind = ar1");
      reject("model.grid_csv_path", "grid_csv_path", "grid_csv_path is only valid for kind = custom_grid");
      s.mc.model = SpectralModel::constant(detail::parse_real("c", *c));
    } else if (*kind == "ar1") {
      const auto rho = get("model.rho");
      if (!rho) throw config_error("rho", "kind = ar1 requires rho");
      reject("model.c", "c", "c is only valid for kind = constant");
      reject("model.grid_csv_path", "grid_csv_path", "grid_csv_path is only valid for kind = custom_grid");
      s.mc.model = SpectralModel::ar1(detail::parse_real("rho", *rho));
    } else if (*kind == "custom_grid") {
      const auto path = get("model.grid_csv_path");
      if (!path) throw config_error("grid_csv_path", "kind = custom_grid requires grid_csv_path");
      reject("model.c", "c", "c is only valid for kind = constant");
      reject("model.rho", "rho", "rho is only valid for kind = ar1");
      const auto full = base_dir / *path;
      std::ifstream in(full);
      if (!in) throw io_error("cannot open grid_csv_path '" + full.string() + "'");
      s.model_grid_path = *path;
      s.mc.model = SpectralModel::custom(read_csv(in), *path);
    } else {
      throw config_error("kind", "unknown model kind '" + *kind + "' (constant, ar1, custom_grid)");
    }
  } catch (const domain_error& e) {
    // model parameter out of range
    const std::string key = *kind == "constant" ? "c" : *kind == "ar1" ? "rho" : "grid_csv_path";
    throw config_error(key, e.what());
  }

  // [experiment]
  auto& mc = s.mc;
  if (auto v = get("experiment.alpha")) mc.alpha = detail::parse_real("alpha", *v);
  if (auto v = get("experiment.n_list")) mc.n_list = detail::parse_size_list("n_list", *v);
  if (auto v = get("experiment.replications")) mc.replications = detail::parse_unsigned("replications", *v);
  if (auto v = get("experiment.probe_lambdas")) mc.probe_lambdas = detail::parse_real_list("probe_lambdas", *v);
  if (auto v = get("experiment.seed")) mc.seed = detail::parse_unsigned("seed", *v);
  if (auto v = get("experiment.tail_u_grid")) mc.tail_u_grid = detail::parse_real_list("tail_u_grid", *v);
  if (auto v = get("experiment.holder_delta")) mc.holder_delta = detail::parse_real("holder_delta", *v);
  if (auto v = get("experiment.holder_h")) mc.holder_h = detail::parse_real_list("holder_h", *v);
  if (auto v = get("experiment.delta_confidence")) {
    mc.delta_confidence = detail::parse_real("delta_confidence", *v);
  }
  if (auto v = get("experiment.confidence")) mc.confidence = detail::parse_bool("confidence", *v);
  if (auto v = get("experiment.calibration_draws")) {
    mc.calibration_draws = detail::parse_unsigned("calibration_draws", *v);
  }
  if (auto v = get("experiment.confidence_probes")) {
    mc.confidence_probes = detail::parse_unsigned("confidence_probes", *v);
  }
  if (auto v = get("experiment.grid_points")) mc.grid_points = detail::parse_unsigned("grid_points", *v);
  if (auto v = get("experiment.threads")) {
    mc.threads = static_cast<unsigned>(detail::parse_unsigned("threads", *v));
  }
  // [simulate]
  if (auto v = get("simulate.paths")) s.simulate_paths = detail::parse_unsigned("paths", *v);
  if (auto v = get("simulate.mean")) s.simulate_mean = detail::parse_real("mean", *v);
  if (auto v = get("simulate.center")) s.simulate_center = detail::parse_bool("center", *v);
  if (s.simulate_paths < 1) throw config_error("paths", "must be >= 1");
  if (!std::isfinite(s.simulate_mean)) throw config_error("mean", "must be finite");
  // [truth]
  if (auto v = get("truth.points")) s.truth_points = detail::parse_unsigned("points", *v);
  if (s.truth_points < 3) throw config_error("points", "must be >= 3");
  // [fejer]
  if (auto v = get("fejer.n_list")) s.fejer_n_list = detail::parse_size_list("n_list", *v);
  for (auto n : s.fejer_n_list) {
    if (n < 1) throw config_error("n_list", "fejer sample sizes must be >= 1");
  }

  mc.validate();
  return s;
}

inline Settings parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

/// Canonical text of the fully resolved configuration (all defaults filled).
inline std::string resolved_config(const Settings& s) {
  std::ostringstream os;
  const auto& mc = s.mc;
  mc.model.write_config(os);
  os << "[experiment]\n";
  os << "alpha = " << format_double(mc.alpha) << '\n';
  os << "n_list = " << detail::join(mc.n_list) << '\n';
  os << "replications = " << mc.replications << '\n';
  os << "probe_lambdas = " << detail::join(mc.probe_lambdas) << '\n';
  os << "seed = " << mc.seed << '\n';
  os << "tail_u_grid = " << detail::join(mc.tail_u_grid) << '\n';
  os << "holder_delta = " << format_double(mc.resolved_holder_delta()) << '\n';
  os << "holder_h = " << detail::join(mc.holder_h) << '\n';
  os << "delta_confidence = " << format_double(mc.delta_confidence) << '\n';
  os << "confidence = " << (mc.confidence ? "true" : "false") << '\n';
  os << "calibration_draws = " << mc.calibration_draws << '\n';
  os << "confidence_probes = " << mc.confidence_probes << '\n';
  os << "grid_points = " << mc.grid_points << '\n';
  os << "[simulate]\n";
  os << "paths = " << s.simulate_paths << '\n';
  os << "mean = " << format_double(s.simulate_mean) << '\n';
  os << "center = " << (s.simulate_center ? "true" : "false") << '\n';
  os << "[truth]\n";
  os << "points = " << s.truth_points << '\n';
  os << "[fejer]\n";
  os << "n_list = " << detail::join(s.fejer_n_list) << '\n';
  return os.str();
}

}  // namespace fracspec

#endif  // FRACSPEC_CONFIG_HPP
