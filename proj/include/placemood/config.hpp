#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "placemood/csv.hpp"
#include "placemood/pipeline.hpp"
#include "placemood/stats/bootstrap.hpp"
#include "placemood/stats/factors.hpp"

namespace placemood {

inline constexpr const char* kConfigEnvVar = "PLACEMOOD_CONFIG";

/// Everything a batch study needs. Loaded from a flat `key = value` file; command
/// line flags are applied on top.
struct StudyConfig {
  std::vector<double> eps_m = kDefaultEpsGrid;
  std::vector<double> min_pts_pct = kDefaultPctGrid;
  std::size_t min_pts_floor = 3;
  stats::BootstrapConfig bootstrap;
  stats::ReferenceLevels references = stats::default_reference_levels();
  double max_reject_fraction = 0.10;
  std::string faces;
  std::string photos;
  std::string sites;
  std::string out_dir;  // where outputs go when no explicit path is given

  /// Params of a single-combination run: the first grid entries.
  ClusterParams cluster_params() const {
    ClusterParams p{eps_m.front(), min_pts_pct.front(), min_pts_floor};
    p.validate();
    return p;
  }

  void validate() const {
    if (eps_m.empty() || min_pts_pct.empty()) throw std::invalid_argument("eps_m and min_pts_pct lists must be non-empty");
    for (double e : eps_m) {
      for (double p : min_pts_pct) ClusterParams{e, p, min_pts_floor}.validate();
    }
    bootstrap.validate();
    if (!(max_reject_fraction >= 0.0 && max_reject_fraction <= 1.0)) {
      throw std::invalid_argument("max_reject_fraction must be in [0, 1]");
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double config_double(std::string_view key, std::string_view value) {
  auto v = csv::parse_double(value);
  if (!v) throw std::invalid_argument("config: " + std::string(key) + " expects a number, got '" + std::string(value) + "'");
  return *v;
}

inline std::vector<double> config_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  while (true) {
    const auto comma = value.find(',');
    out.push_back(config_double(key, trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

inline std::uint64_t config_u64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument("config: " + std::string(key) + " expects a non-negative integer, got '" +
                                std::string(value) + "'");
  }
  return v;
}

}  // namespace detail

/// Applies one setting. Keys: eps_m, min_pts_pct (comma lists), min_pts_floor,
/// n_resamples, confidence, seed, max_reject_fraction, faces, photos, sites, out_dir,
/// reference.<factor>.
inline void apply_setting(StudyConfig& cfg, std::string_view key, std::string_view value) {
  value = detail::trim(value);
  if (key == "eps_m") {
    cfg.eps_m = detail::config_list(key, value);
  } else if (key == "min_pts_pct") {
    cfg.min_pts_pct = detail::config_list(key, value);
  } else if (key == "min_pts_floor") {
    cfg.min_pts_floor = detail::config_u64(key, value);
  } else if (key == "n_resamples") {
    cfg.bootstrap.n_resamples = detail::config_u64(key, value);
  } else if (key == "confidence") {
    cfg.bootstrap.confidence = detail::config_double(key, value);
  } else if (key == "seed") {
    cfg.bootstrap.seed = detail::config_u64(key, value);
  } else if (key == "max_reject_fraction") {
    cfg.max_reject_fraction = detail::config_double(key, value);
  } else if (key == "faces") {
    cfg.faces = value;
  } else if (key == "photos") {
    cfg.photos = value;
  } else if (key == "sites") {
    cfg.sites = value;
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key.starts_with("reference.")) {
    const auto factor = key.substr(10);
    bool known = false;
    for (const auto& f : stats::categorical_factors()) {
      if (f.name == factor) {
        cfg.references[std::string(factor)] = stats::checked_level(f, value);
        known = true;
      }
    }
    if (!known) throw std::invalid_argument("config: unknown categorical factor '" + std::string(factor) + "'");
  } else {
    throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
  }
}

/// `key = value` lines; blank lines and lines starting with '#' are ignored.
inline void load_config(StudyConfig& cfg, std::istream& in, std::string_view source = "config") {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(std::string(source) + " line " + std::to_string(n) + ": expected key = value");
    }
    try {
      apply_setting(cfg, detail::trim(text.substr(0, eq)), text.substr(eq + 1));
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string(source) + " line " + std::to_string(n) + ": " + e.what());
    }
  }
}

inline void load_config_file(StudyConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  load_config(cfg, in, path);
}

/// Explicit path if given, else $PLACEMOOD_CONFIG if set, else built-in defaults.
inline StudyConfig resolve_config(const std::optional<std::string>& explicit_path) {
  StudyConfig cfg;
  if (explicit_path) {
    load_config_file(cfg, *explicit_path);
  } else if (const char* env = std::getenv(kConfigEnvVar); env && *env) {
    load_config_file(cfg, env);
  }
  return cfg;
}

}  // namespace placemood
