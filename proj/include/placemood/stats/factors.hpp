#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "placemood/error.hpp"

namespace placemood::stats {

/// Environmental and geographic attributes of one site.
struct FactorRow {
  std::string site_id;
  double water_distance_m = 0.0;
  double ndvi = 0.0;
  std::string continent;
  std::string space;    // open | closed
  std::string setting;  // urban | rural
  std::string type;     // natural | amusement | religious | museum | palace | cultural
  std::string water;    // present | absent

  friend bool operator==(const FactorRow&, const FactorRow&) = default;
};

struct CategoricalFactor {
  std::string_view name;
  std::vector<std::string_view> levels;
  std::string FactorRow::*field;
};

struct NumericFactor {
  std::string_view name;
  double FactorRow::*field;
};

inline const std::vector<CategoricalFactor>& categorical_factors() {
  static const std::vector<CategoricalFactor> factors = {
      {"continent",
       {"africa", "asia", "europe", "north_america", "south_america", "oceania"},
       &FactorRow::continent},
      {"space", {"open", "closed"}, &FactorRow::space},
      {"setting", {"urban", "rural"}, &FactorRow::setting},
      {"type", {"natural", "amusement", "religious", "museum", "palace", "cultural"}, &FactorRow::type},
      {"water", {"present", "absent"}, &FactorRow::water},
  };
  return factors;
}

inline const std::vector<NumericFactor>& numeric_factors() {
  static const std::vector<NumericFactor> factors = {
      {"water_distance_m", &FactorRow::water_distance_m},
      {"ndvi", &FactorRow::ndvi},
  };
  return factors;
}

inline const CategoricalFactor& categorical_factor(std::string_view name) {
  for (const auto& f : categorical_factors()) {
    if (f.name == name) return f;
  }
  throw SchemaError("unknown categorical factor '" + std::string(name) + "'");
}

/// Lower-cases and maps spaces to underscores ("North America" -> "north_america").
inline std::string canonical_level(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    out.push_back(c == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

inline std::string vocabulary_text(const CategoricalFactor& factor) {
  std::string text;
  for (auto level : factor.levels) {
    if (!text.empty()) text += '|';
    text += level;
  }
  return text;
}

/// Canonical level or SchemaError naming the vocabulary.
inline std::string checked_level(const CategoricalFactor& factor, std::string_view raw) {
  auto level = canonical_level(raw);
  if (std::find(factor.levels.begin(), factor.levels.end(), level) == factor.levels.end()) {
    throw SchemaError(std::string(factor.name) + " value '" + std::string(raw) +
                      "' not in vocabulary {" + vocabulary_text(factor) + "}");
  }
  return level;
}

/// Validates every field of a row; canonicalizes categorical levels in place.
inline void validate_factor_row(FactorRow& row) {
  for (const auto& f : categorical_factors()) row.*f.field = checked_level(f, row.*f.field);
  if (!std::isfinite(row.water_distance_m) || row.water_distance_m < 0.0) {
    throw SchemaError("water_distance_m must be a finite value >= 0");
  }
  if (!std::isfinite(row.ndvi) || row.ndvi < -1.0 || row.ndvi > 1.0) {
    throw SchemaError("ndvi must be in [-1, 1]");
  }
}

using ReferenceLevels = std::map<std::string, std::string, std::less<>>;

/// Baselines matching the published regression tables.
inline ReferenceLevels default_reference_levels() {
  return {{"continent", "africa"},
          {"space", "closed"},
          {"setting", "rural"},
          {"type", "amusement"},
          {"water", "absent"}};
}

}  // namespace placemood::stats
