#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "placemood/affect.hpp"
#include "placemood/csv.hpp"
#include "placemood/error.hpp"
#include "placemood/geo.hpp"
#include "placemood/stats/factors.hpp"
#include "placemood/time.hpp"

namespace placemood {

struct PhotoRecord {
  std::string photo_id;
  std::string user_id;
  std::string site_id;
  GeoPoint location;
  Timestamp timestamp{};
  std::vector<std::string> tags;

  friend bool operator==(const PhotoRecord&, const PhotoRecord&) = default;
};

inline constexpr double kDefaultHarvestRadiusM = 1000.0;

struct SiteRecord {
  std::string site_id;
  std::string name;
  GeoPoint center;
  double harvest_radius_m = kDefaultHarvestRadiusM;
  std::string country;
  stats::FactorRow factors;  // factors.site_id == site_id

  friend bool operator==(const SiteRecord&, const SiteRecord&) = default;
};

inline const std::vector<std::string> kFacesColumns = {
    "photo_id", "user_id",  "site_id", "lat",       "lon",       "timestamp_iso8601",
    "face_id",  "smile_value", "smile_threshold", "anger", "disgust", "fear",
    "happiness", "neutral", "sadness", "surprise"};

inline const std::vector<std::string> kSitesColumns = {
    "site_id", "name",    "lat",  "lon",   "harvest_radius_m", "continent",        "country",
    "space",   "setting", "type", "water", "water_distance_m", "ndvi"};

inline const std::vector<std::string> kPhotosColumns = {
    "photo_id", "user_id", "site_id", "lat", "lon", "timestamp_iso8601", "tags"};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParseOptions {
  double max_reject_fraction = 0.10;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<Diagnostic> rejected;
};

namespace detail {

class RowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_blank(const csv::Row& row) { return row.fields.size() == 1 && row.fields[0].empty(); }

inline double number_field(const csv::Row& row, std::size_t i, const std::vector<std::string>& names) {
  auto v = csv::parse_double(row.fields[i]);
  if (!v || !std::isfinite(*v)) {
    throw RowError(names[i] + " is not a finite number: '" + row.fields[i] + "'");
  }
  return *v;
}

inline double score_field(const csv::Row& row, std::size_t i, const std::vector<std::string>& names) {
  const double v = number_field(row, i, names);
  if (!in_score_range(v)) throw RowError(names[i] + " = " + row.fields[i] + " outside [0, 100]");
  return v;
}

inline GeoPoint location_field(const csv::Row& row, std::size_t lat_i, std::size_t lon_i,
                               const std::vector<std::string>& names) {
  const double lat = number_field(row, lat_i, names);
  const double lon = number_field(row, lon_i, names);
  if (lat < -90.0 || lat > 90.0) throw RowError("lat " + row.fields[lat_i] + " outside [-90, 90]");
  if (lon < -180.0 || lon > 180.0) throw RowError("lon " + row.fields[lon_i] + " outside [-180, 180]");
  return make_geo_point(lat, lon);
}

inline Timestamp timestamp_field(const csv::Row& row, std::size_t i) {
  auto t = parse_iso8601(row.fields[i]);
  if (!t) throw RowError("timestamp '" + row.fields[i] + "' is not ISO 8601");
  return *t;
}

inline std::string id_field(const csv::Row& row, std::size_t i, const std::vector<std::string>& names) {
  if (row.fields[i].empty()) throw RowError(names[i] + " is empty");
  return row.fields[i];
}

/// Shared row loop: header check, per-row conversion, rejection bookkeeping and
/// the abort threshold.
template <typename Record, typename Convert>
ParseResult<Record> parse_rows(std::istream& in, const std::vector<std::string>& columns,
                               std::string_view kind, const ParseOptions& opts, Convert convert) {
  csv::Reader reader(in);
  csv::expect_header(reader, columns, kind);
  ParseResult<Record> out;
  std::size_t data_rows = 0;
  while (auto row = reader.next()) {
    if (is_blank(*row)) continue;
    ++data_rows;
    try {
      if (row->fields.size() != columns.size()) {
        throw RowError("expected " + std::to_string(columns.size()) + " fields, found " +
                       std::to_string(row->fields.size()));
      }
      out.records.push_back(convert(*row));
    } catch (const RowError& e) {
      out.rejected.push_back({row->line, e.what()});
    } catch (const std::invalid_argument& e) {
      out.rejected.push_back({row->line, e.what()});
    }
  }
  if (data_rows > 0) {
    const double fraction = static_cast<double>(out.rejected.size()) / static_cast<double>(data_rows);
    if (fraction > opts.max_reject_fraction) {
      std::string first = out.rejected.empty()
                              ? ""
                              : "; first: line " + std::to_string(out.rejected.front().line) + ": " +
                                    out.rejected.front().message;
      throw IngestAborted(std::string(kind) + ": rejected " + std::to_string(out.rejected.size()) +
                          " of " + std::to_string(data_rows) + " rows, above the limit of " +
                          csv::format_double(opts.max_reject_fraction * 100.0) + "%" + first);
    }
  }
  return out;
}

inline std::vector<std::string> split_tags(std::string_view text) {
  std::vector<std::string> tags;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    auto tag = text.substr(start, end - start);
    while (!tag.empty() && tag.front() == ' ') tag.remove_prefix(1);
    while (!tag.empty() && tag.back() == ' ') tag.remove_suffix(1);
    if (!tag.empty()) tags.emplace_back(tag);
    start = end + 1;
  }
  return tags;
}

}  // namespace detail

/// Reads faces.csv. Invalid rows are rejected with line-numbered diagnostics.
/// Throws SchemaError on a bad header, IngestAborted when the rejected share
/// exceeds opts.max_reject_fraction.
inline ParseResult<FaceRecord> parse_faces(std::istream& in, const ParseOptions& opts = {}) {
  std::set<std::pair<std::string, std::string>> seen;
  const auto& names = kFacesColumns;
  return detail::parse_rows<FaceRecord>(in, names, "faces", opts, [&](const csv::Row& row) {
    FaceRecord f;
    f.photo_id = detail::id_field(row, 0, names);
    f.user_id = detail::id_field(row, 1, names);
    f.site_id = detail::id_field(row, 2, names);
    f.location = detail::location_field(row, 3, 4, names);
    f.timestamp = detail::timestamp_field(row, 5);
    f.face_id = detail::id_field(row, 6, names);
    f.smile_value = detail::score_field(row, 7, names);
    f.smile_threshold = detail::score_field(row, 8, names);
    auto& e = f.emotion;
    e.anger = detail::score_field(row, 9, names);
    e.disgust = detail::score_field(row, 10, names);
    e.fear = detail::score_field(row, 11, names);
    e.happiness = detail::score_field(row, 12, names);
    e.neutral = detail::score_field(row, 13, names);
    e.sadness = detail::score_field(row, 14, names);
    e.surprise = detail::score_field(row, 15, names);
    if (std::abs(e.sum() - 100.0) > kEmotionSumTolerance) {
      throw detail::RowError("emotion scores sum to " + csv::format_double(e.sum()) +
                             ", expected 100 +/- 0.5");
    }
    if (!seen.emplace(f.photo_id, f.face_id).second) {
      throw detail::RowError("duplicate face " + f.photo_id + "/" + f.face_id);
    }
    return f;
  });
}

inline ParseResult<PhotoRecord> parse_photos(std::istream& in, const ParseOptions& opts = {}) {
  std::unordered_set<std::string> seen;
  const auto& names = kPhotosColumns;
  return detail::parse_rows<PhotoRecord>(in, names, "photos", opts, [&](const csv::Row& row) {
    PhotoRecord p;
    p.photo_id = detail::id_field(row, 0, names);
    p.user_id = detail::id_field(row, 1, names);
    p.site_id = detail::id_field(row, 2, names);
    p.location = detail::location_field(row, 3, 4, names);
    p.timestamp = detail::timestamp_field(row, 5);
    p.tags = detail::split_tags(row.fields[6]);
    if (!seen.insert(p.photo_id).second) throw detail::RowError("duplicate photo_id " + p.photo_id);
    return p;
  });
}

/// Reads sites.csv. The site table is the study design, so any invalid row is a
/// SchemaError (with its line number) rather than a rejection.
inline std::vector<SiteRecord> parse_sites(std::istream& in) {
  csv::Reader reader(in);
  const auto& names = kSitesColumns;
  csv::expect_header(reader, names, "sites");
  std::vector<SiteRecord> out;
  std::unordered_set<std::string> seen;
  while (auto row = reader.next()) {
    if (detail::is_blank(*row)) continue;
    const std::string where = "sites line " + std::to_string(row->line) + ": ";
    try {
      if (row->fields.size() != names.size()) {
        throw detail::RowError("expected " + std::to_string(names.size()) + " fields, found " +
                               std::to_string(row->fields.size()));
      }
      SiteRecord s;
      s.site_id = detail::id_field(*row, 0, names);
      s.name = row->fields[1];
      s.center = detail::location_field(*row, 2, 3, names);
      if (!row->fields[4].empty()) s.harvest_radius_m = detail::number_field(*row, 4, names);
      if (!(s.harvest_radius_m > 0.0)) throw detail::RowError("harvest_radius_m must be > 0");
      s.country = row->fields[6];
      auto& f = s.factors;
      f.site_id = s.site_id;
      f.continent = row->fields[5];
      f.space = row->fields[7];
      f.setting = row->fields[8];
      f.type = row->fields[9];
      f.water = row->fields[10];
      f.water_distance_m = detail::number_field(*row, 11, names);
      f.ndvi = detail::number_field(*row, 12, names);
      stats::validate_factor_row(f);
      if (!seen.insert(s.site_id).second) throw detail::RowError("duplicate site_id " + s.site_id);
      out.push_back(std::move(s));
    } catch (const SchemaError& e) {
      throw SchemaError(where + e.what());
    } catch (const std::exception& e) {
      throw SchemaError(where + e.what());
    }
  }
  return out;
}

inline void write_faces(std::ostream& out, std::span<const FaceRecord> faces) {
  csv::write_row(out, kFacesColumns);
  using csv::format_double;
  for (const auto& f : faces) {
    const auto& e = f.emotion;
    csv::write_row(out, {f.photo_id, f.user_id, f.site_id, format_double(f.location.lat),
                         format_double(f.location.lon), format_iso8601(f.timestamp), f.face_id,
                         format_double(f.smile_value), format_double(f.smile_threshold),
                         format_double(e.anger), format_double(e.disgust), format_double(e.fear),
                         format_double(e.happiness), format_double(e.neutral),
                         format_double(e.sadness), format_double(e.surprise)});
  }
}

inline void write_photos(std::ostream& out, std::span<const PhotoRecord> photos) {
  csv::write_row(out, kPhotosColumns);
  for (const auto& p : photos) {
    std::string tags;
    for (const auto& t : p.tags) tags += (tags.empty() ? "" : ";") + t;
    csv::write_row(out, {p.photo_id, p.user_id, p.site_id, csv::format_double(p.location.lat),
                         csv::format_double(p.location.lon), format_iso8601(p.timestamp), tags});
  }
}

inline void write_sites(std::ostream& out, std::span<const SiteRecord> sites) {
  csv::write_row(out, kSitesColumns);
  using csv::format_double;
  for (const auto& s : sites) {
    const auto& f = s.factors;
    csv::write_row(out, {s.site_id, s.name, format_double(s.center.lat), format_double(s.center.lon),
                         format_double(s.harvest_radius_m), f.continent, s.country, f.space,
                         f.setting, f.type, f.water, format_double(f.water_distance_m),
                         format_double(f.ndvi)});
  }
}

/// Keeps records whose site is known and whose location lies within the site's
/// harvest radius of its center; the rest are returned as diagnostics keyed by
/// position in the input.
template <typename Record>
ParseResult<Record> apply_harvest_radius(std::vector<Record> records, std::span<const SiteRecord> sites) {
  std::unordered_map<std::string, const SiteRecord*> by_id;
  for (const auto& s : sites) by_id.emplace(s.site_id, &s);
  ParseResult<Record> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    auto it = by_id.find(r.site_id);
    if (it == by_id.end()) {
      out.rejected.push_back({i, r.photo_id + ": unknown site_id " + r.site_id});
      continue;
    }
    const double d = haversine_m(r.location, it->second->center);
    if (d > it->second->harvest_radius_m) {
      out.rejected.push_back({i, r.photo_id + ": " + csv::format_double(std::round(d)) +
                                     " m from the center of " + r.site_id + " (radius " +
                                     csv::format_double(it->second->harvest_radius_m) + " m)"});
      continue;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emotion scorer boundary

struct ScorerRequest {
  std::string photo_id;
  std::string uri;  // opaque photo reference
};

struct BoundingBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;
};

struct ScoredFace {
  double smile_value = 0.0;
  double smile_threshold = 0.0;
  EmotionStructure emotion;
  std::optional<BoundingBox> box;
};

struct ScorerResponse {
  std::vector<ScoredFace> faces;
};

/// Failure to score one photo (network error, quota, corrupt image...).
class ScorerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Face detection plus emotion recognition for one photo. Implementations used
/// with more than one request in flight must be thread-safe.
class EmotionScorer {
 public:
  virtual ~EmotionScorer() = default;
  virtual ScorerResponse score(const ScorerRequest& request) = 0;
};

/// Deterministic stand-in for a cloud face API: the faces of a photo are a pure
/// function of (seed, photo_id).
class StubScorer : public EmotionScorer {
 public:
  struct Options {
    std::uint64_t seed = 0;
    double face_probability = 0.2;  // share of photos with at least one face
    double mean_extra_faces = 0.9;  // geometric tail beyond the first face
    double happiness_mean = 40.0;
    double happiness_sd = 25.0;
    double smile_threshold = 30.1;
  };

  StubScorer() = default;
  explicit StubScorer(Options opts) : opts_(opts) {}

  ScorerResponse score(const ScorerRequest& request) override {
    Rng rng(derive_seed(opts_.seed, hash_string(request.photo_id)));
    ScorerResponse out;
    if (!rng.bernoulli(opts_.face_probability)) return out;
    const double p_more = opts_.mean_extra_faces / (1.0 + opts_.mean_extra_faces);
    std::size_t n = 1;
    while (n < 12 && rng.bernoulli(p_more)) ++n;
    for (std::size_t i = 0; i < n; ++i) {
      const double latent = rng.normal(opts_.happiness_mean, opts_.happiness_sd);
      out.faces.push_back(make_face(latent, opts_.smile_threshold, rng));
    }
    return out;
  }

  /// Face whose happiness and smile intensity both track `latent` (a 0-100
  /// positivity), with the remaining emotion mass spread over the other fields.
  static ScoredFace make_face(double latent, double threshold, Rng& rng) {
    ScoredFace f;
    const double happiness = std::clamp(latent + rng.normal(0.0, 5.0), 0.0, 100.0);
    f.smile_value = std::clamp(latent + rng.normal(0.0, 10.0), 0.0, 100.0);
    f.smile_threshold = threshold;
    double w[6];
    double total = 0.0;
    for (double& x : w) {
      x = rng.uniform(0.05, 1.0);
      total += x;
    }
    const double rest = 100.0 - happiness;
    auto round3 = [](double v) { return std::round(v * 1000.0) / 1000.0; };
    auto& e = f.emotion;
    e.happiness = round3(happiness);
    e.anger = round3(rest * w[0] / total);
    e.disgust = round3(rest * w[1] / total);
    e.fear = round3(rest * w[2] / total);
    e.sadness = round3(rest * w[3] / total);
    e.surprise = round3(rest * w[4] / total);
    e.neutral = std::max(0.0, round3(100.0 - e.happiness - e.anger - e.disgust - e.fear - e.sadness -
                                     e.surprise));
    f.smile_value = round3(f.smile_value);
    return f;
  }

 private:
  Options opts_;
};

struct ScoringOptions {
  double max_failure_fraction = 0.10;
  std::size_t max_in_flight = 1;
};

struct ScoringResult {
  std::vector<FaceRecord> faces;
  std::vector<std::pair<std::string, std::string>> failures;  // (photo_id, reason)
};

/// Runs the scorer over every photo and flattens the detected faces into
/// FaceRecords that inherit the photo's identity, site, location and time. Face ids
/// are "<photo_id>#<k>". Output follows photo order regardless of concurrency.
/// Throws ScoringAborted when failures exceed opts.max_failure_fraction.
inline ScoringResult score_photos(std::span<const PhotoRecord> photos, EmotionScorer& scorer,
                                  const ScoringOptions& opts = {}) {
  std::vector<std::optional<ScorerResponse>> responses(photos.size());
  std::vector<std::string> errors(photos.size());
  auto work = [&](std::size_t i) {
    try {
      responses[i] = scorer.score({photos[i].photo_id, "photo:" + photos[i].photo_id});
      for (const auto& f : responses[i]->faces) {
        if (!in_score_range(f.smile_value) || !in_score_range(f.smile_threshold) || !is_valid(f.emotion)) {
          responses[i].reset();
          errors[i] = "scorer returned scores outside the face contract";
          break;
        }
      }
    } catch (const std::exception& e) {
      responses[i].reset();
      errors[i] = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.max_in_flight, photos.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < photos.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < photos.size();) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  ScoringResult out;
  for (std::size_t i = 0; i < photos.size(); ++i) {
    const auto& p = photos[i];
    if (!responses[i]) {
      out.failures.emplace_back(p.photo_id, errors[i]);
      continue;
    }
    std::size_t k = 0;
    for (const auto& sf : responses[i]->faces) {
      FaceRecord f;
      f.photo_id = p.photo_id;
      f.face_id = p.photo_id + "#" + std::to_string(k++);
      f.user_id = p.user_id;
      f.site_id = p.site_id;
      f.location = p.location;
      f.timestamp = p.timestamp;
      f.smile_value = sf.smile_value;
      f.smile_threshold = sf.smile_threshold;
      f.emotion = sf.emotion;
      out.faces.push_back(std::move(f));
    }
  }
  if (!photos.empty()) {
    const double fraction = static_cast<double>(out.failures.size()) / static_cast<double>(photos.size());
    if (fraction > opts.max_failure_fraction) {
      throw ScoringAborted(std::to_string(out.failures.size()) + " of " + std::to_string(photos.size()) +
                           " photos could not be scored; first failure: " + out.failures.front().first +
                           ": " + out.failures.front().second);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Visitor classification

enum class UserClass { Tourist, Local };

inline constexpr auto kLocalSpan = std::chrono::days{31};

inline std::string_view to_string(UserClass c) { return c == UserClass::Local ? "local" : "tourist"; }

/// Local iff the user's photos at a site span strictly more than 31 days.
inline UserClass classify_user(std::span<const Timestamp> times) {
  if (times.empty()) throw std::invalid_argument("classify_user: no photos");
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  return (*hi - *lo) > kLocalSpan ? UserClass::Local : UserClass::Tourist;
}

inline UserClass classify_user(std::span<const PhotoRecord> photos_of_user_at_site) {
  std::vector<Timestamp> times;
  for (const auto& p : photos_of_user_at_site) times.push_back(p.timestamp);
  return classify_user(times);
}

/// Classifies every (site, user) pair from the timestamps of their photos.
/// Faces of one photo share a timestamp, so faces can stand in for photos.
template <typename Record>
std::map<std::pair<std::string, std::string>, UserClass> classify_users(std::span<const Record> records) {
  std::map<std::pair<std::string, std::string>, std::vector<Timestamp>> times;
  for (const auto& r : records) times[{r.site_id, r.user_id}].push_back(r.timestamp);
  std::map<std::pair<std::string, std::string>, UserClass> out;
  for (const auto& [key, ts] : times) out.emplace(key, classify_user(std::span<const Timestamp>(ts)));
  return out;
}

}  // namespace placemood
