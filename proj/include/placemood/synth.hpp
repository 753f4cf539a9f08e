#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"

#include "placemood/affect.hpp"
#include "placemood/geo.hpp"
#include "placemood/ingest.hpp"
#include "placemood/random.hpp"

namespace placemood {

/// Gaussian photo hotspot, offset from the site center in meters.
struct BlobSpec {
  double east_m = 0.0;
  double north_m = 0.0;
  double sigma_m = 60.0;
  double weight = 1.0;
};

struct SynthSite {
  SiteRecord site;
  std::vector<BlobSpec> blobs;
  std::size_t n_photos = 1000;
  double noise_fraction = 0.05;      // uniform background inside the harvest disc
  double face_probability = 0.6;     // photos with at least one face
  double mean_extra_faces = 1.0;     // geometric tail beyond the first face
  double happiness_mean = 40.0;      // latent positivity of locals
  double happiness_sd = 20.0;
  double tourist_shift = 0.0;        // added to the latent mean for tourists
  double tourist_share = 0.8;
  double smile_threshold = 30.1;
  std::vector<std::string> tag_vocabulary;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::vector<SynthSite> sites;
};

struct SynthDataset {
  std::vector<SiteRecord> sites;
  std::vector<PhotoRecord> photos;
  std::vector<FaceRecord> faces;
};

namespace detail {

inline GeoPoint offset_m(const GeoPoint& origin, double east_m, double north_m) {
  const double lat = origin.lat + rad2deg(north_m / kEarthRadiusM);
  const double lon = origin.lon + rad2deg(east_m / (kEarthRadiusM * std::cos(deg2rad(origin.lat))));
  return make_geo_point(std::clamp(lat, -90.0, 90.0), normalize_lon(lon));
}

inline std::string padded(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

}  // namespace detail

/// Generates sites, photos and faces. Each site draws from its own stream keyed by
/// (spec.seed, site_id), so adding a site leaves the others unchanged. Blob draws
/// are truncated at 4 sigma and every photo lies inside the harvest radius.
inline SynthDataset synth_dataset(const SynthSpec& spec) {
  using namespace std::chrono;
  SynthDataset out;
  const Timestamp epoch = sys_days{year{2012} / January / 1};
  const auto window_days = 365 * 5;

  for (const auto& ss : spec.sites) {
    Rng rng(derive_seed(spec.seed, hash_string(ss.site.site_id)));
    out.sites.push_back(ss.site);
    const auto& center = ss.site.center;
    const double radius = ss.site.harvest_radius_m * 0.95;

    struct User {
      std::string id;
      bool tourist;
      Timestamp start;
      int span_days;
    };
    const std::size_t n_users = std::max<std::size_t>(1, ss.n_photos / 6);
    std::vector<User> users;
    for (std::size_t u = 0; u < n_users; ++u) {
      User user;
      user.id = ss.site.site_id + "-u" + detail::padded(u, 5);
      user.tourist = rng.bernoulli(ss.tourist_share);
      user.start = epoch + days{static_cast<int>(rng.below(window_days - 400))};
      user.span_days = user.tourist ? static_cast<int>(rng.below(4)) : 60 + static_cast<int>(rng.below(340));
      users.push_back(user);
    }
    double weight_total = 0.0;
    for (const auto& b : ss.blobs) weight_total += b.weight;

    for (std::size_t i = 0; i < ss.n_photos; ++i) {
      PhotoRecord p;
      p.photo_id = ss.site.site_id + "-p" + detail::padded(i, 6);
      const auto& user = users[rng.below(users.size())];
      p.user_id = user.id;
      p.site_id = ss.site.site_id;
      p.timestamp = user.start + seconds{static_cast<long long>(
                                    rng.below(static_cast<std::uint64_t>(user.span_days) * 86400 + 3600))};

      double east = 0.0;
      double north = 0.0;
      if (ss.blobs.empty() || rng.bernoulli(ss.noise_fraction)) {
        do {
          east = rng.uniform(-radius, radius);
          north = rng.uniform(-radius, radius);
        } while (std::hypot(east, north) > radius);
      } else {
        double pick = rng.uniform() * weight_total;
        const BlobSpec* blob = &ss.blobs.back();
        for (const auto& b : ss.blobs) {
          if (pick < b.weight) {
            blob = &b;
            break;
          }
          pick -= b.weight;
        }
        double dx = 0.0;
        double dy = 0.0;
        do {
          dx = rng.normal(0.0, blob->sigma_m);
          dy = rng.normal(0.0, blob->sigma_m);
          east = blob->east_m + dx;
          north = blob->north_m + dy;
        } while (std::hypot(dx, dy) > 4.0 * blob->sigma_m || std::hypot(east, north) > radius);
      }
      p.location = detail::offset_m(center, east, north);

      if (!ss.tag_vocabulary.empty()) {
        const std::size_t n_tags = rng.below(5);
        for (std::size_t t = 0; t < n_tags; ++t) {
          // Skewed toward the front of the vocabulary.
          const double u = rng.uniform();
          const auto k = static_cast<std::size_t>(u * u * static_cast<double>(ss.tag_vocabulary.size()));
          const auto& tag = ss.tag_vocabulary[std::min(k, ss.tag_vocabulary.size() - 1)];
          if (std::find(p.tags.begin(), p.tags.end(), tag) == p.tags.end()) p.tags.push_back(tag);
        }
      }

      if (rng.bernoulli(ss.face_probability)) {
        const double p_more = ss.mean_extra_faces / (1.0 + ss.mean_extra_faces);
        std::size_t n_faces = 1;
        while (n_faces < 12 && rng.bernoulli(p_more)) ++n_faces;
        for (std::size_t k = 0; k < n_faces; ++k) {
          const double latent =
              rng.normal(ss.happiness_mean + (user.tourist ? ss.tourist_shift : 0.0), ss.happiness_sd);
          const auto scored = StubScorer::make_face(latent, ss.smile_threshold, rng);
          FaceRecord f;
          f.photo_id = p.photo_id;
          f.face_id = p.photo_id + "#" + std::to_string(k);
          f.user_id = p.user_id;
          f.site_id = p.site_id;
          f.location = p.location;
          f.timestamp = p.timestamp;
          f.smile_value = scored.smile_value;
          f.smile_threshold = scored.smile_threshold;
          f.emotion = scored.emotion;
          out.faces.push_back(std::move(f));
        }
      }
      out.photos.push_back(std::move(p));
    }
  }
  return out;
}

/// Twenty well-separated sites spread over the archetypes, continents and settings
/// used in the regression tables, with planted type effects on happiness and photo
/// counts from roughly 600 to 3,000. About 50k faces in total.
inline SynthSpec golden_fixture_spec(std::uint64_t seed = 20190415) {
  struct Row {
    const char* id;
    const char* name;
    double lat, lon;
    const char* continent;
    const char* country;
    const char* space;
    const char* setting;
    const char* type;
    const char* water;
    double water_distance_m, ndvi;
    std::size_t n_photos;
  };
  // clang-format off
  static const Row rows[] = {
      {"S01", "Wall Ridge",        40.43, 116.57, "asia",          "China",     "open",   "rural", "cultural",  "absent",  850, 0.62, 2400},
      {"S02", "Harbor Park",       33.81,-117.92, "north_america", "USA",       "open",   "urban", "amusement", "present",   0, 0.41, 3000},
      {"S03", "North Cathedral",   49.89,   2.30, "europe",        "France",    "closed", "urban", "religious", "absent",  400, 0.35, 900},
      {"S04", "Falls Overlook",    43.08, -79.07, "north_america", "Canada",    "open",   "rural", "natural",   "present",   0, 0.71, 2200},
      {"S05", "Old Palace",        39.92, 116.39, "asia",          "China",     "closed", "urban", "palace",    "present",   0, 0.30, 2600},
      {"S06", "Grand Museum",      48.86,   2.34, "europe",        "France",    "closed", "urban", "museum",    "absent",  150, 0.28, 2800},
      {"S07", "Lagoon Resort",     28.37, -81.55, "north_america", "USA",       "open",   "urban", "amusement", "present",   0, 0.52, 2500},
      {"S08", "Canyon Rim",        36.06,-112.14, "north_america", "USA",       "open",   "rural", "natural",   "absent", 1500, 0.33, 1500},
      {"S09", "Hill Temple",       35.03, 135.78, "asia",          "Japan",     "open",   "urban", "religious", "absent",  300, 0.58, 1800},
      {"S10", "Bazaar Quarter",    41.01,  28.97, "europe",        "Turkey",    "closed", "urban", "cultural",  "absent",  600, 0.22, 1200},
      {"S11", "Castle Keep",       47.56,  10.75, "europe",        "Germany",   "open",   "rural", "palace",    "present",   0, 0.66, 1600},
      {"S12", "Science Hall",      40.78, -73.96, "north_america", "USA",       "closed", "urban", "museum",    "absent",  700, 0.37, 1100},
      {"S13", "Coral Bay",        -33.86, 151.21, "oceania",       "Australia", "open",   "urban", "cultural",  "present",   0, 0.45, 1900},
      {"S14", "Savanna Gate",      -1.29,  36.82, "africa",        "Kenya",     "open",   "rural", "natural",   "absent", 2500, 0.55, 700},
      {"S15", "Pyramid Plateau",   29.98,  31.13, "africa",        "Egypt",     "open",   "rural", "cultural",  "absent", 8000, 0.08, 1300},
      {"S16", "Island Funland",    22.31, 114.04, "asia",          "China",     "open",   "urban", "amusement", "present",   0, 0.48, 2100},
      {"S17", "Basilica Square",   41.90,  12.45, "europe",        "Italy",     "open",   "urban", "religious", "absent",  450, 0.31, 2700},
      {"S18", "Glacier Lake",      51.42,-116.18, "north_america", "Canada",    "open",   "rural", "natural",   "present",   0, 0.63, 600},
      {"S19", "Summer Palace",     59.88,  29.91, "europe",        "Russia",    "open",   "rural", "palace",    "present",   0, 0.59, 1400},
      {"S20", "Art Gallery",       51.51,  -0.13, "europe",        "UK",        "closed", "urban", "museum",    "absent",  350, 0.29, 1000},
  };
  // clang-format on

  SynthSpec spec;
  spec.seed = seed;
  Rng layout(derive_seed(seed, 0x9e11));
  for (const auto& r : rows) {
    SynthSite ss;
    auto& s = ss.site;
    s.site_id = r.id;
    s.name = r.name;
    s.center = make_geo_point(r.lat, r.lon);
    s.country = r.country;
    s.factors = {r.id, r.water_distance_m, r.ndvi, r.continent, r.space, r.setting, r.type, r.water};

    const std::string type = r.type;
    double mean = 32.0;
    if (type == "amusement") mean += 18.0;
    if (type == "natural") mean += 8.0;
    if (type == "religious") mean -= 10.0;
    if (type == "museum") mean -= 6.0;
    if (type == "palace") mean -= 3.0;
    if (std::string(r.setting) == "rural") mean += 3.0;
    mean += layout.uniform(-6.0, 6.0);
    ss.happiness_mean = mean;
    ss.happiness_sd = 20.0;
    ss.tourist_shift = 3.0;
    ss.n_photos = r.n_photos;
    ss.noise_fraction = 0.04;
    ss.face_probability = 0.6;
    ss.mean_extra_faces = 1.4;

    const std::size_t n_blobs = 1 + layout.below(3);
    for (std::size_t b = 0; b < n_blobs; ++b) {
      BlobSpec blob;
      const double angle = layout.uniform(0.0, 2.0 * std::numbers::pi);
      const double dist = b == 0 ? layout.uniform(0.0, 80.0) : layout.uniform(350.0, 600.0);
      blob.east_m = dist * std::cos(angle);
      blob.north_m = dist * std::sin(angle);
      blob.sigma_m = layout.uniform(40.0, 80.0);
      blob.weight = b == 0 ? 2.0 : 1.0;
      ss.blobs.push_back(blob);
    }
    ss.tag_vocabulary = {type, std::string(r.country), "travel", "vacation", "family", "friends",
                         "landmark", "sunset", "architecture", "smile"};
    for (auto& t : ss.tag_vocabulary) t = stats::canonical_level(t);
    spec.sites.push_back(std::move(ss));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// JSON form of SynthSpec, for the synth subcommand.

inline void to_json(nlohmann::json& j, const BlobSpec& b) {
  j = {{"east_m", b.east_m}, {"north_m", b.north_m}, {"sigma_m", b.sigma_m}, {"weight", b.weight}};
}

inline void from_json(const nlohmann::json& j, BlobSpec& b) {
  b.east_m = j.value("east_m", 0.0);
  b.north_m = j.value("north_m", 0.0);
  b.sigma_m = j.value("sigma_m", 60.0);
  b.weight = j.value("weight", 1.0);
}

inline void to_json(nlohmann::json& j, const SynthSite& s) {
  const auto& f = s.site.factors;
  j = {{"site_id", s.site.site_id},
       {"name", s.site.name},
       {"lat", s.site.center.lat},
       {"lon", s.site.center.lon},
       {"harvest_radius_m", s.site.harvest_radius_m},
       {"country", s.site.country},
       {"continent", f.continent},
       {"space", f.space},
       {"setting", f.setting},
       {"type", f.type},
       {"water", f.water},
       {"water_distance_m", f.water_distance_m},
       {"ndvi", f.ndvi},
       {"blobs", s.blobs},
       {"n_photos", s.n_photos},
       {"noise_fraction", s.noise_fraction},
       {"face_probability", s.face_probability},
       {"mean_extra_faces", s.mean_extra_faces},
       {"happiness_mean", s.happiness_mean},
       {"happiness_sd", s.happiness_sd},
       {"tourist_shift", s.tourist_shift},
       {"tourist_share", s.tourist_share},
       {"smile_threshold", s.smile_threshold},
       {"tags", s.tag_vocabulary}};
}

inline void from_json(const nlohmann::json& j, SynthSite& s) {
  const SynthSite d;
  s.site.site_id = j.at("site_id").get<std::string>();
  s.site.name = j.value("name", s.site.site_id);
  s.site.center = make_geo_point(j.at("lat").get<double>(), j.at("lon").get<double>());
  s.site.harvest_radius_m = j.value("harvest_radius_m", kDefaultHarvestRadiusM);
  s.site.country = j.value("country", std::string());
  auto& f = s.site.factors;
  f.site_id = s.site.site_id;
  f.continent = j.value("continent", std::string("europe"));
  f.space = j.value("space", std::string("open"));
  f.setting = j.value("setting", std::string("urban"));
  f.type = j.value("type", std::string("cultural"));
  f.water = j.value("water", std::string("absent"));
  f.water_distance_m = j.value("water_distance_m", 0.0);
  f.ndvi = j.value("ndvi", 0.0);
  stats::validate_factor_row(f);
  s.blobs = j.value("blobs", std::vector<BlobSpec>{});
  s.n_photos = j.value("n_photos", d.n_photos);
  s.noise_fraction = j.value("noise_fraction", d.noise_fraction);
  s.face_probability = j.value("face_probability", d.face_probability);
  s.mean_extra_faces = j.value("mean_extra_faces", d.mean_extra_faces);
  s.happiness_mean = j.value("happiness_mean", d.happiness_mean);
  s.happiness_sd = j.value("happiness_sd", d.happiness_sd);
  s.tourist_shift = j.value("tourist_shift", d.tourist_shift);
  s.tourist_share = j.value("tourist_share", d.tourist_share);
  s.smile_threshold = j.value("smile_threshold", d.smile_threshold);
  s.tag_vocabulary = j.value("tags", std::vector<std::string>{});
}

inline void to_json(nlohmann::json& j, const SynthSpec& s) { j = {{"seed", s.seed}, {"sites", s.sites}}; }

inline void from_json(const nlohmann::json& j, SynthSpec& s) {
  s.seed = j.value("seed", std::uint64_t{0});
  s.sites = j.at("sites").get<std::vector<SynthSite>>();
}

}  // namespace placemood
