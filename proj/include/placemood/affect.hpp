#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "placemood/error.hpp"
#include "placemood/geo.hpp"
#include "placemood/random.hpp"
#include "placemood/stats/bootstrap.hpp"
#include "placemood/time.hpp"

namespace placemood {

/// Seven emotion confidences in [0, 100] that sum to 100.
struct EmotionStructure {
  double anger = 0.0;
  double disgust = 0.0;
  double fear = 0.0;
  double happiness = 0.0;
  double neutral = 0.0;
  double sadness = 0.0;
  double surprise = 0.0;

  double sum() const { return anger + disgust + fear + happiness + neutral + sadness + surprise; }

  friend bool operator==(const EmotionStructure&, const EmotionStructure&) = default;
};

inline constexpr double kEmotionSumTolerance = 0.5;

inline bool in_score_range(double v) { return std::isfinite(v) && v >= 0.0 && v <= 100.0; }

inline bool is_valid(const EmotionStructure& e) {
  for (double v : {e.anger, e.disgust, e.fear, e.happiness, e.neutral, e.sadness, e.surprise}) {
    if (!in_score_range(v)) return false;
  }
  return std::abs(e.sum() - 100.0) <= kEmotionSumTolerance;
}

struct FaceRecord {
  std::string photo_id;
  std::string face_id;
  std::string user_id;
  std::string site_id;
  GeoPoint location;
  Timestamp timestamp{};
  double smile_value = 0.0;
  double smile_threshold = 0.0;
  EmotionStructure emotion;

  friend bool operator==(const FaceRecord&, const FaceRecord&) = default;
};

enum class Smile { Smiling, NotSmiling };

/// Smiling iff the smile value strictly exceeds the face's threshold.
inline Smile classify_smile(const FaceRecord& face) {
  return face.smile_value > face.smile_threshold ? Smile::Smiling : Smile::NotSmiling;
}

struct SmileCounts {
  std::size_t smiling = 0;
  std::size_t not_smiling = 0;
};

inline SmileCounts count_smiles(std::span<const FaceRecord> faces) {
  SmileCounts c;
  for (const auto& f : faces) {
    (classify_smile(f) == Smile::Smiling ? c.smiling : c.not_smiling)++;
  }
  return c;
}

/// (smiling - not smiling) / (smiling + not smiling)
inline double joy_index(const SmileCounts& counts) {
  const std::size_t total = counts.smiling + counts.not_smiling;
  if (total == 0) throw NoFaces("joy index of zero faces");
  return (static_cast<double>(counts.smiling) - static_cast<double>(counts.not_smiling)) /
         static_cast<double>(total);
}

inline double joy_index(std::span<const FaceRecord> faces) { return joy_index(count_smiles(faces)); }

/// Mean happiness score over faces.
inline double average_happiness(std::span<const FaceRecord> faces) {
  if (faces.empty()) throw NoFaces("average happiness of zero faces");
  double sum = 0.0;
  for (const auto& f : faces) sum += f.emotion.happiness;
  return sum / static_cast<double>(faces.size());
}

struct Interval {
  double low = 0.0;
  double high = 0.0;

  double width() const { return high - low; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct EmotionSummary {
  std::string site_id;
  double joy_index = 0.0;
  double ahi = 0.0;
  std::size_t n_faces = 0;
  std::size_t n_smiling = 0;
  std::size_t n_nonsmiling = 0;
  Interval joy_ci;
  Interval ahi_ci;

  friend bool operator==(const EmotionSummary&, const EmotionSummary&) = default;
};

/// Per-face observation whose mean is the joy index: +1 smiling, -1 otherwise.
inline double joy_contribution(const FaceRecord& face) {
  return classify_smile(face) == Smile::Smiling ? 1.0 : -1.0;
}

/// Point estimates plus percentile-bootstrap intervals for both indices. Both
/// intervals come from the same face resamples, drawn from a stream keyed by
/// (cfg.seed, site_id). The reported interval is widened to cover the point
/// estimate when the percentile bounds miss it.
inline EmotionSummary summarize_place(const std::string& site_id, std::span<const FaceRecord> faces,
                                      const stats::BootstrapConfig& cfg) {
  if (faces.empty()) throw NoFaces("site " + site_id + " has no faces");
  EmotionSummary s;
  s.site_id = site_id;
  const auto counts = count_smiles(faces);
  s.n_faces = faces.size();
  s.n_smiling = counts.smiling;
  s.n_nonsmiling = counts.not_smiling;
  s.joy_index = joy_index(counts);
  s.ahi = average_happiness(faces);

  std::vector<double> joy_obs;
  std::vector<double> happiness;
  joy_obs.reserve(faces.size());
  happiness.reserve(faces.size());
  for (const auto& f : faces) {
    joy_obs.push_back(joy_contribution(f));
    happiness.push_back(f.emotion.happiness);
  }
  auto site_cfg = cfg;
  site_cfg.seed = derive_seed(cfg.seed, hash_string(site_id));
  const std::span<const double> samples[] = {joy_obs, happiness};
  const auto ci = stats::bootstrap_mean_ci(samples, site_cfg);
  const auto& joy = ci[0];
  const auto& ahi = ci[1];
  s.joy_ci = {std::min(joy.low, s.joy_index), std::max(joy.high, s.joy_index)};
  s.ahi_ci = {std::min(ahi.low, s.ahi), std::max(ahi.high, s.ahi)};
  return s;
}

}  // namespace placemood
