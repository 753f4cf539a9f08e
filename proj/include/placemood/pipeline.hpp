#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "placemood/affect.hpp"
#include "placemood/error.hpp"
#include "placemood/ingest.hpp"
#include "placemood/place.hpp"
#include "placemood/stats/bootstrap.hpp"
#include "placemood/stats/correlation.hpp"
#include "placemood/stats/kendall.hpp"
#include "placemood/stats/power_law.hpp"
#include "placemood/stats/rank.hpp"
#include "placemood/stats/regression.hpp"

namespace placemood {

/// Inputs of a study. When `photos` is empty, the construction points of a site
/// are the distinct photo locations of its faces.
struct StudyInput {
  std::span<const SiteRecord> sites;
  std::span<const PhotoRecord> photos;
  std::span<const FaceRecord> faces;
};

struct SiteStudy {
  std::string site_id;
  std::string name;
  Place place;
  EmotionSummary summary;
  std::vector<std::size_t> face_indices;  // retained faces, positions in StudyInput::faces
};

struct Exclusion {
  std::string site_id;
  std::string reason;
};

struct StudyResult {
  ClusterParams params;
  std::vector<SiteStudy> sites;
  std::vector<Exclusion> excluded;

  std::vector<EmotionSummary> summaries() const {
    std::vector<EmotionSummary> out;
    for (const auto& s : sites) out.push_back(s.summary);
    return out;
  }
  std::vector<Place> places() const {
    std::vector<Place> out;
    for (const auto& s : sites) out.push_back(s.place);
    return out;
  }
};

namespace detail {

template <typename Record>
std::unordered_map<std::string, std::vector<std::size_t>> group_by_site(std::span<const Record> records,
                                                                        std::span<const SiteRecord> sites,
                                                                        std::string_view kind) {
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (const auto& s : sites) groups[s.site_id];
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = groups.find(records[i].site_id);
    if (it == groups.end()) {
      throw SchemaError(std::string(kind) + " " + records[i].photo_id + " references unknown site_id '" +
                        records[i].site_id + "'");
    }
    it->second.push_back(i);
  }
  return groups;
}

}  // namespace detail

/// Per site: footprint from the photo points, faces filtered to the footprint,
/// emotion summary. Sites whose footprint cannot be built or that keep no faces
/// are excluded with a reason. Throws StudyFailed when no site survives.
inline StudyResult run_study(const StudyInput& input, const ClusterParams& params,
                             const stats::BootstrapConfig& cfg) {
  params.validate();
  cfg.validate();
  const auto faces_by_site = detail::group_by_site(input.faces, input.sites, "face");
  const auto photos_by_site = detail::group_by_site(input.photos, input.sites, "photo");

  StudyResult result;
  result.params = params;
  for (const auto& site : input.sites) {
    const auto& face_idx = faces_by_site.at(site.site_id);
    std::vector<GeoPoint> points;
    if (!input.photos.empty()) {
      for (std::size_t i : photos_by_site.at(site.site_id)) points.push_back(input.photos[i].location);
    } else {
      std::set<std::string_view> seen;
      for (std::size_t i : face_idx) {
        if (seen.insert(input.faces[i].photo_id).second) points.push_back(input.faces[i].location);
      }
    }

    SiteStudy study;
    study.site_id = site.site_id;
    study.name = site.name;
    try {
      study.place = construct_place(site.site_id, points, params);
    } catch (const StudyError& e) {
      result.excluded.push_back({site.site_id, e.what()});
      continue;
    }
    const FootprintTester tester(study.place);
    std::vector<FaceRecord> kept;
    for (std::size_t i : face_idx) {
      if (tester.contains(input.faces[i].location)) {
        study.face_indices.push_back(i);
        kept.push_back(input.faces[i]);
      }
    }
    if (kept.empty()) {
      result.excluded.push_back({site.site_id, "NoFaces: no faces inside the footprint of site " + site.site_id});
      continue;
    }
    study.summary = summarize_place(site.site_id, kept, cfg);
    result.sites.push_back(std::move(study));
  }
  if (result.sites.empty()) {
    std::string why = result.excluded.empty() ? "no sites" : result.excluded.front().reason;
    throw StudyFailed("no site survived place construction and face filtering (first: " + why + ")");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Rankings

enum class EmotionIndex { Joy, Ahi };

inline std::string_view to_string(EmotionIndex index) { return index == EmotionIndex::Joy ? "joy" : "ahi"; }

inline EmotionIndex parse_index(std::string_view text) {
  if (text == "joy") return EmotionIndex::Joy;
  if (text == "ahi") return EmotionIndex::Ahi;
  throw std::invalid_argument("index must be 'joy' or 'ahi', got '" + std::string(text) + "'");
}

inline double index_value(const EmotionSummary& s, EmotionIndex index) {
  return index == EmotionIndex::Joy ? s.joy_index : s.ahi;
}

struct RankingEntry {
  std::size_t rank = 0;
  std::string site_id;
  std::string name;
  EmotionSummary summary;
};

/// Descending by the chosen index, ties by ascending site_id; ranks 1..n.
inline std::vector<RankingEntry> build_ranking(std::span<const EmotionSummary> summaries, EmotionIndex index,
                                               const std::map<std::string, std::string>& names = {}) {
  std::vector<RankingEntry> out;
  for (const auto& s : summaries) {
    auto it = names.find(s.site_id);
    out.push_back({0, s.site_id, it == names.end() ? s.site_id : it->second, s});
  }
  std::stable_sort(out.begin(), out.end(), [&](const RankingEntry& a, const RankingEntry& b) {
    const double va = index_value(a.summary, index);
    const double vb = index_value(b.summary, index);
    if (va != vb) return va > vb;
    return a.site_id < b.site_id;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

inline std::map<std::string, std::string> site_names(std::span<const SiteRecord> sites) {
  std::map<std::string, std::string> names;
  for (const auto& s : sites) names[s.site_id] = s.name;
  return names;
}

// ---------------------------------------------------------------------------
// Parameter sensitivity

inline const std::vector<double> kDefaultEpsGrid = {50.0, 100.0, 200.0, 300.0};
inline const std::vector<double> kDefaultPctGrid = {0.005, 0.01, 0.02};

struct ComboOutcome {
  ClusterParams params;
  std::optional<StudyResult> study;
  std::string error;  // set when the combo failed
};

struct SensitivityReport {
  std::vector<ComboOutcome> combos;       // eps-major grid order
  std::vector<std::string> common_sites;  // sites summarized by every surviving combo
  stats::RankMatrix joy_ranks;            // one judge per surviving combo
  stats::RankMatrix ahi_ranks;
  double w_joy = 0.0;
  double w_ahi = 0.0;
  double w_combined = 0.0;  // joy and ahi judges together

  std::size_t surviving() const {
    return static_cast<std::size_t>(
        std::count_if(combos.begin(), combos.end(), [](const ComboOutcome& c) { return c.study.has_value(); }));
  }
};

/// Runs the study for every (eps, pct) pair and measures how well the resulting
/// site rankings agree. Judges rank the sites summarized by every surviving combo
/// (average ranks, largest index first). Failed combos are kept in the report
/// with their error. Throws InsufficientData with fewer than 2 surviving combos
/// or fewer than 2 common sites.
inline SensitivityReport sensitivity_grid(const StudyInput& input, std::span<const double> eps_list,
                                          std::span<const double> pct_list, std::size_t min_pts_floor,
                                          const stats::BootstrapConfig& cfg) {
  if (eps_list.empty() || pct_list.empty()) throw std::invalid_argument("sensitivity grid is empty");
  SensitivityReport report;
  // combos are independent and seeded identically, so they run concurrently
  std::vector<std::future<ComboOutcome>> pending;
  for (double eps : eps_list) {
    for (double pct : pct_list) {
      pending.push_back(std::async(std::launch::async, [&input, &cfg, eps, pct, min_pts_floor] {
        ComboOutcome combo;
        combo.params = {eps, pct, min_pts_floor};
        try {
          combo.study = run_study(input, combo.params, cfg);
        } catch (const StudyFailed& e) {
          combo.error = e.what();
        }
        return combo;
      }));
    }
  }
  for (auto& f : pending) report.combos.push_back(f.get());
  if (report.surviving() < 2) {
    throw InsufficientData("Kendall's W needs at least 2 surviving parameter combinations, got " +
                           std::to_string(report.surviving()));
  }

  std::map<std::string, std::size_t> counts;
  for (const auto& c : report.combos) {
    if (!c.study) continue;
    for (const auto& s : c.study->sites) ++counts[s.site_id];
  }
  for (const auto& site : input.sites) {
    auto it = counts.find(site.site_id);
    if (it != counts.end() && it->second == report.surviving()) report.common_sites.push_back(site.site_id);
  }
  if (report.common_sites.size() < 2) {
    throw InsufficientData("fewer than 2 sites survive every parameter combination");
  }

  for (const auto& c : report.combos) {
    if (!c.study) continue;
    std::map<std::string, const EmotionSummary*> by_id;
    for (const auto& s : c.study->sites) by_id[s.site_id] = &s.summary;
    std::vector<double> joy;
    std::vector<double> ahi;
    for (const auto& id : report.common_sites) {
      joy.push_back(by_id.at(id)->joy_index);
      ahi.push_back(by_id.at(id)->ahi);
    }
    report.joy_ranks.ranks.push_back(stats::rank_with_ties(joy, stats::Direction::Descending));
    report.ahi_ranks.ranks.push_back(stats::rank_with_ties(ahi, stats::Direction::Descending));
  }
  stats::RankMatrix combined = report.joy_ranks;
  combined.ranks.insert(combined.ranks.end(), report.ahi_ranks.ranks.begin(), report.ahi_ranks.ranks.end());
  report.w_joy = stats::kendalls_w(report.joy_ranks);
  report.w_ahi = stats::kendalls_w(report.ahi_ranks);
  report.w_combined = stats::kendalls_w(combined);
  return report;
}

// ---------------------------------------------------------------------------
// Environmental factors

struct IndexRegression {
  EmotionIndex index;
  std::vector<stats::ScreenEntry> screen;
  stats::RegressionResult fit;
};

struct RegressionStudy {
  std::vector<std::string> site_ids;  // row order of the design
  IndexRegression joy;
  IndexRegression ahi;
};

/// Correlation screen and dummy-coded OLS of each index on the site factors.
/// Throws SchemaError when a summarized site has no factor row, SingularDesign
/// (naming the column) when the factors are collinear.
inline RegressionStudy regression_study(std::span<const EmotionSummary> summaries,
                                        std::span<const stats::FactorRow> factors,
                                        const stats::ReferenceLevels& references) {
  std::map<std::string, const stats::FactorRow*> by_id;
  for (const auto& f : factors) by_id[f.site_id] = &f;
  std::vector<stats::FactorRow> rows;
  std::vector<double> joy;
  std::vector<double> ahi;
  RegressionStudy out;
  for (const auto& s : summaries) {
    auto it = by_id.find(s.site_id);
    if (it == by_id.end()) throw SchemaError("no factor row for site " + s.site_id);
    rows.push_back(*it->second);
    joy.push_back(s.joy_index);
    ahi.push_back(s.ahi);
    out.site_ids.push_back(s.site_id);
  }
  const auto design = stats::dummy_encode(rows, references);
  auto one = [&](EmotionIndex index, const std::vector<double>& y) {
    IndexRegression r{index, stats::correlation_screen(rows, y), stats::ols_fit(design, y)};
    return r;
  };
  out.joy = one(EmotionIndex::Joy, joy);
  out.ahi = one(EmotionIndex::Ahi, ahi);
  return out;
}

// ---------------------------------------------------------------------------
// Interval width versus sample size

struct StabilityPoint {
  std::string site_id;
  std::size_t n_faces = 0;
  double ci_width = 0.0;
};

struct IndexStability {
  EmotionIndex index;
  std::vector<StabilityPoint> points;
  std::optional<stats::PowerLawFit> fit;
  std::string note;  // why the fit is missing
};

struct StabilityCurve {
  IndexStability joy;
  IndexStability ahi;
};

/// Log-log least-squares fit of confidence-interval width against face count for
/// each index. Throws InsufficientData below 5 sites. A degenerate fit (zero
/// widths, identical counts) is reported through `note` instead of `fit`.
inline StabilityCurve stability_curve(std::span<const EmotionSummary> summaries) {
  if (summaries.size() < 5) {
    throw InsufficientData("stability curve needs at least 5 sites, got " + std::to_string(summaries.size()));
  }
  auto one = [&](EmotionIndex index) {
    IndexStability out{index, {}, std::nullopt, ""};
    std::vector<double> n;
    std::vector<double> w;
    for (const auto& s : summaries) {
      const double width = index == EmotionIndex::Joy ? s.joy_ci.width() : s.ahi_ci.width();
      out.points.push_back({s.site_id, s.n_faces, width});
      if (width > 0.0) {
        n.push_back(static_cast<double>(s.n_faces));
        w.push_back(width);
      }
    }
    if (w.size() < 2) {
      out.note = "degenerate: fewer than 2 sites with a positive interval width";
      return out;
    }
    try {
      out.fit = stats::fit_power_law(n, w);
      if (w.size() < out.points.size()) {
        out.note = std::to_string(out.points.size() - w.size()) + " zero-width sites left out of the fit";
      }
    } catch (const StudyError& e) {
      out.note = std::string("degenerate: ") + e.what();
    }
    return out;
  };
  return {one(EmotionIndex::Joy), one(EmotionIndex::Ahi)};
}

// ---------------------------------------------------------------------------
// Tags

/// Top-k tags of a site's photos, case-folded, by descending count then tag.
inline std::vector<std::pair<std::string, std::size_t>> tag_frequencies(std::span<const PhotoRecord> photos,
                                                                        std::string_view site_id, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& p : photos) {
    if (p.site_id != site_id) continue;
    for (const auto& t : p.tags) {
      std::string folded = t;
      for (auto& c : folded) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      ++counts[folded];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > k) out.resize(k);
  return out;
}

// ---------------------------------------------------------------------------
// Tourists versus locals

struct CohortDelta {
  std::string site_id;
  EmotionSummary tourist;
  EmotionSummary local;
  double ahi_delta = 0.0;  // tourist - local
  double joy_delta = 0.0;
};

struct CohortComparison {
  std::vector<CohortDelta> sites;
  std::vector<Exclusion> excluded;
  double mean_abs_ahi_delta = 0.0;
  double mean_abs_joy_delta = 0.0;
};

/// Per-site index differences between the tourist and local cohorts. Sites that
/// lack either cohort are excluded with a reason.
inline CohortComparison compare_cohorts(std::span<const EmotionSummary> tourists,
                                        std::span<const EmotionSummary> locals) {
  std::map<std::string, const EmotionSummary*> local_by_id;
  for (const auto& s : locals) local_by_id[s.site_id] = &s;
  std::set<std::string> tourist_ids;
  CohortComparison out;
  for (const auto& t : tourists) {
    tourist_ids.insert(t.site_id);
    auto it = local_by_id.find(t.site_id);
    if (it == local_by_id.end()) {
      out.excluded.push_back({t.site_id, "no local faces"});
      continue;
    }
    out.sites.push_back({t.site_id, t, *it->second, t.ahi - it->second->ahi, t.joy_index - it->second->joy_index});
  }
  for (const auto& l : locals) {
    if (!tourist_ids.count(l.site_id)) out.excluded.push_back({l.site_id, "no tourist faces"});
  }
  if (!out.sites.empty()) {
    for (const auto& d : out.sites) {
      out.mean_abs_ahi_delta += std::abs(d.ahi_delta);
      out.mean_abs_joy_delta += std::abs(d.joy_delta);
    }
    out.mean_abs_ahi_delta /= static_cast<double>(out.sites.size());
    out.mean_abs_joy_delta /= static_cast<double>(out.sites.size());
  }
  return out;
}

struct CohortSummaries {
  std::vector<EmotionSummary> tourists;
  std::vector<EmotionSummary> locals;
};

/// Splits each site's retained faces by the visitor class of their user and
/// summarizes each cohort. Users are classified from `timeline` (photos when
/// available, otherwise faces) at the same site.
template <typename TimelineRecord>
CohortSummaries cohort_summaries(const StudyResult& study, std::span<const FaceRecord> faces,
                                 std::span<const TimelineRecord> timeline, const stats::BootstrapConfig& cfg) {
  const auto classes = classify_users(timeline);
  CohortSummaries out;
  for (const auto& site : study.sites) {
    std::vector<FaceRecord> tourist;
    std::vector<FaceRecord> local;
    for (std::size_t i : site.face_indices) {
      const auto& f = faces[i];
      auto it = classes.find({f.site_id, f.user_id});
      const bool is_local = it != classes.end() && it->second == UserClass::Local;
      (is_local ? local : tourist).push_back(f);
    }
    if (!tourist.empty()) out.tourists.push_back(summarize_place(site.site_id, tourist, cfg));
    if (!local.empty()) out.locals.push_back(summarize_place(site.site_id, local, cfg));
  }
  return out;
}

}  // namespace placemood
