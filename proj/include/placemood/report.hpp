#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "placemood/csv.hpp"
#include "placemood/error.hpp"
#include "placemood/pipeline.hpp"

namespace placemood::report {

using csv::format_double;

namespace detail {

inline std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::string size_str(std::size_t v) { return std::to_string(v); }

/// Reads every data row after an exact header check. Short or long rows are a
/// SchemaError naming the line.
inline std::vector<csv::Row> read_table(std::istream& in, const std::vector<std::string>& header,
                                        std::string_view kind) {
  csv::Reader reader(in);
  csv::expect_header(reader, header, kind);
  std::vector<csv::Row> rows;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    if (row->fields.size() != header.size()) {
      throw SchemaError(std::string(kind) + " line " + std::to_string(row->line) + ": expected " +
                        std::to_string(header.size()) + " fields, got " + std::to_string(row->fields.size()));
    }
    rows.push_back(std::move(*row));
  }
  return rows;
}

inline double num(const csv::Row& row, std::size_t i, std::string_view kind) {
  auto v = csv::parse_double(row.fields[i]);
  if (!v) {
    throw SchemaError(std::string(kind) + " line " + std::to_string(row.line) + ": '" + row.fields[i] +
                      "' is not a number");
  }
  return *v;
}

inline std::optional<double> opt_num(const csv::Row& row, std::size_t i, std::string_view kind) {
  if (row.fields[i].empty()) return std::nullopt;
  return num(row, i, kind);
}

inline std::size_t count(const csv::Row& row, std::size_t i, std::string_view kind) {
  auto v = csv::parse_int(row.fields[i]);
  if (!v || *v < 0) {
    throw SchemaError(std::string(kind) + " line " + std::to_string(row.line) + ": '" + row.fields[i] +
                      "' is not a count");
  }
  return static_cast<std::size_t>(*v);
}

inline std::string sibling_path(const std::filesystem::path& path, std::string_view suffix) {
  auto stem = path.stem().string();
  auto ext = path.extension().string();
  return (path.parent_path() / (stem + std::string(suffix) + (ext.empty() ? ".csv" : ext))).string();
}

}  // namespace detail

/// Writes through a temporary file in the same directory, then renames it over
/// `path`, so readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// ranking.csv

inline const std::vector<std::string> kRankingColumns = {
    "rank",       "site_id",      "name",         "index",       "value",       "joy_index",  "ahi",
    "n_faces",    "n_smiling",    "n_nonsmiling", "joy_ci_low",  "joy_ci_high", "ahi_ci_low", "ahi_ci_high"};

struct RankingTable {
  EmotionIndex index = EmotionIndex::Joy;
  std::vector<RankingEntry> entries;
};

inline void write_ranking(std::ostream& out, const RankingTable& table) {
  csv::write_row(out, kRankingColumns);
  for (const auto& e : table.entries) {
    const auto& s = e.summary;
    csv::write_row(out, {detail::size_str(e.rank), e.site_id, e.name, std::string(to_string(table.index)),
                         format_double(index_value(s, table.index)), format_double(s.joy_index),
                         format_double(s.ahi), detail::size_str(s.n_faces), detail::size_str(s.n_smiling),
                         detail::size_str(s.n_nonsmiling), format_double(s.joy_ci.low),
                         format_double(s.joy_ci.high), format_double(s.ahi_ci.low), format_double(s.ahi_ci.high)});
  }
}

inline RankingTable read_ranking(std::istream& in) {
  constexpr std::string_view kind = "ranking.csv";
  RankingTable table;
  bool first = true;
  for (const auto& row : detail::read_table(in, kRankingColumns, kind)) {
    const auto index = parse_index(row.fields[3]);
    if (!first && index != table.index) throw SchemaError("ranking.csv mixes joy and ahi rows");
    table.index = index;
    first = false;
    RankingEntry e;
    e.rank = detail::count(row, 0, kind);
    e.site_id = row.fields[1];
    e.name = row.fields[2];
    auto& s = e.summary;
    s.site_id = e.site_id;
    s.joy_index = detail::num(row, 5, kind);
    s.ahi = detail::num(row, 6, kind);
    s.n_faces = detail::count(row, 7, kind);
    s.n_smiling = detail::count(row, 8, kind);
    s.n_nonsmiling = detail::count(row, 9, kind);
    s.joy_ci = {detail::num(row, 10, kind), detail::num(row, 11, kind)};
    s.ahi_ci = {detail::num(row, 12, kind), detail::num(row, 13, kind)};
    table.entries.push_back(std::move(e));
  }
  return table;
}

/// site_id -> numeric `column` from any CSV with a header that has both columns.
/// Used to compare rankings produced elsewhere.
inline std::map<std::string, double> read_ranking_column(std::istream& in, std::string_view column) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw SchemaError("ranking file is empty");
  std::optional<std::size_t> id_col;
  std::optional<std::size_t> value_col;
  for (std::size_t i = 0; i < header->fields.size(); ++i) {
    if (header->fields[i] == "site_id") id_col = i;
    if (header->fields[i] == column) value_col = i;
  }
  if (!id_col) throw SchemaError("ranking file: missing required column 'site_id'");
  if (!value_col) throw SchemaError("ranking file: missing column '" + std::string(column) + "'");
  std::map<std::string, double> out;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    if (row->fields.size() != header->fields.size()) {
      throw SchemaError("ranking file line " + std::to_string(row->line) + ": wrong field count");
    }
    const double v = detail::num(*row, *value_col, "ranking file");
    if (!out.emplace(row->fields[*id_col], v).second) {
      throw SchemaError("ranking file line " + std::to_string(row->line) + ": duplicate site_id " +
                        row->fields[*id_col]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// sensitivity.csv and its per-combo rankings

inline const std::vector<std::string> kSensitivityColumns = {
    "kind", "eps_m", "min_pts_pct", "min_pts_floor", "n_sites", "n_excluded", "n_judges", "value", "status"};

/// kind "combo": one grid cell, status "ok" or the failure. kind "w_joy", "w_ahi",
/// "w_combined": concordance over `n_sites` common sites and `n_judges` rankings.
struct SensitivityRow {
  std::string kind;
  std::optional<double> eps_m;
  std::optional<double> min_pts_pct;
  std::optional<std::size_t> min_pts_floor;
  std::size_t n_sites = 0;
  std::optional<std::size_t> n_excluded;
  std::optional<std::size_t> n_judges;
  std::optional<double> value;
  std::string status;

  friend bool operator==(const SensitivityRow&, const SensitivityRow&) = default;
};

inline std::vector<SensitivityRow> sensitivity_rows(const SensitivityReport& report) {
  std::vector<SensitivityRow> rows;
  for (const auto& c : report.combos) {
    SensitivityRow r;
    r.kind = "combo";
    r.eps_m = c.params.eps_m;
    r.min_pts_pct = c.params.min_pts_pct;
    r.min_pts_floor = c.params.min_pts_floor;
    if (c.study) {
      r.n_sites = c.study->sites.size();
      r.n_excluded = c.study->excluded.size();
      r.status = "ok";
    } else {
      r.status = c.error;
    }
    rows.push_back(std::move(r));
  }
  const std::size_t judges = report.joy_ranks.judges();
  const std::size_t n = report.common_sites.size();
  rows.push_back({"w_joy", {}, {}, {}, n, {}, judges, report.w_joy, "ok"});
  rows.push_back({"w_ahi", {}, {}, {}, n, {}, judges, report.w_ahi, "ok"});
  rows.push_back({"w_combined", {}, {}, {}, n, {}, 2 * judges, report.w_combined, "ok"});
  return rows;
}

inline void write_sensitivity(std::ostream& out, const std::vector<SensitivityRow>& rows) {
  csv::write_row(out, kSensitivityColumns);
  auto opt_size = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; };
  for (const auto& r : rows) {
    csv::write_row(out, {r.kind, detail::opt_double(r.eps_m), detail::opt_double(r.min_pts_pct),
                         opt_size(r.min_pts_floor), detail::size_str(r.n_sites), opt_size(r.n_excluded),
                         opt_size(r.n_judges), detail::opt_double(r.value), r.status});
  }
}

inline std::vector<SensitivityRow> read_sensitivity(std::istream& in) {
  constexpr std::string_view kind = "sensitivity.csv";
  std::vector<SensitivityRow> rows;
  auto opt_count = [&](const csv::Row& row, std::size_t i) -> std::optional<std::size_t> {
    if (row.fields[i].empty()) return std::nullopt;
    return detail::count(row, i, kind);
  };
  for (const auto& row : detail::read_table(in, kSensitivityColumns, kind)) {
    SensitivityRow r;
    r.kind = row.fields[0];
    if (r.kind != "combo" && r.kind != "w_joy" && r.kind != "w_ahi" && r.kind != "w_combined") {
      throw SchemaError("sensitivity.csv line " + std::to_string(row.line) + ": unknown kind '" + r.kind + "'");
    }
    r.eps_m = detail::opt_num(row, 1, kind);
    r.min_pts_pct = detail::opt_num(row, 2, kind);
    r.min_pts_floor = opt_count(row, 3);
    r.n_sites = detail::count(row, 4, kind);
    r.n_excluded = opt_count(row, 5);
    r.n_judges = opt_count(row, 6);
    r.value = detail::opt_num(row, 7, kind);
    r.status = row.fields[8];
    rows.push_back(std::move(r));
  }
  return rows;
}

inline const std::vector<std::string> kComboRankingColumns = {"eps_m", "min_pts_pct", "index",
                                                              "rank",  "site_id",     "value"};

struct ComboRankingRow {
  double eps_m = 0.0;
  double min_pts_pct = 0.0;
  EmotionIndex index = EmotionIndex::Joy;
  std::size_t rank = 0;
  std::string site_id;
  double value = 0.0;

  friend bool operator==(const ComboRankingRow&, const ComboRankingRow&) = default;
};

/// Full joy and ahi rankings of every surviving combo.
inline std::vector<ComboRankingRow> combo_ranking_rows(const SensitivityReport& report) {
  std::vector<ComboRankingRow> rows;
  for (const auto& c : report.combos) {
    if (!c.study) continue;
    const auto summaries = c.study->summaries();
    for (auto index : {EmotionIndex::Joy, EmotionIndex::Ahi}) {
      for (const auto& e : build_ranking(summaries, index)) {
        rows.push_back({c.params.eps_m, c.params.min_pts_pct, index, e.rank, e.site_id, index_value(e.summary, index)});
      }
    }
  }
  return rows;
}

inline void write_combo_rankings(std::ostream& out, const std::vector<ComboRankingRow>& rows) {
  csv::write_row(out, kComboRankingColumns);
  for (const auto& r : rows) {
    csv::write_row(out, {format_double(r.eps_m), format_double(r.min_pts_pct), std::string(to_string(r.index)),
                         detail::size_str(r.rank), r.site_id, format_double(r.value)});
  }
}

inline std::vector<ComboRankingRow> read_combo_rankings(std::istream& in) {
  constexpr std::string_view kind = "sensitivity rankings";
  std::vector<ComboRankingRow> rows;
  for (const auto& row : detail::read_table(in, kComboRankingColumns, kind)) {
    rows.push_back({detail::num(row, 0, kind), detail::num(row, 1, kind), parse_index(row.fields[2]),
                    detail::count(row, 3, kind), row.fields[4], detail::num(row, 5, kind)});
  }
  return rows;
}

inline std::string combo_rankings_path(const std::filesystem::path& sensitivity_csv) {
  return detail::sibling_path(sensitivity_csv, "_rankings");
}

// ---------------------------------------------------------------------------
// regression.csv

inline const std::vector<std::string> kRegressionColumns = {
    "index", "kind", "term", "level", "estimate", "std_error", "t_value", "p_value", "stars", "note"};

/// kind "correlation": screen entry (term = factor). kind "coefficient": OLS term;
/// reference levels appear with an empty estimate and note "reference".
/// kind "fit": r_squared, f_statistic (p_value set), n_sites.
struct RegressionRow {
  std::string index;
  std::string kind;
  std::string term;
  std::string level;
  std::optional<double> estimate;
  std::optional<double> std_error;
  std::optional<double> t_value;
  std::optional<double> p_value;
  std::string stars;
  std::string note;

  friend bool operator==(const RegressionRow&, const RegressionRow&) = default;
};

inline std::vector<RegressionRow> regression_rows(const RegressionStudy& study) {
  std::vector<RegressionRow> rows;
  auto finite = [](double v) -> std::optional<double> {
    if (std::isnan(v)) return std::nullopt;
    return v;
  };
  for (const auto* r : {&study.joy, &study.ahi}) {
    const std::string index(to_string(r->index));
    for (const auto& s : r->screen) {
      rows.push_back({index, "correlation", s.factor, s.level, s.coefficient, {}, {}, {}, "", s.note});
    }
    for (const auto& c : r->fit.coefficients) {
      std::string term = c.name;
      std::string level;
      if (auto eq = term.find('='); eq != std::string::npos) {
        level = term.substr(eq + 1);
        term.resize(eq);
      }
      rows.push_back({index, "coefficient", term, level, c.estimate, finite(c.std_error), finite(c.t_value),
                      finite(c.p_value), stats::significance_stars(c.p_value), ""});
    }
    for (const auto& [factor, level] : r->fit.references) {
      rows.push_back({index, "coefficient", factor, level, {}, {}, {}, {}, "", "reference"});
    }
    rows.push_back({index, "fit", "r_squared", "", r->fit.r_squared, {}, {}, {}, "", ""});
    rows.push_back({index, "fit", "f_statistic", "", finite(r->fit.f_statistic), {}, {}, finite(r->fit.f_p_value),
                    stats::significance_stars(r->fit.f_p_value), ""});
    rows.push_back({index, "fit", "n_sites", "", static_cast<double>(study.site_ids.size()), {}, {}, {}, "", ""});
  }
  return rows;
}

inline void write_regression(std::ostream& out, const std::vector<RegressionRow>& rows) {
  csv::write_row(out, kRegressionColumns);
  for (const auto& r : rows) {
    csv::write_row(out, {r.index, r.kind, r.term, r.level, detail::opt_double(r.estimate),
                         detail::opt_double(r.std_error), detail::opt_double(r.t_value),
                         detail::opt_double(r.p_value), r.stars, r.note});
  }
}

inline std::vector<RegressionRow> read_regression(std::istream& in) {
  constexpr std::string_view kind = "regression.csv";
  std::vector<RegressionRow> rows;
  for (const auto& row : detail::read_table(in, kRegressionColumns, kind)) {
    rows.push_back({row.fields[0], row.fields[1], row.fields[2], row.fields[3], detail::opt_num(row, 4, kind),
                    detail::opt_num(row, 5, kind), detail::opt_num(row, 6, kind), detail::opt_num(row, 7, kind),
                    row.fields[8], row.fields[9]});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// stability.csv

inline const std::vector<std::string> kStabilityColumns = {
    "kind", "index", "site_id", "n_faces", "ci_width", "exponent", "scale", "r_squared", "note"};

struct StabilityRow {
  std::string kind;  // "point" or "fit"
  std::string index;
  std::string site_id;
  std::optional<std::size_t> n_faces;
  std::optional<double> ci_width;
  std::optional<double> exponent;
  std::optional<double> scale;
  std::optional<double> r_squared;
  std::string note;

  friend bool operator==(const StabilityRow&, const StabilityRow&) = default;
};

inline std::vector<StabilityRow> stability_rows(const StabilityCurve& curve) {
  std::vector<StabilityRow> rows;
  for (const auto* s : {&curve.joy, &curve.ahi}) {
    const std::string index(to_string(s->index));
    for (const auto& p : s->points) rows.push_back({"point", index, p.site_id, p.n_faces, p.ci_width, {}, {}, {}, ""});
    StabilityRow fit{"fit", index, "", {}, {}, {}, {}, {}, s->note};
    if (s->fit) {
      fit.n_faces = s->fit->n_points;
      fit.exponent = s->fit->exponent;
      fit.scale = s->fit->scale;
      fit.r_squared = s->fit->r_squared;
    }
    rows.push_back(std::move(fit));
  }
  return rows;
}

inline void write_stability(std::ostream& out, const std::vector<StabilityRow>& rows) {
  csv::write_row(out, kStabilityColumns);
  for (const auto& r : rows) {
    csv::write_row(out, {r.kind, r.index, r.site_id, r.n_faces ? std::to_string(*r.n_faces) : "",
                         detail::opt_double(r.ci_width), detail::opt_double(r.exponent),
                         detail::opt_double(r.scale), detail::opt_double(r.r_squared), r.note});
  }
}

inline std::vector<StabilityRow> read_stability(std::istream& in) {
  constexpr std::string_view kind = "stability.csv";
  std::vector<StabilityRow> rows;
  for (const auto& row : detail::read_table(in, kStabilityColumns, kind)) {
    StabilityRow r{row.fields[0], row.fields[1], row.fields[2], {}, {}, {}, {}, {}, row.fields[8]};
    if (!row.fields[3].empty()) r.n_faces = detail::count(row, 3, kind);
    r.ci_width = detail::opt_num(row, 4, kind);
    r.exponent = detail::opt_num(row, 5, kind);
    r.scale = detail::opt_num(row, 6, kind);
    r.r_squared = detail::opt_num(row, 7, kind);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// tags_<site>.csv

inline const std::vector<std::string> kTagColumns = {"rank", "tag", "count"};

using TagCounts = std::vector<std::pair<std::string, std::size_t>>;

inline void write_tags(std::ostream& out, const TagCounts& tags) {
  csv::write_row(out, kTagColumns);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    csv::write_row(out, {std::to_string(i + 1), tags[i].first, std::to_string(tags[i].second)});
  }
}

inline TagCounts read_tags(std::istream& in) {
  constexpr std::string_view kind = "tags csv";
  TagCounts out;
  for (const auto& row : detail::read_table(in, kTagColumns, kind)) {
    if (detail::count(row, 0, kind) != out.size() + 1) {
      throw SchemaError("tags csv line " + std::to_string(row.line) + ": ranks must run 1..k");
    }
    out.emplace_back(row.fields[1], detail::count(row, 2, kind));
  }
  return out;
}

inline std::string tags_file_name(std::string_view site_id) {
  std::string safe;
  for (char c : site_id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    safe.push_back(ok ? c : '_');
  }
  return "tags_" + safe + ".csv";
}

// ---------------------------------------------------------------------------
// cohorts.csv

inline const std::vector<std::string> kCohortColumns = {
    "kind",       "site_id",   "n_tourist_faces", "n_local_faces", "tourist_ahi", "local_ahi",
    "ahi_delta",  "tourist_joy", "local_joy",     "joy_delta",     "note"};

/// kind "site": one compared site. "excluded": a site lacking a cohort.
/// "mean_abs": cross-site mean absolute deltas.
struct CohortRow {
  std::string kind;
  std::string site_id;
  std::optional<std::size_t> n_tourist_faces;
  std::optional<std::size_t> n_local_faces;
  std::optional<double> tourist_ahi;
  std::optional<double> local_ahi;
  std::optional<double> ahi_delta;
  std::optional<double> tourist_joy;
  std::optional<double> local_joy;
  std::optional<double> joy_delta;
  std::string note;

  friend bool operator==(const CohortRow&, const CohortRow&) = default;
};

inline std::vector<CohortRow> cohort_rows(const CohortComparison& cmp) {
  std::vector<CohortRow> rows;
  for (const auto& d : cmp.sites) {
    rows.push_back({"site", d.site_id, d.tourist.n_faces, d.local.n_faces, d.tourist.ahi, d.local.ahi, d.ahi_delta,
                    d.tourist.joy_index, d.local.joy_index, d.joy_delta, ""});
  }
  for (const auto& e : cmp.excluded) {
    rows.push_back({"excluded", e.site_id, {}, {}, {}, {}, {}, {}, {}, {}, e.reason});
  }
  CohortRow mean{"mean_abs", "", {}, {}, {}, {}, {}, {}, {}, {}, ""};
  if (cmp.sites.empty()) {
    mean.note = "no site has both cohorts";
  } else {
    mean.ahi_delta = cmp.mean_abs_ahi_delta;
    mean.joy_delta = cmp.mean_abs_joy_delta;
  }
  rows.push_back(std::move(mean));
  return rows;
}

inline void write_cohorts(std::ostream& out, const std::vector<CohortRow>& rows) {
  csv::write_row(out, kCohortColumns);
  auto opt_size = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; };
  for (const auto& r : rows) {
    csv::write_row(out, {r.kind, r.site_id, opt_size(r.n_tourist_faces), opt_size(r.n_local_faces),
                         detail::opt_double(r.tourist_ahi), detail::opt_double(r.local_ahi),
                         detail::opt_double(r.ahi_delta), detail::opt_double(r.tourist_joy),
                         detail::opt_double(r.local_joy), detail::opt_double(r.joy_delta), r.note});
  }
}

inline std::vector<CohortRow> read_cohorts(std::istream& in) {
  constexpr std::string_view kind = "cohorts.csv";
  std::vector<CohortRow> rows;
  auto opt_count = [&](const csv::Row& row, std::size_t i) -> std::optional<std::size_t> {
    if (row.fields[i].empty()) return std::nullopt;
    return detail::count(row, i, kind);
  };
  for (const auto& row : detail::read_table(in, kCohortColumns, kind)) {
    rows.push_back({row.fields[0], row.fields[1], opt_count(row, 2), opt_count(row, 3), detail::opt_num(row, 4, kind),
                    detail::opt_num(row, 5, kind), detail::opt_num(row, 6, kind), detail::opt_num(row, 7, kind),
                    detail::opt_num(row, 8, kind), detail::opt_num(row, 9, kind), row.fields[10]});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// GeoJSON footprints. Coordinates are [lon, lat] with closed rings.

struct PlaceFeature {
  std::string site_id;
  std::string name;
  std::vector<FootprintPolygon> footprint;
  std::size_t n_member_points = 0;
  ClusterParams params_used;

  friend bool operator==(const PlaceFeature& a, const PlaceFeature& b) {
    if (a.site_id != b.site_id || a.name != b.name || a.n_member_points != b.n_member_points ||
        !(a.params_used == b.params_used) || a.footprint.size() != b.footprint.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.footprint.size(); ++i) {
      if (a.footprint[i].ring != b.footprint[i].ring) return false;
    }
    return true;
  }

  Place as_place() const {
    Place p;
    p.site_id = site_id;
    p.footprint = footprint;
    p.params_used = params_used;
    return p;
  }
};

inline PlaceFeature place_feature(const Place& place, std::string name) {
  return {place.site_id, std::move(name), place.footprint, place.member_points.size(), place.params_used};
}

inline nlohmann::json to_geojson(const std::vector<PlaceFeature>& places) {
  using nlohmann::json;
  json features = json::array();
  for (const auto& p : places) {
    json polygons = json::array();
    for (const auto& poly : p.footprint) {
      json ring = json::array();
      for (const auto& v : poly.ring) ring.push_back({v.lon, v.lat});
      if (!poly.ring.empty()) ring.push_back({poly.ring.front().lon, poly.ring.front().lat});
      polygons.push_back(json::array({ring}));
    }
    json params = {{"eps_m", p.params_used.eps_m},
                   {"min_pts_pct", p.params_used.min_pts_pct},
                   {"min_pts_floor", p.params_used.min_pts_floor}};
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "MultiPolygon"}, {"coordinates", polygons}}},
                        {"properties",
                         {{"site_id", p.site_id},
                          {"name", p.name},
                          {"n_polygons", p.footprint.size()},
                          {"n_member_points", p.n_member_points},
                          {"params_used", params}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

inline void write_geojson(std::ostream& out, const std::vector<PlaceFeature>& places) {
  out << to_geojson(places).dump(1) << '\n';
}

inline std::vector<PlaceFeature> from_geojson(const nlohmann::json& doc) {
  std::vector<PlaceFeature> out;
  try {
    if (doc.at("type") != "FeatureCollection") throw SchemaError("GeoJSON root is not a FeatureCollection");
    for (const auto& f : doc.at("features")) {
      const auto& props = f.at("properties");
      const auto& params = props.at("params_used");
      PlaceFeature p;
      p.site_id = props.at("site_id").get<std::string>();
      p.name = props.at("name").get<std::string>();
      p.n_member_points = props.at("n_member_points").get<std::size_t>();
      p.params_used = {params.at("eps_m").get<double>(), params.at("min_pts_pct").get<double>(),
                       params.at("min_pts_floor").get<std::size_t>()};
      const auto& geom = f.at("geometry");
      if (geom.at("type") != "MultiPolygon") throw SchemaError("feature " + p.site_id + " is not a MultiPolygon");
      for (const auto& polygon : geom.at("coordinates")) {
        if (polygon.size() != 1) throw SchemaError("feature " + p.site_id + " has a polygon with holes");
        const auto& ring = polygon.at(0);
        FootprintPolygon poly;
        for (const auto& c : ring) poly.ring.push_back({c.at(1).get<double>(), c.at(0).get<double>()});
        if (poly.ring.size() < 4 || !(poly.ring.front() == poly.ring.back())) {
          throw SchemaError("feature " + p.site_id + " has an unclosed or short ring");
        }
        poly.ring.pop_back();
        p.footprint.push_back(std::move(poly));
      }
      if (props.at("n_polygons").get<std::size_t>() != p.footprint.size()) {
        throw SchemaError("feature " + p.site_id + ": n_polygons disagrees with its geometry");
      }
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed GeoJSON: ") + e.what());
  }
  return out;
}

inline std::vector<PlaceFeature> read_geojson(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed GeoJSON: ") + e.what());
  }
  return from_geojson(doc);
}

}  // namespace placemood::report
