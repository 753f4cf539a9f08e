#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "placemood/config.hpp"
#include "placemood/error.hpp"
#include "placemood/ingest.hpp"
#include "placemood/pipeline.hpp"
#include "placemood/report.hpp"
#include "placemood/synth.hpp"

namespace placemood::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kStudyError = 3 };

namespace detail {

/// Flags shared by the study subcommands. Unset flags fall back to the config.
struct StudyFlags {
  std::optional<std::string> faces;
  std::optional<std::string> photos;
  std::optional<std::string> sites;
  std::optional<std::string> out;
  std::optional<std::string> out_dir;
  std::vector<double> eps;
  std::vector<double> pct;
  std::optional<std::size_t> floor;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> resamples;
  std::optional<double> confidence;
  std::optional<double> max_reject;
  std::vector<std::string> references;
};

inline void add_input_flags(CLI::App* cmd, StudyFlags& f) {
  cmd->add_option("--faces", f.faces, "faces.csv");
  cmd->add_option("--photos", f.photos, "photos.csv (optional; construction points and visitor timelines)");
  cmd->add_option("--sites", f.sites, "sites.csv");
  cmd->add_option("--max-reject", f.max_reject, "abort when more than this share of rows is invalid");
}

inline void add_study_flags(CLI::App* cmd, StudyFlags& f) {
  add_input_flags(cmd, f);
  cmd->add_option("--out", f.out, "output file");
  cmd->add_option("--out-dir", f.out_dir, "directory for outputs without an explicit path");
  cmd->add_option("--eps", f.eps, "DBSCAN radius in meters (list; single runs use the first)")->delimiter(',');
  cmd->add_option("--pct", f.pct, "min_pts share of site photos (list; single runs use the first)")->delimiter(',');
  cmd->add_option("--floor", f.floor, "min_pts floor");
  cmd->add_option("--seed", f.seed, "bootstrap seed");
  cmd->add_option("--resamples", f.resamples, "bootstrap resamples");
  cmd->add_option("--confidence", f.confidence, "bootstrap confidence level");
  cmd->add_option("--reference", f.references, "reference level, factor=level (repeatable)");
}

inline StudyConfig merged_config(const std::optional<std::string>& config_path, const StudyFlags& f) {
  StudyConfig cfg = resolve_config(config_path);
  if (f.faces) cfg.faces = *f.faces;
  if (f.photos) cfg.photos = *f.photos;
  if (f.sites) cfg.sites = *f.sites;
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (!f.eps.empty()) cfg.eps_m = f.eps;
  if (!f.pct.empty()) cfg.min_pts_pct = f.pct;
  if (f.floor) cfg.min_pts_floor = *f.floor;
  if (f.seed) cfg.bootstrap.seed = *f.seed;
  if (f.resamples) cfg.bootstrap.n_resamples = *f.resamples;
  if (f.confidence) cfg.bootstrap.confidence = *f.confidence;
  if (f.max_reject) cfg.max_reject_fraction = *f.max_reject;
  for (const auto& r : f.references) {
    const auto eq = r.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--reference expects factor=level, got '" + r + "'");
    apply_setting(cfg, "reference." + r.substr(0, eq), r.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

inline std::string output_path(const StudyFlags& f, const StudyConfig& cfg, std::string_view default_name) {
  if (f.out) return *f.out;
  return (std::filesystem::path(cfg.out_dir.empty() ? "." : cfg.out_dir) / default_name).string();
}

inline std::ifstream open_input(const std::string& path, std::string_view what) {
  if (path.empty()) throw std::invalid_argument("missing input: " + std::string(what));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + std::string(what) + " file " + path);
  return in;
}

inline void report_rejects(std::ostream& err, std::string_view file, const std::vector<Diagnostic>& rejected,
                           std::string_view what = "line") {
  constexpr std::size_t kShown = 20;
  for (std::size_t i = 0; i < rejected.size() && i < kShown; ++i) {
    err << file << ' ' << what << ' ' << rejected[i].line << ": " << rejected[i].message << '\n';
  }
  if (rejected.size() > kShown) err << file << ": " << rejected.size() - kShown << " more rejected\n";
}

struct Inputs {
  std::vector<SiteRecord> sites;
  std::vector<PhotoRecord> photos;
  std::vector<FaceRecord> faces;

  StudyInput study() const { return {sites, photos, faces}; }
};

/// Parses the configured files, then drops records outside their site's harvest
/// radius (or naming an unknown site). Every rejection goes to `err`.
inline Inputs load_inputs(const StudyConfig& cfg, std::ostream& err, bool need_faces, bool need_sites = true) {
  Inputs in;
  const ParseOptions opts{cfg.max_reject_fraction};
  if (need_sites || !cfg.sites.empty()) {
    auto s = open_input(cfg.sites, "sites");
    in.sites = parse_sites(s);
  }
  if (!cfg.photos.empty()) {
    auto s = open_input(cfg.photos, "photos");
    auto parsed = parse_photos(s, opts);
    report_rejects(err, cfg.photos, parsed.rejected);
    if (!in.sites.empty()) {
      auto kept = apply_harvest_radius(std::move(parsed.records), in.sites);
      report_rejects(err, cfg.photos, kept.rejected, "record");
      parsed.records = std::move(kept.records);
    }
    in.photos = std::move(parsed.records);
  }
  if (need_faces || !cfg.faces.empty()) {
    auto s = open_input(cfg.faces, "faces");
    auto parsed = parse_faces(s, opts);
    report_rejects(err, cfg.faces, parsed.rejected);
    if (!in.sites.empty()) {
      auto kept = apply_harvest_radius(std::move(parsed.records), in.sites);
      report_rejects(err, cfg.faces, kept.rejected, "record");
      parsed.records = std::move(kept.records);
    }
    in.faces = std::move(parsed.records);
  }
  return in;
}

inline void report_exclusions(std::ostream& err, const std::vector<Exclusion>& excluded, std::string_view prefix = "") {
  for (const auto& e : excluded) err << prefix << "excluded " << e.site_id << ": " << e.reason << '\n';
}

}  // namespace detail

/// Runs one subcommand. Data goes to files (compare-rankings prints its
/// coefficient on `out`); diagnostics go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Place emotion studies from geotagged photos and face scores", "placemood"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, std::string("flat key = value config file (default: $") + kConfigEnvVar + ")");

  std::function<void()> action;
  detail::StudyFlags f;

  auto* validate = app.add_subcommand("validate", "parse and validate input files");
  detail::add_input_flags(validate, f);
  validate->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      if (cfg.sites.empty() && cfg.photos.empty() && cfg.faces.empty()) {
        throw std::invalid_argument("validate needs at least one of --sites, --photos, --faces");
      }
      const auto in = detail::load_inputs(cfg, err, false, false);
      err << "sites: " << in.sites.size() << ", photos: " << in.photos.size() << ", faces: " << in.faces.size()
          << '\n';
    };
  });

  std::string synth_dir;
  std::optional<std::string> synth_spec;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset (default: the 20-site golden fixture)");
  synth->add_option("--out-dir", synth_dir, "directory for sites.csv, photos.csv, faces.csv")->required();
  synth->add_option("--spec", synth_spec, "JSON generator spec");
  synth->add_option("--seed", synth_seed, "generator seed (overrides the spec)");
  synth->callback([&] {
    action = [&] {
      SynthSpec spec = golden_fixture_spec();
      if (synth_spec) {
        auto in = detail::open_input(*synth_spec, "spec");
        try {
          spec = nlohmann::json::parse(in).get<SynthSpec>();
        } catch (const nlohmann::json::exception& e) {
          throw SchemaError(std::string("synth spec: ") + e.what());
        }
      }
      if (synth_seed) spec.seed = *synth_seed;
      const auto data = synth_dataset(spec);
      const std::filesystem::path dir(synth_dir);
      report::write_file_atomic(dir / "sites.csv", [&](std::ostream& o) { write_sites(o, data.sites); });
      report::write_file_atomic(dir / "photos.csv", [&](std::ostream& o) { write_photos(o, data.photos); });
      report::write_file_atomic(dir / "faces.csv", [&](std::ostream& o) { write_faces(o, data.faces); });
      report::write_file_atomic(dir / "synth_spec.json",
                                [&](std::ostream& o) { o << nlohmann::json(spec).dump(1) << '\n'; });
      err << "wrote " << data.sites.size() << " sites, " << data.photos.size() << " photos, " << data.faces.size()
          << " faces to " << dir.string() << '\n';
    };
  });

  StubScorer::Options stub;
  ScoringOptions scoring;
  auto* score = app.add_subcommand("score", "score photos with the deterministic stub scorer");
  detail::add_input_flags(score, f);
  score->add_option("--out", f.out, "faces.csv to write");
  score->add_option("--out-dir", f.out_dir, "directory for faces.csv");
  score->add_option("--seed", stub.seed, "stub scorer seed");
  score->add_option("--face-probability", stub.face_probability, "share of photos with faces");
  score->add_option("--happiness-mean", stub.happiness_mean, "mean latent positivity");
  score->add_option("--max-in-flight", scoring.max_in_flight, "concurrent scorer requests");
  score->add_option("--max-failures", scoring.max_failure_fraction, "abort above this failed-photo share");
  score->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      if (cfg.photos.empty()) throw std::invalid_argument("score needs --photos");
      cfg.faces.clear();
      const auto in = detail::load_inputs(cfg, err, false, false);
      StubScorer scorer(stub);
      const auto result = score_photos(in.photos, scorer, scoring);
      for (const auto& [photo, why] : result.failures) err << "scoring failed for " << photo << ": " << why << '\n';
      const auto path = detail::output_path(f, cfg, "faces.csv");
      report::write_file_atomic(path, [&](std::ostream& o) { write_faces(o, result.faces); });
      err << result.faces.size() << " faces from " << in.photos.size() << " photos\n";
    };
  });

  auto* places = app.add_subcommand("places", "construct footprints and export them as GeoJSON");
  detail::add_study_flags(places, f);
  places->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      const bool use_photos = !cfg.photos.empty();
      const auto in = detail::load_inputs(cfg, err, !use_photos);
      const auto params = cfg.cluster_params();
      const auto names = site_names(in.sites);
      std::map<std::string, std::vector<GeoPoint>> points;
      if (use_photos) {
        for (const auto& p : in.photos) points[p.site_id].push_back(p.location);
      } else {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& x : in.faces) {
          if (seen.emplace(x.site_id, x.photo_id).second) points[x.site_id].push_back(x.location);
        }
      }
      std::vector<report::PlaceFeature> features;
      for (const auto& site : in.sites) {
        try {
          features.push_back(
              report::place_feature(construct_place(site.site_id, points[site.site_id], params), site.name));
        } catch (const StudyError& e) {
          err << "excluded " << site.site_id << ": " << e.what() << '\n';
        }
      }
      const auto path = detail::output_path(f, cfg, "places.geojson");
      report::write_file_atomic(path, [&](std::ostream& o) { report::write_geojson(o, features); });
    };
  });

  std::string index_name = "joy";
  auto* rank = app.add_subcommand("rank", "rank sites by the joy index or AHI");
  detail::add_study_flags(rank, f);
  rank->add_option("--index", index_name, "joy or ahi")->check(CLI::IsMember({"joy", "ahi"}));
  rank->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      const auto in = detail::load_inputs(cfg, err, true);
      const auto study = run_study(in.study(), cfg.cluster_params(), cfg.bootstrap);
      detail::report_exclusions(err, study.excluded);
      const auto index = parse_index(index_name);
      const auto summaries = study.summaries();
      report::RankingTable table{index, build_ranking(summaries, index, site_names(in.sites))};
      const auto path = detail::output_path(f, cfg, "ranking.csv");
      report::write_file_atomic(path, [&](std::ostream& o) { report::write_ranking(o, table); });
    };
  });

  auto* sensitivity = app.add_subcommand("sensitivity", "rank agreement across the (eps, pct) grid");
  detail::add_study_flags(sensitivity, f);
  sensitivity->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      const auto in = detail::load_inputs(cfg, err, true);
      const auto rep = sensitivity_grid(in.study(), cfg.eps_m, cfg.min_pts_pct, cfg.min_pts_floor, cfg.bootstrap);
      for (const auto& c : rep.combos) {
        const std::string tag = "[eps=" + csv::format_double(c.params.eps_m) +
                                " pct=" + csv::format_double(c.params.min_pts_pct) + "] ";
        if (c.study) {
          detail::report_exclusions(err, c.study->excluded, tag);
        } else {
          err << tag << c.error << '\n';
        }
      }
      const auto path = detail::output_path(f, cfg, "sensitivity.csv");
      report::write_file_atomic(path, [&](std::ostream& o) { report::write_sensitivity(o, report::sensitivity_rows(rep)); });
      report::write_file_atomic(report::combo_rankings_path(path), [&](std::ostream& o) {
        report::write_combo_rankings(o, report::combo_ranking_rows(rep));
      });
      err << "W joy " << csv::format_double(rep.w_joy) << ", ahi " << csv::format_double(rep.w_ahi) << ", combined "
          << csv::format_double(rep.w_combined) << " over " << rep.common_sites.size() << " sites\n";
    };
  });

  auto* regress = app.add_subcommand("regress", "correlation screen and OLS of both indices on site factors");
  detail::add_study_flags(regress, f);
  regress->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      const auto in = detail::load_inputs(cfg, err, true);
      const auto study = run_study(in.study(), cfg.cluster_params(), cfg.bootstrap);
      detail::report_exclusions(err, study.excluded);
      std::vector<stats::FactorRow> factors;
      for (const auto& s : in.sites) factors.push_back(s.factors);
      const auto summaries = study.summaries();
      const auto result = regression_study(summaries, factors, cfg.references);
      const auto path = detail::output_path(f, cfg, "regression.csv");
      report::write_file_atomic(path, [&](std::ostream& o) { report::write_regression(o, report::regression_rows(result)); });
    };
  });

  auto* stability = app.add_subcommand("stability", "confidence-interval width against face count");
  detail::add_study_flags(stability, f);
  stability->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      const auto in = detail::load_inputs(cfg, err, true);
      const auto study = run_study(in.study(), cfg.cluster_params(), cfg.bootstrap);
      detail::report_exclusions(err, study.excluded);
      const auto summaries = study.summaries();
      const auto curve = stability_curve(summaries);
      for (const auto* s : {&curve.joy, &curve.ahi}) {
        if (!s->note.empty()) err << to_string(s->index) << ": " << s->note << '\n';
      }
      const auto path = detail::output_path(f, cfg, "stability.csv");
      report::write_file_atomic(path, [&](std::ostream& o) { report::write_stability(o, report::stability_rows(curve)); });
    };
  });

  std::string tag_site;
  std::size_t tag_k = 100;
  auto* tags = app.add_subcommand("tags", "most frequent photo tags of one site");
  detail::add_input_flags(tags, f);
  tags->add_option("--site", tag_site, "site_id")->required();
  tags->add_option("-k,--top", tag_k, "number of tags")->check(CLI::PositiveNumber);
  tags->add_option("--out", f.out, "output file (default tags_<site>.csv)");
  tags->add_option("--out-dir", f.out_dir, "output directory");
  tags->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      if (cfg.photos.empty()) throw std::invalid_argument("tags needs --photos");
      cfg.faces.clear();
      const auto in = detail::load_inputs(cfg, err, false, false);
      const auto counts = tag_frequencies(in.photos, tag_site, tag_k);
      const auto path = detail::output_path(f, cfg, report::tags_file_name(tag_site));
      report::write_file_atomic(path, [&](std::ostream& o) { report::write_tags(o, counts); });
    };
  });

  std::string rank_a;
  std::string rank_b;
  std::string rank_column = "rank";
  auto* compare = app.add_subcommand("compare-rankings", "Spearman correlation between two ranking files");
  compare->add_option("a", rank_a, "first ranking CSV")->required();
  compare->add_option("b", rank_b, "second ranking CSV")->required();
  compare->add_option("--column", rank_column, "numeric column to correlate (default rank)");
  compare->callback([&] {
    action = [&] {
      auto in_a = detail::open_input(rank_a, "ranking");
      auto in_b = detail::open_input(rank_b, "ranking");
      const auto a = report::read_ranking_column(in_a, rank_column);
      const auto b = report::read_ranking_column(in_b, rank_column);
      std::vector<double> x;
      std::vector<double> y;
      for (const auto& [site, v] : a) {
        auto it = b.find(site);
        if (it == b.end()) {
          err << site << " only in " << rank_a << '\n';
          continue;
        }
        x.push_back(v);
        y.push_back(it->second);
      }
      for (const auto& [site, v] : b) {
        if (!a.count(site)) err << site << " only in " << rank_b << '\n';
      }
      const double rho = stats::spearman(x, y);
      out << "spearman " << std::fixed << std::setprecision(6) << rho << " n " << x.size() << '\n';
    };
  });

  auto* cohorts = app.add_subcommand("cohorts", "tourist versus local indices per site");
  detail::add_study_flags(cohorts, f);
  cohorts->callback([&] {
    action = [&] {
      auto cfg = detail::merged_config(config_path, f);
      const auto in = detail::load_inputs(cfg, err, true);
      const auto study = run_study(in.study(), cfg.cluster_params(), cfg.bootstrap);
      detail::report_exclusions(err, study.excluded);
      const auto split = in.photos.empty()
                             ? cohort_summaries<FaceRecord>(study, in.faces, in.faces, cfg.bootstrap)
                             : cohort_summaries<PhotoRecord>(study, in.faces, in.photos, cfg.bootstrap);
      const auto cmp = compare_cohorts(split.tourists, split.locals);
      detail::report_exclusions(err, cmp.excluded, "cohorts: ");
      const auto path = detail::output_path(f, cfg, "cohorts.csv");
      report::write_file_atomic(path, [&](std::ostream& o) { report::write_cohorts(o, report::cohort_rows(cmp)); });
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    action();
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const StudyError& e) {
    err << "error: " << e.what() << '\n';
    return kStudyError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace placemood::cli
