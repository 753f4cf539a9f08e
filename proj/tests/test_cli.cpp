#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "placemood/cli.hpp"

using namespace placemood;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "placemood");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ifstream open(const fs::path& p) { return std::ifstream(p, std::ios::binary); }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("placemood_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    auto spec = golden_fixture_spec(99);
    for (auto& s : spec.sites) s.n_photos = 300;
    data_ = synth_dataset(spec);
    std::ofstream(dir_ / "sites.csv") << [] {
      std::ostringstream o;
      write_sites(o, data_.sites);
      return o.str();
    }();
    std::ofstream photos(dir_ / "photos.csv");
    write_photos(photos, data_.photos);
    std::ofstream faces(dir_ / "faces.csv");
    write_faces(faces, data_.faces);
  }

  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::vector<std::string> inputs() {
    return {"--faces", (dir_ / "faces.csv").string(), "--photos", (dir_ / "photos.csv").string(), "--sites",
            (dir_ / "sites.csv").string()};
  }

  // study commands also get a smaller bootstrap
  static std::vector<std::string> with_inputs(std::vector<std::string> head, std::vector<std::string> tail = {}) {
    for (auto& a : inputs()) head.push_back(a);
    if (head[0] != "validate" && head[0] != "tags" && head[0] != "score") {
      head.push_back("--resamples");
      head.push_back("200");
    }
    for (auto& a : tail) head.push_back(a);
    return head;
  }

  static fs::path path(const std::string& name) { return dir_ / name; }

  static inline fs::path dir_;
  static inline SynthDataset data_;
};

}  // namespace

// ---------------------------------------------------------------------------
// usage

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(invoke({"rank", "--bogus"}).code, 1);
  EXPECT_EQ(invoke(with_inputs({"rank", "--index", "mood"})).code, 1);
  EXPECT_EQ(invoke(with_inputs({"rank", "--eps", "-5"})).code, 1);
  EXPECT_EQ(invoke(with_inputs({"rank", "--reference", "typeamusement"})).code, 1);
  const auto help = invoke({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("sensitivity"), std::string::npos);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(invoke({"rank", "--faces", path("missing.csv").string(), "--sites", path("sites.csv").string()}).code, 2);
  std::ofstream(path("bad_header.csv")) << "photo_id,oops\n";
  const auto r = invoke({"rank", "--faces", path("bad_header.csv").string(), "--sites", path("sites.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing required column"), std::string::npos) << r.err;

  std::ofstream(path("bad_sites.csv")) << slurp(path("sites.csv")) << "X1,Bad,1,1,,asia,C,open,urban,theme-park,absent,5,0.4\n";
  EXPECT_EQ(invoke({"validate", "--sites", path("bad_sites.csv").string()}).code, 2);
}

TEST_F(CliTest, StudyErrors) {
  // min_pts = every photo of the site within 1 m: no site forms a cluster
  const auto r = invoke(with_inputs({"rank", "--eps", "1", "--pct", "1.0", "--out", path("never.csv").string()}));
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_FALSE(fs::exists(path("never.csv")));
  EXPECT_EQ(invoke(with_inputs({"sensitivity", "--eps", "100", "--pct", "0.01", "--out", path("s1.csv").string()})).code,
            3);
}

TEST_F(CliTest, Validate) {
  const auto r = invoke(with_inputs({"validate"}));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("sites: 20"), std::string::npos) << r.err;
}

// ---------------------------------------------------------------------------
// study commands

TEST_F(CliTest, RankWritesDenseRanksDeterministically) {
  const auto a = path("rank_a.csv");
  const auto b = path("rank_b.csv");
  ASSERT_EQ(invoke(with_inputs({"rank", "--index", "ahi", "--seed", "7", "--out", a.string()})).code, 0);
  ASSERT_EQ(invoke(with_inputs({"rank", "--index", "ahi", "--seed", "7", "--out", b.string()})).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(fs::exists(a.string() + ".tmp"));

  auto in = open(a);
  const auto table = report::read_ranking(in);
  EXPECT_EQ(table.index, EmotionIndex::Ahi);
  ASSERT_EQ(table.entries.size(), 20u);
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    EXPECT_EQ(table.entries[i].rank, i + 1);
    if (i) {
      EXPECT_GE(table.entries[i - 1].summary.ahi, table.entries[i].summary.ahi);
    }
  }

  // the library route gives the same table
  const StudyInput input{data_.sites, data_.photos, data_.faces};
  const auto study = run_study(input, StudyConfig{}.cluster_params(), {200, 0.95, 7});
  const auto expected = build_ranking(study.summaries(), EmotionIndex::Ahi, site_names(data_.sites));
  ASSERT_EQ(expected.size(), table.entries.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(table.entries[i].site_id, expected[i].site_id);
    EXPECT_EQ(table.entries[i].name, expected[i].name);
    EXPECT_EQ(table.entries[i].summary, expected[i].summary);
  }

  ASSERT_EQ(invoke(with_inputs({"rank", "--index", "ahi", "--seed", "8", "--out", b.string()})).code, 0);
  EXPECT_NE(slurp(a), slurp(b));
}

TEST_F(CliTest, CompareRankings) {
  const auto a = path("cmp_a.csv");
  ASSERT_EQ(invoke(with_inputs({"rank", "--out", a.string()})).code, 0);
  const auto same = invoke({"compare-rankings", a.string(), a.string()});
  EXPECT_EQ(same.code, 0);
  EXPECT_EQ(same.out, "spearman 1.000000 n 20\n");

  const auto b = path("cmp_b.csv");
  ASSERT_EQ(invoke(with_inputs({"rank", "--index", "ahi", "--out", b.string()})).code, 0);
  const auto by_value = invoke({"compare-rankings", a.string(), b.string(), "--column", "ahi"});
  EXPECT_EQ(by_value.out, "spearman 1.000000 n 20\n");
  EXPECT_EQ(invoke({"compare-rankings", a.string(), b.string(), "--column", "nope"}).code, 2);

  std::ofstream(path("tiny.csv")) << "site_id,rank\nS01,1\nS99,2\n";
  const auto partial = invoke({"compare-rankings", path("tiny.csv").string(), a.string()});
  EXPECT_EQ(partial.code, 3);  // one shared site
  EXPECT_NE(partial.err.find("S99 only in"), std::string::npos);
}

TEST_F(CliTest, SensitivityFiles) {
  const auto out = path("sens.csv");
  const auto r = invoke(with_inputs({"sensitivity", "--eps", "100,200", "--pct", "0.01", "--out", out.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("W joy"), std::string::npos);
  auto in = open(out);
  const auto rows = report::read_sensitivity(in);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].kind, "combo");
  EXPECT_EQ(rows[0].eps_m, 100.0);
  EXPECT_EQ(rows[1].eps_m, 200.0);
  EXPECT_EQ(rows[4].kind, "w_combined");
  EXPECT_EQ(rows[4].n_judges, 4u);
  auto rin = open(report::combo_rankings_path(out));
  EXPECT_EQ(report::read_combo_rankings(rin).size(), 2u * 2u * 20u);
}

TEST_F(CliTest, PlacesGeoJsonAcceptsMembers) {
  const auto out = path("places.geojson");
  ASSERT_EQ(invoke(with_inputs({"places", "--out", out.string()})).code, 0);
  auto in = open(out);
  const auto features = report::read_geojson(in);
  const StudyInput input{data_.sites, data_.photos, data_.faces};
  const auto study = run_study(input, StudyConfig{}.cluster_params(), {200, 0.95, 0});
  ASSERT_EQ(features.size(), study.sites.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& place = study.sites[i].place;
    EXPECT_EQ(features[i], report::place_feature(place, study.sites[i].name));
    const FootprintTester tester(features[i].as_place());
    for (const auto& p : place.member_points) EXPECT_TRUE(tester.contains(p));
  }
}

TEST_F(CliTest, RegressStabilityTagsCohorts) {
  const auto reg = path("regression.csv");
  ASSERT_EQ(invoke(with_inputs({"regress", "--out", reg.string()})).code, 0);
  auto rin = open(reg);
  const auto rows = report::read_regression(rin);
  EXPECT_TRUE(std::any_of(rows.begin(), rows.end(), [](const auto& r) {
    return r.index == "ahi" && r.kind == "coefficient" && r.term == "type" && r.level == "amusement" &&
           r.note == "reference";
  }));

  const auto st = path("stability.csv");
  ASSERT_EQ(invoke(with_inputs({"stability", "--out", st.string()})).code, 0);
  auto sin = open(st);
  const auto srows = report::read_stability(sin);
  EXPECT_EQ(std::count_if(srows.begin(), srows.end(), [](const auto& r) { return r.kind == "point"; }), 40);

  ASSERT_EQ(invoke(with_inputs({"tags", "--site", "S02", "-k", "3", "--out-dir", dir_.string()})).code, 0);
  auto tin = open(path("tags_S02.csv"));
  const auto tags = report::read_tags(tin);
  ASSERT_EQ(tags.size(), 3u);
  EXPECT_EQ(tags, tag_frequencies(data_.photos, "S02", 3));

  const auto co = path("cohorts.csv");
  ASSERT_EQ(invoke(with_inputs({"cohorts", "--out", co.string()})).code, 0);
  auto cin = open(co);
  const auto crows = report::read_cohorts(cin);
  EXPECT_EQ(crows.back().kind, "mean_abs");
}

TEST_F(CliTest, ScoreAndSynth) {
  const auto faces = path("scored.csv");
  ASSERT_EQ(invoke({"score", "--photos", path("photos.csv").string(), "--seed", "4", "--max-in-flight", "4", "--out",
                 faces.string()})
                .code,
            0);
  auto in = open(faces);
  const auto parsed = parse_faces(in);
  EXPECT_GT(parsed.records.size(), 0u);
  EXPECT_TRUE(parsed.rejected.empty());

  std::ofstream(path("spec.json")) << R"({"seed": 3, "sites": [{"site_id": "Z1", "lat": 10, "lon": 20,
    "type": "amusement", "blobs": [{"sigma_m": 40}], "n_photos": 200}]})";
  const auto out_dir = path("synth_out");
  ASSERT_EQ(invoke({"synth", "--spec", path("spec.json").string(), "--out-dir", out_dir.string()}).code, 0);
  auto sites_in = open(out_dir / "sites.csv");
  const auto sites = parse_sites(sites_in);
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].factors.type, "amusement");
  auto photos_in = open(out_dir / "photos.csv");
  EXPECT_EQ(parse_photos(photos_in).records.size(), 200u);

  std::ofstream(path("bad_spec.json")) << R"({"sites": [{"lat": 1}]})";
  EXPECT_EQ(invoke({"synth", "--spec", path("bad_spec.json").string(), "--out-dir", out_dir.string()}).code, 2);
}

// ---------------------------------------------------------------------------
// configuration

TEST_F(CliTest, ConfigFileAndFlagOverride) {
  const auto conf = path("study.conf");
  std::ofstream(conf) << "# study\nseed = 7\nn_resamples = 200\nfaces = " << path("faces.csv").string()
                      << "\nphotos = " << path("photos.csv").string() << "\nsites = " << path("sites.csv").string()
                      << "\nout_dir = " << path("conf_out").string() << "\n";
  ASSERT_EQ(invoke({"--config", conf.string(), "rank", "--index", "ahi"}).code, 0);
  const auto from_conf = slurp(path("conf_out") / "ranking.csv");
  ASSERT_EQ(invoke(with_inputs({"rank", "--index", "ahi", "--seed", "7", "--out", path("flags.csv").string()})).code, 0);
  EXPECT_EQ(from_conf, slurp(path("flags.csv")));

  // a flag wins over the file
  ASSERT_EQ(invoke({"--config", conf.string(), "rank", "--index", "ahi", "--seed", "8", "--out",
                 path("override.csv").string()})
                .code,
            0);
  EXPECT_NE(from_conf, slurp(path("override.csv")));

  ::setenv(kConfigEnvVar, conf.string().c_str(), 1);
  const auto env = invoke({"rank", "--index", "ahi", "--out", path("env.csv").string()});
  ::unsetenv(kConfigEnvVar);
  ASSERT_EQ(env.code, 0) << env.err;
  EXPECT_EQ(from_conf, slurp(path("env.csv")));

  std::ofstream(path("bad.conf")) << "colour = blue\n";
  EXPECT_EQ(invoke({"--config", path("bad.conf").string(), "rank"}).code, 1);
}

TEST(Config, ParsesSettings) {
  StudyConfig cfg;
  std::istringstream in("eps_m = 50, 100\nmin_pts_pct=0.02\n\n# note\nreference.type = museum\nconfidence = 0.9\n");
  load_config(cfg, in);
  EXPECT_EQ(cfg.eps_m, (std::vector<double>{50, 100}));
  EXPECT_EQ(cfg.min_pts_pct, (std::vector<double>{0.02}));
  EXPECT_EQ(cfg.references.at("type"), "museum");
  EXPECT_EQ(cfg.bootstrap.confidence, 0.9);
  EXPECT_EQ(cfg.cluster_params().eps_m, 50.0);
  EXPECT_THROW(apply_setting(cfg, "nonsense", "1"), std::invalid_argument);
  EXPECT_THROW(apply_setting(cfg, "seed", "-1"), std::invalid_argument);
  std::istringstream no_eq("eps_m 50\n");
  EXPECT_THROW(load_config(cfg, no_eq), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// report round trips

TEST(Report, GeoJsonShape) {
  Place place;
  place.site_id = "S1";
  place.footprint = {{{make_geo_point(0, 0), make_geo_point(0, 0.01), make_geo_point(0.01, 0)}},
                     {{make_geo_point(1, 1), make_geo_point(1, 1.01), make_geo_point(1.01, 1)}}};
  place.member_points = {make_geo_point(0.001, 0.001)};
  place.params_used = {100, 0.01, 3};
  const auto doc = report::to_geojson({report::place_feature(place, "One")});
  ASSERT_EQ(doc["features"].size(), 1u);
  const auto& f = doc["features"][0];
  EXPECT_EQ(f["geometry"]["type"], "MultiPolygon");
  EXPECT_EQ(f["geometry"]["coordinates"].size(), 2u);
  const auto& ring = f["geometry"]["coordinates"][0][0];
  EXPECT_EQ(ring.size(), 4u);  // closed
  EXPECT_EQ(ring.front(), ring.back());
  EXPECT_EQ(ring[1][0].get<double>(), 0.01);  // lon first
  EXPECT_EQ(f["properties"]["n_polygons"], 2);
  EXPECT_EQ(f["properties"]["params_used"]["eps_m"], 100.0);
  EXPECT_EQ(report::from_geojson(doc), (std::vector<report::PlaceFeature>{report::place_feature(place, "One")}));
  EXPECT_EQ(report::to_geojson({})["features"].size(), 0u);
  EXPECT_THROW(report::from_geojson(nlohmann::json::parse(R"({"type": "Feature"})")), SchemaError);
}

TEST(Report, TablesRoundTrip) {
  std::vector<report::StabilityRow> st = {{"point", "joy", "S1", 12, 0.25, {}, {}, {}, ""},
                                          {"fit", "joy", "", {}, {}, -0.51, 3.2, 0.97, "1 zero-width site"}};
  std::stringstream s1;
  report::write_stability(s1, st);
  EXPECT_EQ(report::read_stability(s1), st);

  std::vector<report::RegressionRow> reg = {
      {"ahi", "coefficient", "type", "museum", -6.5, 1.25, -5.2, 1e-6, "**", ""},
      {"ahi", "coefficient", "type", "amusement", {}, {}, {}, {}, "", "reference"},
      {"joy", "correlation", "ndvi", "", 0.3, {}, {}, {}, "", ""}};
  std::stringstream s2;
  report::write_regression(s2, reg);
  EXPECT_EQ(report::read_regression(s2), reg);

  report::TagCounts tags = {{"has, comma", 3}, {"plain", 1}};
  std::stringstream s3;
  report::write_tags(s3, tags);
  EXPECT_EQ(report::read_tags(s3), tags);

  std::stringstream bad("rank,tag\n1,a\n");
  EXPECT_THROW(report::read_tags(bad), SchemaError);
}

// ---------------------------------------------------------------------------
// the installed binary

TEST(CliBinary, ExitCodes) {
  auto status = [](const std::string& args) {
    const int raw = std::system((std::string(PLACEMOOD_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status(""), 1);
  EXPECT_EQ(status("rank --faces /nonexistent/faces.csv --sites /nonexistent/sites.csv"), 2);
}
