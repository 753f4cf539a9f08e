#include <gtest/gtest.h>

#include <algorithm>

#include "placemood/affect.hpp"
#include "placemood/ingest.hpp"
#include "placemood/stats/correlation.hpp"

using namespace placemood;

namespace {

FaceRecord face(double smile, double threshold, double happiness) {
  FaceRecord f;
  f.photo_id = "p";
  f.face_id = "f";
  f.smile_value = smile;
  f.smile_threshold = threshold;
  f.emotion.happiness = happiness;
  f.emotion.neutral = 100.0 - happiness;
  return f;
}

std::vector<FaceRecord> counted(std::size_t smiling, std::size_t not_smiling, double happiness = 50.0) {
  std::vector<FaceRecord> out;
  for (std::size_t i = 0; i < smiling; ++i) out.push_back(face(80, 30, happiness));
  for (std::size_t i = 0; i < not_smiling; ++i) out.push_back(face(10, 30, happiness));
  return out;
}

/// Two site aggregates encoding the published top and bottom values: 1429 of 2000
/// smiling with mean happiness 63.72, and 511 of 2000 with 20.79.
std::vector<FaceRecord> published_site(std::size_t smiling, double mean_happiness) {
  auto faces = counted(smiling, 2000 - smiling);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    faces[i].emotion.happiness = mean_happiness + (i % 2 == 0 ? 10.0 : -10.0);
    faces[i].emotion.neutral = 100.0 - faces[i].emotion.happiness;
  }
  return faces;
}

stats::BootstrapConfig cfg(std::uint64_t seed = 1) { return {1000, 0.95, seed}; }

}  // namespace

TEST(Smile, StrictThreshold) {
  EXPECT_EQ(classify_smile(face(70, 50, 0)), Smile::Smiling);
  EXPECT_EQ(classify_smile(face(50, 50, 0)), Smile::NotSmiling);
  EXPECT_EQ(classify_smile(face(0, 50, 0)), Smile::NotSmiling);
  EXPECT_EQ(classify_smile(face(50.0001, 50, 0)), Smile::Smiling);
}

TEST(JoyIndex, Examples) {
  EXPECT_EQ(joy_index(counted(10, 10)), 0.0);
  EXPECT_NEAR(joy_index(counted(143, 57)), 0.43, 1e-12);
  EXPECT_EQ(joy_index(counted(5, 0)), 1.0);
  EXPECT_EQ(joy_index(counted(0, 5)), -1.0);
  EXPECT_THROW(joy_index(std::vector<FaceRecord>{}), NoFaces);
}

TEST(JoyIndex, PublishedAggregates) {
  EXPECT_NEAR(joy_index(published_site(1429, 63.72)), 0.429, 1e-12);
  EXPECT_NEAR(average_happiness(published_site(1429, 63.72)), 63.72, 1e-9);
  EXPECT_NEAR(joy_index(published_site(511, 20.79)), -0.489, 1e-12);
  EXPECT_NEAR(average_happiness(published_site(511, 20.79)), 20.79, 1e-9);
}

TEST(JoyIndex, RangeAndExtremes) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const auto s = rng.below(30);
    const auto ns = rng.below(30);
    if (s + ns == 0) continue;
    const double j = joy_index(counted(s, ns));
    EXPECT_GE(j, -1.0);
    EXPECT_LE(j, 1.0);
    EXPECT_EQ(j == 1.0, ns == 0);
    EXPECT_EQ(j == -1.0, s == 0);
  }
}

TEST(Ahi, Examples) {
  EXPECT_EQ(average_happiness(counted(3, 3, 50.0)), 50.0);
  std::vector<FaceRecord> two = {face(0, 0, 0.0), face(0, 0, 100.0)};
  EXPECT_EQ(average_happiness(two), 50.0);
  std::vector<FaceRecord> one = {face(0, 0, 63.72)};
  EXPECT_EQ(average_happiness(one), 63.72);
  EXPECT_THROW(average_happiness(std::vector<FaceRecord>{}), NoFaces);
}

TEST(Ahi, PermutationAndMeanFace) {
  Rng rng(9);
  std::vector<FaceRecord> faces;
  for (int i = 0; i < 300; ++i) faces.push_back(face(0, 0, rng.uniform(0, 100)));
  const double m = average_happiness(faces);
  EXPECT_GE(m, 0.0);
  EXPECT_LE(m, 100.0);
  auto shuffled = faces;
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_NEAR(average_happiness(shuffled), m, 1e-12);
  faces.push_back(face(0, 0, m));
  EXPECT_NEAR(average_happiness(faces), m, 1e-12);
}

TEST(Emotion, Validity) {
  EmotionStructure e{1, 1, 1, 90, 5, 1, 1};
  EXPECT_TRUE(is_valid(e));
  e.happiness = 89.6;
  EXPECT_TRUE(is_valid(e));
  e.happiness = 80;
  EXPECT_FALSE(is_valid(e));
  EmotionStructure over{0, 0, 0, 140, 0, 0, 0};
  EXPECT_FALSE(is_valid(over));
}

TEST(Summary, UniformHappiness) {
  Rng rng(12);
  std::vector<FaceRecord> faces;
  for (int i = 0; i < 1000; ++i) faces.push_back(face(rng.uniform(0, 100), 50, rng.uniform(0, 100)));
  const auto s = summarize_place("A", faces, cfg());
  EXPECT_GE(s.ahi, 45.0);
  EXPECT_LE(s.ahi, 55.0);
  EXPECT_LE(s.ahi_ci.low, s.ahi);
  EXPECT_GE(s.ahi_ci.high, s.ahi);
  EXPECT_LE(s.joy_ci.low, s.joy_index);
  EXPECT_GE(s.joy_ci.high, s.joy_index);
  EXPECT_EQ(s.n_smiling + s.n_nonsmiling, s.n_faces);
  EXPECT_GT(s.ahi_ci.width(), 0.0);
}

TEST(Summary, IdenticalFacesHaveZeroWidth) {
  const auto s = summarize_place("A", counted(40, 0, 70.0), cfg());
  EXPECT_EQ(s.ahi_ci.width(), 0.0);
  EXPECT_EQ(s.joy_ci.width(), 0.0);
  EXPECT_EQ(s.ahi, 70.0);
  EXPECT_EQ(s.joy_index, 1.0);
}

TEST(Summary, CountsAndBounds) {
  const auto s = summarize_place("A", counted(143, 57), cfg());
  EXPECT_NEAR(s.joy_index, 0.43, 1e-12);
  EXPECT_EQ(s.n_smiling, 143u);
  EXPECT_EQ(s.n_nonsmiling, 57u);
  EXPECT_GE(s.joy_ci.low, -1.0);
  EXPECT_LE(s.joy_ci.high, 1.0);
  EXPECT_THROW(summarize_place("A", std::vector<FaceRecord>{}, cfg()), NoFaces);
}

TEST(Summary, ReproducibleAndSeedSensitive) {
  Rng rng(13);
  std::vector<FaceRecord> faces;
  for (int i = 0; i < 500; ++i) faces.push_back(face(rng.uniform(0, 100), 40, rng.uniform(0, 100)));
  EXPECT_EQ(summarize_place("A", faces, cfg(5)), summarize_place("A", faces, cfg(5)));
  EXPECT_NE(summarize_place("A", faces, cfg(5)).ahi_ci, summarize_place("A", faces, cfg(6)).ahi_ci);
}

TEST(Summary, IntervalsMatchGenericBootstrap) {
  Rng rng(14);
  std::vector<FaceRecord> faces;
  for (int i = 0; i < 300; ++i) faces.push_back(face(rng.uniform(0, 100), 40, rng.uniform(0, 100)));
  const auto s = summarize_place("site-x", faces, cfg(21));
  std::vector<double> joy;
  std::vector<double> happy;
  for (const auto& f : faces) {
    joy.push_back(f.smile_value > f.smile_threshold ? 1.0 : -1.0);
    happy.push_back(f.emotion.happiness);
  }
  auto site_cfg = cfg(21);
  site_cfg.seed = derive_seed(21, hash_string("site-x"));
  const auto j = stats::bootstrap_ci(joy, stats::mean, site_cfg);
  const auto h = stats::bootstrap_ci(happy, stats::mean, site_cfg);
  EXPECT_EQ(s.joy_ci.low, std::min(j.low, s.joy_index));
  EXPECT_EQ(s.joy_ci.high, std::max(j.high, s.joy_index));
  EXPECT_EQ(s.ahi_ci.low, std::min(h.low, s.ahi));
  EXPECT_EQ(s.ahi_ci.high, std::max(h.high, s.ahi));
}

TEST(Summary, JoyAndAhiRankingsAgreeOnSharedLatent) {
  Rng rng(15);
  std::vector<double> joy;
  std::vector<double> ahi;
  for (int site = 0; site < 24; ++site) {
    const double mean = rng.uniform(15, 70);
    std::vector<FaceRecord> faces;
    for (int i = 0; i < 400; ++i) {
      const auto scored = StubScorer::make_face(rng.normal(mean, 20), 30.1, rng);
      FaceRecord f;
      f.smile_value = scored.smile_value;
      f.smile_threshold = scored.smile_threshold;
      f.emotion = scored.emotion;
      faces.push_back(f);
    }
    joy.push_back(joy_index(faces));
    ahi.push_back(average_happiness(faces));
  }
  EXPECT_GT(stats::spearman(joy, ahi), 0.8);
}
