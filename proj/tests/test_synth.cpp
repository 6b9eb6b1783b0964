#include "doctest.h"

#include "pmc/error.hpp"
#include "pmc/eval.hpp"
#include "pmc/pipeline.hpp"
#include "pmc/synth.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <map>

using namespace pmc;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = testutil::read_file(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("batch contract") {
  testutil::TempDir dir("synth_contract");
  SynthSpec spec;
  spec.test_videos = 40;
  const BatchManifest m = generate_batch(spec, dir.path());
  CHECK(m.train.size() == 8);
  CHECK(m.test.size() == 40);
  for (const auto& t : m.test) {
    CHECK(t.truth.size() >= 1);
    CHECK(t.truth.size() <= 5);
    for (int l : t.truth) CHECK((l >= 1 && l <= 8));
  }
  const BatchManifest loaded = load_manifest(dir / "manifest.json");
  CHECK(loaded.test.size() == 40);
  CHECK(fs::exists(dir / "truth_spans.json"));
  CHECK(SynthSpec::from_json(testutil::read_file(dir / "spec.json")).to_json() == spec.to_json());
}

TEST_CASE("same seed gives byte-identical trees") {
  testutil::TempDir a("synth_a");
  testutil::TempDir b("synth_b");
  SynthSpec spec;
  spec.test_videos = 4;
  spec.noise_sigma = 0.03;
  spec.seed = 99;
  generate_batch(spec, a.path());
  generate_batch(spec, b.path());
  const auto ta = tree_contents(a.path());
  CHECK(ta.size() > 100);
  CHECK(ta == tree_contents(b.path()));

  spec.seed = 100;
  CHECK(render_batch(spec).test[0].truth != render_batch(SynthSpec{}).test[0].truth);
}

TEST_CASE("written videos reload within 1/255") {
  testutil::TempDir dir("synth_rt");
  SynthSpec spec;
  spec.test_videos = 2;
  spec.noise_sigma = 0.05;
  const SynthBatch batch = render_batch(spec);
  const BatchManifest m = write_batch(batch, dir.path());
  const Video back = load_video(m.resolve(m.test[1].path));
  const Video& orig = batch.test[1].video;
  REQUIRE(back.size() == orig.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK((back.frames()[k].pixels() - orig.frames()[k].pixels()).abs().maxCoeff() <= 1.0 / 255.0);
  }
  CHECK(back.width() == spec.width);
}

TEST_CASE("ground-truth spans of test videos cover the gestures") {
  SynthSpec spec;
  spec.test_videos = 10;
  const SynthBatch batch = render_batch(spec);
  for (const auto& t : batch.test) {
    REQUIRE(t.spans.size() == t.truth.size());
    for (std::size_t i = 0; i < t.spans.size(); ++i) {
      CHECK(t.spans[i].length() == spec.frames_per_gesture);
      if (i > 0) CHECK(t.spans[i].start - t.spans[i - 1].end >= spec.min_gap);
    }
    CHECK(t.spans.front().start >= spec.min_gap);
    CHECK(static_cast<int>(t.video.size()) - t.spans.back().end >= spec.min_gap);
  }
}

TEST_CASE("noise-free batch with ground-truth spans scores zero") {
  SynthSpec spec;
  const SynthBatch batch = render_batch(spec);
  std::vector<BagOfFrames> bags;
  for (const auto& v : batch.train) bags.push_back(bag_of_frames(v, {}));
  const Vocabulary vocab = train_from_bags(bags, {});
  BatchManifest m;
  m.frame_width = spec.width;
  m.frame_height = spec.height;
  for (int l = 1; l <= spec.gestures; ++l) m.train.push_back({batch.train[static_cast<std::size_t>(l - 1)].id(), l});
  std::map<std::string, std::vector<int>> predictions;
  for (const auto& t : batch.test) {
    m.test.push_back({t.video.id(), t.truth});
    predictions[t.video.id()] = predict_spans(t.video, t.spans, vocab).labels;
  }
  CHECK(batch_score(m, predictions).score == 0.0);
}

TEST_CASE("classes are separable under coarse dtw") {
  SynthSpec spec;
  spec.gestures = 12;
  spec.test_videos = 12;
  spec.noise_sigma = 0.05;
  const SynthBatch batch = render_batch(spec);
  std::vector<CoarseSequence> templates;
  for (const auto& v : batch.train) templates.push_back(coarse_sequence(v));
  int checked = 0;
  for (const auto& t : batch.test) {
    for (std::size_t i = 0; i < t.truth.size(); ++i) {
      const Video g = t.video.slice(static_cast<std::size_t>(t.spans[i].start), static_cast<std::size_t>(t.spans[i].end));
      const CoarseSequence s = coarse_sequence(g);
      const double own = dtw_distance(s, templates[static_cast<std::size_t>(t.truth[i] - 1)]);
      for (int other = 1; other <= spec.gestures; ++other) {
        if (other == t.truth[i]) continue;
        CHECK(dtw_distance(s, templates[static_cast<std::size_t>(other - 1)]) > own);
      }
      ++checked;
    }
  }
  CHECK(checked > 12);
}

TEST_CASE("static classes") {
  SynthSpec spec;
  spec.gestures = 10;
  spec.static_gestures = 2;
  const SynthBatch batch = render_batch(spec);
  CHECK_FALSE(batch.is_static(8));
  CHECK(batch.is_static(9));
  CHECK(batch.is_static(10));
  // A static gesture moves far less than a dynamic one once faded in.
  const auto moving = bag_of_frames(batch.train[0], {});
  const auto still = bag_of_frames(batch.train[8], {});
  const Eigen::Index mid = moving.rows.rows() / 2;
  CHECK(still.rows.row(mid).sum() < 0.25 * moving.rows.row(mid).sum());
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.gestures = kDynamicFamilies + 1;
  CHECK_THROWS_AS(spec.validate(), ParameterError);
  spec = {};
  spec.static_gestures = kStaticFamilies + 1;
  spec.gestures = 12;
  CHECK_THROWS_AS(spec.validate(), ParameterError);
  spec = {};
  spec.max_gestures_per_video = 6;
  CHECK_THROWS_AS(spec.validate(), ParameterError);
  spec = {};
  spec.noise_sigma = -0.1;
  CHECK_THROWS_AS(spec.validate(), ParameterError);
  spec = {};
  spec.test_videos = 0;
  CHECK_THROWS_AS(spec.validate(), ParameterError);
  CHECK_NOTHROW(SynthSpec{}.validate());
  CHECK_THROWS(SynthSpec::from_json(R"({"gestures": "many"})"));
  CHECK(SynthSpec::from_json(R"({"gestures": 9, "seed": 5})").gestures == 9);
}
