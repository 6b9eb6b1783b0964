#include "doctest.h"

#include "pmc/error.hpp"
#include "pmc/segment.hpp"
#include "pmc/synth.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace pmc;

namespace {

Eigen::MatrixXd scalar_seq(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Frame rest_frame(const SynthSpec& spec) {
  return Frame(Image::Constant(spec.height, spec.width, std::round(spec.background * 255.0) / 255.0));
}

// Training gestures back to back with `gap` background frames in between
// (and `lead` before the first). Returns the video and the gesture spans.
std::pair<Video, std::vector<Span>> concatenate(const SynthSpec& spec, const std::vector<int>& labels, int gap,
                                                int lead = 0) {
  std::vector<Frame> frames;
  std::vector<Span> spans;
  for (int i = 0; i < lead; ++i) frames.push_back(rest_frame(spec));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (k > 0)
      for (int i = 0; i < gap; ++i) frames.push_back(rest_frame(spec));
    const int start = static_cast<int>(frames.size());
    const Video g = render_gesture(spec, labels[k]);
    for (const auto& f : g.frames()) frames.push_back(f);
    spans.push_back({start, static_cast<int>(frames.size())});
  }
  return {Video("concat", Modality::RgbGray, std::move(frames)), spans};
}

std::vector<CoarseSequence> templates_for(const SynthSpec& spec) {
  std::vector<CoarseSequence> out;
  for (int label = 1; label <= spec.gestures; ++label) out.push_back(coarse_sequence(render_gesture(spec, label)));
  return out;
}

}  // namespace

TEST_CASE("coarse sequence of a static video is zero") {
  const CoarseSequence s = coarse_sequence(testutil::constant_video(7, 30, 20, 0.4));
  CHECK(s.length() == 6);
  CHECK(s.steps.cols() == 9);
  CHECK((s.steps.array() == 0.0).all());
}

TEST_CASE("coarse steps match the pooling oracle") {
  SynthSpec spec;
  const Video v = render_gesture(spec, 5);
  std::vector<oracle::Grid> frames;
  for (const auto& f : v.frames()) frames.push_back(testutil::to_grid(f.pixels()));
  const auto diffs = oracle::differences(frames);
  const CoarseSequence s = coarse_sequence(v);
  REQUIRE(s.length() == static_cast<Eigen::Index>(diffs.size()));
  double worst = 0.0;
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    const auto want = oracle::pool(diffs[k], 3, 3);
    for (std::size_t j = 0; j < want.size(); ++j)
      worst = std::max(worst, std::fabs(s.steps(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) - want[j]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("dtw of a sequence with itself is zero") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(3 + trial, 4);
    CHECK(dtw_distance(a, a) == 0.0);
  }
}

TEST_CASE("dtw absorbs a repeated element") {
  CHECK(dtw_distance(scalar_seq({0, 1, 0}), scalar_seq({0, 1, 1, 0})) == 0.0);
  CHECK(dtw_distance(scalar_seq({0}), scalar_seq({2})) == 2.0);
  // Single alignment path of two cells: (|0-1| + |1-1|) / 2.
  CHECK(dtw_distance(scalar_seq({0, 1}), scalar_seq({1})) == 0.5);
}

TEST_CASE("dtw equals exhaustive path enumeration") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> len(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = len(rng), m = len(rng);
    const oracle::Grid a = oracle::random_grid(rng, static_cast<std::size_t>(n), 2);
    // Coarse values repeat in practice, so exact ties are exercised too.
    oracle::Grid b = oracle::random_grid(rng, static_cast<std::size_t>(m), 2);
    if (trial % 3 == 0) b = a;
    if (trial % 5 == 0) b.insert(b.begin(), b.front());
    const auto want = oracle::dtw_paths(a, b);
    const double got = dtw_distance(testutil::to_image(a).matrix(), testutil::to_image(b).matrix());
    CHECK(std::fabs(got - want.cost / static_cast<double>(want.length)) <= 1e-12);
  }
}

TEST_CASE("dtw is symmetric and nonnegative") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd a = testutil::to_image(oracle::random_grid(rng, static_cast<std::size_t>(len(rng)), 3)).matrix();
    const Eigen::MatrixXd b = testutil::to_image(oracle::random_grid(rng, static_cast<std::size_t>(len(rng)), 3)).matrix();
    const double ab = dtw_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(std::fabs(ab - dtw_distance(b, a)) <= 1e-12);
  }
}

TEST_CASE("dtw input validation") {
  CHECK_THROWS_AS(dtw_distance(Eigen::MatrixXd(0, 2), Eigen::MatrixXd::Zero(2, 2)), UsageError);
  CHECK_THROWS_AS(dtw_distance(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 2)), ShapeError);
}

TEST_CASE("open-end dtw stops where the template ends") {
  const Eigen::MatrixXd tmpl = scalar_seq({0, 1, 2, 3, 2, 1});
  const Eigen::MatrixXd window = scalar_seq({0, 1, 2, 3, 2, 1, 9, 9, 9, 9});
  const OpenEndMatch m = open_end_dtw(tmpl, window, 2, 10);
  CHECK(m.end == 6);
  CHECK(m.cost == 0.0);
  CHECK(open_end_dtw(tmpl, window, 8, 10).end >= 8);
  CHECK(open_end_dtw(tmpl, window, 2, 4).end <= 4);
  CHECK_THROWS_AS(open_end_dtw(tmpl, scalar_seq({1, 2}), 3, 10), UsageError);
}

TEST_CASE("exact copy of a training video is one span") {
  SynthSpec spec;
  const auto templates = templates_for(spec);
  for (int label = 1; label <= spec.gestures; ++label) {
    const Video v = render_gesture(spec, label);
    const SegmentationResult r = segment_video(v, templates);
    REQUIRE(r.spans.size() == 1);
    CHECK(r.spans[0] == Span{0, static_cast<int>(v.size())});
  }
}

TEST_CASE("two gestures with a gap split near the junction") {
  SynthSpec spec;
  const auto [video, truth] = concatenate(spec, {2, 5}, 10);
  const SegmentationResult r = segment_video(video, templates_for(spec));
  REQUIRE(r.spans.size() == 2);
  CHECK(std::abs(r.spans[0].start - truth[0].start) <= 3);
  CHECK(std::abs(r.spans[0].end - truth[0].end) <= 3);
  CHECK(std::abs(r.spans[1].start - truth[1].start) <= 3);
  CHECK(std::abs(r.spans[1].end - truth[1].end) <= 3);
}

TEST_CASE("k concatenated gestures give k spans") {
  SynthSpec spec;
  const auto templates = templates_for(spec);
  const std::vector<std::vector<int>> cases{{1}, {3, 3}, {8, 1, 4}, {6, 2, 7, 5}, {1, 2, 3, 4, 5}, {4, 8, 6, 8, 2}};
  int gap = 5;
  for (const auto& labels : cases) {
    const auto [video, truth] = concatenate(spec, labels, gap, gap);
    const SegmentationResult r = segment_video(video, templates);
    CHECK(r.spans.size() == labels.size());
    for (std::size_t i = 1; i < r.spans.size(); ++i) CHECK(r.spans[i - 1].end <= r.spans[i].start);
    gap += 2;
  }
}

TEST_CASE("static video gives no spans") {
  SynthSpec spec;
  std::vector<Frame> frames(40, rest_frame(spec));
  const Video v("still", Modality::RgbGray, frames);
  CHECK(segment_video(v, templates_for(spec)).spans.empty());
}

TEST_CASE("short videos and option validation") {
  SynthSpec spec;
  const auto templates = templates_for(spec);
  const Video shortv = testutil::constant_video(5, spec.width, spec.height, 0.2);
  const SegmentationResult r = segment_video(shortv, templates);
  REQUIRE(r.spans.size() == 1);
  CHECK(r.spans[0] == Span{0, 5});
  SegmentOptions bad;
  bad.min_length = 10;
  bad.max_length = 5;
  CHECK_THROWS_AS(segment_video(render_gesture(spec, 1), templates, bad), ParameterError);
  CHECK_THROWS_AS(segment_video(render_gesture(spec, 1), {}), UsageError);
}

TEST_CASE("segmentation json round trip") {
  const SegmentationResult r{"test/t001", {{0, 12}, {20, 41}}};
  CHECK(segmentation_to_json(r) == R"({"video":"test/t001","spans":[[0,12],[20,41]]})");
  const auto one = segmentations_from_json(segmentation_to_json(r));
  REQUIRE(one.size() == 1);
  CHECK(one[0].spans == r.spans);
  const auto many = segmentations_from_json(segmentations_to_json({r, {"x", {}}}));
  REQUIRE(many.size() == 2);
  CHECK(many[1].video_id == "x");
  CHECK_THROWS_AS(segmentations_from_json(R"({"video":"a","spans":[[5,2]]})"), FormatError);
  CHECK_THROWS_AS(segmentations_from_json("[1,2"), FormatError);
}
