#pragma once

#include "pmc/frameio.hpp"
#include "pmc/motion.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace pmc {

// Time-ordered coarse motion maps of a video, one row per step (N-1 rows).
struct CoarseSequence {
  Eigen::MatrixXd steps;
  GridDims grid;
  std::string video_id;

  Eigen::Index length() const noexcept { return steps.rows(); }
};

// Motion maps pooled onto `grid` without motion expansion, in temporal order.
CoarseSequence coarse_sequence(const Video& video, GridDims grid = {3, 3});
CoarseSequence coarse_sequence(const Video& video, double coarse_gamma);

// DTW with Euclidean local cost, steps {(1,0),(0,1),(1,1)} and no band.
// Returns the cost of the cheapest alignment divided by its path length
// (among equally cheap paths, the shortest). Throws UsageError on empty input.
double dtw_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
double dtw_distance(const CoarseSequence& a, const CoarseSequence& b);

struct OpenEndMatch {
  Eigen::Index end = 0;  // window prefix length consumed, exclusive
  double cost = 0.0;     // length-normalized cost
};

// Aligns the whole template with a prefix of `window` whose length lies in
// [min_length, max_length]. Both sequences start aligned. The cost of a
// prefix is its cumulative DTW cost divided by (template length + prefix
// length); the cheapest prefix wins, the shortest on ties.
OpenEndMatch open_end_dtw(const Eigen::MatrixXd& tmpl, const Eigen::MatrixXd& window,
                          Eigen::Index min_length, Eigen::Index max_length);

struct SegmentOptions {
  GridDims coarse{3, 3};
  int min_length = 8;       // steps
  int max_length = 60;      // steps
  double quiescence = 0.15; // fraction of the reference step energy
};

// Half-open frame interval [start, end).
struct Span {
  int start = 0;
  int end = 0;

  int length() const noexcept { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct SegmentationResult {
  std::string video_id;
  std::vector<Span> spans;
};

// Greedy left-to-right segmentation over coarse steps.
//
// The stationary per-cell noise floor is first subtracted from the video and
// the templates. A step is quiescent when its energy (sum over cells) is at
// most `quiescence` times the 75th percentile of the video's step energies.
// Quiescent steps never open a span; at each cut every template is aligned
// with open-end DTW against the steps that follow and the best end becomes
// the next span. Spans carrying less total energy than min_length quiescent
// steps are dropped, quiescent ends are trimmed, and a trimmed remainder
// shorter than min_length is merged into the span it touches or dropped.
SegmentationResult segment_video(const Video& video, const std::vector<CoarseSequence>& templates,
                                 const SegmentOptions& options = {});

// Same as above for a precomputed coarse sequence of a video with
// `frame_count` frames.
SegmentationResult segment_sequence(const CoarseSequence& sequence, std::size_t frame_count,
                                    const std::vector<CoarseSequence>& templates,
                                    const SegmentOptions& options = {});

}  // namespace pmc

namespace pmc {

// {"video": id, "spans": [[start,end],...]}
std::string segmentation_to_json(const SegmentationResult& result);
// Array of the objects above.
std::string segmentations_to_json(const std::vector<SegmentationResult>& results);
// Accepts either a single object or an array of them.
std::vector<SegmentationResult> segmentations_from_json(const std::string& text);

}  // namespace pmc
