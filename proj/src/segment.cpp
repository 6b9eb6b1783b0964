#include "pmc/segment.hpp"

#include "pmc/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <limits>

namespace pmc {

CoarseSequence coarse_sequence(const Video& video, GridDims grid) {
  const auto diffs = difference_images(video);
  if (diffs.empty()) {
    // Validates the grid against the frame size like the regular path does.
    pool_to_shape(Image::Zero(video.height(), video.width()), grid);
    return {Eigen::MatrixXd::Zero(1, grid.size()), grid, video.id()};
  }
  CoarseSequence seq{Eigen::MatrixXd(static_cast<Eigen::Index>(diffs.size()), grid.size()), grid,
                     video.id()};
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    seq.steps.row(static_cast<Eigen::Index>(k)) = pool_to_shape(diffs[k], grid).values.transpose();
  }
  return seq;
}

CoarseSequence coarse_sequence(const Video& video, double coarse_gamma) {
  return coarse_sequence(video, grid_for_scale(video.width(), video.height(), coarse_gamma));
}

namespace {

struct PathCost {
  double cost = std::numeric_limits<double>::infinity();
  Eigen::Index length = 0;

  bool operator<(const PathCost& o) const {
    return cost < o.cost || (cost == o.cost && length < o.length);
  }
};

// Cumulative (cost, length) table of the cheapest monotone path from (0,0).
// Only the first `cols` rows of b are used.
std::vector<PathCost> dtw_table(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                Eigen::Index cols) {
  const Eigen::Index rows = a.rows();
  std::vector<PathCost> t(static_cast<std::size_t>(rows * cols));
  auto at = [&](Eigen::Index i, Eigen::Index j) -> PathCost& {
    return t[static_cast<std::size_t>(i * cols + j)];
  };
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double local = (a.row(i) - b.row(j)).norm();
      PathCost best;
      if (i == 0 && j == 0) {
        best = {0.0, 0};
      } else {
        if (i > 0 && j > 0) best = at(i - 1, j - 1);
        if (i > 0 && at(i - 1, j) < best) best = at(i - 1, j);
        if (j > 0 && at(i, j - 1) < best) best = at(i, j - 1);
      }
      at(i, j) = {best.cost + local, best.length + 1};
    }
  }
  return t;
}

void require_compatible(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() == 0 || b.rows() == 0) throw UsageError("dtw: empty sequence");
  if (a.cols() != b.cols()) {
    throw ShapeError("dtw: map sizes differ (" + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.cols()) + ")");
  }
}

}  // namespace

double dtw_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_compatible(a, b);
  const auto t = dtw_table(a, b, b.rows());
  const PathCost& end = t.back();
  return end.cost / static_cast<double>(end.length);
}

double dtw_distance(const CoarseSequence& a, const CoarseSequence& b) {
  return dtw_distance(a.steps, b.steps);
}

OpenEndMatch open_end_dtw(const Eigen::MatrixXd& tmpl, const Eigen::MatrixXd& window,
                          Eigen::Index min_length, Eigen::Index max_length) {
  require_compatible(tmpl, window);
  const Eigen::Index cols = std::min(window.rows(), max_length);
  min_length = std::max<Eigen::Index>(min_length, 1);
  if (cols < min_length) {
    throw UsageError("open_end_dtw: window of " + std::to_string(window.rows()) +
                     " steps is shorter than the minimum span " + std::to_string(min_length));
  }
  const auto t = dtw_table(tmpl, window, cols);
  const std::size_t last_row = static_cast<std::size_t>((tmpl.rows() - 1) * cols);
  OpenEndMatch best{0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index end = min_length; end <= cols; ++end) {
    const PathCost& pc = t[last_row + static_cast<std::size_t>(end - 1)];
    const double normalized = pc.cost / static_cast<double>(tmpl.rows() + end);
    if (normalized < best.cost) best = {end, normalized};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Segmentation

namespace {

// Linear-interpolated quantile, q in [0,1].
double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double step_energy(const Eigen::MatrixXd& steps, Eigen::Index k) { return steps.row(k).sum(); }

// Removes the stationary per-cell noise floor and clamps at zero. A first
// estimate is each cell's minimum over steps 1..; the steps that look quiet
// against it then give the refined floor as their per-cell mean. Step 0 is
// the stand-in for the first difference and stays zero.
Eigen::MatrixXd remove_noise_floor(const Eigen::MatrixXd& steps, double quiescence) {
  if (steps.rows() < 2) return steps;
  const Eigen::MatrixXd body = steps.bottomRows(steps.rows() - 1);
  Eigen::RowVectorXd floor = body.colwise().minCoeff();

  const Eigen::MatrixXd first = (body.rowwise() - floor).cwiseMax(0.0);
  std::vector<double> energy(static_cast<std::size_t>(first.rows()));
  for (Eigen::Index k = 0; k < first.rows(); ++k) energy[static_cast<std::size_t>(k)] = step_energy(first, k);
  const double threshold = quiescence * quantile(energy, 0.75);
  Eigen::RowVectorXd quiet_sum = Eigen::RowVectorXd::Zero(steps.cols());
  Eigen::Index quiet_count = 0;
  for (Eigen::Index k = 0; k < first.rows(); ++k) {
    if (energy[static_cast<std::size_t>(k)] <= threshold) {
      quiet_sum += body.row(k);
      ++quiet_count;
    }
  }
  if (quiet_count > 0) floor = quiet_sum / static_cast<double>(quiet_count);

  Eigen::MatrixXd out = (steps.rowwise() - floor).cwiseMax(0.0);
  out.row(0).setZero();
  return out;
}

struct StepSpan {
  Eigen::Index begin;
  Eigen::Index end;
};

}  // namespace

SegmentationResult segment_sequence(const CoarseSequence& sequence, std::size_t frame_count,
                                    const std::vector<CoarseSequence>& templates,
                                    const SegmentOptions& options) {
  if (templates.empty()) throw UsageError("segment: no training templates");
  if (options.min_length < 1 || options.max_length < options.min_length) {
    throw ParameterError("segment: need 1 <= min_length <= max_length");
  }
  if (!(options.quiescence >= 0.0)) throw ParameterError("segment: quiescence must be >= 0");
  for (const auto& t : templates) {
    if (t.steps.cols() != sequence.steps.cols()) {
      throw ShapeError("segment: template '" + t.video_id + "' uses a different coarse grid");
    }
  }

  SegmentationResult result{sequence.video_id, {}};
  const auto frames = static_cast<Eigen::Index>(frame_count);
  if (frames < options.min_length + 1) {
    result.spans.push_back({0, static_cast<int>(frames)});
    return result;
  }

  const Eigen::MatrixXd seq = remove_noise_floor(sequence.steps, options.quiescence);
  std::vector<Eigen::MatrixXd> tmpls;
  tmpls.reserve(templates.size());
  for (const auto& t : templates) tmpls.push_back(remove_noise_floor(t.steps, options.quiescence));

  // Step 0 is the zero stand-in for the first difference; it inherits the
  // energy of step 1 so a gesture starting at frame 0 is not cut.
  const Eigen::Index n = seq.rows();
  std::vector<double> energy(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) energy[static_cast<std::size_t>(k)] = step_energy(seq, k);
  if (n > 1) energy[0] = energy[1];

  const double threshold = options.quiescence * quantile(energy, 0.75);
  auto quiet = [&](Eigen::Index k) { return energy[static_cast<std::size_t>(k)] <= threshold; };

  // Greedy left-to-right commits; quiescent steps never open a span.
  std::vector<StepSpan> raw;
  Eigen::Index cut = 0;
  while (cut < n) {
    while (cut < n && quiet(cut)) ++cut;
    if (cut >= n) break;
    const Eigen::Index remaining = n - cut;
    if (remaining < options.min_length) {
      if (!raw.empty() && raw.back().end == cut) {
        raw.back().end = n;
      } else {
        raw.push_back({cut, n});
      }
      break;
    }
    const Eigen::MatrixXd window = seq.bottomRows(remaining);
    OpenEndMatch best{0, std::numeric_limits<double>::infinity()};
    for (const auto& t : tmpls) {
      const OpenEndMatch m = open_end_dtw(t, window, options.min_length, options.max_length);
      if (m.cost < best.cost || (m.cost == best.cost && m.end < best.end)) best = m;
    }
    raw.push_back({cut, cut + best.end});
    cut += best.end;
  }

  // A span must carry at least the energy of a minimum-length span of
  // steps at the quiescence threshold.
  const double min_total = threshold * options.min_length;
  std::vector<StepSpan> kept;
  for (StepSpan s : raw) {
    double total = 0.0;
    for (Eigen::Index k = s.begin; k < s.end; ++k) total += energy[static_cast<std::size_t>(k)];
    if (total <= min_total) continue;
    while (s.begin < s.end && quiet(s.begin)) ++s.begin;
    while (s.end > s.begin && quiet(s.end - 1)) --s.end;
    if (s.end - s.begin >= options.min_length) {
      kept.push_back(s);
    } else if (!kept.empty() && kept.back().end == s.begin) {
      // Tail of the previous gesture left over by an early alignment end.
      kept.back().end = s.end;
    }
  }

  // Step k > 0 is the change from frame k to k+1, so a step span covers
  // frames [begin, end + 1), clipped so consecutive spans do not overlap.
  for (std::size_t i = 0; i < kept.size(); ++i) {
    Eigen::Index end = std::min(kept[i].end + 1, frames);
    if (i + 1 < kept.size()) end = std::min(end, kept[i + 1].begin);
    result.spans.push_back({static_cast<int>(kept[i].begin), static_cast<int>(end)});
  }
  return result;
}

SegmentationResult segment_video(const Video& video, const std::vector<CoarseSequence>& templates,
                                 const SegmentOptions& options) {
  if (templates.empty()) throw UsageError("segment: no training templates");
  return segment_sequence(coarse_sequence(video, options.coarse), video.size(), templates, options);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::ordered_json to_doc(const SegmentationResult& r) {
  nlohmann::ordered_json spans = nlohmann::ordered_json::array();
  for (const auto& s : r.spans) spans.push_back({s.start, s.end});
  return {{"video", r.video_id}, {"spans", std::move(spans)}};
}

SegmentationResult from_doc(const nlohmann::json& doc) {
  SegmentationResult r;
  r.video_id = doc.at("video").get<std::string>();
  for (const auto& s : doc.at("spans")) {
    const auto pair = s.get<std::vector<int>>();
    if (pair.size() != 2 || pair[0] < 0 || pair[1] <= pair[0]) {
      throw FormatError("spans of '" + r.video_id + "': expected [start,end] with start < end");
    }
    r.spans.push_back({pair[0], pair[1]});
  }
  return r;
}

}  // namespace

std::string segmentation_to_json(const SegmentationResult& result) {
  return to_doc(result).dump();
}

std::string segmentations_to_json(const std::vector<SegmentationResult>& results) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : results) doc.push_back(to_doc(r));
  return doc.dump(1);
}

std::vector<SegmentationResult> segmentations_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    std::vector<SegmentationResult> out;
    if (doc.is_array()) {
      for (const auto& d : doc) out.push_back(from_doc(d));
    } else {
      out.push_back(from_doc(doc));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("segmentation JSON: ") + e.what());
  }
}

}  // namespace pmc
