#pragma once

#include "pmc/config.hpp"
#include "pmc/frameio.hpp"
#include "pmc/pca_model.hpp"
#include "pmc/segment.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pmc {

struct VideoPrediction {
  std::string video;
  std::vector<int> labels;
  std::vector<Span> spans;
  std::vector<std::vector<double>> errors;  // per span, per vocabulary label
  std::string failure;                      // empty on success
};

using SpanTable = std::map<std::string, std::vector<Span>>;

SpanTable span_table(const std::vector<SegmentationResult>& results);

// Coarse sequences of the manifest's training videos, in label order.
std::vector<CoarseSequence> training_templates(const BatchManifest& manifest,
                                               const SegmentOptions& options, Modality modality,
                                               int jobs = 1);

// Classifies each span of the video independently.
VideoPrediction predict_spans(const Video& video, const std::vector<Span>& spans,
                              const Vocabulary& vocab);

// Segments (automatically, or from `manual` when given) and classifies every
// test video of the manifest. Output order follows the manifest; a failing
// video is reported in its slot and does not stop the others.
std::vector<VideoPrediction> classify_batch(const BatchManifest& manifest, const Vocabulary& vocab,
                                            const Config& config,
                                            const std::optional<SpanTable>& manual);

// {"predictions": [{"video", "labels", "spans"[, "failure"]}]}
std::string predictions_to_json(const std::vector<VideoPrediction>& predictions,
                                 std::optional<double> wall_seconds = std::nullopt);

struct PredictionFile {
  std::map<std::string, std::vector<int>> labels;
  std::optional<double> wall_seconds;
};
PredictionFile predictions_from_json(const std::string& text);

}  // namespace pmc
