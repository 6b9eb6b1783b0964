#include "pmc/pipeline.hpp"

#include "pmc/error.hpp"
#include "pmc/parallel.hpp"

#include "json.hpp"

namespace pmc {

SpanTable span_table(const std::vector<SegmentationResult>& results) {
  SpanTable table;
  for (const auto& r : results) table[r.video_id] = r.spans;
  return table;
}

std::vector<CoarseSequence> training_templates(const BatchManifest& manifest,
                                               const SegmentOptions& options, Modality modality,
                                               int jobs) {
  std::vector<CoarseSequence> out(manifest.train.size());
  parallel_for(manifest.train.size(), jobs, [&](std::size_t i) {
    const auto& entry = manifest.train[i];
    out[i] = coarse_sequence(load_video(manifest.resolve(entry.path), modality, entry.path),
                             options.coarse);
  });
  std::vector<CoarseSequence> ordered(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    ordered[static_cast<std::size_t>(manifest.train[i].label - 1)] = std::move(out[i]);
  }
  return ordered;
}

VideoPrediction predict_spans(const Video& video, const std::vector<Span>& spans,
                              const Vocabulary& vocab) {
  VideoPrediction p{video.id(), {}, spans, {}, {}};
  for (const Span& s : spans) {
    if (s.start < 0 || s.end <= s.start || static_cast<std::size_t>(s.end) > video.size()) {
      throw UsageError("span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                       ") outside video '" + video.id() + "' of " + std::to_string(video.size()) +
                       " frames");
    }
    const Video piece = video.slice(static_cast<std::size_t>(s.start), static_cast<std::size_t>(s.end));
    Classification c = classify(bag_of_frames(piece, vocab.params().motion), vocab);
    p.labels.push_back(c.label);
    p.errors.push_back(std::move(c.errors));
  }
  return p;
}

std::vector<VideoPrediction> classify_batch(const BatchManifest& manifest, const Vocabulary& vocab,
                                            const Config& config,
                                            const std::optional<SpanTable>& manual) {
  std::vector<CoarseSequence> templates;
  if (!manual && !manifest.test.empty()) {
    templates = training_templates(manifest, config.segmentation, config.modality, config.jobs);
  }
  std::vector<VideoPrediction> out(manifest.test.size());
  parallel_for(manifest.test.size(), config.jobs, [&](std::size_t i) {
    const auto& entry = manifest.test[i];
    try {
      const Video video = load_video(manifest.resolve(entry.path), config.modality, entry.path);
      std::vector<Span> spans;
      if (manual) {
        const auto it = manual->find(entry.path);
        if (it == manual->end()) throw UsageError("no manual spans for '" + entry.path + "'");
        spans = it->second;
      } else {
        spans = segment_video(video, templates, config.segmentation).spans;
      }
      out[i] = predict_spans(video, spans, vocab);
    } catch (const std::exception& e) {
      out[i] = VideoPrediction{entry.path, {}, {}, {}, e.what()};
    }
  });
  return out;
}

std::string predictions_to_json(const std::vector<VideoPrediction>& predictions,
                                std::optional<double> wall_seconds) {
  nlohmann::ordered_json doc;
  doc["predictions"] = nlohmann::ordered_json::array();
  for (const auto& p : predictions) {
    nlohmann::ordered_json spans = nlohmann::ordered_json::array();
    for (const auto& s : p.spans) spans.push_back({s.start, s.end});
    nlohmann::ordered_json entry{{"video", p.video}, {"labels", p.labels}, {"spans", spans}};
    if (!p.failure.empty()) entry["failure"] = p.failure;
    doc["predictions"].push_back(std::move(entry));
  }
  if (wall_seconds) doc["wall_seconds"] = *wall_seconds;
  return doc.dump(1);
}

PredictionFile predictions_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    PredictionFile file;
    for (const auto& p : doc.at("predictions")) {
      file.labels[p.at("video").get<std::string>()] = p.at("labels").get<std::vector<int>>();
    }
    if (doc.contains("wall_seconds")) file.wall_seconds = doc.at("wall_seconds").get<double>();
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("predictions: ") + e.what());
  }
}

}  // namespace pmc
