#pragma once

#include "pmc/frameio.hpp"
#include "pmc/pca_model.hpp"
#include "pmc/segment.hpp"

#include <filesystem>
#include <string>

namespace pmc {

// Pipeline settings. Defaults: tau = 5 px, gamma = 0.1, c = 10.
struct Config {
  TrainParams train;
  SegmentOptions segmentation;
  Modality modality = Modality::RgbGray;
  int jobs = 1;

  // Overlays the keys present in a JSON object onto `base`. Recognized keys:
  // tau, gamma, components, modality, jobs and a "segmentation" object with
  // coarse_rows, coarse_cols, min_length, max_length, quiescence.
  static Config from_json(const std::string& text, Config base);
  static Config from_json(const std::string& text);
  static Config load(const std::filesystem::path& file, Config base);
  static Config load(const std::filesystem::path& file);
};

// Parses "RxC" (e.g. "3x3").
GridDims parse_grid(const std::string& text);

}  // namespace pmc
