#pragma once

#include "pmc/frameio.hpp"
#include "pmc/segment.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pmc {

// Parameters of a synthetic one-shot batch. The last `static_gestures`
// labels are static classes (blob appears, holds, disappears); the others
// follow distinct parametric trajectories.
struct SynthSpec {
  int gestures = 8;
  int static_gestures = 0;
  int width = 160;
  int height = 120;
  int frames_per_gesture = 20;
  int test_videos = 40;
  int min_gestures_per_video = 1;
  int max_gestures_per_video = 5;
  int min_gap = 5;
  int max_gap = 15;
  double noise_sigma = 0.0;
  double blob_sigma = 12.0;  // pixels
  double blob_amplitude = 0.8;
  double background = 0.1;
  std::uint64_t seed = 1;

  static SynthSpec from_json(const std::string& text);
  std::string to_json() const;
  // Throws ParameterError listing the first violated constraint.
  void validate() const;
};

inline constexpr int kDynamicFamilies = 12;
inline constexpr int kStaticFamilies = 4;

struct SynthTestVideo {
  Video video;
  std::vector<int> truth;
  std::vector<Span> spans;  // ground-truth gesture frames
};

struct SynthBatch {
  SynthSpec spec;
  std::vector<Video> train;  // train[i] has label i+1
  std::vector<SynthTestVideo> test;

  bool is_static(int label) const { return label > spec.gestures - spec.static_gestures; }
};

// Renders one gesture (noise free, quantized to 8 bits).
Video render_gesture(const SynthSpec& spec, int label, std::string id = {});

// Deterministic in-memory batch. Train ids are "train/gNN", test ids
// "test/tNNN".
SynthBatch render_batch(const SynthSpec& spec);

// Writes the batch under `out`: train/ and test/ PGM sequences,
// manifest.json, truth_spans.json (segment output format) and spec.json.
// Returns the manifest as it would be loaded from disk.
BatchManifest generate_batch(const SynthSpec& spec, const std::filesystem::path& out);
BatchManifest write_batch(const SynthBatch& batch, const std::filesystem::path& out);

}  // namespace pmc
