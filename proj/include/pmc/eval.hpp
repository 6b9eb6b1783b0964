#pragma once

#include "pmc/frameio.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace pmc {

// Minimum number of unit-cost insertions, deletions and substitutions
// turning a into b.
int levenshtein(std::span<const int> a, std::span<const int> b);

struct VideoScore {
  std::string video;
  std::vector<int> truth;
  std::vector<int> predicted;
  int edits = 0;
  double normalized = 0.0;  // edits / |truth|
};

struct ScoreReport {
  std::vector<VideoScore> per_video;
  long total_edits = 0;
  long total_truth_labels = 0;
  double score = 0.0;  // total_edits / total_truth_labels
  double mean_per_video = 0.0;
  double wall_seconds = 0.0;

  std::string to_json() const;
  // videos, total_edits, total_truth_labels, score, mean_per_video, wall_seconds
  std::string to_tsv() const;
};

// Scores the predictions (keyed by manifest test path) in manifest order.
// Throws ScoringError naming the first test video without a prediction.
ScoreReport batch_score(const BatchManifest& manifest,
                        const std::map<std::string, std::vector<int>>& predictions);

}  // namespace pmc
