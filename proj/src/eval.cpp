#include "pmc/eval.hpp"

#include "pmc/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace pmc {

int levenshtein(std::span<const int> a, std::span<const int> b) {
  std::vector<int> prev(b.size() + 1);
  std::vector<int> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

ScoreReport batch_score(const BatchManifest& manifest,
                        const std::map<std::string, std::vector<int>>& predictions) {
  ScoreReport report;
  double normalized_sum = 0.0;
  for (const auto& t : manifest.test) {
    const auto it = predictions.find(t.path);
    if (it == predictions.end()) throw ScoringError("no prediction for test video '" + t.path + "'");
    VideoScore vs{t.path, t.truth, it->second, levenshtein(t.truth, it->second), 0.0};
    vs.normalized = t.truth.empty() ? 0.0 : static_cast<double>(vs.edits) / t.truth.size();
    report.total_edits += vs.edits;
    report.total_truth_labels += static_cast<long>(t.truth.size());
    normalized_sum += vs.normalized;
    report.per_video.push_back(std::move(vs));
  }
  if (report.total_truth_labels > 0) {
    report.score = static_cast<double>(report.total_edits) / report.total_truth_labels;
  }
  if (!report.per_video.empty()) report.mean_per_video = normalized_sum / report.per_video.size();
  return report;
}

std::string ScoreReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["score"] = score;
  doc["total_edits"] = total_edits;
  doc["total_truth_labels"] = total_truth_labels;
  doc["mean_per_video"] = mean_per_video;
  doc["wall_seconds"] = wall_seconds;
  doc["per_video"] = nlohmann::ordered_json::array();
  for (const auto& v : per_video) {
    doc["per_video"].push_back({{"video", v.video},
                                {"truth", v.truth},
                                {"predicted", v.predicted},
                                {"edits", v.edits},
                                {"normalized", v.normalized}});
  }
  return doc.dump(2);
}

namespace {

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

}  // namespace

std::string ScoreReport::to_tsv() const {
  return std::to_string(per_video.size()) + '\t' + std::to_string(total_edits) + '\t' +
         std::to_string(total_truth_labels) + '\t' + shortest(score) + '\t' +
         shortest(mean_per_video) + '\t' + shortest(wall_seconds);
}

}  // namespace pmc
