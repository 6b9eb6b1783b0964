#include "doctest.h"

#include "pmc/error.hpp"
#include "pmc/eval.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <random>

using namespace pmc;

namespace {

int lev(const std::vector<int>& a, const std::vector<int>& b) { return levenshtein(a, b); }

BatchManifest manifest_with(const std::vector<std::vector<int>>& truths) {
  BatchManifest m;
  m.frame_width = 8;
  m.frame_height = 8;
  for (int l = 1; l <= 5; ++l) m.train.push_back({"g" + std::to_string(l), l});
  for (std::size_t i = 0; i < truths.size(); ++i) m.test.push_back({"t" + std::to_string(i), truths[i]});
  return m;
}

}  // namespace

TEST_CASE("levenshtein examples") {
  CHECK(lev({1, 2, 3}, {1, 2, 3}) == 0);
  CHECK(lev({1, 2}, {1, 3, 2}) == 1);
  CHECK(lev({}, {4, 4}) == 2);
  CHECK(lev({4, 4}, {}) == 2);
  CHECK(lev({1, 2, 3}, {3, 2, 1}) == 2);
}

TEST_CASE("levenshtein matches breadth-first edit search on short sequences") {
  std::vector<std::vector<int>> all{{}};
  for (std::size_t len = 1; len <= 3; ++len) {
    const std::size_t start = all.size();
    for (std::size_t i = 0; i < start; ++i) {
      if (all[i].size() != len - 1) continue;
      for (int s = 1; s <= 3; ++s) {
        auto next = all[i];
        next.push_back(s);
        all.push_back(next);
      }
    }
  }
  const std::vector<int> alphabet{1, 2, 3};
  int mismatches = 0;
  for (const auto& a : all)
    for (const auto& b : all)
      if (lev(a, b) != oracle::edit_search(a, b, alphabet)) ++mismatches;
  CHECK(all.size() == 40);
  CHECK(mismatches == 0);
}

TEST_CASE("levenshtein metric properties") {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> len(0, 6);
  std::uniform_int_distribution<int> sym(1, 4);
  auto draw = [&]() {
    std::vector<int> v(static_cast<std::size_t>(len(rng)));
    for (int& x : v) x = sym(rng);
    return v;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = draw(), b = draw(), c = draw();
    CHECK(lev(a, b) == lev(b, a));
    CHECK((lev(a, b) == 0) == (a == b));
    CHECK(lev(a, c) <= lev(a, b) + lev(b, c));
    CHECK(lev(a, b) <= static_cast<int>(std::max(a.size(), b.size())));
  }
}

TEST_CASE("perfect predictions score zero") {
  const BatchManifest m = manifest_with({{1, 2}, {3}, {5, 4, 1}});
  std::map<std::string, std::vector<int>> p;
  for (const auto& t : m.test) p[t.path] = t.truth;
  const ScoreReport r = batch_score(m, p);
  CHECK(r.score == 0.0);
  CHECK(r.total_truth_labels == 6);
}

TEST_CASE("one substitution in twenty labels scores 0.05") {
  std::vector<std::vector<int>> truths(10, std::vector<int>{1, 2});
  const BatchManifest m = manifest_with(truths);
  std::map<std::string, std::vector<int>> p;
  for (const auto& t : m.test) p[t.path] = t.truth;
  p["t4"] = {1, 3};
  const ScoreReport r = batch_score(m, p);
  CHECK(r.total_edits == 1);
  CHECK(r.total_truth_labels == 20);
  CHECK(r.score == 0.05);
  CHECK(r.per_video[4].edits == 1);
  CHECK(r.per_video[4].normalized == 0.5);
}

TEST_CASE("constant wrong predictions match the per-video search sum") {
  const std::vector<std::vector<int>> truths{{1, 2, 3}, {2, 2}, {3, 1, 1, 2}, {1}};
  const BatchManifest m = manifest_with(truths);
  std::map<std::string, std::vector<int>> p;
  for (const auto& t : m.test) p[t.path] = {5};
  long total = 0;
  for (const auto& t : truths) total += oracle::edit_search(t, {5}, {1, 2, 3, 5});
  const ScoreReport r = batch_score(m, p);
  CHECK(r.total_edits == total);
  CHECK(r.score == static_cast<double>(total) / 10.0);
}

TEST_CASE("batch score ignores manifest order") {
  const std::vector<std::vector<int>> truths{{1, 2, 3}, {2, 2}, {3, 1, 1, 2}, {1}};
  BatchManifest m = manifest_with(truths);
  std::map<std::string, std::vector<int>> p{{"t0", {1, 3}}, {"t1", {}}, {"t2", {3, 1, 1, 2, 2}}, {"t3", {4}}};
  const double before = batch_score(m, p).score;
  std::reverse(m.test.begin(), m.test.end());
  CHECK(batch_score(m, p).score == before);
}

TEST_CASE("missing prediction names the video") {
  const BatchManifest m = manifest_with({{1}, {2}});
  try {
    batch_score(m, {{"t0", {1}}});
    FAIL("expected ScoringError");
  } catch (const ScoringError& e) {
    CHECK(std::string(e.what()).find("t1") != std::string::npos);
  }
}

TEST_CASE("report serializations") {
  const BatchManifest m = manifest_with({{1, 2}, {3}});
  ScoreReport r = batch_score(m, {{"t0", {1, 2}}, {"t1", {2}}});
  r.wall_seconds = 1.5;
  const std::string tsv = r.to_tsv();
  CHECK(tsv.rfind("2\t1\t3\t", 0) == 0);
  CHECK(std::count(tsv.begin(), tsv.end(), '\t') == 5);
  const std::string json = r.to_json();
  CHECK(json.find("\"score\"") != std::string::npos);
  CHECK(json.find("\"per_video\"") != std::string::npos);
}
