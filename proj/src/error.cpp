#include "pmc/error.hpp"

namespace pmc {
namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string out = "manifest invalid:";
  for (const auto& v : violations) {
    out += "\n  - ";
    out += v;
  }
  return out;
}

}  // namespace

ManifestInvalid::ManifestInvalid(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

}  // namespace pmc
