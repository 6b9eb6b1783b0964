#include "pmc/config.hpp"

#include "pmc/error.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <iterator>

namespace pmc {

namespace {

template <typename T>
void overlay(const nlohmann::json& doc, const char* key, T& field) {
  if (doc.contains(key)) field = doc.at(key).get<T>();
}

}  // namespace

Config Config::from_json(const std::string& text, Config base) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw ParameterError("config must be a JSON object");
    overlay(doc, "tau", base.train.motion.tau);
    overlay(doc, "gamma", base.train.motion.gamma);
    overlay(doc, "components", base.train.components);
    overlay(doc, "jobs", base.jobs);
    if (doc.contains("modality")) base.modality = parse_modality(doc.at("modality").get<std::string>());
    if (doc.contains("segmentation")) {
      const auto& seg = doc.at("segmentation");
      overlay(seg, "coarse_rows", base.segmentation.coarse.rows);
      overlay(seg, "coarse_cols", base.segmentation.coarse.cols);
      overlay(seg, "min_length", base.segmentation.min_length);
      overlay(seg, "max_length", base.segmentation.max_length);
      overlay(seg, "quiescence", base.segmentation.quiescence);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return base;
}

Config Config::load(const std::filesystem::path& file, Config base) {
  std::ifstream in(file);
  if (!in) throw FormatError(file.string() + ": cannot open config");
  return from_json({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}, base);
}

Config Config::from_json(const std::string& text) { return from_json(text, Config{}); }

Config Config::load(const std::filesystem::path& file) { return load(file, Config{}); }

GridDims parse_grid(const std::string& text) {
  const auto x = text.find('x');
  GridDims g;
  if (x != std::string::npos) {
    const char* b = text.data();
    const auto r1 = std::from_chars(b, b + x, g.rows);
    const auto r2 = std::from_chars(b + x + 1, b + text.size(), g.cols);
    if (r1.ec == std::errc{} && r1.ptr == b + x && r2.ec == std::errc{} &&
        r2.ptr == b + text.size() && g.rows > 0 && g.cols > 0) {
      return g;
    }
  }
  throw ParameterError("grid must look like RxC with positive sizes, got '" + text + "'");
}

}  // namespace pmc
