#include "pmc/pca_model.hpp"

#include "pmc/error.hpp"
#include "pmc/log.hpp"
#include "pmc/parallel.hpp"

#include "json.hpp"

#include <Eigen/SVD>

#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

namespace pmc {

using ordered_json = nlohmann::ordered_json;

PcaModel fit_pca(const Eigen::MatrixXd& h, int c, GridDims grid) {
  if (h.rows() < 1 || h.cols() < 1) throw UsageError("fit_pca: empty bag of frames");
  if (c < 1) throw ParameterError("number of components must be >= 1, got " + std::to_string(c));

  PcaModel model;
  model.grid = grid.size() == h.cols() ? grid : GridDims{1, static_cast<int>(h.cols())};
  model.mean = h.colwise().mean().transpose();
  const Eigen::MatrixXd centered = h.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s[0] : 0.0;
  int rank = 0;
  if (s_max > 0.0) {
    while (rank < s.size() && s[rank] > kSingularValueFloor * s_max) ++rank;
  }
  if (rank == 0) {
    log::warn("centered " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
              " bag has no variance; model keeps the mean only");
  } else if (c > rank) {
    log::warn("requested " + std::to_string(c) + " components but the bag has rank " +
              std::to_string(rank) + "; clamping");
  }
  const int keep = std::min(c, rank);
  model.singular_values = s.head(keep);
  model.components = svd.matrixV().leftCols(keep);
  for (int k = 0; k < keep; ++k) {
    Eigen::Index arg = 0;
    model.components.col(k).cwiseAbs().maxCoeff(&arg);
    if (model.components(arg, k) < 0.0) model.components.col(k) *= -1.0;
  }
  return model;
}

PcaModel fit_pca(const BagOfFrames& bag, int c) { return fit_pca(bag.rows, c, bag.grid); }

namespace {

void check_columns(const Eigen::MatrixXd& h, const PcaModel& model) {
  if (h.cols() != model.dimension()) {
    throw ShapeError("bag has " + std::to_string(h.cols()) + " columns, model expects " +
                     std::to_string(model.dimension()));
  }
}

}  // namespace

Eigen::MatrixXd project(const Eigen::MatrixXd& h, const PcaModel& model) {
  check_columns(h, model);
  if (model.degenerate()) throw DegenerateModel("project: model has no principal components");
  const Eigen::VectorXd whiten = model.singular_values.array().rsqrt().matrix();
  return ((h.rowwise() - model.mean.transpose()) * model.components) * whiten.asDiagonal();
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& proj, const PcaModel& model) {
  if (model.degenerate()) throw DegenerateModel("reconstruct: model has no principal components");
  if (proj.cols() != model.c_effective()) {
    throw ShapeError("projection has " + std::to_string(proj.cols()) + " columns, model has " +
                     std::to_string(model.c_effective()) + " components");
  }
  const Eigen::VectorXd dewhiten = model.singular_values.array().sqrt().matrix();
  Eigen::MatrixXd r = (proj * dewhiten.asDiagonal()) * model.components.transpose();
  r.rowwise() += model.mean.transpose();
  return r;
}

double reconstruction_error(const Eigen::MatrixXd& h, const PcaModel& model) {
  check_columns(h, model);
  if (h.rows() == 0) throw UsageError("reconstruction_error: empty bag of frames");
  Eigen::MatrixXd residual;
  if (model.degenerate()) {
    residual = h.rowwise() - model.mean.transpose();
  } else {
    residual = reconstruct(project(h, model), model) - h;
  }
  return residual.rowwise().norm().mean();
}

double reconstruction_error(const BagOfFrames& bag, const PcaModel& model) {
  if (bag.grid.size() == model.dimension() && bag.grid != model.grid) {
    throw ShapeError("bag grid " + std::to_string(bag.grid.rows) + "x" +
                     std::to_string(bag.grid.cols) + " differs from model grid " +
                     std::to_string(model.grid.rows) + "x" + std::to_string(model.grid.cols));
  }
  return reconstruction_error(bag.rows, model);
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(TrainParams params, std::vector<LabeledModel> models)
    : params_(params), models_(std::move(models)) {
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (models_[i].label != static_cast<int>(i) + 1) {
      throw UsageError("vocabulary labels must be 1..K in order; position " + std::to_string(i) +
                       " holds label " + std::to_string(models_[i].label));
    }
    if (models_[i].model.grid != models_.front().model.grid) {
      throw ShapeError("vocabulary models disagree on grid dimensions");
    }
  }
}

const PcaModel& Vocabulary::model_for(int label) const {
  if (label < 1 || label > static_cast<int>(models_.size())) {
    throw UsageError("no model for label " + std::to_string(label));
  }
  return models_[static_cast<std::size_t>(label - 1)].model;
}

std::string Vocabulary::to_json() const {
  ordered_json doc;
  doc["params"] = {{"tau", params_.motion.tau},
                   {"gamma", params_.motion.gamma},
                   {"components", params_.components}};
  doc["models"] = ordered_json::array();
  for (const auto& [label, m] : models_) {
    ordered_json entry;
    entry["label"] = label;
    entry["grid"] = {m.grid.rows, m.grid.cols};
    entry["mean"] = std::vector<double>(m.mean.begin(), m.mean.end());
    entry["singular_values"] =
        std::vector<double>(m.singular_values.begin(), m.singular_values.end());
    ordered_json comps = ordered_json::array();
    for (int k = 0; k < m.c_effective(); ++k) {
      const Eigen::VectorXd col = m.components.col(k);
      comps.push_back(std::vector<double>(col.begin(), col.end()));
    }
    entry["components"] = std::move(comps);
    doc["models"].push_back(std::move(entry));
  }
  return doc.dump(1);
}

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Vocabulary Vocabulary::from_json(const std::string& text) {
  try {
    const auto doc = ordered_json::parse(text);
    TrainParams params;
    params.motion.tau = doc.at("params").at("tau").get<int>();
    params.motion.gamma = doc.at("params").at("gamma").get<double>();
    params.components = doc.at("params").at("components").get<int>();

    std::vector<LabeledModel> models;
    for (const auto& entry : doc.at("models")) {
      LabeledModel lm;
      lm.label = entry.at("label").get<int>();
      const auto grid = entry.at("grid").get<std::vector<int>>();
      if (grid.size() != 2) throw FormatError("model grid must be [rows, cols]");
      lm.model.grid = {grid[0], grid[1]};
      lm.model.mean = to_vector(entry.at("mean").get<std::vector<double>>());
      lm.model.singular_values = to_vector(entry.at("singular_values").get<std::vector<double>>());
      const auto comps = entry.at("components").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(comps.size()) != lm.model.c_effective() ||
          lm.model.grid.size() != lm.model.dimension()) {
        throw FormatError("model " + std::to_string(lm.label) + ": inconsistent sizes");
      }
      lm.model.components.resize(lm.model.dimension(), lm.model.c_effective());
      for (std::size_t k = 0; k < comps.size(); ++k) {
        if (static_cast<int>(comps[k].size()) != lm.model.dimension()) {
          throw FormatError("model " + std::to_string(lm.label) + ": component " +
                            std::to_string(k) + " has the wrong length");
        }
        lm.model.components.col(static_cast<Eigen::Index>(k)) = to_vector(comps[k]);
      }
      models.push_back(std::move(lm));
    }
    return Vocabulary(params, std::move(models));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("vocabulary: ") + e.what());
  }
}

void Vocabulary::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw FormatError(file.string() + ": cannot open for writing");
  out << to_json() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError(file.string() + ": cannot open vocabulary");
  return from_json({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

// ---------------------------------------------------------------------------
// Training and classification

Vocabulary train_from_bags(const std::vector<BagOfFrames>& bags, const TrainParams& params) {
  std::vector<LabeledModel> models;
  models.reserve(bags.size());
  for (std::size_t i = 0; i < bags.size(); ++i) {
    models.push_back({static_cast<int>(i) + 1, fit_pca(bags[i], params.components)});
  }
  return Vocabulary(params, std::move(models));
}

namespace {

template <typename E>
[[noreturn]] void rethrow_annotated(const E& e, int label) {
  throw E("gesture " + std::to_string(label) + ": " + e.what());
}

}  // namespace

Vocabulary train_vocabulary(const BatchManifest& manifest, const TrainParams& params,
                            Modality modality, int jobs) {
  std::vector<std::optional<LabeledModel>> slots(manifest.train.size());
  parallel_for(manifest.train.size(), jobs, [&](std::size_t i) {
    const auto& entry = manifest.train[i];
    try {
      const Video video = load_video(manifest.resolve(entry.path), modality, entry.path);
      if (video.width() != manifest.frame_width || video.height() != manifest.frame_height) {
        throw DimensionMismatch(entry.path + ": frames are " + std::to_string(video.width()) +
                                "x" + std::to_string(video.height()) + ", manifest declares " +
                                std::to_string(manifest.frame_width) + "x" +
                                std::to_string(manifest.frame_height));
      }
      slots[i] = LabeledModel{entry.label, fit_pca(bag_of_frames(video, params.motion),
                                                   params.components)};
    } catch (const FormatError& e) {
      rethrow_annotated(e, entry.label);
    } catch (const DimensionMismatch& e) {
      rethrow_annotated(e, entry.label);
    } catch (const ParameterError& e) {
      rethrow_annotated(e, entry.label);
    }
  });

  std::vector<LabeledModel> models;
  models.reserve(slots.size());
  for (auto& s : slots) models.push_back(std::move(*s));
  std::sort(models.begin(), models.end(),
            [](const LabeledModel& a, const LabeledModel& b) { return a.label < b.label; });
  return Vocabulary(params, std::move(models));
}

std::size_t argmin_error(const std::vector<double>& errors) {
  if (errors.empty()) throw UsageError("argmin_error: no candidates");
  std::size_t best = 0;
  for (std::size_t k = 1; k < errors.size(); ++k) {
    if (errors[k] < errors[best]) best = k;
  }
  return best;
}

Classification classify(const BagOfFrames& bag, const Vocabulary& vocab) {
  if (vocab.empty()) throw UsageError("classify: empty vocabulary");
  Classification out;
  out.errors.reserve(vocab.size());
  for (const auto& lm : vocab.models()) out.errors.push_back(reconstruction_error(bag, lm.model));
  out.label = vocab.models()[argmin_error(out.errors)].label;
  return out;
}

}  // namespace pmc
