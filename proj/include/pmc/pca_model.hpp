#pragma once

#include "pmc/frameio.hpp"
#include "pmc/motion.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace pmc {

// Singular values at or below this fraction of the largest are treated as 0.
inline constexpr double kSingularValueFloor = 1e-10;

// PCA model of one gesture's bag of frames.
//
// `components` holds the right singular vectors of the centered training
// matrix as columns (N_b x c_effective), each flipped so that its
// largest-magnitude entry is positive. `singular_values` are those of the raw
// centered matrix, strictly descending. A model with no components is valid
// and reconstructs every row as the mean.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd components;
  GridDims grid;

  int c_effective() const noexcept { return static_cast<int>(singular_values.size()); }
  int dimension() const noexcept { return static_cast<int>(mean.size()); }
  bool degenerate() const noexcept { return c_effective() == 0; }
};

// Centers the rows of h, takes the thin SVD and keeps the top
// min(c, rank) directions. Requests above the rank are clamped with a warning.
PcaModel fit_pca(const Eigen::MatrixXd& h, int c, GridDims grid = {});
PcaModel fit_pca(const BagOfFrames& bag, int c);

// (H - mean) * V_c * diag(s^-1/2). Throws ShapeError on a column count
// mismatch and DegenerateModel when the model has no components.
Eigen::MatrixXd project(const Eigen::MatrixXd& h, const PcaModel& model);

// proj * diag(s^+1/2) * V_c^T + mean: the inverse of project() on span(V_c).
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& proj, const PcaModel& model);

// Mean over rows of the Euclidean distance between each row of h and its
// reconstruction. Degenerate models reconstruct every row as the mean.
double reconstruction_error(const Eigen::MatrixXd& h, const PcaModel& model);
double reconstruction_error(const BagOfFrames& bag, const PcaModel& model);

struct TrainParams {
  MotionParams motion;
  int components = 10;

  friend bool operator==(const TrainParams& a, const TrainParams& b) {
    return a.motion.tau == b.motion.tau && a.motion.gamma == b.motion.gamma &&
           a.components == b.components;
  }
};

struct LabeledModel {
  int label = 0;
  PcaModel model;
};

// Gesture models ordered by label 1..K, all sharing grid and params.
class Vocabulary {
 public:
  Vocabulary(TrainParams params, std::vector<LabeledModel> models);

  const TrainParams& params() const noexcept { return params_; }
  const std::vector<LabeledModel>& models() const noexcept { return models_; }
  std::size_t size() const noexcept { return models_.size(); }
  bool empty() const noexcept { return models_.empty(); }
  GridDims grid() const noexcept { return models_.empty() ? GridDims{} : models_.front().model.grid; }
  const PcaModel& model_for(int label) const;

  // JSON document; floats printed with round-trip precision.
  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);

  void save(const std::filesystem::path& file) const;
  static Vocabulary load(const std::filesystem::path& file);

 private:
  TrainParams params_;
  std::vector<LabeledModel> models_;
};

// One model per training video of the manifest. `jobs` bounds the number
// of videos processed concurrently; the result does not depend on it.
Vocabulary train_vocabulary(const BatchManifest& manifest, const TrainParams& params,
                            Modality modality = Modality::RgbGray, int jobs = 1);

// Builds a vocabulary from in-memory bags ordered by label (bag i gets
// label i+1).
Vocabulary train_from_bags(const std::vector<BagOfFrames>& bags, const TrainParams& params);

struct Classification {
  int label = 0;
  std::vector<double> errors;  // errors[k] belongs to models()[k]
};

// Index of the smallest error; the first one wins ties.
std::size_t argmin_error(const std::vector<double>& errors);

// argmin of the reconstruction error; ties go to the lowest label.
Classification classify(const BagOfFrames& bag, const Vocabulary& vocab);

}  // namespace pmc
