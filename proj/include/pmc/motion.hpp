#pragma once

#include "pmc/frameio.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace pmc {

struct GridDims {
  int rows = 0;
  int cols = 0;

  int size() const noexcept { return rows * cols; }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

// Grid produced by downsizing an h x w image by gamma. Throws ParameterError
// when gamma is outside (0,1] or either side rounds to zero.
GridDims grid_for_scale(int width, int height, double gamma);

// One pooled motion map, rows concatenated.
struct MotionMap {
  Eigen::VectorXd values;
  GridDims grid;
};

// Motion maps of one video stacked row-wise: (N-1) x N_b.
struct BagOfFrames {
  Eigen::MatrixXd rows;
  GridDims grid;
  std::string video_id;
};

struct MotionParams {
  int tau = 5;
  double gamma = 0.1;
};

// |I_{k+1} - I_k| for consecutive frames, with the first difference replaced
// by zeros. N frames give N-1 images; a single-frame video gives none.
std::vector<Image> difference_images(const Video& video);

// D + D shifted by tau in each of the four axis directions, zero padded.
// Requires 0 <= tau < min(w,h).
Image expand_motion(const Image& diff, int tau);

// Block-mean pooling of |D| onto an r x c grid; patch k spans
// [round(k*h/r), round((k+1)*h/r)) rows and the analogous columns.
MotionMap pool_to_shape(const Image& diff, GridDims grid);
MotionMap pool_to_grid(const Image& diff, double gamma);

// difference_images -> expand_motion -> pool_to_grid for each difference.
// A single-frame video yields one all-zero row.
BagOfFrames bag_of_frames(const Video& video, const MotionParams& params);

}  // namespace pmc
