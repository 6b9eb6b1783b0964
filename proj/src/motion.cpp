#include "pmc/motion.hpp"

#include "pmc/error.hpp"

#include <algorithm>
#include <cmath>

namespace pmc {

GridDims grid_for_scale(int width, int height, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ParameterError("gamma must lie in (0,1], got " + std::to_string(gamma));
  }
  const GridDims grid{static_cast<int>(std::lround(height * gamma)),
                      static_cast<int>(std::lround(width * gamma))};
  if (grid.rows < 1 || grid.cols < 1) {
    throw ParameterError("gamma " + std::to_string(gamma) + " shrinks a " + std::to_string(width) +
                         "x" + std::to_string(height) + " frame to an empty grid");
  }
  return grid;
}

std::vector<Image> difference_images(const Video& video) {
  std::vector<Image> out;
  const auto& frames = video.frames();
  if (frames.size() < 2) return out;
  out.reserve(frames.size() - 1);
  out.push_back(Image::Zero(video.height(), video.width()));
  for (std::size_t k = 1; k + 1 < frames.size(); ++k) {
    out.push_back((frames[k + 1].pixels() - frames[k].pixels()).abs());
  }
  return out;
}

Image expand_motion(const Image& diff, int tau) {
  const Eigen::Index h = diff.rows();
  const Eigen::Index w = diff.cols();
  if (tau < 0 || tau >= std::min(h, w)) {
    throw ParameterError("tau must satisfy 0 <= tau < min(w,h) = " +
                         std::to_string(std::min(h, w)) + ", got " + std::to_string(tau));
  }
  Image out = diff;
  if (tau == 0) {
    out += diff;
    out += diff;
    out += diff;
    out += diff;
    return out;
  }
  // Same accumulation order as the defining sum: x+tau, x-tau, y+tau, y-tau.
  out.leftCols(w - tau) += diff.rightCols(w - tau);
  out.rightCols(w - tau) += diff.leftCols(w - tau);
  out.topRows(h - tau) += diff.bottomRows(h - tau);
  out.bottomRows(h - tau) += diff.topRows(h - tau);
  return out;
}

namespace {

// round(k * n / parts) in exact integer arithmetic, halves rounded up.
int boundary(int k, int n, int parts) {
  return static_cast<int>((2LL * k * n + parts) / (2LL * parts));
}

}  // namespace

MotionMap pool_to_shape(const Image& diff, GridDims grid) {
  const int h = static_cast<int>(diff.rows());
  const int w = static_cast<int>(diff.cols());
  if (grid.rows < 1 || grid.cols < 1 || grid.rows > h || grid.cols > w) {
    throw ParameterError("pooling grid " + std::to_string(grid.rows) + "x" +
                         std::to_string(grid.cols) + " does not fit a " + std::to_string(w) + "x" +
                         std::to_string(h) + " image");
  }
  MotionMap map{Eigen::VectorXd(grid.size()), grid};
  for (int r = 0; r < grid.rows; ++r) {
    const int y0 = boundary(r, h, grid.rows);
    const int y1 = boundary(r + 1, h, grid.rows);
    for (int c = 0; c < grid.cols; ++c) {
      const int x0 = boundary(c, w, grid.cols);
      const int x1 = boundary(c + 1, w, grid.cols);
      double sum = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) sum += std::abs(diff(y, x));
      }
      map.values[r * grid.cols + c] = sum / (static_cast<double>(y1 - y0) * (x1 - x0));
    }
  }
  return map;
}

MotionMap pool_to_grid(const Image& diff, double gamma) {
  return pool_to_shape(diff,
                       grid_for_scale(static_cast<int>(diff.cols()), static_cast<int>(diff.rows()), gamma));
}

BagOfFrames bag_of_frames(const Video& video, const MotionParams& params) {
  const GridDims grid = grid_for_scale(video.width(), video.height(), params.gamma);
  if (params.tau < 0 || params.tau >= std::min(video.width(), video.height())) {
    throw ParameterError("tau must satisfy 0 <= tau < min(w,h) = " +
                         std::to_string(std::min(video.width(), video.height())) + ", got " +
                         std::to_string(params.tau));
  }
  const auto diffs = difference_images(video);
  if (diffs.empty()) {
    return {Eigen::MatrixXd::Zero(1, grid.size()), grid, video.id()};
  }
  BagOfFrames bag{Eigen::MatrixXd(static_cast<Eigen::Index>(diffs.size()), grid.size()), grid,
                  video.id()};
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    bag.rows.row(static_cast<Eigen::Index>(i)) =
        pool_to_shape(expand_motion(diffs[i], params.tau), grid).values.transpose();
  }
  return bag;
}

}  // namespace pmc
