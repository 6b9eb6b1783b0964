#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace pmc {

// Row-major h x w grid of reals. Used for frames and difference images.
using Image = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Modality { RgbGray, Depth };

Modality parse_modality(const std::string& name);
std::string to_string(Modality m);

// One grayscale frame with intensities normalized to [0,1].
class Frame {
 public:
  // Throws ParameterError when empty or any value falls outside [0,1].
  explicit Frame(Image pixels);

  int width() const noexcept { return static_cast<int>(pixels_.cols()); }
  int height() const noexcept { return static_cast<int>(pixels_.rows()); }
  const Image& pixels() const noexcept { return pixels_; }

 private:
  Image pixels_;
};

// Ordered, non-empty frame sequence with uniform frame size.
class Video {
 public:
  // Throws DimensionMismatch on mixed frame sizes, UsageError when empty.
  Video(std::string id, Modality modality, std::vector<Frame> frames);

  const std::string& id() const noexcept { return id_; }
  Modality modality() const noexcept { return modality_; }
  const std::vector<Frame>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return frames_.size(); }
  int width() const noexcept { return frames_.front().width(); }
  int height() const noexcept { return frames_.front().height(); }

  // Frames [begin, end) as a new video sharing id and modality.
  Video slice(std::size_t begin, std::size_t end) const;

 private:
  std::string id_;
  Modality modality_;
  std::vector<Frame> frames_;
};

// Binary PGM (P5, maxval 255) helpers. Bytes map to byte/255.
Frame read_pgm(const std::filesystem::path& file);
void write_pgm(const std::filesystem::path& file, const Frame& frame);

// Zero-padded, 1-based frame file name: frame_00001.pgm.
std::string frame_file_name(std::size_t zero_based_index);

// Loads frame_00001.pgm ... frame_NNNNN.pgm from a directory. The numbering
// must be consecutive from 1; other files are ignored.
Video load_video(const std::filesystem::path& dir, Modality modality = Modality::RgbGray,
                 std::string id = {});

// Writes every frame of the video into dir using frame_file_name().
void write_video(const std::filesystem::path& dir, const Video& video);

struct TrainEntry {
  std::string path;
  int label = 0;
};

struct TestEntry {
  std::string path;
  std::vector<int> truth;
};

struct BatchManifest {
  int frame_width = 0;
  int frame_height = 0;
  std::vector<TrainEntry> train;
  std::vector<TestEntry> test;
  // Directory relative paths are resolved against.
  std::filesystem::path base_dir;

  int vocabulary_size() const noexcept { return static_cast<int>(train.size()); }
  std::filesystem::path resolve(const std::string& path) const;
};

// Every invariant violation found, in a stable order. Empty means valid.
std::vector<std::string> manifest_violations(const BatchManifest& manifest);

BatchManifest load_manifest(const std::filesystem::path& file);
void save_manifest(const std::filesystem::path& file, const BatchManifest& manifest);

}  // namespace pmc
