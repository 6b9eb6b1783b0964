#include "pmc/frameio.hpp"

#include "pmc/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

namespace pmc {

namespace fs = std::filesystem;
using nlohmann::json;

Modality parse_modality(const std::string& name) {
  if (name == "rgb" || name == "rgb-gray" || name == "gray") return Modality::RgbGray;
  if (name == "depth") return Modality::Depth;
  throw ParameterError("unknown modality '" + name + "' (expected rgb or depth)");
}

std::string to_string(Modality m) {
  return m == Modality::Depth ? "depth" : "rgb-gray";
}

Frame::Frame(Image pixels) : pixels_(std::move(pixels)) {
  if (pixels_.rows() < 1 || pixels_.cols() < 1) {
    throw ParameterError("frame must be at least 1x1");
  }
  if (!((pixels_ >= 0.0).all() && (pixels_ <= 1.0).all())) {
    throw ParameterError("frame intensities must lie in [0,1]");
  }
}

Video::Video(std::string id, Modality modality, std::vector<Frame> frames)
    : id_(std::move(id)), modality_(modality), frames_(std::move(frames)) {
  if (frames_.empty()) throw UsageError("video '" + id_ + "' has no frames");
  const int w = frames_.front().width();
  const int h = frames_.front().height();
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    if (frames_[i].width() != w || frames_[i].height() != h) {
      throw DimensionMismatch("video '" + id_ + "': frame " + std::to_string(i + 1) + " is " +
                              std::to_string(frames_[i].width()) + "x" +
                              std::to_string(frames_[i].height()) + ", expected " +
                              std::to_string(w) + "x" + std::to_string(h));
    }
  }
}

Video Video::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > frames_.size()) {
    throw UsageError("invalid slice [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") of video '" + id_ + "' with " + std::to_string(frames_.size()) +
                     " frames");
  }
  return Video(id_, modality_, {frames_.begin() + static_cast<std::ptrdiff_t>(begin),
                                frames_.begin() + static_cast<std::ptrdiff_t>(end)});
}

// ---------------------------------------------------------------------------
// PGM

namespace {

// Reads the next whitespace-delimited header token, skipping # comments.
std::string next_token(const std::string& buf, std::size_t& pos) {
  while (pos < buf.size()) {
    const char ch = buf[pos];
    if (ch == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
  return buf.substr(start, pos - start);
}

int parse_positive(const std::string& token, const fs::path& file, const char* what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value < 1) {
    throw FormatError(file.string() + ": bad PGM " + what + " '" + token + "'");
  }
  return value;
}

}  // namespace

Frame read_pgm(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError(file.string() + ": cannot open");
  const std::string buf{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

  std::size_t pos = 0;
  if (next_token(buf, pos) != "P5") throw FormatError(file.string() + ": not a binary PGM (P5)");
  const int width = parse_positive(next_token(buf, pos), file, "width");
  const int height = parse_positive(next_token(buf, pos), file, "height");
  const int maxval = parse_positive(next_token(buf, pos), file, "maxval");
  if (maxval != 255) {
    throw FormatError(file.string() + ": unsupported maxval " + std::to_string(maxval));
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= buf.size()) throw FormatError(file.string() + ": truncated header");
  ++pos;

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (buf.size() - pos < count) {
    throw FormatError(file.string() + ": truncated raster (" + std::to_string(buf.size() - pos) +
                      " of " + std::to_string(count) + " bytes)");
  }
  Image px(height, width);
  for (std::size_t i = 0; i < count; ++i) {
    px.data()[i] = static_cast<unsigned char>(buf[pos + i]) / 255.0;
  }
  return Frame(std::move(px));
}

void write_pgm(const fs::path& file, const Frame& frame) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw FormatError(file.string() + ": cannot open for writing");
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  const Image& px = frame.pixels();
  std::string raster(static_cast<std::size_t>(px.size()), '\0');
  for (Eigen::Index i = 0; i < px.size(); ++i) {
    raster[static_cast<std::size_t>(i)] =
        static_cast<char>(static_cast<unsigned char>(std::lround(px.data()[i] * 255.0)));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw FormatError(file.string() + ": write failed");
}

std::string frame_file_name(std::size_t zero_based_index) {
  std::string digits = std::to_string(zero_based_index + 1);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return "frame_" + digits + ".pgm";
}

Video load_video(const fs::path& dir, Modality modality, std::string id) {
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + ": not a directory");

  std::map<long, fs::path> indexed;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() != 15 || name.rfind("frame_", 0) != 0 || name.substr(11) != ".pgm") continue;
    long index = 0;
    const auto [ptr, ec] = std::from_chars(name.data() + 6, name.data() + 11, index);
    if (ec != std::errc{} || ptr != name.data() + 11) continue;
    indexed.emplace(index, entry.path());
  }
  if (indexed.empty()) throw FormatError(dir.string() + ": no frame_NNNNN.pgm files");

  std::vector<Frame> frames;
  frames.reserve(indexed.size());
  long expected = 1;
  for (const auto& [index, path] : indexed) {
    if (index != expected) {
      throw FormatError((dir / frame_file_name(static_cast<std::size_t>(expected - 1))).string() +
                        ": missing (frames must be numbered consecutively from 1)");
    }
    Frame f = read_pgm(path);
    if (!frames.empty() &&
        (f.width() != frames.front().width() || f.height() != frames.front().height())) {
      throw DimensionMismatch(path.string() + ": " + std::to_string(f.width()) + "x" +
                              std::to_string(f.height()) + " differs from " +
                              std::to_string(frames.front().width()) + "x" +
                              std::to_string(frames.front().height()));
    }
    frames.push_back(std::move(f));
    ++expected;
  }
  if (id.empty()) id = dir.string();
  return Video(std::move(id), modality, std::move(frames));
}

void write_video(const fs::path& dir, const Video& video) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < video.size(); ++i) {
    write_pgm(dir / frame_file_name(i), video.frames()[i]);
  }
}

// ---------------------------------------------------------------------------
// Manifest

fs::path BatchManifest::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<std::string> manifest_violations(const BatchManifest& m) {
  std::vector<std::string> out;
  if (m.frame_width < 1 || m.frame_height < 1) {
    out.push_back("frame dimensions must be positive, got " + std::to_string(m.frame_width) +
                  "x" + std::to_string(m.frame_height));
  }
  if (m.train.empty()) out.push_back("no training videos");

  std::map<int, int> counts;
  int max_label = 0;
  for (const auto& t : m.train) {
    if (t.label < 1) {
      out.push_back("training label " + std::to_string(t.label) + " is not positive (" + t.path +
                    ")");
      continue;
    }
    ++counts[t.label];
    max_label = std::max(max_label, t.label);
  }
  for (const auto& [label, n] : counts) {
    if (n > 1) {
      out.push_back("duplicate training label " + std::to_string(label) + " (" +
                    std::to_string(n) + " videos)");
    }
  }
  for (int label = 1; label <= max_label; ++label) {
    if (!counts.contains(label)) {
      out.push_back("label gap: no training video for label " + std::to_string(label));
    }
  }

  for (const auto& t : m.test) {
    if (t.truth.empty() || t.truth.size() > 5) {
      out.push_back("test video " + t.path + ": truth length " + std::to_string(t.truth.size()) +
                    " outside [1,5]");
    }
    for (int label : t.truth) {
      if (label < 1 || label > max_label) {
        out.push_back("test video " + t.path + ": truth label " + std::to_string(label) +
                      " outside 1.." + std::to_string(max_label));
      }
    }
  }
  return out;
}

namespace {

template <typename T>
T required(const json& obj, const char* key, std::vector<std::string>& errors) {
  if (!obj.is_object() || !obj.contains(key)) {
    errors.push_back(std::string("missing field '") + key + "'");
    return T{};
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    errors.push_back(std::string("field '") + key + "' has the wrong type");
    return T{};
  }
}

}  // namespace

BatchManifest load_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError(file.string() + ": cannot open manifest");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(file.string() + ": " + e.what());
  }

  std::vector<std::string> errors;
  BatchManifest m;
  m.base_dir = file.parent_path();
  m.frame_width = required<int>(doc, "frame_width", errors);
  m.frame_height = required<int>(doc, "frame_height", errors);
  for (const auto& t : required<std::vector<json>>(doc, "train", errors)) {
    m.train.push_back({required<std::string>(t, "path", errors), required<int>(t, "label", errors)});
  }
  for (const auto& t : required<std::vector<json>>(doc, "test", errors)) {
    m.test.push_back(
        {required<std::string>(t, "path", errors), required<std::vector<int>>(t, "truth", errors)});
  }
  if (!errors.empty()) throw ManifestInvalid(std::move(errors));

  auto violations = manifest_violations(m);
  if (!violations.empty()) throw ManifestInvalid(std::move(violations));
  return m;
}

void save_manifest(const fs::path& file, const BatchManifest& m) {
  json doc;
  doc["frame_width"] = m.frame_width;
  doc["frame_height"] = m.frame_height;
  doc["train"] = json::array();
  for (const auto& t : m.train) doc["train"].push_back({{"path", t.path}, {"label", t.label}});
  doc["test"] = json::array();
  for (const auto& t : m.test) doc["test"].push_back({{"path", t.path}, {"truth", t.truth}});
  std::ofstream out(file);
  if (!out) throw FormatError(file.string() + ": cannot open for writing");
  out << doc.dump(2) << '\n';
}

}  // namespace pmc
