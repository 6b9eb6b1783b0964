#include "pmc/synth.hpp"

#include "pmc/error.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>

namespace pmc {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Spec

namespace {

template <typename T>
void read_opt(const nlohmann::json& doc, const char* key, T& field) {
  if (doc.contains(key)) field = doc.at(key).get<T>();
}

}  // namespace

SynthSpec SynthSpec::from_json(const std::string& text) {
  SynthSpec s;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw FormatError("synth spec must be a JSON object");
    read_opt(doc, "gestures", s.gestures);
    read_opt(doc, "static_gestures", s.static_gestures);
    read_opt(doc, "width", s.width);
    read_opt(doc, "height", s.height);
    read_opt(doc, "frames_per_gesture", s.frames_per_gesture);
    read_opt(doc, "test_videos", s.test_videos);
    read_opt(doc, "min_gestures_per_video", s.min_gestures_per_video);
    read_opt(doc, "max_gestures_per_video", s.max_gestures_per_video);
    read_opt(doc, "min_gap", s.min_gap);
    read_opt(doc, "max_gap", s.max_gap);
    read_opt(doc, "noise_sigma", s.noise_sigma);
    read_opt(doc, "blob_sigma", s.blob_sigma);
    read_opt(doc, "blob_amplitude", s.blob_amplitude);
    read_opt(doc, "background", s.background);
    read_opt(doc, "seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("synth spec: ") + e.what());
  }
  return s;
}

std::string SynthSpec::to_json() const {
  ordered_json doc{{"gestures", gestures},
                   {"static_gestures", static_gestures},
                   {"width", width},
                   {"height", height},
                   {"frames_per_gesture", frames_per_gesture},
                   {"test_videos", test_videos},
                   {"min_gestures_per_video", min_gestures_per_video},
                   {"max_gestures_per_video", max_gestures_per_video},
                   {"min_gap", min_gap},
                   {"max_gap", max_gap},
                   {"noise_sigma", noise_sigma},
                   {"blob_sigma", blob_sigma},
                   {"blob_amplitude", blob_amplitude},
                   {"background", background},
                   {"seed", seed}};
  return doc.dump(2);
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& what) { throw ParameterError("synth spec: " + what); };
  if (gestures < 1) fail("gestures must be >= 1");
  if (static_gestures < 0 || static_gestures > gestures) fail("static_gestures outside [0, gestures]");
  if (gestures - static_gestures > kDynamicFamilies) {
    fail("at most " + std::to_string(kDynamicFamilies) + " dynamic trajectory families exist, " +
         std::to_string(gestures - static_gestures) + " requested");
  }
  if (static_gestures > kStaticFamilies) {
    fail("at most " + std::to_string(kStaticFamilies) + " static families exist, " +
         std::to_string(static_gestures) + " requested");
  }
  if (width < 8 || height < 8) fail("frames must be at least 8x8");
  if (frames_per_gesture < 2) fail("frames_per_gesture must be >= 2");
  if (test_videos < 1) fail("test_videos must be >= 1");
  if (min_gestures_per_video < 1 || max_gestures_per_video > 5 ||
      min_gestures_per_video > max_gestures_per_video) {
    fail("gestures per test video must satisfy 1 <= min <= max <= 5");
  }
  if (min_gap < 1 || max_gap < min_gap) fail("gaps must satisfy 1 <= min_gap <= max_gap");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (!(blob_sigma > 0.0)) fail("blob_sigma must be > 0");
  if (!(background >= 0.0 && background + blob_amplitude <= 1.0 && blob_amplitude > 0.0)) {
    fail("background and blob_amplitude must keep intensities within [0,1]");
  }
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

struct Point {
  double x;
  double y;
};

// Normalized [0,1]^2 position along a trajectory, t in [0,1].
using Trajectory = Point (*)(double);

double tri(double t) { return 1.0 - std::abs(2.0 * (t - std::floor(t)) - 1.0); }  // 0..1..0

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const std::array<Trajectory, kDynamicFamilies> kTrajectories = {
    // horizontal sweep, middle
    +[](double t) { return Point{0.15 + 0.7 * t, 0.5}; },
    // vertical sweep, centre
    +[](double t) { return Point{0.5, 0.15 + 0.7 * t}; },
    // main diagonal
    +[](double t) { return Point{0.15 + 0.7 * t, 0.15 + 0.7 * t}; },
    // anti-diagonal
    +[](double t) { return Point{0.85 - 0.7 * t, 0.15 + 0.7 * t}; },
    // circle around the centre
    +[](double t) { return Point{0.5 + 0.3 * std::cos(kTwoPi * t), 0.5 + 0.3 * std::sin(kTwoPi * t)}; },
    // horizontal zig-zag, upper band
    +[](double t) { return Point{0.15 + 0.7 * t, 0.15 + 0.2 * tri(3.0 * t)}; },
    // vertical zig-zag, left band
    +[](double t) { return Point{0.15 + 0.2 * tri(3.0 * t), 0.15 + 0.7 * t}; },
    // small circle, lower right
    +[](double t) { return Point{0.72 + 0.13 * std::cos(kTwoPi * t), 0.72 + 0.13 * std::sin(kTwoPi * t)}; },
    // figure eight
    +[](double t) { return Point{0.5 + 0.32 * std::sin(kTwoPi * t), 0.5 + 0.2 * std::sin(2.0 * kTwoPi * t)}; },
    // small square, upper right
    +[](double t) {
      const double u = 4.0 * (t - std::floor(t));
      const double s = u - std::floor(u);
      switch (static_cast<int>(u) % 4) {
        case 0: return Point{0.62 + 0.22 * s, 0.2};
        case 1: return Point{0.84, 0.2 + 0.22 * s};
        case 2: return Point{0.84 - 0.22 * s, 0.42};
        default: return Point{0.62, 0.42 - 0.22 * s};
      }
    },
    // horizontal sweep, lower band
    +[](double t) { return Point{0.15 + 0.7 * t, 0.85}; },
    // vertical sweep, right band
    +[](double t) { return Point{0.85, 0.15 + 0.7 * t}; },
};

const std::array<Point, kStaticFamilies> kStaticSpots = {
    Point{0.3, 0.3}, Point{0.7, 0.3}, Point{0.3, 0.7}, Point{0.7, 0.7}};

constexpr int kRamp = 3;

double quantize(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

Image background(const SynthSpec& spec) {
  return Image::Constant(spec.height, spec.width, spec.background);
}

// Gaussian blob in pixel coordinates added on top of the background.
Image blob_frame(const SynthSpec& spec, double cx, double cy, double amplitude) {
  Image img = background(spec);
  const double inv = 1.0 / (2.0 * spec.blob_sigma * spec.blob_sigma);
  for (int y = 0; y < spec.height; ++y) {
    const double dy2 = (y - cy) * (y - cy);
    for (int x = 0; x < spec.width; ++x) {
      img(y, x) += amplitude * std::exp(-((x - cx) * (x - cx) + dy2) * inv);
    }
  }
  return img;
}

std::vector<Image> gesture_images(const SynthSpec& spec, int label) {
  const int frames = spec.frames_per_gesture;
  const int dynamic = spec.gestures - spec.static_gestures;
  const bool is_static = label > dynamic;
  const double margin_w = spec.width - 1.0;
  const double margin_h = spec.height - 1.0;
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / (frames - 1);
    const double envelope =
        std::min({1.0, (f + 1.0) / kRamp, static_cast<double>(frames - f) / kRamp});
    Point p{};
    if (is_static) {
      p = kStaticSpots[static_cast<std::size_t>(label - dynamic - 1)];
    } else {
      p = kTrajectories[static_cast<std::size_t>(label - 1)](t);
    }
    double cx = p.x * margin_w;
    double cy = p.y * margin_h;
    if (is_static) cx += std::sin(kTwoPi * 3.0 * t);  // tremor, 1 px
    out.push_back(blob_frame(spec, cx, cy, spec.blob_amplitude * envelope));
  }
  return out;
}

// Deterministic across standard libraries: only raw mt19937_64 output is used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Frame finish(Image img, double sigma, Rng& rng) {
  if (sigma > 0.0) {
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] += sigma * rng.gaussian();
  }
  return Frame(img.unaryExpr(&quantize));
}

std::string numbered(const char* prefix, int n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

Video render_gesture(const SynthSpec& spec, int label, std::string id) {
  spec.validate();
  if (label < 1 || label > spec.gestures) {
    throw ParameterError("label " + std::to_string(label) + " outside 1.." +
                         std::to_string(spec.gestures));
  }
  Rng unused(0);
  std::vector<Frame> frames;
  for (auto& img : gesture_images(spec, label)) frames.push_back(finish(std::move(img), 0.0, unused));
  if (id.empty()) id = numbered("train/g", label, 2);
  return Video(std::move(id), Modality::RgbGray, std::move(frames));
}

SynthBatch render_batch(const SynthSpec& spec) {
  spec.validate();
  SynthBatch batch{spec, {}, {}};
  std::vector<std::vector<Image>> clean;
  for (int label = 1; label <= spec.gestures; ++label) {
    clean.push_back(gesture_images(spec, label));
    batch.train.push_back(render_gesture(spec, label));
  }

  Rng rng(spec.seed);
  const Image rest = background(spec);
  for (int v = 0; v < spec.test_videos; ++v) {
    const int count = rng.uniform_int(spec.min_gestures_per_video, spec.max_gestures_per_video);
    std::vector<int> truth;
    for (int g = 0; g < count; ++g) truth.push_back(rng.uniform_int(1, spec.gestures));

    std::vector<Frame> frames;
    std::vector<Span> spans;
    auto quiet = [&](int n) {
      for (int i = 0; i < n; ++i) frames.push_back(finish(rest, spec.noise_sigma, rng));
    };
    quiet(rng.uniform_int(spec.min_gap, spec.max_gap));
    for (int label : truth) {
      const int start = static_cast<int>(frames.size());
      for (const auto& img : clean[static_cast<std::size_t>(label - 1)]) {
        frames.push_back(finish(img, spec.noise_sigma, rng));
      }
      spans.push_back({start, static_cast<int>(frames.size())});
      quiet(rng.uniform_int(spec.min_gap, spec.max_gap));
    }
    batch.test.push_back({Video(numbered("test/t", v + 1, 3), Modality::RgbGray, std::move(frames)),
                          std::move(truth), std::move(spans)});
  }
  return batch;
}

BatchManifest write_batch(const SynthBatch& batch, const fs::path& out) {
  fs::create_directories(out);
  BatchManifest manifest;
  manifest.frame_width = batch.spec.width;
  manifest.frame_height = batch.spec.height;
  manifest.base_dir = out;
  for (std::size_t i = 0; i < batch.train.size(); ++i) {
    const Video& v = batch.train[i];
    write_video(out / v.id(), v);
    manifest.train.push_back({v.id(), static_cast<int>(i) + 1});
  }
  std::vector<SegmentationResult> truth_spans;
  for (const auto& t : batch.test) {
    write_video(out / t.video.id(), t.video);
    manifest.test.push_back({t.video.id(), t.truth});
    truth_spans.push_back({t.video.id(), t.spans});
  }
  save_manifest(out / "manifest.json", manifest);

  std::ofstream spans(out / "truth_spans.json");
  spans << segmentations_to_json(truth_spans) << '\n';
  std::ofstream spec(out / "spec.json");
  spec << batch.spec.to_json() << '\n';
  if (!spans || !spec) throw FormatError(out.string() + ": failed writing batch metadata");
  return manifest;
}

BatchManifest generate_batch(const SynthSpec& spec, const fs::path& out) {
  return write_batch(render_batch(spec), out);
}

}  // namespace pmc
