#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gpcsense {

/// 8-bit image, row-major, channels interleaved. Channels is 1 (gray) or 3 (RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int width, int height, int channels, std::uint8_t value = 0);

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

  bool operator==(const Image&) const = default;
};

void validate(const Image& img);

/// Resampling options shared by the geometric transforms.
struct WarpOptions {
  std::uint8_t fill = 0;
  /// Pinhole focal length for tilt, in pixels; defaults to the image height.
  std::optional<double> focal_length;
};

/// Scales every sample by `factor`, rounding half away from zero and
/// saturating at 255.
Image brightness(const Image& img, double factor);

/// Rotation about ((w-1)/2, (h-1)/2); positive angles turn the content
/// counter-clockwise as displayed. Inverse mapping with bilinear
/// interpolation; reads outside the source take the fill value.
Image rotate(const Image& img, double degrees, const WarpOptions& options = {});

/// Perspective view of the image plane turned about its horizontal center
/// axis by `degrees`, seen through a pinhole camera at distance f on the
/// optical axis. Positive angles push the bottom edge away from the camera.
/// Requires |degrees| < 90.
Image tilt(const Image& img, double degrees, const WarpOptions& options = {});

enum class PerturbationKind { brightness, rotation, tilt };

std::string to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(const std::string& text);

struct Perturbation {
  PerturbationKind kind;
  std::string parameter;
};

/// Ordered transform list. Each kind may appear once; entries are kept in
/// the canonical application order brightness, rotation, tilt.
class PerturbationSpec {
 public:
  explicit PerturbationSpec(std::vector<Perturbation> steps, WarpOptions options = {});

  const std::vector<Perturbation>& steps() const { return steps_; }
  const WarpOptions& options() const { return options_; }

 private:
  std::vector<Perturbation> steps_;
  WarpOptions options_;
};

/// T(x, xi): applies every step of the spec with its named parameter value.
Image apply(const PerturbationSpec& spec, const Image& img, const std::map<std::string, double>& xi_phys);

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace gpcsense
