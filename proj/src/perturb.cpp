#include "gpcsense/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gpcsense/error.hpp"

namespace gpcsense {

Image::Image(int w, int h, int c, std::uint8_t value)
    : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, value) {
  validate(*this);
}

void validate(const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw ValidationError("image dimensions must be positive");
  if (img.channels != 1 && img.channels != 3) throw ValidationError("image must have 1 or 3 channels");
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * img.channels) {
    throw ValidationError("image pixel buffer size does not match its dimensions");
  }
}

namespace {

std::uint8_t to_byte(double value) { return static_cast<std::uint8_t>(std::clamp(std::round(value), 0.0, 255.0)); }

double read_or_fill(const Image& img, int x, int y, int c, double fill) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return fill;
  return img.at(x, y, c);
}

double bilinear(const Image& img, double x, double y, int c, double fill) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  // Far outside: avoid int overflow, every tap is fill anyway.
  if (fx0 < -2.0 || fy0 < -2.0 || fx0 > img.width + 1.0 || fy0 > img.height + 1.0) return fill;
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const double top = (1.0 - ax) * read_or_fill(img, x0, y0, c, fill) + ax * read_or_fill(img, x0 + 1, y0, c, fill);
  const double bottom =
      (1.0 - ax) * read_or_fill(img, x0, y0 + 1, c, fill) + ax * read_or_fill(img, x0 + 1, y0 + 1, c, fill);
  return (1.0 - ay) * top + ay * bottom;
}

// Fills every destination pixel from the source position returned by
// `inverse`; a nullopt position takes the fill value.
template <typename InverseMap>
Image warp(const Image& img, std::uint8_t fill, InverseMap inverse) {
  Image out(img.width, img.height, img.channels, fill);
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const auto source = inverse(static_cast<double>(u), static_cast<double>(v));
      if (!source) continue;
      for (int c = 0; c < img.channels; ++c) out.at(u, v, c) = to_byte(bilinear(img, source->first, source->second, c, fill));
    }
  }
  return out;
}

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

}  // namespace

Image brightness(const Image& img, double factor) {
  validate(img);
  if (!std::isfinite(factor) || factor < 0.0) throw ValidationError("brightness factor must be finite and >= 0");
  Image out = img;
  for (auto& sample : out.pixels) sample = to_byte(sample * factor);
  return out;
}

Image rotate(const Image& img, double degrees, const WarpOptions& options) {
  validate(img);
  if (!std::isfinite(degrees)) throw ValidationError("rotation angle must be finite");
  if (degrees == 0.0) return img;
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;
  const double cos_t = std::cos(radians(degrees));
  const double sin_t = std::sin(radians(degrees));
  return warp(img, options.fill, [&](double u, double v) -> std::optional<std::pair<double, double>> {
    const double du = u - cx;
    const double dv = v - cy;
    return std::pair{cx + cos_t * du - sin_t * dv, cy + sin_t * du + cos_t * dv};
  });
}

Image tilt(const Image& img, double degrees, const WarpOptions& options) {
  validate(img);
  if (!std::isfinite(degrees) || std::abs(degrees) >= 90.0) throw ValidationError("tilt angle must satisfy |degrees| < 90");
  if (degrees == 0.0) return img;
  const double f = options.focal_length.value_or(static_cast<double>(img.height));
  if (!(f > 0.0)) throw ValidationError("tilt focal length must be positive");
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;
  const double cos_t = std::cos(radians(degrees));
  const double sin_t = std::sin(radians(degrees));
  // Plane point (x, y) projects to (f x / (f + y sin), f y cos / (f + y sin)).
  return warp(img, options.fill, [&](double u, double v) -> std::optional<std::pair<double, double>> {
    const double du = u - cx;
    const double dv = v - cy;
    const double denom = f * cos_t - dv * sin_t;
    if (!(denom > 0.0)) return std::nullopt;  // beyond the horizon
    const double y = dv * f / denom;
    const double x = du * (f + y * sin_t) / f;
    return std::pair{cx + x, cy + y};
  });
}

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::brightness:
      return "brightness";
    case PerturbationKind::rotation:
      return "rotation";
    case PerturbationKind::tilt:
      return "tilt";
  }
  return "?";
}

PerturbationKind perturbation_kind_from_string(const std::string& text) {
  if (text == "brightness") return PerturbationKind::brightness;
  if (text == "rotation") return PerturbationKind::rotation;
  if (text == "tilt") return PerturbationKind::tilt;
  throw ValidationError("unknown perturbation kind '" + text + "'");
}

PerturbationSpec::PerturbationSpec(std::vector<Perturbation> steps, WarpOptions options)
    : steps_(std::move(steps)), options_(options) {
  std::stable_sort(steps_.begin(), steps_.end(),
                   [](const Perturbation& a, const Perturbation& b) { return a.kind < b.kind; });
  for (std::size_t i = 1; i < steps_.size(); ++i) {
    if (steps_[i].kind == steps_[i - 1].kind) {
      throw ValidationError("perturbation '" + to_string(steps_[i].kind) + "' listed more than once");
    }
  }
  for (const auto& step : steps_) {
    if (step.parameter.empty()) throw ValidationError("perturbation needs a parameter name");
  }
}

Image apply(const PerturbationSpec& spec, const Image& img, const std::map<std::string, double>& xi_phys) {
  Image current = img;
  for (const auto& step : spec.steps()) {
    const auto it = xi_phys.find(step.parameter);
    if (it == xi_phys.end()) throw ValidationError("no value for perturbation parameter '" + step.parameter + "'");
    switch (step.kind) {
      case PerturbationKind::brightness:
        current = brightness(current, it->second);
        break;
      case PerturbationKind::rotation:
        current = rotate(current, it->second, spec.options());
        break;
      case PerturbationKind::tilt:
        current = tilt(current, it->second, spec.options());
        break;
    }
  }
  return current;
}

}  // namespace gpcsense
