#include <png.h>

#include <cstring>

#include "gpcsense/error.hpp"
#include "gpcsense/perturb.hpp"

namespace gpcsense {

Image read_png(const std::filesystem::path& path) {
  png_image header;
  std::memset(&header, 0, sizeof header);
  header.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&header, path.c_str())) {
    throw ValidationError("cannot read PNG " + path.string() + ": " + header.message);
  }
  const bool color = (header.format & PNG_FORMAT_FLAG_COLOR) != 0;
  header.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image img;
  img.width = static_cast<int>(header.width);
  img.height = static_cast<int>(header.height);
  img.channels = color ? 3 : 1;
  img.pixels.resize(PNG_IMAGE_SIZE(header));
  if (!png_image_finish_read(&header, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string message = header.message;
    png_image_free(&header);
    throw ValidationError("cannot decode PNG " + path.string() + ": " + message);
  }
  validate(img);
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  validate(img);
  png_image header;
  std::memset(&header, 0, sizeof header);
  header.version = PNG_IMAGE_VERSION;
  header.width = static_cast<png_uint_32>(img.width);
  header.height = static_cast<png_uint_32>(img.height);
  header.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&header, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw ValidationError("cannot write PNG " + path.string() + ": " + header.message);
  }
}

}  // namespace gpcsense
