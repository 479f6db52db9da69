#include "png_io.hpp"

#include "cohere/types.hpp"

#include <png.h>

#include <cstring>

namespace cohere::io {

void write_png(const std::filesystem::path& path, const Image8& image) {
  if (image.channels != 1 && image.channels != 3) throw FormatError("png: unsupported channel count");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw Error("png: cannot write " + path.string() + ": " + msg);
  }
}

Image8 read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw FormatError("png: cannot read " + path.string() + ": " + png.message);
  }
  Image8 out;
  out.width = static_cast<int>(png.width);
  out.height = static_cast<int>(png.height);
  out.channels = (png.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  png.format = out.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  out.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw FormatError("png: decode failed for " + path.string() + ": " + msg);
  }
  return out;
}

}  // namespace cohere::io
