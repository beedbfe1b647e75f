#include "causalign/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "causalign/error.hpp"

namespace causalign {

namespace {

unsigned char to_byte(double v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

ImageTensor read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("missing image file: " + path.string());
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  std::vector<double> data(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) data[i] = buffer[i] / 255.0;
  return ImageTensor(static_cast<int>(image.height), static_cast<int>(image.width), 3, std::move(data));
}

void write_png(const ImageTensor& image, const std::filesystem::path& path) {
  require(image.channels() == 3, "PNG output needs a 3-channel image");
  image.validate();
  std::vector<unsigned char> buffer(image.size());
  const auto data = image.data();
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = to_byte(data[i]);

  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr))
    throw IoError("cannot write PNG " + path.string() + ": " + png.message);
}

ImageTensor quantize_8bit(const ImageTensor& image) {
  ImageTensor out = image;
  for (double& v : out.data()) v = to_byte(v) / 255.0;
  return out;
}

}  // namespace causalign
