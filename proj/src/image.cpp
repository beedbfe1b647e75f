#include "causalign/image.hpp"

#include <cmath>
#include <string>

#include "causalign/error.hpp"

namespace causalign {

namespace {

void check_shape(int height, int width, int channels) {
  require(height >= 1 && width >= 1 && channels >= 1,
          "image dimensions must be positive, got " + std::to_string(height) + "x" +
              std::to_string(width) + "x" + std::to_string(channels));
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_shape(height, width, channels);
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  validate();
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_shape(height, width, channels);
  require(data_.size() == static_cast<std::size_t>(height) * width * channels,
          "image data size does not match its shape");
  validate();
}

void ImageTensor::validate() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double v = data_[i];
    if (!std::isfinite(v)) throw ValidationError("non-finite pixel value at index " + std::to_string(i));
    if (v < 0.0 || v > 1.0)
      throw ValidationError("pixel value " + std::to_string(v) + " outside [0, 1] at index " + std::to_string(i));
  }
}

}  // namespace causalign
