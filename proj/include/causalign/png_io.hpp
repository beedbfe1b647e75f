#pragma once

#include <filesystem>

#include "causalign/image.hpp"

namespace causalign {

/// Reads any PNG as 8-bit RGB; byte b maps to b / 255.
ImageTensor read_png(const std::filesystem::path& path);

/// Writes a 3-channel image as 8-bit RGB; v maps to round(255 * v).
void write_png(const ImageTensor& image, const std::filesystem::path& path);

/// Rounds every value to the nearest multiple of 1/255, as a PNG round trip would.
ImageTensor quantize_8bit(const ImageTensor& image);

}  // namespace causalign
