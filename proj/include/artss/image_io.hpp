#pragma once

#include <filesystem>

#include "artss/core_model.hpp"
#include "artss/imgproc.hpp"
#include "artss/maskgen.hpp"

namespace artss {

// PNG or JPEG, converted to 8-bit grayscale. The id is the file stem.
ImageRecord read_gray_image(const std::filesystem::path& path);

// [0, 1] values quantized to round(v * 255), 8-bit PNG.
void write_png(const std::filesystem::path& path, const CanonicalImage& img);
// 1-bit PNG.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
// Any nonzero pixel is foreground.
BinaryMask read_mask(const std::filesystem::path& path);

}  // namespace artss
