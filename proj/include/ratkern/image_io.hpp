#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "ratkern/image.hpp"

namespace ratkern::io {

using Warn = std::function<void(const std::string&)>;

/// Reads binary PGM (P5, maxval <= 255) or PNG. Color PNGs are converted to
/// luminance with BT.601 weights and `warn` is invoked. Peak is 255.
ImageF read_image(const std::filesystem::path& path, const Warn& warn = {});

/// Writes 8-bit output; samples are quantized first. The format follows the
/// extension (.png, otherwise PGM).
void write_image(const std::filesystem::path& path, const ImageF& image);

void write_pgm(const std::filesystem::path& path, const ImageF& image);
void write_png(const std::filesystem::path& path, const ImageF& image);

}  // namespace ratkern::io
