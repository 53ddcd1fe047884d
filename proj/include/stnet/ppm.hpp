#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stnet/tensor.hpp"

namespace stnet {

/// 8-bit RGB raster; the on-disk form of every image.
struct Image8 {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB
};

/// round(clamp(v,0,1)·255) per channel.
Image8 quantize(const Tensor& image);
/// value/255 as an H×W×3 tensor.
Tensor dequantize(const Image8& image);

std::string encode_ppm(const Image8& image);
/// Binary P6, maxval 255, '#' comments allowed in the header.
/// Throws ParseError (with line number) for malformed or truncated input.
Image8 decode_ppm(const std::string& bytes);

void write_ppm(const std::filesystem::path& path, const Image8& image);
Image8 read_ppm(const std::filesystem::path& path);

}  // namespace stnet
