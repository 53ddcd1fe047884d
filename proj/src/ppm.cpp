#include "stnet/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "stnet/errors.hpp"

namespace stnet {

Image8 quantize(const Tensor& image) {
  if (image.rank() != 3 || image.dim(2) != 3) {
    throw DimensionError("quantize: expected H×W×3 image, got " + shape_string(image.shape()));
  }
  Image8 out{image.dim(0), image.dim(1), std::vector<std::uint8_t>(image.size())};
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image[i], 0.0, 1.0);
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

Tensor dequantize(const Image8& image) {
  Tensor out({image.height, image.width, 3});
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = image.pixels[i] / 255.0;
  return out;
}

std::string encode_ppm(const Image8& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_])) &&
           bytes_[pos_] != '#') {
      ++pos_;
    }
    if (start == pos_) throw ParseError("PPM header truncated", line_);
    return bytes_.substr(start, pos_ - start);
  }

  long number(const char* field) {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw ParseError(std::string("PPM header: malformed ") + field + " '" + t + "'", line_);
    }
    return std::stol(t);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ParseError("PPM header: missing separator before raster", line_);
    }
    return pos_ + 1;
  }

  long line() const { return line_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
  long line_ = 1;
};

}  // namespace

Image8 decode_ppm(const std::string& bytes) {
  HeaderReader reader(bytes);
  const std::string magic = reader.token();
  if (magic != "P6") throw ParseError("PPM header: expected magic 'P6', got '" + magic + "'", 1);
  const long width = reader.number("width");
  const long height = reader.number("height");
  const long maxval = reader.number("maxval");
  if (width <= 0 || height <= 0) throw ParseError("PPM header: non-positive dimensions", reader.line());
  if (maxval != 255) throw ParseError("PPM header: maxval must be 255", reader.line());
  const std::size_t start = reader.raster_start();
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (bytes.size() < start + need) {
    throw ParseError("PPM raster truncated: expected " + std::to_string(need) + " bytes, found " +
                         std::to_string(bytes.size() - std::min(bytes.size(), start)),
                     reader.line() + 1);
  }
  Image8 image{static_cast<std::size_t>(height), static_cast<std::size_t>(width), {}};
  image.pixels.assign(bytes.begin() + static_cast<long>(start),
                      bytes.begin() + static_cast<long>(start + need));
  return image;
}

void write_ppm(const std::filesystem::path& path, const Image8& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = encode_ppm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image8 read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_ppm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace stnet
