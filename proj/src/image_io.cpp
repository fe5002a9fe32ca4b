#include "ratkern/image_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

#include <fmt/format.h>
#include <png.h>

#include "ratkern/error.hpp"

namespace ratkern::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::IoError, fmt::format("{}: {}", path.string(), what));
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

std::size_t pnm_number(std::istream& in, const fs::path& path) {
  const std::string token = pnm_token(in);
  std::size_t value = 0;
  try {
    std::size_t used = 0;
    value = std::stoul(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
  } catch (const std::exception&) {
    io_error(path, fmt::format("malformed PGM header field '{}'", token));
  }
  return value;
}

ImageF read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error(path, "cannot open");
  if (pnm_token(in) != "P5") io_error(path, "not a binary PGM (P5) file");
  const std::size_t width = pnm_number(in, path);
  const std::size_t height = pnm_number(in, path);
  const std::size_t maxval = pnm_number(in, path);
  if (width == 0 || height == 0) io_error(path, "zero image dimension");
  if (maxval == 0 || maxval > 255) io_error(path, "only 8-bit PGM (maxval <= 255) is supported");
  std::vector<unsigned char> raw(width * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) io_error(path, "truncated pixel data");
  ImageF img(height, width, 0.0, 255.0);
  for (std::size_t i = 0; i < raw.size(); ++i) img.samples[i] = raw[i];
  return img;
}

ImageF read_png(const fs::path& path, const Warn& warn) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    io_error(path, png.message);
  const bool is_color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = is_color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> raw(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&png);
    io_error(path, png.message);
  }
  ImageF img(png.height, png.width, 0.0, 255.0);
  if (is_color) {
    if (warn) warn(fmt::format("{}: color image converted to luminance (BT.601)", path.string()));
    for (std::size_t i = 0; i < img.samples.size(); ++i)
      img.samples[i] =
          std::round(0.299 * raw[3 * i] + 0.587 * raw[3 * i + 1] + 0.114 * raw[3 * i + 2]);
  } else {
    for (std::size_t i = 0; i < img.samples.size(); ++i) img.samples[i] = raw[i];
  }
  return img;
}

std::vector<unsigned char> to_bytes(const ImageF& image) {
  validate(image);
  const ImageF q = quantize(image);
  std::vector<unsigned char> out(q.samples.size());
  const double scale = image.peak == 255.0 ? 1.0 : 255.0 / image.peak;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<unsigned char>(std::lround(std::min(255.0, q.samples[i] * scale)));
  return out;
}

}  // namespace

ImageF read_image(const fs::path& path, const Warn& warn) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingInput, fmt::format("{}: no such file", path.string()));
  return lower_extension(path) == ".png" ? read_png(path, warn) : read_pgm(path);
}

void write_pgm(const fs::path& path, const ImageF& image) {
  const auto bytes = to_bytes(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) io_error(path, "cannot open for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) io_error(path, "write failed");
}

void write_png(const fs::path& path, const ImageF& image) {
  const auto bytes = to_bytes(image);
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(), 0, nullptr))
    io_error(path, png.message);
}

void write_image(const fs::path& path, const ImageF& image) {
  if (lower_extension(path) == ".png")
    write_png(path, image);
  else
    write_pgm(path, image);
}

}  // namespace ratkern::io
