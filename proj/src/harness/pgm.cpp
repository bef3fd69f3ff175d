#include "rop/harness/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace rop::harness {

namespace {

[[noreturn]] void bad(const std::filesystem::path& path, const std::string& why) {
  throw std::runtime_error("pgm " + path.string() + ": " + why);
}

// Next header token, skipping whitespace and '#' comments.
long header_value(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (in) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (!in || !std::isdigit(c)) bad(path, "malformed header");
  long v = 0;
  while (in && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1'000'000) bad(path, "header value too large");
    c = in.get();
  }
  // One whitespace byte separates the last header field from the raster.
  if (!in || !std::isspace(c)) bad(path, "malformed header");
  return v;
}

}  // namespace

Matrix read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad(path, "cannot open");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') bad(path, "not a binary P5 image");
  const long width = header_value(in, path);
  const long height = header_value(in, path);
  const long maxval = header_value(in, path);
  if (width < 1 || height < 1) bad(path, "empty image");
  if (maxval < 1 || maxval > 255) bad(path, "only 8-bit images are supported");
  std::string raster(static_cast<std::size_t>(width * height), '\0');
  in.read(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) bad(path, "truncated raster");
  Matrix m(height, width);
  const double scale = 255.0 / static_cast<double>(maxval);
  for (long i = 0; i < height; ++i)
    for (long j = 0; j < width; ++j)
      m(i, j) = scale * static_cast<unsigned char>(raster[static_cast<std::size_t>(i * width + j)]);
  return m;
}

void write_pgm(const std::filesystem::path& path, const Matrix& image) {
  if (image.size() == 0) throw std::invalid_argument("write_pgm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) bad(path, "cannot open for writing");
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::string raster(static_cast<std::size_t>(image.size()), '\0');
  for (Index i = 0; i < image.rows(); ++i) {
    for (Index j = 0; j < image.cols(); ++j) {
      double v = image(i, j);
      if (!std::isfinite(v)) v = 0.0;
      v = std::clamp(std::round(v), 0.0, 255.0);
      raster[static_cast<std::size_t>(i * image.cols() + j)] = static_cast<char>(static_cast<unsigned char>(v));
    }
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) bad(path, "write failed");
}

}  // namespace rop::harness
