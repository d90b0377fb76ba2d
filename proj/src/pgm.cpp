#include "increpr/pgm.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace increpr::pgm {

namespace {

// next whitespace-separated token, skipping '#' comment lines
bool next_token(std::istream& in, std::string& tok) {
  tok.clear();
  char c;
  while (in.get(c)) {
    if (c == '#') {
      while (in.get(c) && c != '\n') {
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return true;
      continue;
    }
    tok.push_back(c);
  }
  return !tok.empty();
}

long parse_long(std::istream& in, const char* what) {
  std::string tok;
  if (!next_token(in, tok))
    throw std::runtime_error(std::string("pgm: missing ") + what);
  try {
    return std::stol(tok);
  } catch (...) {
    throw std::runtime_error(std::string("pgm: bad ") + what + ": " + tok);
  }
}

}  // namespace

Mat read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("pgm: cannot open " + path);
  std::string magic;
  if (!next_token(in, magic) || magic != "P2")
    throw std::runtime_error("pgm: not a plain P2 file: " + path);
  const long width = parse_long(in, "width");
  const long height = parse_long(in, "height");
  const long maxval = parse_long(in, "maxval");
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
    throw std::runtime_error("pgm: bad dimensions in " + path);
  Mat img(height, width);
  for (long i = 0; i < height; ++i)
    for (long j = 0; j < width; ++j) {
      const long v = parse_long(in, "pixel");
      if (v < 0 || v > maxval)
        throw std::runtime_error("pgm: pixel out of range in " + path);
      img(i, j) = static_cast<double>(v);
    }
  return img;
}

void write(const std::string& path, const Mat& img) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("pgm: cannot open " + path);
  const double peak = img.maxCoeff();
  const double scale = peak > 0.0 ? 255.0 / peak : 0.0;
  out << "P2\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < img.rows(); ++i) {
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      const double v = std::max(0.0, img(i, j)) * scale;
      out << static_cast<int>(std::lround(std::min(v, 255.0)));
      out << (j + 1 == img.cols() ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("pgm: write failure on " + path);
}

}  // namespace increpr::pgm
