#pragma once

#include <string>

#include "increpr/types.hpp"

namespace increpr::pgm {

// Plain (P2) grayscale PGM. Values are returned as doubles in
// [0, maxval]; comments and arbitrary whitespace are accepted.
Mat read(const std::string& path);

// Writes a P2 file with maxval 255; the image is scaled so its largest
// entry maps to 255 (an all-zero image stays zero). Negative entries are
// clamped at zero.
void write(const std::string& path, const Mat& img);

}  // namespace increpr::pgm
