#pragma once

#include "rop/core.hpp"

#include <filesystem>

namespace rop::harness {

/// Reads a binary (P5) 8-bit PGM into a rows x cols matrix of intensities in [0, 255].
Matrix read_pgm(const std::filesystem::path& path);

/// Writes intensities as binary P5, clamping to [0, 255] and rounding.
void write_pgm(const std::filesystem::path& path, const Matrix& image);

}  // namespace rop::harness
