#pragma once

#include <filesystem>

#include "hartree/radial.hpp"

namespace hartree {

struct Snapshot {
  RadialField field;
  double time = 0.0;
};

/// Text header (n, r_max, time as key = value lines, terminated by `end_header`)
/// followed by 2n little-endian float64 values, interleaved real/imag.
void write_snapshot(const std::filesystem::path& path, const RadialField& u, double time);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace hartree
