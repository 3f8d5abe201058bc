#pragma once

#include <cstdint>
#include <string>

#include "emiscan/imaging.hpp"

namespace emiscan::image_io {

// CSV layout: one grid-metadata header pair, one column header, then one
// row per pixel in row-major order, full double precision.
std::string to_csv(const imaging::EmiImage& image);
imaging::EmiImage from_csv(const std::string& text);

void write_csv(const imaging::EmiImage& image, const std::string& path);
imaging::EmiImage read_csv(const std::string& path);

// 8-bit binary portable graymap of the r channel, min-max autoscaled.
void write_pgm(const imaging::EmiImage& image, const std::string& path);

// JSON metadata sidecar: scenario hash, seed, channel ranges, timing.
void write_sidecar(const imaging::EmiImage& image, std::uint64_t scenario_hash,
                   std::uint64_t seed, const std::string& path);

} // namespace emiscan::image_io
