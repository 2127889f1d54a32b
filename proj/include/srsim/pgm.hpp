#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace srsim::io {

// 16-bit binary PGM (P5) / PPM (P6), big-endian sample order. Input values
// are expected in [0, 1]; they are clipped and scaled to [0, 65535].
void write_pgm16(const std::string& path, int nx, int ny, std::span<const double> values);
void write_ppm16(const std::string& path, int nx, int ny, std::span<const double> red,
                 std::span<const double> green, std::span<const double> blue);

struct Pgm16 {
    int nx = 0, ny = 0;
    std::vector<std::uint16_t> samples;  // row-major, 1 or 3 per pixel
    int channels = 1;
};

Pgm16 read_pnm16(const std::string& path);

}  // namespace srsim::io
