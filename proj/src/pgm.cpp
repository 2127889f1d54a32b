#include "srsim/pgm.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "srsim/csv.hpp"

namespace srsim::io {

static std::uint16_t quantize(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint16_t>(v * 65535.0 + 0.5);
}

static void append_be16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
}

void write_pgm16(const std::string& path, int nx, int ny, std::span<const double> values) {
    if (static_cast<std::size_t>(nx) * ny != values.size())
        throw std::invalid_argument("write_pgm16: size mismatch");
    std::string out;
    out.reserve(32 + values.size() * 2);
    out += "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n65535\n";
    for (double v : values) append_be16(out, quantize(v));
    atomic_write_text(path, out);
}

void write_ppm16(const std::string& path, int nx, int ny, std::span<const double> red,
                 std::span<const double> green, std::span<const double> blue) {
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    if (red.size() != n || green.size() != n || blue.size() != n)
        throw std::invalid_argument("write_ppm16: size mismatch");
    std::string out;
    out.reserve(32 + n * 6);
    out += "P6\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n65535\n";
    for (std::size_t i = 0; i < n; ++i) {
        append_be16(out, quantize(red[i]));
        append_be16(out, quantize(green[i]));
        append_be16(out, quantize(blue[i]));
    }
    atomic_write_text(path, out);
}

Pgm16 read_pnm16(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image: " + path);
    std::string magic;
    in >> magic;
    Pgm16 img;
    if (magic == "P5")
        img.channels = 1;
    else if (magic == "P6")
        img.channels = 3;
    else
        throw std::runtime_error(path + ": unsupported magic '" + magic + "'");
    int maxval = 0;
    in >> img.nx >> img.ny >> maxval;
    if (maxval != 65535) throw std::runtime_error(path + ": expected 16-bit maxval");
    in.get();  // single whitespace after header
    const std::size_t n = static_cast<std::size_t>(img.nx) * img.ny * img.channels;
    std::vector<unsigned char> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw std::runtime_error(path + ": truncated pixel data");
    img.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
    return img;
}

}  // namespace srsim::io
