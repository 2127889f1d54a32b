#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srsim/signal_chain.hpp"
#include "srsim/srs_theory.hpp"

namespace srsim::imaging {

struct Shape {
    enum class Kind { ellipse, disk };
    Kind kind = Kind::disk;
    double cx_um = 0.0, cy_um = 0.0;
    double rx_um = 0.0, ry_um = 0.0;  // disks use rx for both
    srs::Chemical chem = srs::Chemical::protein;
    double concentration = 0.0;
};

struct PhantomSpec {
    std::vector<Shape> shapes;
    // lateral Gaussian PSF, 1/e^2 intensity radius; <= 0 disables blurring
    double psf_radius_nm = 443.0;
    int bright_organelles = 0;  // ground truth for contour counting; 0 = unknown
};

// Randomized yeast-like cell: cytosol, nucleus and lipid droplets, with the
// droplet placement drawn from the seed. Cell diameter ~6 um.
PhantomSpec default_yeast_spec(std::uint64_t seed);

// Key=value text with shape lines `ellipse cx cy rx ry chem conc` and
// `disk cx cy r chem conc`; `psf_radius_nm` and `bright_organelles` keys.
PhantomSpec parse_phantom_spec(const std::string& text);
std::string phantom_spec_text(const PhantomSpec& spec);

struct Phantom {
    int nx = 0, ny = 0;
    double pitch_nm = 100.0;
    std::array<std::vector<double>, 3> concentration;  // indexed by Chemical
    std::vector<std::uint8_t> support;                 // any chemical present
    int bright_organelles = 0;

    double total_concentration(int x, int y) const;
};

Phantom build_phantom(const PhantomSpec& spec, int nx, int ny, double pitch_nm);

struct ScanConfig {
    int nx = 100, ny = 100;
    double pitch_nm = 100.0;
    double dwell_s = 1e-3;
    double line_overhead_s = 0.08;   // stage flyback per line
    double shift_cm1 = 2850.0;
    bool squeezer_on = true;
    bool pump_on = true;             // off = shot-noise reference acquisition
    bool resonant_stage = true;
    std::uint64_t seed = 1;
    int threads = 1;                 // 0 = hardware concurrency
    bool allow_damage_override = false;
};

struct ScanImage {
    int nx = 0, ny = 0;
    std::vector<double> dc;         // per-pixel demodulated DC
    std::vector<double> noise_var;  // per-pixel in-phase sample variance
    std::vector<double> snr_db;     // dc^2 over the calibrated DC noise variance
    std::vector<std::uint8_t> support;
    ScanConfig scan;
    double wall_time_s = 0.0;       // rows * (cols * dwell + line overhead)
    double calibration_k = 0.0;
    double predicted_dc_noise_var = 0.0;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * nx + x; }
};

// Raster scan through the full signal chain. Per-pixel RNG substreams are
// keyed by (seed, pixel index), so parallel runs are bit-identical to serial.
// Throws std::runtime_error if photodamage_check fails without the override,
// and saturation_error (with pixel coordinates) from the signal chain.
ScanImage acquire_image(const Phantom& phantom, const ScanConfig& scan,
                        const srs::IlluminationConfig& illum,
                        const chain::NoiseConfig& noise);

// Calibration constant K: anchors the peak noiseless pixel SNR of the given
// phantom to 14 dB at the reference scan configuration.
double calibrate_k(const Phantom& phantom, const ScanConfig& scan,
                   const srs::IlluminationConfig& illum, const chain::NoiseConfig& noise);
inline constexpr double kPeakSnrAnchorDb = 14.0;

struct Region {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0,x1) x [y0,y1)
    int pixels() const { return (x1 - x0) * (y1 - y0); }
};

// Quantum enhancement from a background region: ratio of the region-pooled
// per-pixel noise variances, in dB. The reference image is expected to be a
// shot-noise acquisition (pump off, squeezer off). Throws invalid_region_error
// if the region leaves the images or touches the phantom support.
double measure_enhancement_db(const ScanImage& squeezed, const ScanImage& reference,
                              const Region& region);

// mask = pixel SNR >= threshold_db
std::vector<std::uint8_t> contour_mask(const ScanImage& image, double threshold_db);

// 4-connected component count, ignoring components below min_size pixels
// (single noise pixels would otherwise register as organelles).
int count_components(std::span<const std::uint8_t> mask, int nx, int ny, int min_size = 4);

struct RgbImage {
    int nx = 0, ny = 0;
    std::vector<double> r, g, b;  // each renormalized to [0, 1]
};

// red <- DNA, blue <- protein, green <- lipid; channels independently
// renormalized min->0, max->1.
RgbImage compose_rgb(const ScanImage& dna, const ScanImage& protein, const ScanImage& lipid);

// Per-pixel solve of M c = s with a nonnegativity clamp. M rows follow the
// image order, columns are (dna, protein, lipid). Throws std::invalid_argument
// naming the spectra when cond(M) >= 1e3.
std::array<std::vector<double>, 3> unmix(std::array<std::span<const double>, 3> images,
                                         const std::array<std::array<double, 3>, 3>& m);

double condition_number_3x3(const std::array<std::array<double, 3>, 3>& m);

// CSV dump `x,y,dc,snr_db`.
void write_image_csv(const std::string& path, const ScanImage& image);

}  // namespace srsim::imaging
