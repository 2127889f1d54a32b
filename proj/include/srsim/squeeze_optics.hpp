#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace srsim::optics {

// All radii are in units of the seed beam radius (seed width w == 1).
inline constexpr double kSeedWidth = 1.0;

// Radial amplitude of the cylindrically symmetric LG modes with l = 0:
//   u_00(r) = sqrt(2/pi) / w0 * exp(-r^2/w0^2)
//   u_10(r) = sqrt(2/pi) / w0 * (1 - 2 r^2/w0^2) * exp(-r^2/w0^2)
// L2-normalized over the plane, integral |u|^2 2 pi r dr = 1.
double lg_radial_amplitude(int p, double r, double w0);

// Fraction of mode p's power transmitted by a hard aperture of radius r_ap.
// Closed forms: T0 = 1 - exp(-X), T1 = 1 - (1 + X^2) exp(-X), X = 2 r_ap^2/w0^2.
double mode_power_within(int p, double w0, double r_ap);

struct ModeDecomposition {
    double c00 = 0.0;      // signed amplitude overlap with u_00
    double c01 = 0.0;      // signed amplitude overlap with u_10
    double residual = 0.0; // power fraction outside the two-mode span
};

// Overlap of a unit-power Gaussian seed of width w with the basis of width w0.
// The two modes are taken in-phase, so the coefficients are real.
ModeDecomposition decompose_seed(double w, double w0);

// Two-mode model of the pumped OPA: intensity gain factor a00 on the
// fundamental (deamplification when < 1) and a01 on the first radial mode.
struct OpaModel {
    double w0 = 1.0;
    double a00 = 1.0;
    double a01 = 1.0;
    void validate() const;
};

// Pumped-beam intensity at radius r for a unit-power seed (absolute scale).
double pumped_intensity(const OpaModel& model, double r);

// Intensity of the unpumped Gaussian seed (unit power, width kSeedWidth).
double seed_intensity(double r);

// Radial intensity profile normalized to peak 1 (for shape comparison).
std::vector<double> pumped_profile(const OpaModel& model, std::span<const double> r);

// Profile in units of the seed's peak intensity. This normalization keeps the
// absolute (de)amplification in the data, which is what makes the gain
// factors recoverable by fit_opa; a self-normalized profile only determines
// w0 and the ratio a01/a00.
std::vector<double> seed_relative_profile(const OpaModel& model, std::span<const double> r);

// I_seed(r) / I_pumped(r); > 1 means deamplification. Where the pumped
// intensity is below 1e-12 of its peak, NaN is emitted instead of a blowup.
std::vector<double> deamplification_map(const OpaModel& model, std::span<const double> r);

// Detected noise variance relative to shot noise = 1. Per-mode quadrature
// variance equals the mode's intensity gain factor; power removed by the
// aperture or outside the two-mode span enters as vacuum. r_ap = nullopt
// means no aperture (T0 = T1 = 1); eta is the detection efficiency.
double detected_variance(const OpaModel& model, double eta, std::optional<double> r_ap);

struct SqueezeCurvePoint {
    double r_ap = 0.0;
    double variance = 1.0;
    double squeezing_db = 0.0;
};

struct SqueezeCurve {
    std::vector<SqueezeCurvePoint> points;
    double eta = 1.0;
    double no_aperture_variance = 1.0;
};

SqueezeCurve sweep_aperture(const OpaModel& model, double eta, std::span<const double> radii);

// Radius of minimum variance; ties break toward the larger radius (less loss).
double optimal_aperture(const SqueezeCurve& curve);

struct OpaFit {
    OpaModel model;
    double residual_norm = 0.0;  // rms residual of the best candidate
    bool converged = false;
    int evaluations = 0;
    std::string message;
};

// Least-squares fit of the two-mode model to a sampled radial intensity
// profile in seed-peak units. Deterministic coarse multi-start grid over
// w0 in [0.5, 1.5], a00 in (0, 1.5], a01 in (0, 6], refined by
// Levenberg-Marquardt in log-parameter space.
OpaFit fit_opa(std::span<const double> r, std::span<const double> intensity);

// Residual threshold above which fit_opa reports non-convergence.
inline constexpr double kFitResidualThreshold = 0.05;

}  // namespace srsim::optics
