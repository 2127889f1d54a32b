#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace srsim::dwell {

// Segmented SNR estimator for a simulated dwell time tau:
//   SNR_tau = mean(segment 1)^2 / std(segment means)^2
// with N = floor(T / tau) disjoint consecutive segments. The numerator
// convention follows the source analysis (first segment); the all-segments
// variant replaces it with the full-trace mean, which removes the O(1)
// multiplicative noise of a single segment mean at low SNR.
struct SegmentSnrOptions {
    bool first_segment_numerator = true;
};

double segment_snr(std::span<const double> dc, double dt_s, double tau_s,
                   const SegmentSnrOptions& opts = {});

struct DwellPoint {
    double tau_s = 0.0;
    double snr = 0.0;
};

struct DwellCurve {
    std::vector<DwellPoint> points;
    double tau_min_s = 0.0;           // from the slope-1 log-log fit at SNR = 1
    double fit_rms_log10 = 0.0;       // rms residual of the constrained fit
    double slope_unconstrained = 0.0; // free-slope fit, for the linearity check
    bool poor_fit = false;
    bool first_segment_numerator = true;
};

// Threshold on the constrained-fit rms residual for the poor-fit warning.
inline constexpr double kPoorFitRmsLog10 = 0.5;

// Fits log10(SNR) = log10(tau) + b over a log-spaced tau grid
// (default 16 points from 4 sample periods to T/10); tau_min = 10^(-b).
DwellCurve min_dwell(std::span<const double> dc, double dt_s,
                     const SegmentSnrOptions& opts = {}, int n_tau = 16);

// Dwell-time ratio bought by `squeezing_db` of noise reduction, and the
// fractional dwell-time saving.
double quantum_speedup_ratio(double squeezing_db);
double quantum_speedup_fraction(double squeezing_db);

struct VideoBudget {
    bool unbounded = false;
    long side_pixels = 0;  // floor(sqrt(1 / (rate * tau_min)))
};

VideoBudget video_rate_budget(double frame_rate_hz, double tau_min_s);

// Synthetic demodulated pixel trace: constant plus white Gaussian noise,
// calibrated so the ideal segmented SNR extrapolates to `snr_at_1ms` at a
// dwell of 1 ms. noise_power_scale > 1 models removing squeezing (the same
// seed reproduces the same noise realization, only rescaled).
struct DwellTraceSpec {
    double snr_at_1ms = 328.0;
    double noise_power_scale = 1.0;
    double dt_s = 0.5e-6;     // 2 MS/s demodulated rate
    double duration_s = 1e-3;
};

std::vector<double> make_dwell_trace(const DwellTraceSpec& spec, std::uint64_t seed);

}  // namespace srsim::dwell
