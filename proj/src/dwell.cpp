#include "srsim/dwell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srsim/math_util.hpp"
#include "srsim/rng.hpp"

namespace srsim::dwell {

double segment_snr(std::span<const double> dc, double dt_s, double tau_s,
                   const SegmentSnrOptions& opts) {
    if (dc.empty() || dt_s <= 0 || tau_s <= 0)
        throw std::invalid_argument("segment_snr: bad inputs");
    const std::size_t len = static_cast<std::size_t>(std::floor(tau_s / dt_s + 1e-9));
    if (len < 2)
        throw std::invalid_argument("segment_snr: tau must span >= 2 sample periods");
    const std::size_t n_seg = dc.size() / len;
    if (n_seg < 10)
        throw std::invalid_argument("segment_snr: need >= 10 segments (tau <= T/10)");

    std::vector<double> means(n_seg);
    for (std::size_t s = 0; s < n_seg; ++s) {
        double acc = 0.0;
        for (std::size_t i = 0; i < len; ++i) acc += dc[s * len + i];
        means[s] = acc / static_cast<double>(len);
    }
    const double var = util::variance(means);
    if (!(var > 0)) throw std::domain_error("segment_snr: degenerate (zero) segment spread");

    double numerator;
    if (opts.first_segment_numerator) {
        numerator = means[0];
    } else {
        double acc = 0.0;
        for (double m : means) acc += m;
        numerator = acc / static_cast<double>(n_seg);
    }
    return numerator * numerator / var;
}

DwellCurve min_dwell(std::span<const double> dc, double dt_s,
                     const SegmentSnrOptions& opts, int n_tau) {
    if (n_tau < 2) throw std::invalid_argument("min_dwell: n_tau too small");
    const double total = static_cast<double>(dc.size()) * dt_s;
    const double tau_lo = 4.0 * dt_s;
    const double tau_hi = total / 10.0;
    if (!(tau_lo < tau_hi))
        throw std::invalid_argument("min_dwell: trace too short for the tau grid");

    DwellCurve curve;
    curve.first_segment_numerator = opts.first_segment_numerator;
    const auto taus = util::logspace(tau_lo, tau_hi, n_tau);
    std::size_t last_len = 0;
    for (double tau : taus) {
        const std::size_t len = static_cast<std::size_t>(std::floor(tau / dt_s + 1e-9));
        if (len == last_len) continue;  // same segmentation, same point
        last_len = len;
        const double snapped = static_cast<double>(len) * dt_s;
        curve.points.push_back({snapped, segment_snr(dc, dt_s, snapped, opts)});
    }
    if (curve.points.size() < 8)
        throw std::invalid_argument("min_dwell: fewer than 8 usable tau values");

    std::vector<double> lx, ly;
    lx.reserve(curve.points.size());
    ly.reserve(curve.points.size());
    for (const auto& p : curve.points) {
        lx.push_back(std::log10(p.tau_s));
        ly.push_back(std::log10(p.snr));
    }
    const auto pinned = util::fit_line_fixed_slope(lx, ly, 1.0);
    curve.tau_min_s = std::pow(10.0, -pinned.intercept);
    curve.fit_rms_log10 = pinned.rms_residual;
    curve.poor_fit = pinned.rms_residual > kPoorFitRmsLog10;
    curve.slope_unconstrained = util::fit_line(lx, ly).slope;
    return curve;
}

double quantum_speedup_ratio(double squeezing_db) {
    if (squeezing_db < 0)
        throw std::domain_error("quantum_speedup_ratio: squeezing must be >= 0 dB");
    return std::pow(10.0, squeezing_db / 10.0);
}

double quantum_speedup_fraction(double squeezing_db) {
    if (squeezing_db < 0)
        throw std::domain_error("quantum_speedup_fraction: squeezing must be >= 0 dB");
    return 1.0 - std::pow(10.0, -squeezing_db / 10.0);
}

VideoBudget video_rate_budget(double frame_rate_hz, double tau_min_s) {
    if (!(tau_min_s > 0)) throw std::domain_error("video_rate_budget: tau_min must be > 0");
    VideoBudget out;
    if (!(frame_rate_hz > 0)) {
        out.unbounded = true;
        return out;
    }
    out.side_pixels = static_cast<long>(std::floor(std::sqrt(1.0 / (frame_rate_hz * tau_min_s))));
    return out;
}

std::vector<double> make_dwell_trace(const DwellTraceSpec& spec, std::uint64_t seed) {
    if (spec.dt_s <= 0 || spec.duration_s <= 0 || spec.noise_power_scale <= 0 ||
        spec.snr_at_1ms < 0)
        throw std::invalid_argument("make_dwell_trace: bad spec");
    const std::size_t n =
        static_cast<std::size_t>(std::floor(spec.duration_s / spec.dt_s + 0.5));
    // per-sample SNR c^2/sigma0^2 = snr_at_1ms * dt / 1 ms, with sigma0 = 1
    const double c = std::sqrt(spec.snr_at_1ms * spec.dt_s / 1e-3);
    const double sigma = std::sqrt(spec.noise_power_scale);
    util::Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = c + sigma * rng.normal();
    return out;
}

}  // namespace srsim::dwell
