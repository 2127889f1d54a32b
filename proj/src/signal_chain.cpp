#include "srsim/signal_chain.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "srsim/biquad.hpp"
#include "srsim/csv.hpp"
#include "srsim/errors.hpp"
#include "srsim/fft.hpp"
#include "srsim/math_util.hpp"
#include "srsim/rng.hpp"

namespace srsim::chain {

using util::kPi;

void DetectorModel::validate() const {
    if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
        throw std::domain_error("DetectorModel: quantum efficiency must be in (0, 1]");
    if (!(bandwidth_hz > 0.0) || !(center_freq_hz > 0.0) || !(max_linear_power_mw > 0.0))
        throw std::domain_error("DetectorModel: bandwidth, center, max power must be > 0");
}

namespace {

std::uint64_t hash_config(const NoiseConfig& n, const DetectorModel& d, double duration,
                          double rate, double amplitude) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        h ^= bits;
        h *= 0x100000001b3ull;
    };
    mix(n.detected_power_mw);
    mix(n.squeeze_variance);
    mix(n.electronic_db);
    mix(n.spurious_amplitude);
    mix(n.spurious_phase_rad);
    mix(n.pulse_depth);
    mix(n.signal_phase_rad);
    mix(n.lo_drift_rad_per_sqrt_s);
    mix(d.quantum_efficiency);
    mix(d.bandwidth_hz);
    mix(duration);
    mix(rate);
    mix(amplitude);
    return h;
}

}  // namespace

PixelTrace synthesize_photocurrent(double signal_amplitude, const NoiseConfig& noise,
                                   const DetectorModel& detector, double duration_s,
                                   std::uint64_t seed, double sample_rate_hz) {
    detector.validate();
    if (noise.detected_power_mw < 0 || noise.squeeze_variance <= 0)
        throw std::domain_error("synthesize_photocurrent: bad noise config");
    if (noise.detected_power_mw > detector.max_linear_power_mw)
        throw saturation_error("detected power " + std::to_string(noise.detected_power_mw) +
                               " mW exceeds detector linear range of " +
                               std::to_string(detector.max_linear_power_mw) + " mW");
    const double f_mod = 20e6;
    const double f_rep = 80e6;
    if (sample_rate_hz < 10.0 * f_mod)
        throw std::domain_error("synthesize_photocurrent: sample rate must be >= 10x modulation");
    if (duration_s < 10.0 / f_mod)
        throw std::domain_error("synthesize_photocurrent: duration must cover >= 10 modulation periods");

    PixelTrace trace;
    trace.sample_rate_hz = sample_rate_hz;
    trace.duration_s = duration_s;
    trace.mod_freq_hz = f_mod;
    trace.rep_rate_hz = f_rep;
    trace.seed = seed;
    trace.config_hash =
        hash_config(noise, detector, duration_s, sample_rate_hz, signal_amplitude);

    const std::size_t n =
        static_cast<std::size_t>(std::floor(duration_s * sample_rate_hz));
    trace.samples.resize(n);

    const double dc = detector.quantum_efficiency * noise.detected_power_mw;
    const double shot_var = detector.quantum_efficiency * noise.detected_power_mw;
    const double elec_var = shot_var * util::from_db(noise.electronic_db);
    const double sigma = std::sqrt(noise.squeeze_variance * shot_var + elec_var);

    // combine the SRS tone and the spurious tone (same frequency) into one phasor
    const std::complex<double> tone =
        signal_amplitude * std::polar(1.0, noise.signal_phase_rad) +
        noise.spurious_amplitude * std::polar(1.0, noise.spurious_phase_rad);
    const double amp20 = std::abs(tone);
    const double ph20 = std::arg(tone);

    util::Rng rng(seed);

    // The deterministic part is periodic when both tones complete an integer
    // number of cycles in 25 samples (true at the default 250 MS/s).
    const double cyc_mod = 25.0 * f_mod / sample_rate_hz;
    const double cyc_rep = 25.0 * f_rep / sample_rate_hz;
    const bool periodic = std::abs(cyc_mod - std::round(cyc_mod)) < 1e-9 &&
                          std::abs(cyc_rep - std::round(cyc_rep)) < 1e-9 &&
                          noise.lo_drift_rad_per_sqrt_s == 0.0;

    if (periodic) {
        double det[25];
        for (int k = 0; k < 25; ++k) {
            const double t = k / sample_rate_hz;
            det[k] = dc * (1.0 + noise.pulse_depth * std::cos(2.0 * kPi * f_rep * t)) +
                     amp20 * std::cos(2.0 * kPi * f_mod * t + ph20);
        }
        for (std::size_t i = 0; i < n; ++i) {
            trace.samples[i] = det[i % 25] + sigma * rng.normal();
        }
    } else {
        const std::complex<double> wm = std::polar(1.0, 2.0 * kPi * f_mod / sample_rate_hz);
        const std::complex<double> wr = std::polar(1.0, 2.0 * kPi * f_rep / sample_rate_hz);
        std::complex<double> zm = std::polar(1.0, ph20);
        std::complex<double> zr(1.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            trace.samples[i] = dc * (1.0 + noise.pulse_depth * zr.real()) +
                               amp20 * zm.real() + sigma * rng.normal();
            zm *= wm;
            zr *= wr;
        }
    }
    return trace;
}

PixelTrace resonant_detector(const PixelTrace& trace, const DetectorModel& detector) {
    detector.validate();
    const double q = detector.center_freq_hz / detector.bandwidth_hz;
    util::Biquad bp =
        util::resonator_bandpass(detector.center_freq_hz, q, trace.sample_rate_hz);
    PixelTrace out = trace;
    for (auto& s : out.samples) s = bp.process(s);
    return out;
}

LockinResult lockin_demodulate(const PixelTrace& trace, const LockinConfig& cfg) {
    if (cfg.decimation < 1 || cfg.lowpass_order < 2 || cfg.lowpass_order % 2 != 0)
        throw std::invalid_argument("lockin_demodulate: bad config");
    LockinResult out;
    out.lo_phase_rad = cfg.lo_phase_rad;
    out.output_rate_hz = trace.sample_rate_hz / cfg.decimation;
    out.freq_mismatch_warning =
        std::abs(cfg.lo_freq_hz - trace.mod_freq_hz) > cfg.lowpass_hz;

    auto lp_i = util::butterworth_lowpass(cfg.lowpass_order, cfg.lowpass_hz,
                                          trace.sample_rate_hz);
    auto lp_q = lp_i;

    const std::size_t n = trace.samples.size();
    out.i_samples.reserve(n / cfg.decimation + 1);
    out.q_samples.reserve(n / cfg.decimation + 1);

    const std::complex<double> w =
        std::polar(1.0, 2.0 * kPi * cfg.lo_freq_hz / trace.sample_rate_hz);
    std::complex<double> z = std::polar(1.0, cfg.lo_phase_rad);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = trace.samples[i];
        const double iraw = x * z.real();
        const double qraw = -x * z.imag();
        const double ifil = util::cascade_process(lp_i, iraw);
        const double qfil = util::cascade_process(lp_q, qraw);
        if (i % static_cast<std::size_t>(cfg.decimation) == 0) {
            out.i_samples.push_back(ifil);
            out.q_samples.push_back(qfil);
        }
        z *= w;
    }

    out.dc = util::mean(out.i_samples);
    out.noise_var = out.i_samples.size() > 1 ? util::variance(out.i_samples) : 0.0;
    out.snr_db = out.noise_var > 0
                     ? util::to_db(out.dc * out.dc / out.noise_var)
                     : std::numeric_limits<double>::infinity();
    return out;
}

namespace {

// In-phase mean of the trace demodulated at (f, phase), from the DFT bin:
// mean(x cos(wt + phase)) = Re[e^{i phase} conj(X_k)] / N.
struct BinProjection {
    std::complex<double> bin;  // DFT coefficient
    std::size_t n = 0;
    double in_phase_mean(double phase) const {
        return (std::polar(1.0, phase) * std::conj(bin)).real() / static_cast<double>(n);
    }
};

BinProjection project_bin(std::span<const double> x, std::size_t k) {
    return {util::goertzel_bin(x, k), x.size()};
}

// Noise reference bins around k0: offsets 16..416 in steps of 4, both sides.
std::vector<std::size_t> noise_bins(std::size_t k0, std::size_t n) {
    std::vector<std::size_t> bins;
    for (std::size_t d = 16; d <= 416; d += 4) {
        if (k0 >= d && k0 - d > 0) bins.push_back(k0 - d);
        if (k0 + d < n / 2) bins.push_back(k0 + d);
    }
    return bins;
}

}  // namespace

double optimize_phase(const PixelTrace& trace, double lo_freq_hz) {
    const std::size_t n = trace.samples.size();
    if (n < 100) throw std::invalid_argument("optimize_phase: trace too short");
    const std::size_t k0 = static_cast<std::size_t>(
        std::llround(lo_freq_hz * static_cast<double>(n) / trace.sample_rate_hz));
    const BinProjection sig = project_bin(trace.samples, k0);

    // coarse scan over 64 phases, then parabolic refinement of mean(I)^2
    double best_phase = 0.0, best_val = -1.0;
    constexpr int kScan = 64;
    auto value = [&sig](double phase) {
        const double m = sig.in_phase_mean(phase);
        return m * m;
    };
    for (int i = 0; i < kScan; ++i) {
        const double ph = -kPi + 2.0 * kPi * i / kScan;
        const double v = value(ph);
        if (v > best_val) {
            best_val = v;
            best_phase = ph;
        }
    }
    const double step = 2.0 * kPi / kScan;
    const double vm = value(best_phase - step);
    const double vp = value(best_phase + step);
    const double denom = vm - 2.0 * best_val + vp;
    double phase = best_phase;
    if (std::abs(denom) > 1e-300) {
        phase = best_phase + 0.5 * step * (vm - vp) / denom;
    }

    // significance: coherent mean must rise 3 sigma above off-bin noise
    const auto bins = noise_bins(k0, n);
    if (bins.size() >= 8) {
        std::vector<double> off;
        off.reserve(bins.size());
        for (std::size_t k : bins)
            off.push_back(project_bin(trace.samples, k).in_phase_mean(phase));
        const double sigma = std::sqrt(util::variance(off));
        if (std::abs(sig.in_phase_mean(phase)) < 3.0 * sigma)
            throw indeterminate_phase_error(
                "no coherent component above 3 sigma at the LO frequency");
    }

    // wrap to [-pi, pi)
    while (phase < -kPi) phase += 2.0 * kPi;
    while (phase >= kPi) phase -= 2.0 * kPi;
    return phase;
}

double squeezing_level_db(std::span<const double> squeezed,
                          std::span<const double> reference) {
    const double vs = util::variance(squeezed);
    const double vr = util::variance(reference);
    if (!(vr > 1e-300)) throw std::domain_error("squeezing_level_db: reference variance ~ 0");
    if (!(vs > 0)) throw std::domain_error("squeezing_level_db: squeezed variance must be > 0");
    return util::to_db(vr / vs);
}

SnrComparison compare_lockin_to_direct(const PixelTrace& trace, double f0_hz) {
    const std::size_t n = trace.samples.size();
    const std::size_t k0 = static_cast<std::size_t>(
        std::llround(f0_hz * static_cast<double>(n) / trace.sample_rate_hz));
    const auto bins = noise_bins(k0, n);
    if (bins.size() < 16)
        throw std::invalid_argument("compare_lockin_to_direct: trace too short");

    const BinProjection sig = project_bin(trace.samples, k0);
    std::vector<BinProjection> off;
    off.reserve(bins.size());
    for (std::size_t k : bins) off.push_back(project_bin(trace.samples, k));

    // direct: rectangular-window periodogram peak over the mean off-bin power
    double floor = 0.0;
    for (const auto& b : off) floor += std::norm(b.bin);
    floor /= static_cast<double>(off.size());
    const double snr_direct = std::norm(sig.bin) / floor;

    // lock-in: phase-optimized in-phase mean over the off-bin in-phase spread
    const double phase = optimize_phase(trace, f0_hz);
    const double m = sig.in_phase_mean(phase);
    std::vector<double> offm;
    offm.reserve(off.size());
    for (const auto& b : off) offm.push_back(b.in_phase_mean(phase));
    const double snr_lockin = m * m / util::variance(offm);

    SnrComparison out;
    out.direct_db = util::to_db(snr_direct);
    out.lockin_db = util::to_db(snr_lockin);
    out.gain_db = out.lockin_db - out.direct_db;
    return out;
}

// ---------------------------------------------------------------------------
// trace IO
// ---------------------------------------------------------------------------

namespace {
constexpr std::uint32_t kTraceMagic = 0x31545253;  // "SRT1" little-endian
}

void write_trace_bin(const std::string& path, const PixelTrace& trace) {
    std::string buf;
    buf.reserve(16 + trace.samples.size() * 8);
    auto put = [&buf](const void* p, std::size_t len) {
        buf.append(static_cast<const char*>(p), len);
    };
    const std::uint32_t magic = kTraceMagic;
    const double rate = trace.sample_rate_hz;
    const std::uint32_t len = static_cast<std::uint32_t>(trace.samples.size());
    put(&magic, 4);
    put(&rate, 8);
    put(&len, 4);
    put(trace.samples.data(), trace.samples.size() * 8);
    io::atomic_write_text(path, buf);
}

PixelTrace read_trace_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace: " + path);
    std::uint32_t magic = 0, len = 0;
    double rate = 0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&rate), 8);
    in.read(reinterpret_cast<char*>(&len), 4);
    if (!in || magic != kTraceMagic)
        throw std::runtime_error(path + ": not a trace record (bad magic)");
    PixelTrace t;
    t.sample_rate_hz = rate;
    t.samples.resize(len);
    in.read(reinterpret_cast<char*>(t.samples.data()), 8ll * len);
    if (static_cast<std::size_t>(in.gcount()) != 8ull * len)
        throw std::runtime_error(path + ": truncated trace record");
    t.duration_s = len / rate;
    return t;
}

void write_trace_csv(const std::string& path, const PixelTrace& trace) {
    io::CsvTable t;
    t.header = {"t_s", "current_au"};
    t.columns.resize(2);
    t.columns[0].reserve(trace.samples.size());
    t.columns[1].reserve(trace.samples.size());
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        t.columns[0].push_back(static_cast<double>(i) / trace.sample_rate_hz);
        t.columns[1].push_back(trace.samples[i]);
    }
    io::write_csv(path, t);
}

PixelTrace read_trace_csv(const std::string& path) {
    const auto t = io::read_csv(path);
    const int ct = t.column_index("t_s");
    const int cv = t.column_index("current_au");
    if (ct < 0 || cv < 0)
        throw std::runtime_error(path + ": expected columns t_s,current_au");
    if (t.rows() < 2) throw std::runtime_error(path + ": need at least 2 samples");
    PixelTrace out;
    out.sample_rate_hz = 1.0 / (t.columns[ct][1] - t.columns[ct][0]);
    out.samples = t.columns[cv];
    out.duration_s = out.samples.size() / out.sample_rate_hz;
    return out;
}

}  // namespace srsim::chain
