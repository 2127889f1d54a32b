#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace srsim::chain {

// Trace synthesis knobs. Shot noise variance is proportional to the detected
// Stokes power; squeeze_variance multiplies the shot noise only (1 = shot
// noise limit). electronic_db is the electronic noise floor relative to shot
// noise; -inf disables it. The spurious term models Kerr / two-photon
// backgrounds as a coherent tone at the modulation frequency.
struct NoiseConfig {
    double detected_power_mw = 9.79;   // Stokes power reaching the photodiode
    double squeeze_variance = 1.0;     // V; 10^(-dB/10)
    double electronic_db = -10.0;
    double spurious_amplitude = 0.0;
    double spurious_phase_rad = 0.0;
    double pulse_depth = 0.5;          // 80 MHz pulse-train modulation of the DC
    double signal_phase_rad = 0.0;
    double lo_drift_rad_per_sqrt_s = 0.0;
    std::uint64_t seed = 1;            // base seed; callers derive substreams
};

struct DetectorModel {
    double quantum_efficiency = 0.82;
    double max_linear_power_mw = 15.0;
    double center_freq_hz = 20e6;
    double bandwidth_hz = 0.5e6;       // resonant bandpass -3 dB width

    void validate() const;
};

struct PixelTrace {
    double sample_rate_hz = 250e6;
    double duration_s = 0.0;
    double mod_freq_hz = 20e6;
    double rep_rate_hz = 80e6;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::vector<double> samples;
};

// Photocurrent synthesis: DC + 80 MHz pulse-train component + SRS tone at the
// modulation frequency + spurious tone + white Gaussian noise (squeezed shot
// + electronic). Deterministic for a fixed seed. Throws saturation_error when
// the detected power exceeds the detector's linear range.
PixelTrace synthesize_photocurrent(double signal_amplitude, const NoiseConfig& noise,
                                   const DetectorModel& detector, double duration_s,
                                   std::uint64_t seed, double sample_rate_hz = 250e6);

// Resonant detection stage: bandpass centered on the modulation frequency,
// suppressing DC and the laser repetition rate by >= 40 dB.
PixelTrace resonant_detector(const PixelTrace& trace, const DetectorModel& detector);

struct LockinConfig {
    double lo_freq_hz = 20e6;
    double lo_phase_rad = 0.0;
    double lowpass_hz = 1e6;
    int lowpass_order = 4;   // even; cascaded biquads
    int decimation = 125;    // 250 MS/s -> 2 MS/s
};

struct LockinResult {
    std::vector<double> i_samples;  // decimated, low-passed
    std::vector<double> q_samples;
    double output_rate_hz = 0.0;
    double lo_phase_rad = 0.0;
    double dc = 0.0;          // mean of the in-phase samples
    double noise_var = 0.0;   // sample variance of the in-phase samples
    double snr_db = 0.0;      // dc^2 / noise_var, in dB
    bool freq_mismatch_warning = false;
};

// Dual-quadrature demodulation: multiply by cos/-sin at the LO, low-pass,
// decimate. For a tone s*cos(wt) at LO phase 0 the DC value is s/2.
LockinResult lockin_demodulate(const PixelTrace& trace, const LockinConfig& cfg);

// LO phase maximizing the squared in-phase mean, by coarse scan plus
// parabolic refinement; result in [-pi, pi). Throws indeterminate_phase_error
// when no coherent component rises 3 sigma above the noise.
double optimize_phase(const PixelTrace& trace, double lo_freq_hz);

// 10*log10(var_ref / var_squeezed) for identically processed sample sets.
double squeezing_level_db(std::span<const double> squeezed, std::span<const double> reference);

struct SnrComparison {
    double direct_db = 0.0;   // spectrum-peak over noise-floor, power dB
    double lockin_db = 0.0;   // phase-optimized in-phase mean over off-bin noise
    double gain_db = 0.0;     // lockin_db - direct_db; ~3 dB for white noise
};

// Both SNR estimates on the same trace, using matched rectangular-window
// resolution bandwidth and the same off-frequency noise reference bins.
SnrComparison compare_lockin_to_direct(const PixelTrace& trace, double f0_hz);

// Flat binary trace record: 16-byte header (magic 'SRT1', f64 LE rate, u32 LE
// length) followed by little-endian f64 samples.
void write_trace_bin(const std::string& path, const PixelTrace& trace);
PixelTrace read_trace_bin(const std::string& path);

void write_trace_csv(const std::string& path, const PixelTrace& trace);
PixelTrace read_trace_csv(const std::string& path);

}  // namespace srsim::chain
