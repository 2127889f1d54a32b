#pragma once

#include <complex>
#include <vector>

namespace srsim::util {

// Direct form II transposed biquad.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
    double s1 = 0.0, s2 = 0.0;

    double process(double x) {
        const double y = b0 * x + s1;
        s1 = b1 * x - a1 * y + s2;
        s2 = b2 * x - a2 * y;
        return y;
    }
    void reset() { s1 = s2 = 0.0; }

    // Transfer function evaluated on the unit circle at frequency f (Hz).
    std::complex<double> response(double f_hz, double sample_rate_hz) const;
};

// RBJ bandpass with 0 dB peak gain at f0.
Biquad resonator_bandpass(double f0_hz, double q, double sample_rate_hz);

// Butterworth low-pass as a cascade of order/2 biquads (order must be even).
std::vector<Biquad> butterworth_lowpass(int order, double fc_hz, double sample_rate_hz);

double cascade_process(std::vector<Biquad>& chain, double x);
std::complex<double> cascade_response(const std::vector<Biquad>& chain, double f_hz,
                                      double sample_rate_hz);

}  // namespace srsim::util
