#include "srsim/biquad.hpp"

#include <cmath>
#include <stdexcept>

#include "srsim/math_util.hpp"

namespace srsim::util {

std::complex<double> Biquad::response(double f_hz, double sample_rate_hz) const {
    const double w = 2.0 * kPi * f_hz / sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

Biquad resonator_bandpass(double f0_hz, double q, double sample_rate_hz) {
    if (f0_hz <= 0 || q <= 0 || f0_hz >= sample_rate_hz / 2)
        throw std::invalid_argument("resonator_bandpass: bad parameters");
    const double w0 = 2.0 * kPi * f0_hz / sample_rate_hz;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad f;
    f.b0 = alpha / a0;
    f.b1 = 0.0;
    f.b2 = -alpha / a0;
    f.a1 = -2.0 * std::cos(w0) / a0;
    f.a2 = (1.0 - alpha) / a0;
    return f;
}

std::vector<Biquad> butterworth_lowpass(int order, double fc_hz, double sample_rate_hz) {
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("butterworth_lowpass: order must be even and >= 2");
    if (fc_hz <= 0 || fc_hz >= sample_rate_hz / 2)
        throw std::invalid_argument("butterworth_lowpass: bad cutoff");

    // Bilinear transform with prewarped analog cutoff.
    const double warped = std::tan(kPi * fc_hz / sample_rate_hz);
    std::vector<Biquad> chain;
    chain.reserve(order / 2);
    for (int k = 0; k < order / 2; ++k) {
        // analog section: 1 / (s^2 + 2 sin(theta) s + 1), poles on the unit circle
        const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order);
        const double twoq = 2.0 * std::sin(theta);
        const double w2 = warped * warped;
        const double a0 = 1.0 + twoq * warped + w2;
        Biquad f;
        f.b0 = w2 / a0;
        f.b1 = 2.0 * w2 / a0;
        f.b2 = w2 / a0;
        f.a1 = 2.0 * (w2 - 1.0) / a0;
        f.a2 = (1.0 - twoq * warped + w2) / a0;
        chain.push_back(f);
    }
    return chain;
}

double cascade_process(std::vector<Biquad>& chain, double x) {
    for (auto& f : chain) x = f.process(x);
    return x;
}

std::complex<double> cascade_response(const std::vector<Biquad>& chain, double f_hz,
                                      double sample_rate_hz) {
    std::complex<double> h(1.0, 0.0);
    for (const auto& f : chain) h *= f.response(f_hz, sample_rate_hz);
    return h;
}

}  // namespace srsim::util
