#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace srsim::util {

// In-place radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& x, bool inverse = false);

// Single DFT bin of a real sequence at integer bin k (rectangular window),
// via the Goertzel recurrence. Equivalent to sum x[n] * exp(-2*pi*i*k*n/N).
std::complex<double> goertzel_bin(std::span<const double> x, std::size_t k);

struct Psd {
    std::vector<double> freq_hz;
    std::vector<double> psd;   // one-sided density, units^2 / Hz
    double enbw_hz = 0.0;      // equivalent noise bandwidth of one bin
};

// Welch estimate with a Hann window and 50% overlap.
Psd welch_psd(std::span<const double> x, double sample_rate_hz, std::size_t nfft);

}  // namespace srsim::util
