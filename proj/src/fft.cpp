#include "srsim/fft.hpp"

#include <cmath>
#include <stdexcept>

#include "srsim/math_util.hpp"

namespace srsim::util {

void fft_inplace(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_inplace: size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = x[i + j];
                const std::complex<double> v = x[i + j + len / 2] * w;
                x[i + j] = u + v;
                x[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& v : x) v /= static_cast<double>(n);
    }
}

std::complex<double> goertzel_bin(std::span<const double> x, std::size_t k) {
    const std::size_t n = x.size();
    const double w = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    const double coeff = 2.0 * std::cos(w);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s0 = x[i] + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    // real/imag of sum x[n] e^{-jwn}
    return {s1 * std::cos(w) - s2, s1 * std::sin(w)};
}

Psd welch_psd(std::span<const double> x, double sample_rate_hz, std::size_t nfft) {
    if (nfft == 0 || (nfft & (nfft - 1)) != 0)
        throw std::invalid_argument("welch_psd: nfft must be a power of two");
    if (x.size() < nfft) throw std::invalid_argument("welch_psd: input shorter than nfft");

    std::vector<double> window(nfft);
    double wsum2 = 0.0;
    for (std::size_t i = 0; i < nfft; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / nfft);
        wsum2 += window[i] * window[i];
    }

    const std::size_t hop = nfft / 2;
    const std::size_t nseg = (x.size() - nfft) / hop + 1;
    std::vector<double> acc(nfft / 2 + 1, 0.0);
    std::vector<std::complex<double>> buf(nfft);
    for (std::size_t s = 0; s < nseg; ++s) {
        const double* seg = x.data() + s * hop;
        for (std::size_t i = 0; i < nfft; ++i) buf[i] = seg[i] * window[i];
        fft_inplace(buf);
        for (std::size_t k = 0; k <= nfft / 2; ++k) acc[k] += std::norm(buf[k]);
    }

    Psd out;
    out.freq_hz.resize(nfft / 2 + 1);
    out.psd.resize(nfft / 2 + 1);
    const double scale = 1.0 / (sample_rate_hz * wsum2 * static_cast<double>(nseg));
    for (std::size_t k = 0; k <= nfft / 2; ++k) {
        out.freq_hz[k] = sample_rate_hz * static_cast<double>(k) / static_cast<double>(nfft);
        // one-sided: double the interior bins
        const double onesided = (k == 0 || k == nfft / 2) ? 1.0 : 2.0;
        out.psd[k] = acc[k] * scale * onesided;
    }
    double wsum = 0.0;
    for (double w : window) wsum += w;
    out.enbw_hz = sample_rate_hz * wsum2 / (wsum * wsum);
    return out;
}

}  // namespace srsim::util
