#include <cmath>
#include <cstdio>
#include <limits>

#include "doctest.h"
#include "srsim/biquad.hpp"
#include "srsim/errors.hpp"
#include "srsim/fft.hpp"
#include "srsim/math_util.hpp"
#include "srsim/signal_chain.hpp"
#include "support/test_helpers.hpp"

using namespace srsim;
using chain::DetectorModel;
using chain::LockinConfig;
using chain::NoiseConfig;

namespace {
NoiseConfig quiet_noise() {
    NoiseConfig n;
    n.detected_power_mw = 0.0;  // no DC, no shot noise
    n.electronic_db = -std::numeric_limits<double>::infinity();
    n.pulse_depth = 0.0;
    return n;
}
}  // namespace

TEST_CASE("synthesis determinism and saturation") {
    NoiseConfig n;
    const DetectorModel det;
    const auto a = chain::synthesize_photocurrent(0.3, n, det, 5e-5, 77);
    const auto b = chain::synthesize_photocurrent(0.3, n, det, 5e-5, 77);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);

    NoiseConfig hot = n;
    hot.detected_power_mw = 16.0;
    CHECK_THROWS_AS((void)chain::synthesize_photocurrent(0.3, hot, det, 5e-5, 77),
                    saturation_error);
}

TEST_CASE("pure shot noise has a flat spectrum at the expected level") {
    NoiseConfig n;
    n.pulse_depth = 0.0;
    n.electronic_db = -std::numeric_limits<double>::infinity();
    const DetectorModel det;
    const auto tr = chain::synthesize_photocurrent(0.0, n, det, 4e-3, 1234);
    auto psd = util::welch_psd(tr.samples, tr.sample_rate_hz, 4096);
    // DC term from the mean photocurrent sits in the first bins; skip them
    const double sigma2 = det.quantum_efficiency * n.detected_power_mw;
    const double expected = 2.0 * sigma2 / tr.sample_rate_hz;  // one-sided white level
    double lo = 0.0, mid = 0.0, hi = 0.0;
    int nlo = 0, nmid = 0, nhi = 0;
    for (std::size_t k = 8; k < psd.freq_hz.size(); ++k) {
        const double f = psd.freq_hz[k];
        if (f < 30e6) {
            lo += psd.psd[k];
            ++nlo;
        } else if (f < 70e6) {
            mid += psd.psd[k];
            ++nmid;
        } else if (f < 110e6) {
            hi += psd.psd[k];
            ++nhi;
        }
    }
    lo /= nlo;
    mid /= nmid;
    hi /= nhi;
    CHECK(lo == doctest::Approx(expected).epsilon(0.05));
    CHECK(mid == doctest::Approx(expected).epsilon(0.05));
    CHECK(hi == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("squeezing scales the noise floor at 20 MHz") {
    NoiseConfig n;
    n.pulse_depth = 0.0;
    n.electronic_db = -std::numeric_limits<double>::infinity();
    const DetectorModel det;
    const auto ref = chain::synthesize_photocurrent(0.0, n, det, 8e-3, 99);
    n.squeeze_variance = 0.708;  // 1.5 dB of squeezing
    const auto sq = chain::synthesize_photocurrent(0.0, n, det, 8e-3, 99);

    auto band_power = [](const chain::PixelTrace& t) {
        const auto psd = util::welch_psd(t.samples, t.sample_rate_hz, 4096);
        double acc = 0.0;
        int cnt = 0;
        for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
            if (psd.freq_hz[k] > 15e6 && psd.freq_hz[k] < 25e6) {
                acc += psd.psd[k];
                ++cnt;
            }
        }
        return acc / cnt;
    };
    const double drop_db = util::to_db(band_power(ref) / band_power(sq));
    CHECK(drop_db == doctest::Approx(1.5).epsilon(0.08));
}

TEST_CASE("resonant detector response") {
    const DetectorModel det;  // 20 MHz center, 0.5 MHz bandwidth
    NoiseConfig n = quiet_noise();

    SUBCASE("suppresses the repetition rate by at least 40 dB") {
        // pulse train only: tone at 80 MHz riding on the DC
        NoiseConfig p = quiet_noise();
        p.detected_power_mw = 5.0;
        p.pulse_depth = 1.0;
        const auto in = chain::synthesize_photocurrent(0.0, p, det, 2e-4, 5);
        const auto out = chain::resonant_detector(in, det);
        const std::size_t nsamp = in.samples.size();
        const std::size_t k80 = static_cast<std::size_t>(
            std::llround(80e6 * static_cast<double>(nsamp) / in.sample_rate_hz));
        const double in80 = std::norm(util::goertzel_bin(in.samples, k80));
        const double out80 = std::norm(util::goertzel_bin(out.samples, k80));
        CHECK(util::to_db(out80 / in80) < -40.0);
    }
    SUBCASE("passes the modulation frequency at center gain") {
        const auto in = chain::synthesize_photocurrent(1.0, n, det, 2e-4, 5);
        const auto out = chain::resonant_detector(in, det);
        const std::size_t nsamp = in.samples.size();
        const std::size_t k20 = static_cast<std::size_t>(
            std::llround(20e6 * static_cast<double>(nsamp) / in.sample_rate_hz));
        const double gain_db = util::to_db(std::norm(util::goertzel_bin(out.samples, k20)) /
                                           std::norm(util::goertzel_bin(in.samples, k20)));
        const double q = det.center_freq_hz / det.bandwidth_hz;
        const auto bp = util::resonator_bandpass(det.center_freq_hz, q, in.sample_rate_hz);
        const double center_db = util::to_db(std::norm(bp.response(20e6, in.sample_rate_hz)));
        CHECK(gain_db == doctest::Approx(center_db).epsilon(0.06));  // within 0.5 dB
        CHECK(std::abs(center_db) < 0.1);
    }
    SUBCASE("suppresses DC by at least 40 dB") {
        const double q = det.center_freq_hz / det.bandwidth_hz;
        const auto bp = util::resonator_bandpass(det.center_freq_hz, q, 250e6);
        CHECK(util::to_db(std::norm(bp.response(1e3, 250e6))) < -40.0);
        CHECK(util::to_db(std::norm(bp.response(80e6, 250e6))) < -40.0);
    }
    SUBCASE("white noise is shaped by |H|^2") {
        NoiseConfig w;
        w.pulse_depth = 0.0;
        w.electronic_db = -std::numeric_limits<double>::infinity();
        const auto in = chain::synthesize_photocurrent(0.0, w, det, 16e-3, 31);
        const auto out = chain::resonant_detector(in, det);
        const auto psd = util::welch_psd(out.samples, out.sample_rate_hz, 16384);
        const double q = det.center_freq_hz / det.bandwidth_hz;
        const auto bp = util::resonator_bandpass(det.center_freq_hz, q, out.sample_rate_hz);
        const double n0 =
            2.0 * det.quantum_efficiency * w.detected_power_mw / out.sample_rate_hz;
        double err = 0.0;
        int cnt = 0;
        for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
            const double h2 = std::norm(bp.response(psd.freq_hz[k], out.sample_rate_hz));
            if (h2 < 0.05) continue;  // compare where the response is defined
            err += psd.psd[k] / (h2 * n0) - 1.0;
            ++cnt;
        }
        REQUIRE(cnt > 30);
        CHECK(std::abs(err / cnt) < 0.05);
    }
}

TEST_CASE("lock-in demodulation") {
    const DetectorModel det;
    LockinConfig lock;

    SUBCASE("textbook quadratures") {
        NoiseConfig n = quiet_noise();
        const double s = 0.8;
        const auto tr = chain::synthesize_photocurrent(s, n, det, 1e-3, 1);
        auto res = chain::lockin_demodulate(tr, lock);
        CHECK(res.dc == doctest::Approx(s / 2.0).epsilon(2e-3));
        // signal power in Q at most 1% of I after phase alignment
        const double qdc = testsup::mean_of(res.q_samples);
        CHECK(qdc * qdc <= 1e-4 * res.dc * res.dc);
        CHECK(res.output_rate_hz == doctest::Approx(2e6));
        CHECK(res.i_samples.size() >= 2000);

        lock.lo_phase_rad = util::kPi / 2.0;
        auto swapped = chain::lockin_demodulate(tr, lock);
        CHECK(std::abs(swapped.dc) < 0.01 * s);
        CHECK(testsup::mean_of(swapped.q_samples) == doctest::Approx(-s / 2.0).epsilon(2e-3));
    }
    SUBCASE("frequency mismatch beyond the low-pass raises the warning flag") {
        NoiseConfig n = quiet_noise();
        const auto tr = chain::synthesize_photocurrent(0.5, n, det, 1e-4, 1);
        LockinConfig off;
        off.lo_freq_hz = 22e6;
        const auto res = chain::lockin_demodulate(tr, off);
        CHECK(res.freq_mismatch_warning);
        CHECK(std::abs(res.dc) < 0.01);
        LockinConfig close;
        close.lo_freq_hz = 20e6 + 0.4e6;
        CHECK_FALSE(chain::lockin_demodulate(tr, close).freq_mismatch_warning);
    }
}

TEST_CASE("phase optimization") {
    const DetectorModel det;

    SUBCASE("noiseless round-trip to 0.01 rad") {
        for (double phi : {-2.5, -0.7, 0.0, 0.4, 1.9, 3.0}) {
            NoiseConfig n = quiet_noise();
            n.signal_phase_rad = phi;
            const auto tr = chain::synthesize_photocurrent(0.5, n, det, 2e-4, 1);
            const double rec = chain::optimize_phase(tr, 20e6);
            double d = rec - phi;
            while (d > util::kPi / 2) d -= util::kPi;  // mean(I)^2 has period pi
            while (d < -util::kPi / 2) d += util::kPi;
            CHECK(std::abs(d) < 0.01);
        }
    }
    SUBCASE("noisy recovery is unbiased to 0.1 rad over 100 seeds") {
        const double phi = 0.9;
        double acc = 0.0;
        for (int seed = 1; seed <= 100; ++seed) {
            NoiseConfig n;
            n.pulse_depth = 0.0;
            n.signal_phase_rad = phi;
            n.detected_power_mw = 5.0;
            // tone amplitude set for ~10 dB lock-in SNR on a 1 ms trace
            const auto tr = chain::synthesize_photocurrent(0.05, n, det, 1e-3, seed);
            double d = chain::optimize_phase(tr, 20e6) - phi;
            while (d > util::kPi / 2) d -= util::kPi;
            while (d < -util::kPi / 2) d += util::kPi;
            acc += d;
        }
        CHECK(std::abs(acc / 100.0) < 0.1);
    }
    SUBCASE("pure noise raises indeterminate-phase") {
        NoiseConfig n;
        n.pulse_depth = 0.0;
        const auto tr = chain::synthesize_photocurrent(0.0, n, det, 5e-4, 12);
        CHECK_THROWS_AS((void)chain::optimize_phase(tr, 20e6), indeterminate_phase_error);
    }
}

TEST_CASE("squeezing level estimator") {
    const DetectorModel det;
    const LockinConfig lock;

    auto demod_noise = [&](double v, std::uint64_t seed) {
        NoiseConfig n;
        n.pulse_depth = 0.0;
        n.electronic_db = -std::numeric_limits<double>::infinity();
        n.squeeze_variance = v;
        const auto tr = chain::synthesize_photocurrent(0.0, n, det, 10e-3, seed);
        return chain::lockin_demodulate(tr, lock).i_samples;
    };

    SUBCASE("identical traces give exactly 0 dB") {
        const auto a = demod_noise(1.0, 4);
        CHECK(chain::squeezing_level_db(a, a) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
    SUBCASE("1.5 dB and 0.8 dB points") {
        const auto ref = demod_noise(1.0, 21);
        CHECK(chain::squeezing_level_db(demod_noise(0.708, 22), ref) ==
              doctest::Approx(1.5).epsilon(0.067));  // +-0.1 dB
        CHECK(chain::squeezing_level_db(demod_noise(0.831, 23), ref) ==
              doctest::Approx(0.8).epsilon(0.125));  // +-0.1 dB
    }
    SUBCASE("degenerate reference is a domain error") {
        std::vector<double> flat(100, 2.0), noisy(100);
        for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] = (i % 2) ? 1.0 : -1.0;
        CHECK_THROWS_AS((void)chain::squeezing_level_db(noisy, flat), std::domain_error);
    }
}

TEST_CASE("demodulated noise variance is proportional to detected power") {
    const DetectorModel det;
    const LockinConfig lock;
    std::vector<double> lp, lv;
    for (double p : {0.1, 0.316, 1.0, 3.16, 10.0}) {
        NoiseConfig n;
        n.pulse_depth = 0.0;
        n.detected_power_mw = p;
        const auto tr = chain::synthesize_photocurrent(0.0, n, det, 2e-3, 17);
        const auto res = chain::lockin_demodulate(tr, lock);
        lp.push_back(std::log10(p));
        lv.push_back(std::log10(res.noise_var));
    }
    const auto fit = util::fit_line(lp, lv);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("lock-in beats direct spectral detection by ~3 dB") {
    const DetectorModel det;
    double acc = 0.0;
    const int kTrials = 10;
    for (int seed = 1; seed <= kTrials; ++seed) {
        NoiseConfig n;
        n.pulse_depth = 0.0;
        n.electronic_db = -std::numeric_limits<double>::infinity();
        const auto tr = chain::synthesize_photocurrent(0.05, n, det, 1e-3, seed);
        acc += chain::compare_lockin_to_direct(tr, 20e6).gain_db;
    }
    CHECK(acc / kTrials == doctest::Approx(3.0).epsilon(0.15));
}

TEST_CASE("trace records round-trip") {
    NoiseConfig n;
    const DetectorModel det;
    const auto tr = chain::synthesize_photocurrent(0.4, n, det, 6e-5, 3);

    const std::string binpath = "trace_roundtrip.bin";
    chain::write_trace_bin(binpath, tr);
    const auto back = chain::read_trace_bin(binpath);
    REQUIRE(back.samples.size() == tr.samples.size());
    CHECK(back.sample_rate_hz == tr.sample_rate_hz);
    for (std::size_t i = 0; i < tr.samples.size(); ++i)
        CHECK(back.samples[i] == tr.samples[i]);

    const std::string csvpath = "trace_roundtrip.csv";
    chain::write_trace_csv(csvpath, tr);
    const auto csv = chain::read_trace_csv(csvpath);
    REQUIRE(csv.samples.size() == tr.samples.size());
    CHECK(csv.sample_rate_hz == doctest::Approx(tr.sample_rate_hz).epsilon(1e-9));
    for (std::size_t i = 0; i < tr.samples.size(); ++i)
        CHECK(csv.samples[i] == doctest::Approx(tr.samples[i]).epsilon(1e-9));
    std::remove(binpath.c_str());
    std::remove(csvpath.c_str());
}
