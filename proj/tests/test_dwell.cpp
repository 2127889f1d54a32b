#include <cmath>

#include "doctest.h"
#include "srsim/dwell.hpp"
#include "srsim/math_util.hpp"
#include "srsim/rng.hpp"

using namespace srsim;
using dwell::DwellTraceSpec;
using dwell::SegmentSnrOptions;

namespace {
constexpr SegmentSnrOptions kFirstSeg{true};
constexpr SegmentSnrOptions kAllSeg{false};
}  // namespace

TEST_CASE("segment_snr basics") {
    SUBCASE("doubling tau doubles the SNR (averaging law)") {
        // high-SNR traces so the estimator noise is small; average over seeds
        DwellTraceSpec spec;
        spec.snr_at_1ms = 2e5;
        double acc = 0.0;
        const int kSeeds = 30;
        for (int s = 1; s <= kSeeds; ++s) {
            const auto tr = dwell::make_dwell_trace(spec, 100 + s);
            const double a = dwell::segment_snr(tr, spec.dt_s, 8e-6, kFirstSeg);
            const double b = dwell::segment_snr(tr, spec.dt_s, 16e-6, kFirstSeg);
            acc += b / a;
        }
        CHECK(acc / kSeeds == doctest::Approx(2.0).epsilon(0.1));
    }
    SUBCASE("amplitude scaling leaves the SNR unchanged") {
        const auto tr = dwell::make_dwell_trace({}, 5);
        auto scaled = tr;
        for (auto& v : scaled) v *= 37.5;
        const double a = dwell::segment_snr(tr, 0.5e-6, 1e-5, kFirstSeg);
        const double b = dwell::segment_snr(scaled, 0.5e-6, 1e-5, kFirstSeg);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    SUBCASE("pure noise gives an SNR on the 1/N scale") {
        DwellTraceSpec spec;
        spec.snr_at_1ms = 0.0;  // zero-mean noise
        double acc = 0.0;
        const int kSeeds = 100;
        const double tau = 1e-5;  // L = 20, N = 100
        for (int s = 1; s <= kSeeds; ++s) {
            const auto tr = dwell::make_dwell_trace(spec, 500 + s);
            acc += dwell::segment_snr(tr, spec.dt_s, tau, kAllSeg);
        }
        const double n_segments = 100.0;
        CHECK(acc / kSeeds < 5.0 / n_segments);
        CHECK(acc / kSeeds > 0.1 / n_segments);
    }
    SUBCASE("preconditions") {
        const auto tr = dwell::make_dwell_trace({}, 1);
        // tau > T/10 leaves fewer than 10 segments
        CHECK_THROWS_AS((void)dwell::segment_snr(tr, 0.5e-6, 2e-4, kFirstSeg),
                        std::invalid_argument);
        // tau below two sample periods
        CHECK_THROWS_AS((void)dwell::segment_snr(tr, 0.5e-6, 0.6e-6, kFirstSeg),
                        std::invalid_argument);
        // constant trace has zero segment spread
        std::vector<double> flat(2000, 3.0);
        CHECK_THROWS_AS((void)dwell::segment_snr(flat, 0.5e-6, 1e-5, kFirstSeg),
                        std::domain_error);
    }
}

TEST_CASE("min_dwell on the calibrated pixel trace") {
    // bundled squeezed-pixel fixture: SNR(1 ms) = 328, i.e. tau_min ~ 3.05 us
    const DwellTraceSpec spec;
    const auto tr = dwell::make_dwell_trace(spec, 9);
    const auto curve = dwell::min_dwell(tr, spec.dt_s, kAllSeg);

    CHECK(curve.tau_min_s == doctest::Approx(3.05e-6).epsilon(0.15));
    CHECK(curve.slope_unconstrained == doctest::Approx(1.0).epsilon(0.05));
    CHECK_FALSE(curve.poor_fit);
    CHECK(curve.points.size() >= 8);
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        CHECK(curve.points[i].tau_s > curve.points[i - 1].tau_s);

    SUBCASE("overall scaling leaves tau_min unchanged") {
        auto scaled = tr;
        for (auto& v : scaled) v *= 0.125;
        const auto c2 = dwell::min_dwell(scaled, spec.dt_s, kAllSeg);
        CHECK(c2.tau_min_s == doctest::Approx(curve.tau_min_s).epsilon(1e-12));
    }
    SUBCASE("removing 1.1 dB of squeezing slows the minimum dwell by ~1.288") {
        DwellTraceSpec shot = spec;
        shot.noise_power_scale = std::pow(10.0, 0.11);
        const auto tsh = dwell::make_dwell_trace(shot, 9);
        const auto csh = dwell::min_dwell(tsh, spec.dt_s, kAllSeg);
        CHECK(csh.tau_min_s / curve.tau_min_s == doctest::Approx(1.288).epsilon(0.024));
    }
}

TEST_CASE("noise scaling law for tau_min holds in the mean") {
    const double g = 1.6;
    double acc = 0.0;
    const int kSeeds = 50;
    for (int s = 1; s <= kSeeds; ++s) {
        DwellTraceSpec base;
        DwellTraceSpec scaled;
        scaled.noise_power_scale = g;
        const auto a = dwell::min_dwell(dwell::make_dwell_trace(base, 2000 + s), base.dt_s,
                                        kAllSeg);
        const auto b = dwell::min_dwell(dwell::make_dwell_trace(scaled, 2000 + s),
                                        scaled.dt_s, kAllSeg);
        acc += b.tau_min_s / a.tau_min_s;
    }
    CHECK(acc / kSeeds == doctest::Approx(g).epsilon(0.03));
}

TEST_CASE("unconstrained slope is 1 on well-resolved traces (paper numerator)") {
    DwellTraceSpec spec;
    spec.snr_at_1ms = 2e5;  // every grid point has SNR >> 1
    double acc = 0.0;
    const int kSeeds = 20;
    for (int s = 1; s <= kSeeds; ++s) {
        const auto c =
            dwell::min_dwell(dwell::make_dwell_trace(spec, 3000 + s), spec.dt_s, kFirstSeg);
        acc += c.slope_unconstrained;
    }
    CHECK(acc / kSeeds == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("quantum speedup") {
    CHECK(dwell::quantum_speedup_ratio(1.1) == doctest::Approx(1.28825).epsilon(1e-4));
    CHECK(dwell::quantum_speedup_ratio(0.0) == 1.0);
    CHECK(dwell::quantum_speedup_ratio(3.01) == doctest::Approx(2.0).epsilon(3e-3));
    // the ~20% dwell-time improvement at 1.1 dB
    CHECK(dwell::quantum_speedup_fraction(1.1) == doctest::Approx(0.2238).epsilon(1e-3));
    CHECK_THROWS_AS((void)dwell::quantum_speedup_ratio(-0.5), std::domain_error);
}

TEST_CASE("video rate budget") {
    const auto a = dwell::video_rate_budget(50.0, 3.05e-6);
    CHECK_FALSE(a.unbounded);
    CHECK(a.side_pixels == 80);
    const auto b = dwell::video_rate_budget(50.0, 3.9e-6);
    CHECK(b.side_pixels == 71);
    CHECK(dwell::video_rate_budget(0.0, 3e-6).unbounded);
    CHECK_THROWS_AS((void)dwell::video_rate_budget(50.0, 0.0), std::domain_error);
}

TEST_CASE("dwell trace fixture is deterministic and calibrated") {
    const auto a = dwell::make_dwell_trace({}, 42);
    const auto b = dwell::make_dwell_trace({}, 42);
    REQUIRE(a.size() == 2000);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    // mean and variance should match c = sqrt(328/2000), sigma = 1
    double m = 0.0;
    for (double v : a) m += v;
    m /= a.size();
    CHECK(m == doctest::Approx(std::sqrt(328.0 / 2000.0)).epsilon(0.15));
}
