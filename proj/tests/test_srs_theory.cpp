#include <cmath>
#include <random>

#include "doctest.h"
#include "srsim/imaging.hpp"
#include "srsim/math_util.hpp"
#include "srsim/srs_theory.hpp"

using namespace srsim;
using srs::Chemical;

TEST_CASE("snr_vs_ratio closed form") {
    CHECK(srs::snr_vs_ratio(0.5) / srs::snr_vs_ratio(0.1) ==
          doctest::Approx(1.9718518519).epsilon(1e-9));
    CHECK(util::to_db(srs::snr_vs_ratio(0.5) / srs::snr_vs_ratio(0.1)) ==
          doctest::Approx(2.9487).epsilon(1e-3));
    CHECK(srs::snr_vs_ratio(1e-9) < 1e-8);
    CHECK(srs::snr_vs_ratio(1e9) < 1e-8);
    CHECK_THROWS_AS((void)srs::snr_vs_ratio(0.0), std::domain_error);
    CHECK_THROWS_AS((void)srs::snr_vs_ratio(-1.0), std::domain_error);
}

TEST_CASE("optimal ratio is one half") {
    const double r = srs::optimal_ratio();
    CHECK(r == doctest::Approx(0.5).epsilon(2e-6));

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> rd(0.01, 10.0);
    const double best = srs::snr_vs_ratio(0.5);
    for (int i = 0; i < 1000; ++i) CHECK(best >= srs::snr_vs_ratio(rd(gen)));

    srs::IlluminationConfig paper;
    CHECK(paper.ratio() == doctest::Approx(0.5).epsilon(1e-12));  // 17.8 / 35.6 mW
}

TEST_CASE("snr_vs_ratio has a single interior maximum") {
    // the derivative changes sign exactly once on (0, inf)
    double prev = srs::snr_vs_ratio(0.01);
    int sign_changes = 0;
    bool rising = true;
    for (double x = 0.02; x < 50.0; x *= 1.05) {
        const double v = srs::snr_vs_ratio(x);
        if (rising && v < prev) {
            rising = false;
            ++sign_changes;
        } else if (!rising && v > prev) {
            rising = true;
            ++sign_changes;
        }
        prev = v;
    }
    CHECK(sign_changes == 1);
}

TEST_CASE("raman shift conversions") {
    CHECK(srs::raman_shift_cm1(816.43, 1064.0) == doctest::Approx(2850.0).epsilon(4e-4));
    CHECK(srs::pump_for_shift_nm(2850.0, 1064.0) == doctest::Approx(816.4).epsilon(1.3e-4));
    CHECK(srs::raman_shift_cm1(822.0, 1064.0) == doctest::Approx(2767.0).epsilon(1e-3));
    // the pump tuning range covers the CH stretch region
    CHECK(srs::raman_shift_cm1(800.0, 1064.0) > 3100.0);

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> sd(2700.0, 3200.0);
    for (int i = 0; i < 200; ++i) {
        const double s = sd(gen);
        CHECK(srs::raman_shift_cm1(srs::pump_for_shift_nm(s, 1064.0), 1064.0) ==
              doctest::Approx(s).epsilon(1e-9));
    }
    // strictly decreasing in the pump wavelength
    double prev = srs::raman_shift_cm1(800.0, 1064.0);
    for (double lp = 800.5; lp <= 822.0; lp += 0.5) {
        const double s = srs::raman_shift_cm1(lp, 1064.0);
        CHECK(s < prev);
        prev = s;
    }
    CHECK_THROWS_AS((void)srs::raman_shift_cm1(1100.0, 1064.0), std::domain_error);
    CHECK_THROWS_AS((void)srs::raman_shift_cm1(-5.0, 1064.0), std::domain_error);
}

TEST_CASE("raman spectra") {
    SUBCASE("assigned peaks are the argmax on [2800, 3100]") {
        const std::array<double, 3> peaks{srs::kDnaShift, srs::kProteinShift,
                                          srs::kLipidShift};
        for (int c = 0; c < 3; ++c) {
            const Chemical chem = srs::kChemicals[c];
            const double at_peak = srs::spectrum_value(chem, peaks[c]);
            for (double s = 2800.0; s <= 3100.0; s += 1.0) {
                CHECK(srs::spectrum_value(chem, s) <= at_peak + 1e-12);
                CHECK(srs::spectrum_value(chem, s) >= 0.0);
            }
        }
        CHECK(srs::spectrum_value(Chemical::lipid, 2850.0) >
              srs::spectrum_value(Chemical::lipid, 2967.0));
    }
    SUBCASE("every chemical contributes at least 10% at the other two shifts") {
        const std::array<double, 3> shifts{srs::kDnaShift, srs::kProteinShift,
                                           srs::kLipidShift};
        const std::array<double, 3> own{srs::kDnaShift, srs::kProteinShift,
                                        srs::kLipidShift};
        for (int c = 0; c < 3; ++c) {
            const double peak = srs::spectrum_value(srs::kChemicals[c], own[c]);
            for (double s : shifts) {
                CHECK(srs::spectrum_value(srs::kChemicals[c], s) >= 0.10 * peak);
            }
        }
    }
    SUBCASE("spectra matrix is well conditioned") {
        const auto m = srs::spectra_matrix({srs::kDnaShift, srs::kProteinShift,
                                            srs::kLipidShift});
        const double cond = imaging::condition_number_3x3(m);
        CHECK(cond < 50.0);
        CHECK(cond > 1.0);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS((void)srs::spectrum_value(Chemical::dna, 2000.0), std::domain_error);
        CHECK_THROWS_AS((void)srs::parse_chemical("steel"), std::invalid_argument);
    }
}

TEST_CASE("photodamage check") {
    srs::IlluminationConfig cfg;
    cfg.intensity_w_um2 = 75.0;
    auto r = srs::photodamage_check(cfg);
    CHECK(r.ok);
    CHECK(r.margin_w_um2 == doctest::Approx(5.0));

    cfg.intensity_w_um2 = 230.0;  // calibration-target intensity, above threshold
    r = srs::photodamage_check(cfg);
    CHECK_FALSE(r.ok);
    CHECK(r.margin_w_um2 == doctest::Approx(-150.0));

    cfg.intensity_w_um2 = 0.0;
    CHECK(srs::photodamage_check(cfg).ok);
}
