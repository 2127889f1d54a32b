#include <cmath>

#include "doctest.h"
#include "srsim/math_util.hpp"

using namespace srsim;

TEST_CASE("simpson matches exact integrals") {
    const double g = util::simpson([](double x) { return std::exp(-x * x); }, 0.0, 6.0, 2048);
    CHECK(g == doctest::Approx(std::sqrt(util::kPi) / 2.0).epsilon(1e-10));
    const double p = util::simpson([](double x) { return x * x * x; }, 0.0, 2.0, 64);
    CHECK(p == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("db helpers round-trip") {
    for (double x : {-30.0, -3.0, 0.0, 0.8, 1.5, 20.0}) {
        CHECK(util::to_db(util::from_db(x)) == doctest::Approx(x).epsilon(1e-12));
        CHECK(util::variance_to_squeezing_db(util::squeezing_db_to_variance(x)) ==
              doctest::Approx(x).epsilon(1e-12));
    }
    CHECK(util::variance_to_squeezing_db(1.0) == 0.0);
}

TEST_CASE("golden section finds the maximum") {
    const double x = util::golden_section_max(
        [](double v) { return -(v - 1.7) * (v - 1.7); }, 0.0, 5.0, 1e-9);
    CHECK(x == doctest::Approx(1.7).epsilon(1e-7));
}

TEST_CASE("line fits") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 20; ++i) {
        xs.push_back(0.3 * i);
        ys.push_back(2.5 * 0.3 * i - 1.0);
    }
    const auto f = util::fit_line(xs, ys);
    CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(f.rms_residual < 1e-10);

    const auto g = util::fit_line_fixed_slope(xs, ys, 2.5);
    CHECK(g.intercept == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("logspace endpoints and monotonicity") {
    const auto v = util::logspace(2e-6, 1e-4, 16);
    REQUIRE(v.size() == 16);
    CHECK(v.front() == doctest::Approx(2e-6));
    CHECK(v.back() == doctest::Approx(1e-4));
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);
}

TEST_CASE("variance uses the N-1 denominator") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(util::variance(v) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)util::variance(std::vector<double>{1.0}), std::invalid_argument);
}
