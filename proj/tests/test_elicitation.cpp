#include <catch2/catch_amalgamated.hpp>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <vector>

#include "nplcm/elicitation.hpp"
#include "nplcm/rng.hpp"

using namespace nplcm;

TEST_CASE("uniform range recovers the flat prior") {
    // F(0.025) = 0.025 and F(0.975) = 0.975 pin Beta(1,1)
    auto [c1, c2] = beta_from_quantiles({0.025, 0.975});
    REQUIRE_THAT(c1, Catch::Matchers::WithinAbs(1.0, 1e-7));
    REQUIRE_THAT(c2, Catch::Matchers::WithinAbs(1.0, 1e-7));
}

TEST_CASE("the (0.5, 0.99) sensitivity range matches the frozen solution") {
    auto [c1, c2] = beta_from_quantiles({0.5, 0.99});
    REQUIRE_THAT(c1, Catch::Matchers::WithinRel(5.9671614297, 1e-6));
    REQUIRE_THAT(c2, Catch::Matchers::WithinRel(1.2615438985, 1e-6));
    // and the solution really does put the stated mass at the endpoints
    REQUIRE_THAT(boost::math::ibeta(c1, c2, 0.5), Catch::Matchers::WithinAbs(0.025, 1e-9));
    REQUIRE_THAT(boost::math::ibeta(c1, c2, 0.99), Catch::Matchers::WithinAbs(0.975, 1e-9));
}

TEST_CASE("symmetric ranges give symmetric shapes") {
    auto [c1, c2] = beta_from_quantiles({0.3, 0.7});
    REQUIRE_THAT(c1, Catch::Matchers::WithinRel(c2, 1e-7));
}

TEST_CASE("random ranges are solved to quantile residuals below 1e-8") {
    RngStream rng{314, 0, 0, 0, 0};
    for (int rep = 0; rep < 100; ++rep) {
        double lo = 0.02 + 0.6 * rng.uniform();
        double hi = lo + 0.05 + (0.97 - lo - 0.05) * rng.uniform();
        ElicitedRange range{lo, hi};
        auto [c1, c2] = beta_from_quantiles(range);
        REQUIRE(c1 > 0.0);
        REQUIRE(c2 > 0.0);
        REQUIRE_THAT(boost::math::ibeta(c1, c2, lo),
                     Catch::Matchers::WithinAbs(0.025, 1e-8));
        REQUIRE_THAT(boost::math::ibeta(c1, c2, hi),
                     Catch::Matchers::WithinAbs(0.975, 1e-8));
    }
}

TEST_CASE("custom quantile levels are honored") {
    ElicitedRange range{0.4, 0.9};
    range.quantile_low = 0.1;
    range.quantile_high = 0.9;
    auto [c1, c2] = beta_from_quantiles(range);
    REQUIRE_THAT(boost::math::ibeta(c1, c2, 0.4), Catch::Matchers::WithinAbs(0.1, 1e-8));
    REQUIRE_THAT(boost::math::ibeta(c1, c2, 0.9), Catch::Matchers::WithinAbs(0.9, 1e-8));
}

TEST_CASE("invalid ranges are rejected") {
    REQUIRE_THROWS_AS(beta_from_quantiles({0.7, 0.3}), std::invalid_argument);
    REQUIRE_THROWS_AS(beta_from_quantiles({0.0, 0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(beta_from_quantiles({0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("stick breaking maps fractions to weights") {
    std::vector<double> u{0.2, 0.5, 0.25};
    auto w = stick_break(u);
    REQUIRE(w.size() == 4);
    REQUIRE_THAT(w[0], Catch::Matchers::WithinAbs(0.2, 1e-15));
    REQUIRE_THAT(w[1], Catch::Matchers::WithinAbs(0.4, 1e-15));
    REQUIRE_THAT(w[2], Catch::Matchers::WithinAbs(0.1, 1e-15));
    REQUIRE_THAT(w[3], Catch::Matchers::WithinAbs(0.3, 1e-15));
}

TEST_CASE("stick weights sum to exactly one") {
    RngStream rng{17, 0, 0, 0, 0};
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> u(5);
        for (auto& v : u) v = rng.uniform();
        auto w = stick_break(u);
        double s = 0.0;
        for (double v : w) s += v;
        REQUIRE(s == 1.0);
        for (double v : w) REQUIRE(v >= 0.0);
    }
}

TEST_CASE("stick breaking rejects fractions outside the open unit interval") {
    std::vector<double> bad1{0.5, 1.0};
    std::vector<double> bad2{-0.1};
    REQUIRE_THROWS_AS(stick_break(bad1), std::invalid_argument);
    REQUIRE_THROWS_AS(stick_break(bad2), std::invalid_argument);
}

TEST_CASE("empty stick vector gives the trivial single weight") {
    std::vector<double> none;
    auto w = stick_break(none);
    REQUIRE(w == std::vector<double>{1.0});
}
