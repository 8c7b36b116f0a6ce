#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "nplcm/rng.hpp"

using nplcm::RngStream;

TEST_CASE("identical keys replay the identical stream") {
    RngStream a{42, 1, 7, 3, 9};
    RngStream b{42, 1, 7, 3, 9};
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("changing any single key decorrelates the stream") {
    RngStream base{42, 1, 7, 3, 9};
    std::uint64_t first = base.next_u64();
    for (std::uint64_t keypos = 0; keypos < 5; ++keypos) {
        std::uint64_t keys[5] = {42, 1, 7, 3, 9};
        keys[keypos] += 1;
        RngStream other{keys[0], keys[1], keys[2], keys[3], keys[4]};
        REQUIRE(other.next_u64() != first);
    }
}

TEST_CASE("uniform draws lie strictly inside (0,1)") {
    RngStream rng{7, 0, 0, 0, 0};
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    REQUIRE(lo > 0.0);
    REQUIRE(hi < 1.0);
    REQUIRE(lo < 0.001);  // the stream actually covers the interval
    REQUIRE(hi > 0.999);
}

TEST_CASE("gamma and beta draws match their means under the law of large numbers") {
    RngStream rng{11, 0, 0, 0, 0};
    double gsum = 0.0, bsum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        gsum += rng.gamma(2.0, 4.0);
        bsum += rng.beta(2.0, 6.0);
    }
    REQUIRE_THAT(gsum / n, Catch::Matchers::WithinAbs(0.5, 0.01));
    REQUIRE_THAT(bsum / n, Catch::Matchers::WithinAbs(0.25, 0.005));
}

TEST_CASE("gamma rejects non-positive parameters") {
    RngStream rng{0, 0, 0, 0, 0};
    REQUIRE_THROWS_AS(rng.gamma(0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(rng.gamma(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("categorical draws respect the weights") {
    RngStream rng{3, 0, 0, 0, 0};
    std::vector<double> w{0.0, 2.0, 0.0, 6.0};
    int counts[4] = {0, 0, 0, 0};
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[rng.categorical(w)];
    REQUIRE(counts[0] == 0);
    REQUIRE(counts[2] == 0);
    REQUIRE_THAT(static_cast<double>(counts[1]) / n,
                 Catch::Matchers::WithinAbs(0.25, 0.01));
}

TEST_CASE("categorical rejects degenerate weight vectors") {
    RngStream rng{3, 0, 0, 0, 0};
    std::vector<double> zeros{0.0, 0.0};
    std::vector<double> negative{0.5, -0.1};
    REQUIRE_THROWS_AS(rng.categorical(zeros), std::domain_error);
    REQUIRE_THROWS_AS(rng.categorical(negative), std::domain_error);
}

TEST_CASE("dirichlet draws are simplexes with the right mean") {
    RngStream rng{5, 0, 0, 0, 0};
    std::vector<double> alpha{2.0, 3.0, 5.0};
    std::vector<double> mean(3, 0.0);
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        auto x = rng.dirichlet(alpha);
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            REQUIRE(x[k] >= 0.0);
            s += x[k];
            mean[k] += x[k];
        }
        REQUIRE_THAT(s, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    REQUIRE_THAT(mean[0] / n, Catch::Matchers::WithinAbs(0.2, 0.005));
    REQUIRE_THAT(mean[2] / n, Catch::Matchers::WithinAbs(0.5, 0.005));
}

TEST_CASE("bernoulli matches its rate") {
    RngStream rng{9, 0, 0, 0, 0};
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
    REQUIRE_THAT(static_cast<double>(hits) / n, Catch::Matchers::WithinAbs(0.3, 0.01));
}
