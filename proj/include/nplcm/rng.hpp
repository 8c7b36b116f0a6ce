#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace nplcm {

// Counter-based stream built on the splitmix64 finalizer. A stream is keyed
// by an arbitrary tuple (seed, chain, iteration, step, subject, ...), so any
// conditional draw can be replayed independently of what other parts of the
// sampler consumed. This is what makes the cut-feedback invariance exact:
// control-side draws never share a stream with case-side draws.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::initializer_list<std::uint64_t> keys) {
        state_ = 0x6a09e667f3bcc908ULL;  // arbitrary non-zero start
        for (std::uint64_t k : keys) state_ = mix(state_ ^ k);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform on the open interval (0,1); safe for log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    double normal() {
        std::normal_distribution<double> d;
        return d(*this);
    }

    // Gamma with shape/rate parameterization.
    double gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw std::invalid_argument("RngStream::gamma: shape and rate must be positive");
        std::gamma_distribution<double> d(shape, 1.0 / rate);
        return d(*this);
    }

    double beta(double a, double b) {
        double x = gamma(a, 1.0);
        double y = gamma(b, 1.0);
        double s = x + y;
        if (s <= 0.0) return 0.5;  // both underflowed; a,b tiny
        return x / s;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Index draw proportional to non-negative weights.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0 || !std::isfinite(w))
                throw std::domain_error("RngStream::categorical: invalid weight");
            total += w;
        }
        if (total <= 0.0)
            throw std::domain_error("RngStream::categorical: all weights are zero");
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.size() - 1;
    }

    std::vector<double> dirichlet(std::span<const double> alpha) {
        std::vector<double> out(alpha.size());
        double total = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            out[i] = gamma(alpha[i], 1.0);
            total += out[i];
        }
        if (total <= 0.0) {
            // all components underflowed; fall back to the largest-alpha vertex
            std::size_t imax = 0;
            for (std::size_t i = 1; i < alpha.size(); ++i)
                if (alpha[i] > alpha[imax]) imax = i;
            for (auto& v : out) v = 0.0;
            out[imax] = 1.0;
            return out;
        }
        for (auto& v : out) v /= total;
        return out;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace nplcm
