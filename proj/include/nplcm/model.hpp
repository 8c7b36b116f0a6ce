#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "nplcm/types.hpp"

namespace nplcm {

namespace detail {

inline double log_sum_exp(std::span<const double> terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

inline double log_bern(double p, std::uint8_t m) {
    return m ? std::log(p) : std::log1p(-p);
}

}  // namespace detail

// Visits all 2^J patterns in index order (dimension j is bit j of the index).
// Enumeration is capped at J <= 20; beyond that the 2^J blowup is a usage
// error, not something to chew on silently.
inline void for_each_pattern(std::size_t n_dims,
                             const std::function<void(const std::vector<std::uint8_t>&)>& fn) {
    if (n_dims > 20)
        throw std::domain_error("for_each_pattern: enumeration supported only for J <= 20");
    std::vector<std::uint8_t> m(n_dims);
    const std::uint64_t count = std::uint64_t{1} << n_dims;
    for (std::uint64_t code = 0; code < count; ++code) {
        for (std::size_t j = 0; j < n_dims; ++j) m[j] = (code >> j) & 1u;
        fn(m);
    }
}

inline double log_control_pattern_prob(std::span<const std::uint8_t> m,
                                       std::span<const double> nu, const Matrix& psi) {
    const std::size_t J = psi.rows();
    const std::size_t K = psi.cols();
    if (m.size() != J)
        throw std::invalid_argument("control_pattern_prob: pattern length != J");
    if (nu.size() != K)
        throw std::invalid_argument("control_pattern_prob: nu length != K");
    std::vector<double> terms;
    terms.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        if (nu[k] <= 0.0) continue;
        double lp = std::log(nu[k]);
        for (std::size_t j = 0; j < J; ++j) lp += detail::log_bern(psi(j, k), m[j]);
        terms.push_back(lp);
    }
    return detail::log_sum_exp(terms);
}

inline double control_pattern_prob(std::span<const std::uint8_t> m,
                                   std::span<const double> nu, const Matrix& psi) {
    return std::exp(log_control_pattern_prob(m, nu, psi));
}

// Case mixture over disease classes. Class l uses the TPR on dimension l and
// FPRs elsewhere; the optional extra class J+1 uses FPRs everywhere.
inline double log_case_pattern_prob(std::span<const std::uint8_t> m, const ModelParams& p,
                                    bool include_other) {
    const std::size_t J = p.n_dims();
    const std::size_t K = p.n_subclasses();
    if (m.size() != J)
        throw std::invalid_argument("case_pattern_prob: pattern length != J");
    if (p.pi.size() != J + (include_other ? 1 : 0))
        throw std::invalid_argument("case_pattern_prob: pi length inconsistent with other-cause flag");
    std::vector<double> terms;
    terms.reserve((J + 1) * K);
    for (std::size_t k = 0; k < K; ++k) {
        if (p.eta[k] <= 0.0) continue;
        double base = std::log(p.eta[k]);
        std::vector<double> fpr_lp(J);
        for (std::size_t j = 0; j < J; ++j) {
            fpr_lp[j] = detail::log_bern(p.psi(j, k), m[j]);
            base += fpr_lp[j];
        }
        for (std::size_t l = 0; l < J; ++l) {
            if (p.pi[l] <= 0.0) continue;
            double lp = std::log(p.pi[l]) + base - fpr_lp[l] +
                        detail::log_bern(p.theta(l, k), m[l]);
            terms.push_back(lp);
        }
        if (include_other && p.pi[J] > 0.0) terms.push_back(std::log(p.pi[J]) + base);
    }
    return detail::log_sum_exp(terms);
}

inline double case_pattern_prob(std::span<const std::uint8_t> m, const ModelParams& p,
                                bool include_other) {
    return std::exp(log_case_pattern_prob(m, p, include_other));
}

inline double joint_log_likelihood(const Dataset& d, const ModelParams& p) {
    d.validate();
    p.validate();
    if (d.n_dims() != p.n_dims())
        throw std::invalid_argument("joint_log_likelihood: dataset/params dimension mismatch");
    const bool other = d.include_other_cause;
    if (p.pi.size() != d.n_dims() + (other ? 1 : 0))
        throw std::invalid_argument("joint_log_likelihood: pi length inconsistent with dataset flag");
    double ll = 0.0;
    for (std::size_t i = 0; i < d.n_controls(); ++i)
        ll += log_control_pattern_prob({d.controls.row(i), d.n_dims()}, p.nu, p.psi);
    for (std::size_t i = 0; i < d.n_cases(); ++i)
        ll += log_case_pattern_prob({d.cases.row(i), d.n_dims()}, p, other);
    return ll;
}

// Marginal positive rate of dimension j. For cases the classes other than j
// (including the extra cause, when present) all contribute FPR mass, which
// is why the second term carries weight 1 - pi_j.
inline double marginal_rate(std::size_t j, const ModelParams& p, Population pop) {
    const std::size_t J = p.n_dims();
    if (j >= J) throw std::invalid_argument("marginal_rate: dimension out of range");
    const std::size_t K = p.n_subclasses();
    if (pop == Population::kControl) {
        double r = 0.0;
        for (std::size_t k = 0; k < K; ++k) r += p.psi(j, k) * p.nu[k];
        return r;
    }
    double tpr = 0.0, fpr = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        tpr += p.theta(j, k) * p.eta[k];
        fpr += p.psi(j, k) * p.eta[k];
    }
    return p.pi[j] * tpr + (1.0 - p.pi[j]) * fpr;
}

// Log odds ratio between dimensions j and l after marginalizing the other
// J-2 dimensions. Within a (class, subclass) cell the dimensions are
// independent, so the marginalization collapses to a sum over classes and
// subclasses of two-dimensional Bernoulli products.
inline double pairwise_log_or(std::size_t j, std::size_t l, const ModelParams& p,
                              Population pop) {
    const std::size_t J = p.n_dims();
    if (j >= J || l >= J) throw std::invalid_argument("pairwise_log_or: dimension out of range");
    if (j == l) throw std::invalid_argument("pairwise_log_or: dimensions must differ");
    const std::size_t K = p.n_subclasses();
    const std::size_t L = p.n_classes();

    auto bern = [](double prob, int mval) { return mval ? prob : 1.0 - prob; };
    double cell[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    if (pop == Population::kControl) {
        for (std::size_t k = 0; k < K; ++k)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    cell[a][b] += p.nu[k] * bern(p.psi(j, k), a) * bern(p.psi(l, k), b);
    } else {
        for (std::size_t c = 0; c < L; ++c) {
            if (p.pi[c] <= 0.0) continue;
            for (std::size_t k = 0; k < K; ++k) {
                double pj1 = (c == j) ? p.theta(j, k) : p.psi(j, k);
                double pl1 = (c == l) ? p.theta(l, k) : p.psi(l, k);
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        cell[a][b] += p.pi[c] * p.eta[k] * bern(pj1, a) * bern(pl1, b);
            }
        }
    }
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            if (cell[a][b] <= 0.0)
                throw std::domain_error("pairwise_log_or: degenerate 2x2 cell, log odds ratio infinite");
    return std::log(cell[1][1]) + std::log(cell[0][0]) - std::log(cell[1][0]) -
           std::log(cell[0][1]);
}

}  // namespace nplcm
