#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nplcm/gibbs.hpp"

namespace nplcm {

// Potential scale reduction across chains (split-free form). Values below 1
// are sampling noise, so the estimate is floored at 1: identical chains give
// exactly 1.0.
inline double psrf(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) throw std::invalid_argument("psrf: need at least 2 chains");
    const std::size_t n = chains.front().size();
    if (n < 10) throw std::invalid_argument("psrf: need at least 10 draws per chain");
    for (const auto& c : chains)
        if (c.size() != n) throw std::invalid_argument("psrf: chains must have equal length");

    // detect exactly-constant chains up front: the accumulated within-chain
    // variance of a constant chain is rounding noise, not a usable scale
    bool all_constant = true;
    for (const auto& c : chains)
        for (double v : c)
            if (v != c.front()) {
                all_constant = false;
                break;
            }
    if (all_constant)
        throw std::domain_error("psrf: within-chain variance is zero (constant chains)");

    const double m = static_cast<double>(chains.size());
    const double dn = static_cast<double>(n);
    double grand = 0.0;
    std::vector<double> means(chains.size()), vars(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
        double s = 0.0;
        for (double v : chains[c]) s += v;
        means[c] = s / dn;
        grand += means[c];
        double ss = 0.0;
        for (double v : chains[c]) ss += (v - means[c]) * (v - means[c]);
        vars[c] = ss / (dn - 1.0);
    }
    grand /= m;
    double W = 0.0;
    for (double v : vars) W += v;
    W /= m;
    if (W <= 0.0) throw std::domain_error("psrf: within-chain variance is zero (constant chains)");
    double B = 0.0;
    for (double mu : means) B += (mu - grand) * (mu - grand);
    B *= dn / (m - 1.0);
    double vhat = (dn - 1.0) / dn * W + B / dn;
    return std::max(1.0, std::sqrt(vhat / W));
}

// Sample autocorrelation at lags 1..max_lag (biased normalization by c0).
inline std::vector<double> autocorr(std::span<const double> draws, std::size_t max_lag) {
    const std::size_t n = draws.size();
    if (n < 2) throw std::invalid_argument("autocorr: need at least 2 draws");
    double mean = 0.0;
    for (double v : draws) mean += v;
    mean /= static_cast<double>(n);
    double c0 = 0.0;
    for (double v : draws) c0 += (v - mean) * (v - mean);
    c0 /= static_cast<double>(n);
    if (c0 <= 0.0) throw std::domain_error("autocorr: series is constant");
    max_lag = std::min(max_lag, n - 1);
    std::vector<double> rho(max_lag);
    for (std::size_t t = 1; t <= max_lag; ++t) {
        double ct = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) ct += (draws[i] - mean) * (draws[i + t] - mean);
        rho[t - 1] = ct / static_cast<double>(n) / c0;
    }
    return rho;
}

// Effective sample size with the summed-autocorrelation time truncated at
// the first nonpositive pair (rho_{2k} + rho_{2k+1} <= 0), capped at n.
inline double ess(std::span<const double> draws) {
    const std::size_t n = draws.size();
    if (n < 4) return static_cast<double>(n);
    auto rho = autocorr(draws, n - 1);
    // pair sums over (rho_1, rho_2), (rho_3, rho_4), ... with implicit rho_0 = 1
    double tau = 1.0;
    for (std::size_t k = 0; k + 1 < rho.size(); k += 2) {
        double pair = rho[k] + rho[k + 1];
        if (pair <= 0.0) break;
        tau += 2.0 * pair;
    }
    double out = static_cast<double>(n) / tau;
    return std::clamp(out, 1.0, static_cast<double>(n));
}

// Equal-tail summary: 2.5%, 25%, 50%, 75%, 97.5% with linear interpolation.
inline std::array<double, 5> quantiles5(std::vector<double> draws) {
    if (draws.empty()) throw std::invalid_argument("quantiles5: empty draws");
    std::sort(draws.begin(), draws.end());
    auto q = [&](double p) {
        double h = p * (static_cast<double>(draws.size()) - 1.0);
        std::size_t lo = static_cast<std::size_t>(h);
        std::size_t hi = std::min(lo + 1, draws.size() - 1);
        double w = h - static_cast<double>(lo);
        return (1.0 - w) * draws[lo] + w * draws[hi];
    };
    return {q(0.025), q(0.25), q(0.50), q(0.75), q(0.975)};
}

struct FunctionalSummary {
    std::string name;
    double psrf = 1.0;        // NaN when only one chain was run
    double ess = 0.0;         // summed across chains
    std::array<double, 5> quantiles{};
    std::vector<double> autocorr_mean;  // averaged across chains
};

struct DiagnosticsReport {
    std::size_t n_chains = 0;
    std::size_t draws_per_chain = 0;
    std::vector<FunctionalSummary> functionals;

    const FunctionalSummary& at(const std::string& name) const {
        for (const auto& f : functionals)
            if (f.name == name) return f;
        throw std::out_of_range("DiagnosticsReport: no functional named " + name);
    }
};

// The monitored scalar functionals: every class weight, both concentration
// parameters, and the largest subclass weight per population. The subclass
// functionals are dropped at truncation 1 where they are constants.
inline std::vector<std::pair<std::string, std::vector<std::vector<double>>>>
monitored_functionals(const PosteriorSamples& post) {
    std::vector<std::pair<std::string, std::vector<std::vector<double>>>> out;
    const std::size_t n_chains = post.chains.size();
    auto class_name = [&](std::size_t l) {
        if (l < post.pathogen_names.size()) return "pi[" + post.pathogen_names[l] + "]";
        if (l == post.n_dims && post.n_classes == post.n_dims + 1)
            return std::string("pi[other]");
        return "pi[" + std::to_string(l + 1) + "]";
    };
    for (std::size_t l = 0; l < post.n_classes; ++l) {
        std::vector<std::vector<double>> chains(n_chains);
        for (std::size_t c = 0; c < n_chains; ++c) {
            chains[c].reserve(post.chains[c].size());
            for (const auto& draw : post.chains[c].pi) chains[c].push_back(draw[l]);
        }
        out.emplace_back(class_name(l), std::move(chains));
    }
    if (post.n_subclasses > 1) {
        auto push_scalar = [&](const std::string& name, auto getter) {
            std::vector<std::vector<double>> chains(n_chains);
            for (std::size_t c = 0; c < n_chains; ++c) {
                chains[c].reserve(post.chains[c].size());
                for (std::size_t t = 0; t < post.chains[c].size(); ++t)
                    chains[c].push_back(getter(post.chains[c], t));
            }
            out.emplace_back(name, std::move(chains));
        };
        push_scalar("alpha0", [](const ChainDraws& c, std::size_t t) { return c.alpha0[t]; });
        push_scalar("alpha1", [](const ChainDraws& c, std::size_t t) { return c.alpha1[t]; });
        push_scalar("max_eta", [](const ChainDraws& c, std::size_t t) {
            return *std::max_element(c.eta[t].begin(), c.eta[t].end());
        });
        push_scalar("max_nu", [](const ChainDraws& c, std::size_t t) {
            return *std::max_element(c.nu[t].begin(), c.nu[t].end());
        });
    }
    return out;
}

inline DiagnosticsReport summarize(const PosteriorSamples& post, std::size_t max_lag = 50) {
    DiagnosticsReport rep;
    rep.n_chains = post.chains.size();
    rep.draws_per_chain = post.draws_per_chain();
    for (auto& [name, chains] : monitored_functionals(post)) {
        FunctionalSummary f;
        f.name = name;
        const double first = chains.front().front();
        bool constant = true;
        for (const auto& c : chains)
            constant = constant && std::all_of(c.begin(), c.end(),
                                               [&](double v) { return v == first; });
        std::vector<double> pooled;
        for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
        f.quantiles = quantiles5(pooled);
        if (constant) {
            // degenerate functional (e.g. pinned weight): report without
            // psrf/ess rather than erroring the whole summary
            f.psrf = 1.0;
            f.ess = static_cast<double>(pooled.size());
            rep.functionals.push_back(std::move(f));
            continue;
        }
        f.psrf = chains.size() >= 2 ? psrf(chains) : std::numeric_limits<double>::quiet_NaN();
        f.ess = 0.0;
        std::size_t lag = std::min(max_lag, rep.draws_per_chain > 1 ? rep.draws_per_chain - 1 : 1);
        f.autocorr_mean.assign(lag, 0.0);
        for (const auto& c : chains) {
            f.ess += ess(c);
            auto rho = autocorr(c, lag);
            for (std::size_t t = 0; t < rho.size(); ++t) f.autocorr_mean[t] += rho[t];
        }
        for (double& v : f.autocorr_mean) v /= static_cast<double>(chains.size());
        rep.functionals.push_back(std::move(f));
    }
    return rep;
}

}  // namespace nplcm
