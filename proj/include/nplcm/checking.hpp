#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nplcm/diagnostics.hpp"
#include "nplcm/gibbs.hpp"
#include "nplcm/simulation.hpp"
#include "nplcm/types.hpp"

namespace nplcm {

namespace detail {
inline constexpr std::uint64_t kPpdStream = 7;

inline std::size_t pair_index(std::size_t j, std::size_t l, std::size_t n_dims) {
    if (j >= l || l >= n_dims) throw std::out_of_range("pair_index: need j < l < J");
    // offset of row j in the upper triangle, then the column
    return j * n_dims - j * (j + 1) / 2 + (l - j - 1);
}
}  // namespace detail

// One pairwise 2x2 log odds ratio. Pairs involving a constant column have no
// defined estimate and are reported as such rather than erroring.
struct LorCell {
    bool defined = false;
    double log_or = 0.0;
    double se = 0.0;
    double z = 0.0;
};

struct LorTable {
    std::size_t n_dims = 0;
    std::vector<LorCell> cells;  // upper triangle j < l

    const LorCell& at(std::size_t j, std::size_t l) const {
        return cells[detail::pair_index(j, l, n_dims)];
    }
    LorCell& at(std::size_t j, std::size_t l) {
        return cells[detail::pair_index(j, l, n_dims)];
    }
};

// Sample log odds ratios for every measurement pair, with the 0.5 continuity
// correction applied to all four cells when any cell is empty.
inline LorTable observed_lor(const BinaryMatrix& m) {
    const std::size_t J = m.cols();
    const std::size_t n = m.rows();
    LorTable t;
    t.n_dims = J;
    t.cells.resize(J * (J - 1) / 2);
    std::vector<bool> constant(J);
    for (std::size_t j = 0; j < J; ++j) {
        bool all_same = true;
        for (std::size_t i = 1; i < n && all_same; ++i) all_same = m(i, j) == m(0, j);
        constant[j] = all_same;
    }
    for (std::size_t j = 0; j + 1 < J; ++j)
        for (std::size_t l = j + 1; l < J; ++l) {
            LorCell& c = t.at(j, l);
            if (constant[j] || constant[l]) continue;  // stays undefined
            double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                bool a = m(i, j), b = m(i, l);
                (a ? (b ? n11 : n10) : (b ? n01 : n00)) += 1.0;
            }
            if (n11 == 0.0 || n10 == 0.0 || n01 == 0.0 || n00 == 0.0) {
                n11 += 0.5;
                n10 += 0.5;
                n01 += 0.5;
                n00 += 0.5;
            }
            c.defined = true;
            c.log_or = std::log(n11 * n00 / (n10 * n01));
            c.se = std::sqrt(1.0 / n11 + 1.0 / n10 + 1.0 / n01 + 1.0 / n00);
            c.z = c.log_or / c.se;
        }
    return t;
}

namespace detail {
// Run fn over one replicate dataset per retained draw. Replicates reuse the
// forward generator, sized like the observed data.
template <typename Fn>
void for_each_replicate(const PosteriorSamples& post, const Dataset& d, std::uint64_t seed,
                        Fn&& fn) {
    for (std::size_t c = 0; c < post.chains.size(); ++c)
        for (std::size_t t = 0; t < post.chains[c].size(); ++t) {
            RngStream keys{seed, c, kPpdStream, 0, t};
            Dataset rep = generate_from_params(post.params_at(c, t), d.n_cases(),
                                               d.n_controls(), keys.next_u64(),
                                               d.pathogen_names);
            fn(rep);
        }
}
}  // namespace detail

struct PpdPatternSummary {
    std::vector<std::uint8_t> pattern;
    double observed_freq = 0.0;
    double predictive_mean = 0.0;
    std::array<double, 5> predictive_quantiles{};
};

struct PpdReport {
    std::size_t n_draws = 0;
    std::vector<PpdPatternSummary> case_patterns, control_patterns;
};

// Posterior predictive frequencies of the most common observed patterns,
// one simulated replicate per retained draw.
inline PpdReport ppd_pattern_freq(const PosteriorSamples& post, const Dataset& d,
                                  std::size_t top_n, std::uint64_t seed) {
    d.validate();
    if (top_n == 0) throw std::invalid_argument("ppd_pattern_freq: top_n must be >= 1");

    auto top_patterns = [&](const BinaryMatrix& m) {
        std::map<std::vector<std::uint8_t>, std::size_t> counts;
        for (std::size_t i = 0; i < m.rows(); ++i)
            ++counts[std::vector<std::uint8_t>(m.row(i), m.row(i) + m.cols())];
        std::vector<std::pair<std::vector<std::uint8_t>, std::size_t>> sorted(counts.begin(),
                                                                              counts.end());
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        if (sorted.size() > top_n) sorted.resize(top_n);
        return sorted;
    };
    auto case_tops = top_patterns(d.cases);
    auto ctrl_tops = top_patterns(d.controls);

    // per-draw frequencies for each tracked pattern
    std::vector<std::vector<double>> case_freq(case_tops.size());
    std::vector<std::vector<double>> ctrl_freq(ctrl_tops.size());
    auto count_freq = [](const BinaryMatrix& m, const std::vector<std::uint8_t>& pat) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (std::equal(pat.begin(), pat.end(), m.row(i))) ++hits;
        return static_cast<double>(hits) / static_cast<double>(m.rows());
    };
    std::size_t n_draws = 0;
    detail::for_each_replicate(post, d, seed, [&](const Dataset& rep) {
        ++n_draws;
        for (std::size_t p = 0; p < case_tops.size(); ++p)
            case_freq[p].push_back(count_freq(rep.cases, case_tops[p].first));
        for (std::size_t p = 0; p < ctrl_tops.size(); ++p)
            ctrl_freq[p].push_back(count_freq(rep.controls, ctrl_tops[p].first));
    });

    PpdReport rep;
    rep.n_draws = n_draws;
    auto build = [&](const auto& tops, auto& freqs, const BinaryMatrix& m) {
        std::vector<PpdPatternSummary> out;
        for (std::size_t p = 0; p < tops.size(); ++p) {
            PpdPatternSummary s;
            s.pattern = tops[p].first;
            s.observed_freq =
                static_cast<double>(tops[p].second) / static_cast<double>(m.rows());
            double sum = 0.0;
            for (double v : freqs[p]) sum += v;
            s.predictive_mean = sum / static_cast<double>(freqs[p].size());
            s.predictive_quantiles = quantiles5(freqs[p]);
            out.push_back(std::move(s));
        }
        return out;
    };
    rep.case_patterns = build(case_tops, case_freq, d.cases);
    rep.control_patterns = build(ctrl_tops, ctrl_freq, d.controls);
    return rep;
}

// Standardized difference between an observed pairwise log odds ratio and
// its posterior predictive distribution.
struct SlordCell {
    bool defined = false;
    double observed = 0.0;
    double predictive_mean = 0.0;
    double predictive_sd = 0.0;
    double value = 0.0;   // (observed - predictive mean) / predictive sd
    bool flagged = false;  // defined and |value| > 2
    std::size_t n_defined_draws = 0;
};

struct SlordReport {
    std::size_t n_dims = 0;
    std::size_t n_draws = 0;
    std::vector<SlordCell> case_cells, control_cells;  // upper triangle j < l

    const SlordCell& case_at(std::size_t j, std::size_t l) const {
        return case_cells[detail::pair_index(j, l, n_dims)];
    }
    const SlordCell& control_at(std::size_t j, std::size_t l) const {
        return control_cells[detail::pair_index(j, l, n_dims)];
    }
    std::size_t n_flagged(Population pop) const {
        const auto& cells = pop == Population::kCase ? case_cells : control_cells;
        std::size_t n = 0;
        for (const auto& c : cells) n += c.flagged ? 1 : 0;
        return n;
    }
};

inline SlordReport slord(const PosteriorSamples& post, const Dataset& d, std::uint64_t seed) {
    d.validate();
    const std::size_t J = d.n_dims();
    const std::size_t n_pairs = J * (J - 1) / 2;
    LorTable obs_case = observed_lor(d.cases);
    LorTable obs_ctrl = observed_lor(d.controls);

    struct Acc {
        double sum = 0.0, sumsq = 0.0;
        std::size_t n = 0;
    };
    std::vector<Acc> acc_case(n_pairs), acc_ctrl(n_pairs);
    std::size_t n_draws = 0;
    detail::for_each_replicate(post, d, seed, [&](const Dataset& rep) {
        ++n_draws;
        LorTable rc = observed_lor(rep.cases);
        LorTable r0 = observed_lor(rep.controls);
        for (std::size_t p = 0; p < n_pairs; ++p) {
            if (rc.cells[p].defined) {
                acc_case[p].sum += rc.cells[p].log_or;
                acc_case[p].sumsq += rc.cells[p].log_or * rc.cells[p].log_or;
                ++acc_case[p].n;
            }
            if (r0.cells[p].defined) {
                acc_ctrl[p].sum += r0.cells[p].log_or;
                acc_ctrl[p].sumsq += r0.cells[p].log_or * r0.cells[p].log_or;
                ++acc_ctrl[p].n;
            }
        }
    });

    auto finish = [&](const LorTable& obs, const std::vector<Acc>& acc) {
        std::vector<SlordCell> cells(n_pairs);
        for (std::size_t p = 0; p < n_pairs; ++p) {
            SlordCell& c = cells[p];
            c.n_defined_draws = acc[p].n;
            if (!obs.cells[p].defined || acc[p].n < 2) continue;
            double mean = acc[p].sum / static_cast<double>(acc[p].n);
            double var = (acc[p].sumsq - acc[p].sum * mean) /
                         (static_cast<double>(acc[p].n) - 1.0);
            if (!(var > 0.0)) continue;
            c.defined = true;
            c.observed = obs.cells[p].log_or;
            c.predictive_mean = mean;
            c.predictive_sd = std::sqrt(var);
            c.value = (c.observed - mean) / c.predictive_sd;
            c.flagged = std::abs(c.value) > 2.0;
        }
        return cells;
    };
    SlordReport rep;
    rep.n_dims = J;
    rep.n_draws = n_draws;
    rep.case_cells = finish(obs_case, acc_case);
    rep.control_cells = finish(obs_ctrl, acc_ctrl);
    return rep;
}

// Posterior probability that a single subclass carries essentially all the
// weight, for each population's subclass mixture.
struct ConcentrationReport {
    double epsilon = 0.05;
    double prob_eta = 0.0;  // P(max_k eta_k > 1 - epsilon)
    double prob_nu = 0.0;
    std::array<double, 5> max_eta_quantiles{};
    std::array<double, 5> max_nu_quantiles{};
};

inline ConcentrationReport subclass_concentration(const PosteriorSamples& post,
                                                  double epsilon = 0.05) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("subclass_concentration: epsilon must lie in (0,1)");
    ConcentrationReport rep;
    rep.epsilon = epsilon;
    std::vector<double> max_eta, max_nu;
    for (const auto& chain : post.chains)
        for (std::size_t t = 0; t < chain.size(); ++t) {
            max_eta.push_back(*std::max_element(chain.eta[t].begin(), chain.eta[t].end()));
            max_nu.push_back(*std::max_element(chain.nu[t].begin(), chain.nu[t].end()));
        }
    if (max_eta.empty()) throw std::invalid_argument("subclass_concentration: empty posterior");
    auto frac_above = [&](const std::vector<double>& xs) {
        std::size_t n = 0;
        for (double v : xs) n += v > 1.0 - epsilon ? 1 : 0;
        return static_cast<double>(n) / static_cast<double>(xs.size());
    };
    rep.prob_eta = frac_above(max_eta);
    rep.prob_nu = frac_above(max_nu);
    rep.max_eta_quantiles = quantiles5(max_eta);
    rep.max_nu_quantiles = quantiles5(max_nu);
    return rep;
}

// Posterior over the cause of cases that share a measurement pattern, pooled
// over the retained class-indicator draws of every matching case.
inline std::vector<double> individual_etiology(const PosteriorSamples& post, const Dataset& d,
                                               std::span<const std::uint8_t> pattern) {
    d.validate();
    if (pattern.size() != d.n_dims())
        throw std::invalid_argument("individual_etiology: pattern length != J");
    std::vector<std::size_t> matching;
    for (std::size_t i = 0; i < d.n_cases(); ++i)
        if (std::equal(pattern.begin(), pattern.end(), d.cases.row(i))) matching.push_back(i);
    if (matching.empty())
        throw std::out_of_range("individual_etiology: no case has the requested pattern");
    std::vector<double> counts(post.n_classes, 0.0);
    double total = 0.0;
    for (const auto& chain : post.chains)
        for (const auto& draw : chain.case_class)
            for (std::size_t i : matching) {
                counts[static_cast<std::size_t>(draw[i])] += 1.0;
                total += 1.0;
            }
    for (double& c : counts) c /= total;
    return counts;
}

}  // namespace nplcm
