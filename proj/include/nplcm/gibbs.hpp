#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nplcm/elicitation.hpp"
#include "nplcm/matrix.hpp"
#include "nplcm/parallel.hpp"
#include "nplcm/rng.hpp"
#include "nplcm/types.hpp"

namespace nplcm {

struct SamplerConfig {
    std::size_t truncation_K = 1;
    std::size_t n_burn = 0;
    std::size_t n_keep = 1;
    std::size_t thin = 1;
    std::size_t n_chains = 1;
    std::uint64_t seed = 0;
    bool cut_feedback = false;
    bool include_other_cause = false;
    std::size_t n_jobs = 0;  // 0 = all available cores

    void validate() const {
        if (truncation_K < 1) throw std::invalid_argument("SamplerConfig: truncation_K >= 1");
        if (thin < 1) throw std::invalid_argument("SamplerConfig: thin >= 1");
        if (n_keep < 1) throw std::invalid_argument("SamplerConfig: n_keep >= 1");
        if (n_chains < 1) throw std::invalid_argument("SamplerConfig: n_chains >= 1");
    }
};

// Full sampler state for one chain. The stick fractions behind eta/nu are
// kept because the concentration update conditions on them; the log tails
// log(1 - u) are stored alongside because a fraction that rounds to 1.0 in
// double still carries a finite tail the concentration update needs.
struct GibbsState {
    ModelParams params;
    LatentState latent;
    std::vector<double> eta_sticks;
    std::vector<double> nu_sticks;
    std::vector<double> eta_stick_log1m;
    std::vector<double> nu_stick_log1m;
};

// Identifies which conditional a stream feeds. Every draw is keyed by
// (seed, chain, iteration, step, unit), so no step ever shares randomness
// with another: changing case data cannot perturb control-side streams.
enum StepId : std::uint64_t {
    kStepCaseClass = 1,
    kStepSubclassCase = 2,
    kStepSubclassControl = 3,
    kStepEta = 4,
    kStepNu = 5,
    kStepAlpha = 6,
    kStepTpr = 7,
    kStepFpr = 8,
    kStepPi = 9,
    kInitCaseClass = 100,
    kInitSubclassCase = 101,
    kInitSubclassControl = 102,
};

struct StepCtx {
    std::uint64_t seed = 0;
    std::uint64_t chain = 0;
    std::uint64_t iter = 0;

    RngStream stream(StepId step, std::uint64_t unit) const {
        return RngStream{seed, chain, iter, static_cast<std::uint64_t>(step), unit};
    }
};

namespace detail {

// Per-iteration table of log rates, indexed [j*K + k], one table per
// measurement value.
struct LogRateTables {
    std::vector<double> psi0, psi1, theta0, theta1;

    explicit LogRateTables(const ModelParams& p) {
        const std::size_t J = p.n_dims(), K = p.n_subclasses();
        psi0.resize(J * K);
        psi1.resize(J * K);
        theta0.resize(J * K);
        theta1.resize(J * K);
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = 0; k < K; ++k) {
                psi1[j * K + k] = std::log(p.psi(j, k));
                psi0[j * K + k] = std::log1p(-p.psi(j, k));
                theta1[j * K + k] = std::log(p.theta(j, k));
                theta0[j * K + k] = std::log1p(-p.theta(j, k));
            }
    }

    double lpsi(std::size_t j, std::size_t k, std::uint8_t m, std::size_t K) const {
        return m ? psi1[j * K + k] : psi0[j * K + k];
    }
    double ltheta(std::size_t j, std::size_t k, std::uint8_t m, std::size_t K) const {
        return m ? theta1[j * K + k] : theta0[j * K + k];
    }
};

inline std::size_t draw_from_log_weights(std::vector<double>& lw, RngStream& rng) {
    double m = *std::max_element(lw.begin(), lw.end());
    if (!std::isfinite(m))
        throw std::domain_error("gibbs: all class weights vanished (log-weights -inf)");
    for (double& v : lw) v = std::exp(v - m);
    return rng.categorical(lw);
}

inline void exp_normalize(std::vector<double>& lw) {
    double m = *std::max_element(lw.begin(), lw.end());
    double total = 0.0;
    for (double& v : lw) {
        v = std::exp(v - m);
        total += v;
    }
    for (double& v : lw) v /= total;
}

// Log-weights of the class conditional for one case with subclass z: class l
// gets pi_l times the Bernoulli likelihood with the TPR swapped in on
// dimension l; the optional extra class uses FPRs throughout. The common
// subclass weight cancels.
inline void case_class_log_weights(const LogRateTables& t, const std::vector<double>& lpi,
                                   const std::uint8_t* m, std::size_t z, std::size_t J,
                                   std::size_t K, std::size_t L, std::vector<double>& lw) {
    double base = 0.0;
    for (std::size_t j = 0; j < J; ++j) base += t.lpsi(j, z, m[j], K);
    for (std::size_t l = 0; l < J; ++l)
        lw[l] = lpi[l] + base - t.lpsi(l, z, m[l], K) + t.ltheta(l, z, m[l], K);
    if (L == J + 1) lw[J] = lpi[J] + base;
}

// Log-weights of the subclass conditional. A case (cls < L) swaps the TPR in
// on its class dimension; a control (or a case of the extra class) uses FPRs
// everywhere. mix is log eta for cases, log nu for controls.
inline void subclass_log_weights(const LogRateTables& t, const std::vector<double>& lmix,
                                 const std::uint8_t* m, std::size_t cls, std::size_t J,
                                 std::size_t K, std::vector<double>& lw) {
    for (std::size_t k = 0; k < K; ++k) {
        double acc = lmix[k];
        for (std::size_t j = 0; j < J; ++j) acc += t.lpsi(j, k, m[j], K);
        if (cls < J) acc += t.ltheta(cls, k, m[cls], K) - t.lpsi(cls, k, m[cls], K);
        lw[k] = acc;
    }
}

inline std::vector<double> log_simplex(const std::vector<double>& w) {
    std::vector<double> lw(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        lw[i] = w[i] > 0.0 ? std::log(w[i]) : -std::numeric_limits<double>::infinity();
    return lw;
}

}  // namespace detail

// Exact conditional probabilities behind the latent-indicator steps, exposed
// so the conjugate updates can be checked against hand computations.
inline std::vector<double> case_class_probs(const ModelParams& p,
                                            std::span<const std::uint8_t> m, std::size_t z) {
    const std::size_t J = p.n_dims(), K = p.n_subclasses(), L = p.n_classes();
    if (m.size() != J) throw std::invalid_argument("case_class_probs: pattern length != J");
    if (z >= K) throw std::invalid_argument("case_class_probs: subclass out of range");
    detail::LogRateTables t(p);
    std::vector<double> lw(L);
    detail::case_class_log_weights(t, detail::log_simplex(p.pi), m.data(), z, J, K, L, lw);
    detail::exp_normalize(lw);
    return lw;
}

inline std::vector<double> case_subclass_probs(const ModelParams& p,
                                               std::span<const std::uint8_t> m,
                                               std::size_t cls) {
    const std::size_t J = p.n_dims(), K = p.n_subclasses();
    if (m.size() != J) throw std::invalid_argument("case_subclass_probs: pattern length != J");
    if (cls >= p.n_classes())
        throw std::invalid_argument("case_subclass_probs: class out of range");
    detail::LogRateTables t(p);
    std::vector<double> lw(K);
    detail::subclass_log_weights(t, detail::log_simplex(p.eta), m.data(), cls, J, K, lw);
    detail::exp_normalize(lw);
    return lw;
}

inline std::vector<double> control_subclass_probs(const ModelParams& p,
                                                  std::span<const std::uint8_t> m) {
    const std::size_t J = p.n_dims(), K = p.n_subclasses();
    if (m.size() != J)
        throw std::invalid_argument("control_subclass_probs: pattern length != J");
    detail::LogRateTables t(p);
    std::vector<double> lw(K);
    detail::subclass_log_weights(t, detail::log_simplex(p.nu), m.data(), J, J, K, lw);
    detail::exp_normalize(lw);
    return lw;
}

// Step 1: redraw each case's class indicator from the conditional
// multinomial. Class l carries pi_l times the Bernoulli likelihood with the
// TPR swapped in on dimension l; the optional extra class uses FPRs on every
// dimension. The subclass weight eta_Z is common to all classes and cancels.
inline void step_case_class(GibbsState& st, const Dataset& d, const StepCtx& ctx) {
    const std::size_t J = d.n_dims();
    const std::size_t K = st.params.n_subclasses();
    const std::size_t L = st.params.n_classes();
    const detail::LogRateTables t(st.params);
    const std::vector<double> lpi = detail::log_simplex(st.params.pi);
    std::vector<double> lw(L);
    for (std::size_t i = 0; i < d.n_cases(); ++i) {
        const std::size_t z = static_cast<std::size_t>(st.latent.case_subclass[i]);
        detail::case_class_log_weights(t, lpi, d.cases.row(i), z, J, K, L, lw);
        RngStream rng = ctx.stream(kStepCaseClass, i);
        st.latent.case_class[i] = static_cast<int>(detail::draw_from_log_weights(lw, rng));
    }
}

// Step 2: redraw subclass indicators. A case's likelihood uses the TPR on
// its current class dimension and FPRs elsewhere; controls use FPRs on all
// dimensions weighted by nu.
inline void step_subclass(GibbsState& st, const Dataset& d, const StepCtx& ctx) {
    const std::size_t J = d.n_dims();
    const std::size_t K = st.params.n_subclasses();
    const detail::LogRateTables t(st.params);
    const std::vector<double> leta = detail::log_simplex(st.params.eta);
    const std::vector<double> lnu = detail::log_simplex(st.params.nu);
    std::vector<double> lw(K);
    for (std::size_t i = 0; i < d.n_cases(); ++i) {
        const std::size_t cls = static_cast<std::size_t>(st.latent.case_class[i]);
        detail::subclass_log_weights(t, leta, d.cases.row(i), cls, J, K, lw);
        RngStream rng = ctx.stream(kStepSubclassCase, i);
        st.latent.case_subclass[i] = static_cast<int>(detail::draw_from_log_weights(lw, rng));
    }
    for (std::size_t i = 0; i < d.n_controls(); ++i) {
        detail::subclass_log_weights(t, lnu, d.controls.row(i), J, J, K, lw);
        RngStream rng = ctx.stream(kStepSubclassControl, i);
        st.latent.control_subclass[i] = static_cast<int>(detail::draw_from_log_weights(lw, rng));
    }
}

namespace detail {

inline std::vector<std::size_t> subclass_counts(const std::vector<int>& z, std::size_t K) {
    std::vector<std::size_t> c(K, 0);
    for (int v : z) ++c[static_cast<std::size_t>(v)];
    return c;
}

}  // namespace detail

// Beta parameters of the K-1 stick fractions given subclass counts: stick k
// sees its own count against the concentration plus everything later.
inline std::vector<std::pair<double, double>> stick_beta_params(
    const std::vector<std::size_t>& counts, double alpha) {
    const std::size_t K = counts.size();
    if (K == 0) throw std::invalid_argument("stick_beta_params: empty counts");
    std::vector<std::size_t> tail(K, 0);
    for (std::size_t k = K - 1; k-- > 0;) tail[k] = tail[k + 1] + counts[k + 1];
    std::vector<std::pair<double, double>> out;
    out.reserve(K - 1);
    for (std::size_t k = 0; k + 1 < K; ++k)
        out.emplace_back(1.0 + static_cast<double>(counts[k]),
                         alpha + static_cast<double>(tail[k]));
    return out;
}

// Gamma parameters of a concentration update given the current sticks.
inline std::pair<double, double> alpha_gamma_params(double prior_shape, double prior_rate,
                                                    const std::vector<double>& sticks) {
    double r = 0.0;
    for (double u : sticks) r -= std::log1p(-std::min(u, kRateCeil));
    return {prior_shape + static_cast<double>(sticks.size()), prior_rate + r};
}

// Log of a Gamma(shape, 1) draw. For shape < 1 the plain draw underflows to
// zero with non-trivial probability; the boost identity G = G' U^(1/shape)
// with G' ~ Gamma(shape + 1) keeps the draw exact in log space.
inline double log_gamma_draw(RngStream& rng, double shape) {
    if (shape >= 1.0) return std::log(rng.gamma(shape, 1.0));
    return std::log(rng.gamma(shape + 1.0, 1.0)) + std::log(rng.uniform()) / shape;
}

struct StickDraw {
    double u = 0.0;      // the Beta(a, b) fraction, may round to 0.0 or 1.0
    double log1m = 0.0;  // log(1 - u), exact even when u rounds to 1.0
};

// Beta(a, b) draw that reports its log tail. Under a small concentration the
// fraction sits within one ulp of 1, and the tail mass, which the
// concentration update conditions on, is recoverable only in log space.
inline StickDraw draw_stick(RngStream& rng, double a, double b) {
    const double lg1 = log_gamma_draw(rng, a);
    const double lg2 = log_gamma_draw(rng, b);
    const double hi = std::max(lg1, lg2);
    const double lse = hi + std::log1p(std::exp(std::min(lg1, lg2) - hi));
    return {std::exp(lg1 - lse), lg2 - lse};
}

namespace detail {

// Shared machinery of the two stick-weight updates. The weight products are
// carried in log space off the exact tails, so a near-degenerate stick
// yields a genuinely tiny weight instead of a clamped one.
inline void stick_weight_update(const std::vector<std::size_t>& counts, double alpha,
                                std::vector<double>& sticks, std::vector<double>& log1m,
                                std::vector<double>& weights, const StepCtx& ctx, StepId step) {
    const std::size_t K = counts.size();
    sticks.assign(K >= 1 ? K - 1 : 0, 0.0);
    log1m.assign(sticks.size(), 0.0);
    if (K == 1) {
        weights.assign(1, 1.0);
        return;
    }
    auto params = stick_beta_params(counts, alpha);
    weights.assign(K, 0.0);
    double cum = 0.0;  // sum of log(1 - u_l) over l < k
    for (std::size_t k = 0; k + 1 < K; ++k) {
        RngStream rng = ctx.stream(step, k);
        const StickDraw s = draw_stick(rng, params[k].first, params[k].second);
        sticks[k] = s.u;
        log1m[k] = s.log1m;
        weights[k] = s.u * std::exp(cum);
        cum += s.log1m;
    }
    weights[K - 1] = std::exp(cum);
}

}  // namespace detail

// Step 3: case subclass weights. Counts pool the cases of every class: the
// model has a single eta shared across classes.
inline void step_eta(GibbsState& st, const StepCtx& ctx) {
    auto counts = detail::subclass_counts(st.latent.case_subclass, st.params.n_subclasses());
    detail::stick_weight_update(counts, st.params.alpha1, st.eta_sticks, st.eta_stick_log1m,
                                st.params.eta, ctx, kStepEta);
}

// Step 4: control subclass weights, same structure with alpha0.
inline void step_nu(GibbsState& st, const StepCtx& ctx) {
    auto counts = detail::subclass_counts(st.latent.control_subclass, st.params.n_subclasses());
    detail::stick_weight_update(counts, st.params.alpha0, st.nu_sticks, st.nu_stick_log1m,
                                st.params.nu, ctx, kStepNu);
}

// Step 5: concentration parameters given the stick fractions. The rate term
// -sum log(1 - u_k) is taken from the stored log tails: recomputing it from
// the rounded fractions would saturate near 27.6 once a stick crosses
// 1 - 1e-12, cutting off the small-concentration tail the prior supports.
// The draw is clamped to a range so wide that hitting it has probability
// below 1e-25 under the prior, keeping later stick shapes positive.
inline void step_alpha(GibbsState& st, const HyperPriors& h, const StepCtx& ctx) {
    const auto draw = [&](const std::vector<double>& log1m, std::uint64_t unit) {
        const double shape = h.gamma_shape + static_cast<double>(log1m.size());
        double rate = h.gamma_rate;
        for (double lq : log1m) rate -= lq;
        RngStream rng = ctx.stream(kStepAlpha, unit);
        return std::clamp(rng.gamma(shape, rate), kConcentrationFloor, kConcentrationCeil);
    };
    st.params.alpha0 = draw(st.nu_stick_log1m, 0);
    st.params.alpha1 = draw(st.eta_stick_log1m, 1);
}

// Positive/negative counts behind the TPR update: cases currently assigned
// to class j contribute their dimension-j measurement within their subclass.
// Cases in the extra class never contribute: they carry no TPR.
inline std::pair<Matrix, Matrix> tpr_counts(const LatentState& latent, const Dataset& d,
                                            std::size_t n_subclasses) {
    const std::size_t J = d.n_dims();
    Matrix pos(J, n_subclasses, 0.0), neg(J, n_subclasses, 0.0);
    for (std::size_t i = 0; i < d.n_cases(); ++i) {
        const std::size_t cls = static_cast<std::size_t>(latent.case_class[i]);
        if (cls >= J) continue;
        const std::size_t k = static_cast<std::size_t>(latent.case_subclass[i]);
        if (d.cases(i, cls))
            pos(cls, k) += 1.0;
        else
            neg(cls, k) += 1.0;
    }
    return {std::move(pos), std::move(neg)};
}

// Step 6: subclass TPRs from the conjugate Beta update.
inline void step_tpr(GibbsState& st, const Dataset& d, const HyperPriors& h,
                     const StepCtx& ctx) {
    const std::size_t J = d.n_dims();
    const std::size_t K = st.params.n_subclasses();
    auto [pos, neg] = tpr_counts(st.latent, d, K);
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < K; ++k) {
            RngStream rng = ctx.stream(kStepTpr, j * K + k);
            st.params.theta(j, k) =
                clamp_rate(rng.beta(h.tpr_c1(j, k) + pos(j, k), h.tpr_c2(j, k) + neg(j, k)));
        }
}

// Positive/negative counts behind the FPR update: dimension j pools all
// controls plus every case whose class is not j (the extra class counts on
// all dimensions). With the feedback cut, case contributions are dropped and
// controls alone drive psi.
inline std::pair<Matrix, Matrix> fpr_counts(const LatentState& latent, const Dataset& d,
                                            std::size_t n_subclasses, bool cut_feedback) {
    const std::size_t J = d.n_dims();
    Matrix pos(J, n_subclasses, 0.0), neg(J, n_subclasses, 0.0);
    for (std::size_t i = 0; i < d.n_controls(); ++i) {
        const std::size_t k = static_cast<std::size_t>(latent.control_subclass[i]);
        for (std::size_t j = 0; j < J; ++j) {
            if (d.controls(i, j))
                pos(j, k) += 1.0;
            else
                neg(j, k) += 1.0;
        }
    }
    if (!cut_feedback) {
        for (std::size_t i = 0; i < d.n_cases(); ++i) {
            const std::size_t cls = static_cast<std::size_t>(latent.case_class[i]);
            const std::size_t k = static_cast<std::size_t>(latent.case_subclass[i]);
            for (std::size_t j = 0; j < J; ++j) {
                if (j == cls) continue;
                if (d.cases(i, j))
                    pos(j, k) += 1.0;
                else
                    neg(j, k) += 1.0;
            }
        }
    }
    return {std::move(pos), std::move(neg)};
}

// Step 7: subclass FPRs from the conjugate Beta update.
inline void step_fpr(GibbsState& st, const Dataset& d, const HyperPriors& h, const StepCtx& ctx,
                     bool cut_feedback) {
    const std::size_t J = d.n_dims();
    const std::size_t K = st.params.n_subclasses();
    auto [pos, neg] = fpr_counts(st.latent, d, K, cut_feedback);
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < K; ++k) {
            RngStream rng = ctx.stream(kStepFpr, j * K + k);
            st.params.psi(j, k) =
                clamp_rate(rng.beta(h.fpr_b1(j, k) + pos(j, k), h.fpr_b2(j, k) + neg(j, k)));
        }
}

// Dirichlet parameters of the class-weight update: prior plus per-class
// assignment counts.
inline std::vector<double> pi_dirichlet_params(const std::vector<double>& prior_a,
                                               const std::vector<int>& case_class) {
    std::vector<double> a(prior_a);
    for (int cls : case_class) {
        if (cls < 0 || static_cast<std::size_t>(cls) >= a.size())
            throw std::invalid_argument("pi_dirichlet_params: class index out of range");
        a[static_cast<std::size_t>(cls)] += 1.0;
    }
    return a;
}

// Step 8: class mixing weights from the conjugate Dirichlet update.
inline void step_pi(GibbsState& st, const HyperPriors& h, const StepCtx& ctx) {
    if (h.dirichlet_a.size() != st.params.n_classes())
        throw std::invalid_argument("step_pi: dirichlet_a length != L");
    std::vector<double> a = pi_dirichlet_params(h.dirichlet_a, st.latent.case_class);
    RngStream rng = ctx.stream(kStepPi, 0);
    st.params.pi = rng.dirichlet(a);
}

namespace detail {

inline constexpr std::uint64_t kIterInit = ~std::uint64_t{0};

inline GibbsState initialize_state(const Dataset& d, const HyperPriors& h,
                                   const SamplerConfig& cfg, std::uint64_t chain) {
    const std::size_t J = d.n_dims();
    const std::size_t K = cfg.truncation_K;
    const std::size_t L = J + (cfg.include_other_cause ? 1 : 0);
    const std::size_t n1 = d.n_cases(), n0 = d.n_controls();

    GibbsState st;
    st.params.theta = Matrix(J, K);
    st.params.psi = Matrix(J, K);
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < K; ++k) {
            st.params.theta(j, k) =
                clamp_rate(h.tpr_c1(j, k) / (h.tpr_c1(j, k) + h.tpr_c2(j, k)));
            st.params.psi(j, k) = clamp_rate(h.fpr_b1(j, k) / (h.fpr_b1(j, k) + h.fpr_b2(j, k)));
        }
    st.params.alpha0 = h.gamma_shape / h.gamma_rate;
    st.params.alpha1 = h.gamma_shape / h.gamma_rate;
    st.params.eta.assign(K, 1.0 / static_cast<double>(K));
    st.params.nu.assign(K, 1.0 / static_cast<double>(K));
    st.eta_sticks.resize(K - 1);
    st.nu_sticks.resize(K - 1);
    st.eta_stick_log1m.resize(K - 1);
    st.nu_stick_log1m.resize(K - 1);
    for (std::size_t k = 0; k + 1 < K; ++k) {
        double u = 1.0 / static_cast<double>(K - k);
        st.eta_sticks[k] = u;
        st.nu_sticks[k] = u;
        st.eta_stick_log1m[k] = std::log1p(-u);
        st.nu_stick_log1m[k] = std::log1p(-u);
    }

    // Smoothed per-dimension case/control positivity ratio; each case goes
    // to its highest-ratio positive dimension.
    std::vector<double> ratio(J);
    for (std::size_t j = 0; j < J; ++j) {
        double cs = 0.5, ct = 0.5;
        for (std::size_t i = 0; i < n1; ++i) cs += d.cases(i, j);
        for (std::size_t i = 0; i < n0; ++i) ct += d.controls(i, j);
        ratio[j] = (cs / (static_cast<double>(n1) + 1.0)) /
                   (ct / (static_cast<double>(n0) + 1.0));
    }
    StepCtx init_ctx{cfg.seed, chain, kIterInit};
    st.latent.case_class.resize(n1);
    for (std::size_t i = 0; i < n1; ++i) {
        double best = -1.0;
        std::vector<double> tied;
        for (std::size_t j = 0; j < J; ++j) {
            if (!d.cases(i, j)) continue;
            if (ratio[j] > best) best = ratio[j];
        }
        RngStream rng = init_ctx.stream(kInitCaseClass, i);
        if (best < 0.0) {
            // all-negative pattern
            st.latent.case_class[i] = cfg.include_other_cause
                                          ? static_cast<int>(J)
                                          : static_cast<int>(rng.next_u64() % J);
            continue;
        }
        std::vector<std::size_t> argmax;
        for (std::size_t j = 0; j < J; ++j)
            if (d.cases(i, j) && ratio[j] == best) argmax.push_back(j);
        st.latent.case_class[i] =
            static_cast<int>(argmax[rng.next_u64() % argmax.size()]);
    }
    st.latent.case_subclass.resize(n1);
    for (std::size_t i = 0; i < n1; ++i) {
        RngStream rng = init_ctx.stream(kInitSubclassCase, i);
        st.latent.case_subclass[i] = static_cast<int>(rng.next_u64() % K);
    }
    st.latent.control_subclass.resize(n0);
    for (std::size_t i = 0; i < n0; ++i) {
        RngStream rng = init_ctx.stream(kInitSubclassControl, i);
        st.latent.control_subclass[i] = static_cast<int>(rng.next_u64() % K);
    }

    st.params.pi.assign(L, 0.0);
    for (int cls : st.latent.case_class) st.params.pi[static_cast<std::size_t>(cls)] += 1.0;
    for (double& v : st.params.pi) v /= static_cast<double>(n1);
    return st;
}

}  // namespace detail

struct ChainDraws {
    std::vector<std::vector<double>> pi, eta, nu;
    std::vector<Matrix> theta, psi;
    std::vector<double> alpha0, alpha1;
    std::vector<std::vector<int>> case_class, case_subclass, control_subclass;

    std::size_t size() const { return alpha0.size(); }
};

struct PosteriorSamples {
    SamplerConfig config;
    std::vector<std::string> pathogen_names;
    std::size_t n_dims = 0;
    std::size_t n_classes = 0;
    std::size_t n_subclasses = 0;
    std::size_t n_case_subjects = 0;
    std::size_t n_control_subjects = 0;
    std::vector<ChainDraws> chains;

    std::size_t draws_per_chain() const { return chains.empty() ? 0 : chains.front().size(); }
    std::size_t total_draws() const {
        std::size_t n = 0;
        for (const auto& c : chains) n += c.size();
        return n;
    }

    ModelParams params_at(std::size_t chain, std::size_t draw) const {
        const ChainDraws& c = chains.at(chain);
        ModelParams p;
        p.pi = c.pi.at(draw);
        p.theta = c.theta.at(draw);
        p.psi = c.psi.at(draw);
        p.eta = c.eta.at(draw);
        p.nu = c.nu.at(draw);
        p.alpha0 = c.alpha0.at(draw);
        p.alpha1 = c.alpha1.at(draw);
        return p;
    }
};

// Runs the eight-step blocked sweep for every chain. With truncation_K = 1
// the subclass machinery is degenerate (eta = nu = 1, alpha unidentified),
// so steps 3-5 are skipped and the sampler reduces to the one-subclass
// model's Gibbs sampler on the shared steps.
inline PosteriorSamples run_sampler(const Dataset& d, const HyperPriors& h,
                                    const SamplerConfig& cfg) {
    cfg.validate();
    d.validate();
    h.validate();
    const std::size_t J = d.n_dims();
    const std::size_t K = cfg.truncation_K;
    const std::size_t L = J + (cfg.include_other_cause ? 1 : 0);
    if (h.dirichlet_a.size() != L)
        throw std::invalid_argument("run_sampler: dirichlet_a length must be J (+1 with other-cause)");
    if (h.tpr_c1.rows() != J || h.tpr_c1.cols() != K)
        throw std::invalid_argument("run_sampler: hyperprior shapes must be J x truncation_K");

    Dataset data = d;
    data.include_other_cause = cfg.include_other_cause;

    PosteriorSamples out;
    out.config = cfg;
    out.pathogen_names = d.pathogen_names;
    out.n_dims = J;
    out.n_classes = L;
    out.n_subclasses = K;
    out.n_case_subjects = d.n_cases();
    out.n_control_subjects = d.n_controls();
    out.chains.resize(cfg.n_chains);

    const std::size_t n_retain = cfg.n_keep / cfg.thin;
    parallel_for(cfg.n_chains, cfg.n_jobs, [&](std::size_t chain) {
        GibbsState st = detail::initialize_state(data, h, cfg, chain);
        ChainDraws& draws = out.chains[chain];
        draws.pi.reserve(n_retain);
        draws.alpha0.reserve(n_retain);
        const std::size_t total = cfg.n_burn + cfg.n_keep;
        for (std::size_t iter = 0; iter < total; ++iter) {
            StepCtx ctx{cfg.seed, chain, iter};
            try {
                step_case_class(st, data, ctx);
                step_subclass(st, data, ctx);
                if (K > 1) {
                    step_eta(st, ctx);
                    step_nu(st, ctx);
                    step_alpha(st, h, ctx);
                }
                step_tpr(st, data, h, ctx);
                step_fpr(st, data, h, ctx, cfg.cut_feedback);
                step_pi(st, h, ctx);
            } catch (const std::exception& e) {
                std::ostringstream msg;
                msg << "run_sampler: chain " << chain << ", iteration " << iter << ": "
                    << e.what();
                throw std::runtime_error(msg.str());
            }
            if (iter >= cfg.n_burn && (iter - cfg.n_burn + 1) % cfg.thin == 0) {
                draws.pi.push_back(st.params.pi);
                draws.theta.push_back(st.params.theta);
                draws.psi.push_back(st.params.psi);
                draws.eta.push_back(st.params.eta);
                draws.nu.push_back(st.params.nu);
                draws.alpha0.push_back(st.params.alpha0);
                draws.alpha1.push_back(st.params.alpha1);
                draws.case_class.push_back(st.latent.case_class);
                draws.case_subclass.push_back(st.latent.case_subclass);
                draws.control_subclass.push_back(st.latent.control_subclass);
            }
        }
    });
    return out;
}

}  // namespace nplcm
