#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nplcm/model.hpp"
#include "nplcm/simulation.hpp"
#include "nplcm/types.hpp"

namespace nplcm {

// Population-level study of the single-subclass working model fit to data
// generated by a subclass mixture. The working model keeps the marginal
// sensitivities fixed at their true mixture values and profiles over the
// class weights and marginal false-positive rates. Expectations are exact
// sums over all 2^J patterns, so results carry no Monte Carlo error.

struct AsymptoticsOptions {
    double case_weight = 0.5;     // relative weight of the case stratum
    bool fix_marginal_fpr = false;  // pin psi at its true marginal instead of profiling
    double tol = 1e-11;           // sup-norm of the expected score at the solution
    std::size_t max_iter = 500;
    double n_total = 1000.0;      // total sample size the variances are scaled to
};

struct AsymptoticsResult {
    std::vector<double> pi_star;          // working-model class weights at the optimum
    std::vector<double> psi_star;         // working-model marginal FPRs at the optimum
    std::vector<double> theta_marginal;   // fixed marginal TPRs
    std::vector<double> prab;             // percent relative bias per class
    std::vector<double> variance_ratio;   // per class sqrt(model var / robust var)
    Eigen::MatrixXd v_model, v_robust;    // over the free coordinates
    double grad_inf_norm = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

// True pattern distributions and the fixed working-model sensitivities.
struct WorkingTruth {
    std::size_t n_dims = 0;
    std::vector<double> p_case, p_control;  // indexed by pattern code (bit j = dim j)
    std::vector<double> theta_marginal;
    std::vector<double> pi_true;
    std::vector<double> psi_marginal_true;  // init value for the profiled FPRs
    double case_weight = 0.5;
};

inline WorkingTruth make_working_truth(const ScenarioSpec& scenario, double case_weight) {
    ModelParams truth = scenario.to_params();
    if (truth.has_other_cause())
        throw std::invalid_argument(
            "asymptotics: the working model assumes every case has one of the J causes");
    if (!(case_weight > 0.0) || !(case_weight < 1.0))
        throw std::invalid_argument("asymptotics: case_weight must lie in (0,1)");
    WorkingTruth t;
    t.n_dims = truth.n_dims();
    t.case_weight = case_weight;
    t.pi_true = truth.pi;
    const std::size_t n_pat = std::size_t{1} << t.n_dims;
    t.p_case.resize(n_pat);
    t.p_control.resize(n_pat);
    std::vector<std::uint8_t> m(t.n_dims);
    for (std::size_t code = 0; code < n_pat; ++code) {
        for (std::size_t j = 0; j < t.n_dims; ++j) m[j] = (code >> j) & 1u;
        t.p_case[code] = case_pattern_prob(m, truth, false);
        t.p_control[code] = control_pattern_prob(m, truth.nu, truth.psi);
    }
    t.theta_marginal.assign(t.n_dims, 0.0);
    t.psi_marginal_true.assign(t.n_dims, 0.0);
    for (std::size_t j = 0; j < t.n_dims; ++j)
        for (std::size_t k = 0; k < truth.n_subclasses(); ++k) {
            t.theta_marginal[j] += truth.theta(j, k) * truth.eta[k];
            t.psi_marginal_true[j] += truth.psi(j, k) * truth.nu[k];
        }
    return t;
}

// Log density, gradient, and Hessian of one case pattern under the working
// model, in the free coordinates (pi_1..pi_{J-1}, psi_1..psi_J). The last
// class weight is 1 minus the rest.
struct PatternDerivs {
    double logp = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

inline PatternDerivs case_pattern_derivs(std::size_t code, std::span<const double> pi,
                                         std::span<const double> psi,
                                         std::span<const double> theta_m) {
    const std::size_t J = psi.size();
    const std::size_t D = 2 * J - 1;
    PatternDerivs out;
    out.grad = Eigen::VectorXd::Zero(D);
    out.hess = Eigen::MatrixXd::Zero(D, D);

    std::vector<double> f(J), g(J);
    std::vector<std::uint8_t> m(J);
    for (std::size_t j = 0; j < J; ++j) m[j] = (code >> j) & 1u;
    for (std::size_t l = 0; l < J; ++l) {
        double prod = 1.0;
        for (std::size_t j = 0; j < J; ++j) {
            double r = (j == l) ? theta_m[j] : psi[j];
            prod *= m[j] ? r : 1.0 - r;
        }
        f[l] = prod;
    }
    for (std::size_t j = 0; j < J; ++j)
        g[j] = (static_cast<double>(m[j]) - psi[j]) / (psi[j] * (1.0 - psi[j]));

    double P = 0.0;
    for (std::size_t l = 0; l < J; ++l) P += pi[l] * f[l];
    out.logp = std::log(P);

    std::vector<double> S(J);  // dP/dpsi_j
    for (std::size_t j = 0; j < J; ++j) S[j] = g[j] * (P - pi[j] * f[j]);

    const std::size_t ref = J - 1;  // class whose weight is implied
    for (std::size_t r = 0; r + 1 < J; ++r) out.grad[r] = (f[r] - f[ref]) / P;
    for (std::size_t j = 0; j < J; ++j) out.grad[J - 1 + j] = S[j] / P;

    for (std::size_t r = 0; r + 1 < J; ++r)
        for (std::size_t s = 0; s + 1 < J; ++s)
            out.hess(r, s) = -(f[r] - f[ref]) * (f[s] - f[ref]) / (P * P);
    for (std::size_t r = 0; r + 1 < J; ++r)
        for (std::size_t j = 0; j < J; ++j) {
            double dfr = (r != j) ? f[r] * g[j] : 0.0;
            double dfref = (ref != j) ? f[ref] * g[j] : 0.0;
            double v = (dfr - dfref) / P - (f[r] - f[ref]) * S[j] / (P * P);
            out.hess(r, J - 1 + j) = v;
            out.hess(J - 1 + j, r) = v;
        }
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t l = 0; l < J; ++l) {
            double v;
            if (j == l) {
                v = -S[j] * S[j] / (P * P);
            } else {
                v = g[j] * g[l] * (P - pi[j] * f[j] - pi[l] * f[l]) / P -
                    S[j] * S[l] / (P * P);
            }
            out.hess(J - 1 + j, J - 1 + l) = v;
        }
    return out;
}

inline PatternDerivs control_pattern_derivs(std::size_t code, std::span<const double> psi) {
    const std::size_t J = psi.size();
    const std::size_t D = 2 * J - 1;
    PatternDerivs out;
    out.grad = Eigen::VectorXd::Zero(D);
    out.hess = Eigen::MatrixXd::Zero(D, D);
    for (std::size_t j = 0; j < J; ++j) {
        bool mj = (code >> j) & 1u;
        out.logp += std::log(mj ? psi[j] : 1.0 - psi[j]);
        double g = (static_cast<double>(mj) - psi[j]) / (psi[j] * (1.0 - psi[j]));
        out.grad[J - 1 + j] = g;
        out.hess(J - 1 + j, J - 1 + j) = -g * g;
    }
    return out;
}

// Weighted expectations of the objective, score, outer score product, and
// Hessian over the exact pattern distributions.
struct Expectations {
    double objective = 0.0;
    Eigen::VectorXd score;
    Eigen::MatrixXd hess;
    Eigen::MatrixXd score_sq;
};

inline Expectations expectations(const WorkingTruth& t, std::span<const double> pi,
                                 std::span<const double> psi) {
    const std::size_t J = t.n_dims;
    const std::size_t D = 2 * J - 1;
    Expectations e;
    e.score = Eigen::VectorXd::Zero(D);
    e.hess = Eigen::MatrixXd::Zero(D, D);
    e.score_sq = Eigen::MatrixXd::Zero(D, D);
    const std::size_t n_pat = std::size_t{1} << J;
    for (std::size_t code = 0; code < n_pat; ++code) {
        double wc = t.case_weight * t.p_case[code];
        if (wc > 0.0) {
            auto d = case_pattern_derivs(code, pi, psi, t.theta_marginal);
            e.objective += wc * d.logp;
            e.score += wc * d.grad;
            e.hess += wc * d.hess;
            e.score_sq += wc * (d.grad * d.grad.transpose());
        }
        double w0 = (1.0 - t.case_weight) * t.p_control[code];
        if (w0 > 0.0) {
            auto d = control_pattern_derivs(code, psi);
            e.objective += w0 * d.logp;
            e.score += w0 * d.grad;
            e.hess += w0 * d.hess;
            e.score_sq += w0 * (d.grad * d.grad.transpose());
        }
    }
    return e;
}

// Objective only, for line searches.
inline double objective(const WorkingTruth& t, std::span<const double> pi,
                        std::span<const double> psi) {
    const std::size_t J = t.n_dims;
    double obj = 0.0;
    const std::size_t n_pat = std::size_t{1} << J;
    std::vector<double> f(J);
    for (std::size_t code = 0; code < n_pat; ++code) {
        double wc = t.case_weight * t.p_case[code];
        if (wc > 0.0) {
            double P = 0.0;
            for (std::size_t l = 0; l < J; ++l) {
                double prod = 1.0;
                for (std::size_t j = 0; j < J; ++j) {
                    double r = (j == l) ? t.theta_marginal[j] : psi[j];
                    prod *= ((code >> j) & 1u) ? r : 1.0 - r;
                }
                P += pi[l] * prod;
            }
            obj += wc * std::log(P);
        }
        double w0 = (1.0 - t.case_weight) * t.p_control[code];
        if (w0 > 0.0) {
            double lp = 0.0;
            for (std::size_t j = 0; j < J; ++j)
                lp += std::log(((code >> j) & 1u) ? psi[j] : 1.0 - psi[j]);
            obj += w0 * lp;
        }
    }
    return obj;
}

// Unconstrained coordinates: additive log-ratio for pi (last class as
// reference) and logit for each psi. When psi is pinned, phi holds only the
// pi block.
inline void phi_to_params(const Eigen::VectorXd& phi, std::size_t J, bool fix_psi,
                          std::span<const double> psi_fixed, std::vector<double>& pi,
                          std::vector<double>& psi) {
    pi.assign(J, 0.0);
    double denom = 1.0;
    for (std::size_t r = 0; r + 1 < J; ++r) denom += std::exp(phi[r]);
    for (std::size_t r = 0; r + 1 < J; ++r) pi[r] = std::exp(phi[r]) / denom;
    pi[J - 1] = 1.0 / denom;
    psi.assign(J, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        if (fix_psi)
            psi[j] = psi_fixed[j];
        else
            psi[j] = 1.0 / (1.0 + std::exp(-phi[J - 1 + j]));
    }
}

// d(omega)/d(phi): pi block is softmax, psi block is diagonal logistic.
inline Eigen::MatrixXd transform_jacobian(std::span<const double> pi,
                                          std::span<const double> psi, bool fix_psi) {
    const std::size_t J = pi.size();
    const std::size_t Dw = 2 * J - 1;
    const std::size_t Dp = fix_psi ? J - 1 : 2 * J - 1;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(Dw, Dp);
    for (std::size_t r = 0; r + 1 < J; ++r)
        for (std::size_t s = 0; s + 1 < J; ++s)
            jac(r, s) = pi[r] * ((r == s ? 1.0 : 0.0) - pi[s]);
    if (!fix_psi)
        for (std::size_t j = 0; j < J; ++j)
            jac(J - 1 + j, J - 1 + j) = psi[j] * (1.0 - psi[j]);
    return jac;
}

}  // namespace detail

// Maximizer of the expected working-model log density. Newton steps in
// unconstrained coordinates with backtracking, falling back to steepest
// ascent when the quadratic model is unhelpful.
inline AsymptoticsResult pseudo_truth_analysis(const ScenarioSpec& scenario,
                                               const AsymptoticsOptions& opt = {}) {
    auto truth = detail::make_working_truth(scenario, opt.case_weight);
    const std::size_t J = truth.n_dims;
    const bool fix_psi = opt.fix_marginal_fpr;
    const std::size_t Dp = fix_psi ? J - 1 : 2 * J - 1;

    Eigen::VectorXd phi(Dp);
    for (std::size_t r = 0; r + 1 < J; ++r)
        phi[r] = std::log(truth.pi_true[r] / truth.pi_true[J - 1]);
    if (!fix_psi)
        for (std::size_t j = 0; j < J; ++j) {
            double p = std::clamp(truth.psi_marginal_true[j], 1e-8, 1.0 - 1e-8);
            phi[J - 1 + j] = std::log(p / (1.0 - p));
        }

    std::vector<double> pi, psi;
    detail::phi_to_params(phi, J, fix_psi, truth.psi_marginal_true, pi, psi);

    // free-coordinate index set: all of omega, or just the pi block
    auto project = [&](const Eigen::VectorXd& v) {
        return fix_psi ? Eigen::VectorXd(v.head(J - 1)) : v;
    };
    auto project_mat = [&](const Eigen::MatrixXd& m) {
        return fix_psi ? Eigen::MatrixXd(m.topLeftCorner(J - 1, J - 1)) : m;
    };

    double grad_norm = 0.0;
    std::size_t it = 0;
    for (; it < opt.max_iter; ++it) {
        auto e = detail::expectations(truth, pi, psi);
        grad_norm = project(e.score).lpNorm<Eigen::Infinity>();
        if (grad_norm < opt.tol) break;

        Eigen::MatrixXd jac = detail::transform_jacobian(pi, psi, fix_psi);
        Eigen::VectorXd grad_phi = jac.transpose() * e.score;
        Eigen::MatrixXd hess_phi = jac.transpose() * e.hess * jac;

        Eigen::VectorXd dir = -hess_phi.ldlt().solve(grad_phi);
        if (!dir.allFinite() || dir.dot(grad_phi) <= 0.0)
            dir = grad_phi / (1.0 + grad_phi.norm());  // steepest ascent

        double f0 = e.objective;
        double step = 1.0;
        bool moved = false;
        std::vector<double> pi_new, psi_new;
        for (int ls = 0; ls < 60; ++ls) {
            Eigen::VectorXd cand = phi + step * dir;
            detail::phi_to_params(cand, J, fix_psi, truth.psi_marginal_true, pi_new, psi_new);
            if (detail::objective(truth, pi_new, psi_new) > f0) {
                phi = cand;
                pi = pi_new;
                psi = psi_new;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // objective is flat to machine precision
    }
    if (grad_norm >= 1e-9) {
        auto e = detail::expectations(truth, pi, psi);
        grad_norm = project(e.score).lpNorm<Eigen::Infinity>();
        if (grad_norm >= 1e-9)
            throw std::runtime_error(
                "pseudo_truth_analysis: solver stalled with expected-score norm " +
                std::to_string(grad_norm));
    }

    auto e = detail::expectations(truth, pi, psi);
    Eigen::VectorXd sbar = project(e.score);
    Eigen::MatrixXd a_mat = -project_mat(e.hess);
    Eigen::MatrixXd b_mat = project_mat(e.score_sq) - sbar * sbar.transpose();
    Eigen::MatrixXd a_inv = a_mat.inverse();

    AsymptoticsResult res;
    res.pi_star = pi;
    res.psi_star = psi;
    res.theta_marginal = truth.theta_marginal;
    res.grad_inf_norm = grad_norm;
    res.iterations = it;
    res.v_model = a_inv / opt.n_total;
    res.v_robust = a_inv * b_mat * a_inv / opt.n_total;
    res.prab.resize(J);
    for (std::size_t l = 0; l < J; ++l)
        res.prab[l] = (pi[l] - truth.pi_true[l]) / truth.pi_true[l] * 100.0;
    res.variance_ratio.resize(J);
    for (std::size_t l = 0; l + 1 < J; ++l)
        res.variance_ratio[l] = std::sqrt(res.v_model(l, l) / res.v_robust(l, l));
    // implied last class: variance of 1 - sum of the free weights
    double vm = 0.0, vr = 0.0;
    for (std::size_t r = 0; r + 1 < J; ++r)
        for (std::size_t s = 0; s + 1 < J; ++s) {
            vm += res.v_model(r, s);
            vr += res.v_robust(r, s);
        }
    res.variance_ratio[J - 1] = std::sqrt(vm / vr);
    return res;
}

struct PrabPoint {
    double eta_o = 0.0;
    AsymptoticsResult result;
};

// Sweep a scenario family over case-subclass weights.
inline std::vector<PrabPoint> prab_curve(
    const std::function<ScenarioSpec(double)>& family, std::span<const double> eta_grid,
    const AsymptoticsOptions& opt = {}) {
    std::vector<PrabPoint> out;
    out.reserve(eta_grid.size());
    for (double eta_o : eta_grid) {
        PrabPoint p;
        p.eta_o = eta_o;
        p.result = pseudo_truth_analysis(family(eta_o), opt);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace nplcm
