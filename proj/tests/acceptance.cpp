// Acceptance gate. Each criterion prints indented detail lines and exactly
// one final verdict line of the form "PASS criterion N: ..." or
// "FAIL criterion N: ...". Exit status is nonzero when any requested
// criterion fails. Run with a criterion number 1..8, or no argument for all.

#include "nplcm/nplcm.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

using namespace nplcm;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void verdict(bool ok, int criterion, const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    std::printf("%s criterion %d: ", ok ? "PASS" : "FAIL", criterion);
    std::vprintf(fmt, args);
    std::printf("\n");
    va_end(args);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// ---------------------------------------------------------------- criterion 1
// Pseudo-truth bias of the single-subclass working model, exact enumeration.

bool criterion1() {
    Timer t;
    AsymptoticsOptions opt;

    const auto r0 = pseudo_truth_analysis(scenario_ii(0.0), opt);
    const auto r5 = pseudo_truth_analysis(scenario_ii(0.5), opt);
    const double prab_c0 = r0.prab[2];
    const double prab_c5 = r5.prab[2];
    const bool ok_ii0 = std::abs(prab_c0 - 121.3) <= 3.0;
    const bool ok_ii5 = std::abs(prab_c5 - 40.5) <= 3.0;
    std::printf("  scenario II eta_o=0.0: PRAB(C) = %+.3f%% (target 121.3 +- 3) %s\n", prab_c0,
                ok_ii0 ? "ok" : "OUT OF RANGE");
    std::printf("  scenario II eta_o=0.5: PRAB(C) = %+.3f%% (target 40.5 +- 3) %s\n", prab_c5,
                ok_ii5 ? "ok" : "OUT OF RANGE");

    const std::array<double, 5> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto pts = prab_curve([](double e) { return scenario_i(e); }, grid, opt);
    double worst = 0.0;
    double worst_eta = 0.0;
    for (const auto& p : pts)
        for (double b : p.result.prab)
            if (std::abs(b) > std::abs(worst)) {
                worst = b;
                worst_eta = p.eta_o;
            }
    const bool ok_i = std::abs(worst) < 13.0;
    std::printf("  scenario I grid: max |PRAB| = %.3f%% at eta_o=%.2f (bound 13) %s\n",
                std::abs(worst), worst_eta, ok_i ? "ok" : "OUT OF RANGE");

    const double secs = t.seconds();
    const bool ok_time = secs < 60.0;
    std::printf("  runtime %.2f s (bound 60)\n", secs);

    const bool ok = ok_ii0 && ok_ii5 && ok_i && ok_time;
    verdict(ok, 1,
            "pseudo-truth PRAB: II(0)=%+.2f%%, II(0.5)=%+.2f%%, I max %.2f%%, %.1f s", prab_c0,
            prab_c5, std::abs(worst), secs);
    return ok;
}

// ---------------------------------------------------------------- criterion 2
// Sandwich vs model-based variance of the working-model class weights.

bool criterion2() {
    AsymptoticsOptions opt;

    // single-subclass truth: the working model is correctly specified, so
    // the two variance estimates must coincide
    ScenarioSpec single;
    single.name = "single";
    single.pi_true = {0.5, 0.2, 0.15, 0.1, 0.05};
    single.theta_true = Matrix::from_rows({{0.95, 0.90, 0.90, 0.90, 0.90}}).transposed();
    single.psi_true = Matrix::from_rows({{0.225, 0.225, 0.225, 0.125, 0.125}}).transposed();
    single.nu_true = {1.0};

    const auto rs = pseudo_truth_analysis(single, opt);
    double gap = 0.0;
    for (Eigen::Index i = 0; i < rs.v_model.rows(); ++i)
        for (Eigen::Index j = 0; j < rs.v_model.cols(); ++j)
            gap = std::max(gap, std::abs(rs.v_model(i, j) - rs.v_robust(i, j)));
    const bool ok_single = gap <= 1e-8;
    std::printf("  single-subclass truth: max |V_model - V_robust| = %.3e (bound 1e-8) %s\n",
                gap, ok_single ? "ok" : "OUT OF RANGE");

    const auto ri = pseudo_truth_analysis(scenario_i(0.5), opt);
    double lo = ri.variance_ratio[0], hi = ri.variance_ratio[0];
    for (double r : ri.variance_ratio) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    const bool ok_ratio = lo >= 0.96 && hi <= 1.06;
    std::printf("  scenario I per-class sqrt(V_model/V_robust) in [%.4f, %.4f]"
                " (bounds [0.96, 1.06]) %s\n",
                lo, hi, ok_ratio ? "ok" : "OUT OF RANGE");

    const bool ok = ok_single && ok_ratio;
    verdict(ok, 2, "variance identity gap %.1e, scenario I ratios [%.3f, %.3f]", gap, lo, hi);
    return ok;
}

// ---------------------------------------------------------------- criterion 3
// Pattern-distribution normalization and the closed-form log odds ratio
// against direct enumeration, over random valid parameter sets.

ModelParams random_params(RngStream& rng, std::size_t J, std::size_t K, bool other) {
    const std::size_t L = J + (other ? 1 : 0);
    ModelParams p;
    std::vector<double> ones_l(L, 1.0), ones_k(K, 1.0);
    p.pi = rng.dirichlet(ones_l);
    p.theta = Matrix(J, K);
    p.psi = Matrix(J, K);
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < K; ++k) {
            p.theta(j, k) = 0.05 + 0.9 * rng.uniform();
            p.psi(j, k) = 0.05 + 0.9 * rng.uniform();
        }
    p.eta = rng.dirichlet(ones_k);
    p.nu = rng.dirichlet(ones_k);
    p.alpha0 = p.alpha1 = 1.0;
    p.validate();
    return p;
}

bool criterion3() {
    const std::size_t J = 5;
    const std::size_t n_patterns = std::size_t{1} << J;
    double worst_norm = 0.0, worst_lor = 0.0;
    bool ok = true;

    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t K = static_cast<std::size_t>(rep % 3) + 1;
        RngStream rng{91, static_cast<std::uint64_t>(rep), 0, 0, 0};
        for (bool other : {false, true}) {
            const ModelParams p = random_params(rng, J, K, other);

            // enumerate all 2^J patterns once, keeping the per-pattern masses
            std::vector<double> pc(n_patterns), p0(n_patterns);
            std::vector<std::uint8_t> m(J);
            double sum_case = 0.0, sum_ctrl = 0.0;
            for (std::size_t code = 0; code < n_patterns; ++code) {
                for (std::size_t j = 0; j < J; ++j) m[j] = (code >> j) & 1u;
                pc[code] = case_pattern_prob(m, p, other);
                p0[code] = control_pattern_prob(m, p.nu, p.psi);
                sum_case += pc[code];
                sum_ctrl += p0[code];
            }
            worst_norm = std::max({worst_norm, std::abs(sum_case - 1.0),
                                   std::abs(sum_ctrl - 1.0)});
            if (std::abs(sum_case - 1.0) > 1e-12 || std::abs(sum_ctrl - 1.0) > 1e-12) ok = false;

            // closed-form pairwise log odds ratio vs the enumerated table
            for (std::size_t j = 0; j < J; ++j)
                for (std::size_t l = j + 1; l < J; ++l)
                    for (Population pop : {Population::kCase, Population::kControl}) {
                        const auto& mass = pop == Population::kCase ? pc : p0;
                        double cell[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
                        for (std::size_t code = 0; code < n_patterns; ++code)
                            cell[(code >> j) & 1u][(code >> l) & 1u] += mass[code];
                        const double direct = std::log(cell[1][1]) + std::log(cell[0][0]) -
                                              std::log(cell[1][0]) - std::log(cell[0][1]);
                        const double closed = pairwise_log_or(j, l, p, pop);
                        const double gap = std::abs(direct - closed);
                        worst_lor = std::max(worst_lor, gap);
                        if (gap > 1e-10) ok = false;
                    }
        }
    }
    std::printf("  100 parameter sets, J=5, K in {1,2,3}, with and without an extra cause\n");
    std::printf("  worst |sum of pattern masses - 1| = %.3e (bound 1e-12)\n", worst_norm);
    std::printf("  worst |closed-form LOR - enumerated LOR| = %.3e (bound 1e-10)\n", worst_lor);
    verdict(ok, 3, "normalization gap %.1e, log odds ratio gap %.1e", worst_norm, worst_lor);
    return ok;
}

// ---------------------------------------------------------------- criterion 4
// Exact conjugate-update counts on fixed latent states, then a joint
// distribution test: the prior-predictive simulator against a chain that
// alternates one posterior sweep with a data redraw. Matching marginals on
// ten scalar functions is evidence the sweep targets the right conditional.

bool conjugate_exact_checks() {
    bool ok = true;

    const auto sticks = stick_beta_params({3, 1, 0}, 1.0);
    ok &= sticks.size() == 2 && sticks[0].first == 4.0 && sticks[0].second == 2.0 &&
          sticks[1].first == 2.0 && sticks[1].second == 1.0;

    const auto [shape, rate] = alpha_gamma_params(0.25, 0.25, {0.5, 0.5});
    ok &= shape == 2.25 && std::abs(rate - (0.25 + 2.0 * std::log(2.0))) < 1e-15;

    // J=2, K=1: three class-0 cases with measurements (1,0),(0,1),(1,1) and
    // one class-1 case at (1,1); two controls at (1,0),(0,0)
    Dataset d;
    d.pathogen_names = {"A", "B"};
    d.cases = BinaryMatrix(4, 2);
    d.cases(0, 0) = 1;
    d.cases(1, 1) = 1;
    d.cases(2, 0) = 1;
    d.cases(2, 1) = 1;
    d.cases(3, 0) = 1;
    d.cases(3, 1) = 1;
    d.controls = BinaryMatrix(2, 2);
    d.controls(0, 0) = 1;
    LatentState latent;
    latent.case_class = {0, 0, 0, 1};
    latent.case_subclass = {0, 0, 0, 0};
    latent.control_subclass = {0, 0};

    const auto [tpos, tneg] = tpr_counts(latent, d, 1);
    ok &= tpos(0, 0) == 2.0 && tneg(0, 0) == 1.0 && tpos(1, 0) == 1.0 && tneg(1, 0) == 0.0;

    const auto [cpos, cneg] = fpr_counts(latent, d, 1, true);
    ok &= cpos(0, 0) == 1.0 && cneg(0, 0) == 1.0 && cpos(1, 0) == 0.0 && cneg(1, 0) == 2.0;
    const auto [fpos, fneg] = fpr_counts(latent, d, 1, false);
    ok &= fpos(0, 0) == 2.0 && fneg(0, 0) == 1.0 && fpos(1, 0) == 2.0 && fneg(1, 0) == 3.0;

    const auto dir = pi_dirichlet_params({1.0, 1.0, 1.0}, {0, 0, 0, 1});
    ok &= dir.size() == 3 && dir[0] == 4.0 && dir[1] == 2.0 && dir[2] == 1.0;

    std::printf("  conjugate count formulas on fixed latent states: %s\n",
                ok ? "exact match" : "MISMATCH");
    return ok;
}

struct GewekeSetup {
    std::size_t J = 3, K = 2, L = 3, n_cases = 6, n_controls = 6;
    HyperPriors h = HyperPriors::defaults(3, 2, 3);
    std::uint64_t seed = 424242;
};

std::vector<double> weights_from_sticks(const std::vector<double>& u,
                                        const std::vector<double>& log1m) {
    const std::size_t K = u.size() + 1;
    std::vector<double> w(K, 0.0);
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        w[k] = u[k] * std::exp(cum);
        cum += log1m[k];
    }
    w[K - 1] = std::exp(cum);
    return w;
}

GibbsState geweke_prior_draw(const GewekeSetup& s, RngStream& rng) {
    GibbsState st;
    st.params.pi = rng.dirichlet(s.h.dirichlet_a);
    st.params.theta = Matrix(s.J, s.K);
    st.params.psi = Matrix(s.J, s.K);
    for (std::size_t j = 0; j < s.J; ++j)
        for (std::size_t k = 0; k < s.K; ++k) {
            st.params.theta(j, k) = std::clamp(rng.beta(s.h.tpr_c1(j, k), s.h.tpr_c2(j, k)),
                                               kRateFloor, kRateCeil);
            st.params.psi(j, k) = std::clamp(rng.beta(s.h.fpr_b1(j, k), s.h.fpr_b2(j, k)),
                                             kRateFloor, kRateCeil);
        }
    st.params.alpha0 = std::clamp(rng.gamma(s.h.gamma_shape, s.h.gamma_rate),
                                  kConcentrationFloor, kConcentrationCeil);
    st.params.alpha1 = std::clamp(rng.gamma(s.h.gamma_shape, s.h.gamma_rate),
                                  kConcentrationFloor, kConcentrationCeil);
    st.nu_sticks.clear();
    st.eta_sticks.clear();
    st.nu_stick_log1m.clear();
    st.eta_stick_log1m.clear();
    for (std::size_t k = 0; k + 1 < s.K; ++k) {
        const StickDraw nu_s = draw_stick(rng, 1.0, st.params.alpha0);
        st.nu_sticks.push_back(nu_s.u);
        st.nu_stick_log1m.push_back(nu_s.log1m);
        const StickDraw eta_s = draw_stick(rng, 1.0, st.params.alpha1);
        st.eta_sticks.push_back(eta_s.u);
        st.eta_stick_log1m.push_back(eta_s.log1m);
    }
    st.params.nu = weights_from_sticks(st.nu_sticks, st.nu_stick_log1m);
    st.params.eta = weights_from_sticks(st.eta_sticks, st.eta_stick_log1m);
    st.latent.case_class.assign(s.n_cases, 0);
    st.latent.case_subclass.assign(s.n_cases, 0);
    st.latent.control_subclass.assign(s.n_controls, 0);
    return st;
}

// Redraw the latent indicators and the data from the model given the current
// parameters. Together with one posterior sweep this leaves the joint
// distribution over (parameters, latent, data) invariant.
void geweke_redraw(const GewekeSetup& s, GibbsState& st, Dataset& d, RngStream& rng) {
    const ModelParams& p = st.params;
    for (std::size_t i = 0; i < s.n_cases; ++i) {
        const std::size_t cls = rng.categorical(p.pi);
        const std::size_t z = rng.categorical(p.eta);
        st.latent.case_class[i] = static_cast<int>(cls);
        st.latent.case_subclass[i] = static_cast<int>(z);
        for (std::size_t j = 0; j < s.J; ++j) {
            const double prob = cls == j ? p.theta(j, z) : p.psi(j, z);
            d.cases(i, j) = rng.bernoulli(prob) ? 1 : 0;
        }
    }
    for (std::size_t i = 0; i < s.n_controls; ++i) {
        const std::size_t z = rng.categorical(p.nu);
        st.latent.control_subclass[i] = static_cast<int>(z);
        for (std::size_t j = 0; j < s.J; ++j)
            d.controls(i, j) = rng.bernoulli(p.psi(j, z)) ? 1 : 0;
    }
}

std::array<double, 10> geweke_functions(const GewekeSetup& s, const GibbsState& st,
                                        const Dataset& d) {
    double case_mean = 0.0, ctrl_mean = 0.0;
    for (std::size_t i = 0; i < s.n_cases; ++i)
        for (std::size_t j = 0; j < s.J; ++j) case_mean += d.cases(i, j);
    for (std::size_t i = 0; i < s.n_controls; ++i)
        for (std::size_t j = 0; j < s.J; ++j) ctrl_mean += d.controls(i, j);
    case_mean /= static_cast<double>(s.n_cases * s.J);
    ctrl_mean /= static_cast<double>(s.n_controls * s.J);
    return {st.params.pi[0], st.params.pi[1],     st.params.theta(0, 0), st.params.psi(0, 0),
            st.params.eta[0], st.params.nu[0],    st.params.alpha0,      st.params.alpha1,
            case_mean,        ctrl_mean};
}

bool criterion4() {
    bool ok = conjugate_exact_checks();

    const GewekeSetup s;
    const std::size_t n_marginal = 50000;
    const std::size_t n_sweeps = 20000;
    static const char* names[10] = {"pi[0]",  "pi[1]",  "theta(0,0)", "psi(0,0)", "eta[0]",
                                    "nu[0]",  "alpha0", "alpha1",     "case mean", "ctrl mean"};

    Dataset d;
    d.pathogen_names = {"A", "B", "C"};
    d.cases = BinaryMatrix(s.n_cases, s.J);
    d.controls = BinaryMatrix(s.n_controls, s.J);

    // marginal-conditional: independent draws from the prior predictive
    std::array<std::vector<double>, 10> mc;
    for (auto& v : mc) v.reserve(n_marginal);
    for (std::size_t r = 0; r < n_marginal; ++r) {
        RngStream rng{s.seed, 11, r, 0, 0};
        GibbsState st = geweke_prior_draw(s, rng);
        geweke_redraw(s, st, d, rng);
        const auto g = geweke_functions(s, st, d);
        for (int i = 0; i < 10; ++i) mc[i].push_back(g[i]);
    }

    // successive-conditional: posterior sweep then data redraw, repeatedly
    std::array<std::vector<double>, 10> sc;
    for (auto& v : sc) v.reserve(n_sweeps);
    {
        RngStream rng0{s.seed, 12, 0, 0, 0};
        GibbsState st = geweke_prior_draw(s, rng0);
        geweke_redraw(s, st, d, rng0);
        for (std::size_t t = 0; t < n_sweeps; ++t) {
            const StepCtx ctx{s.seed, 13, t};
            step_case_class(st, d, ctx);
            step_subclass(st, d, ctx);
            step_eta(st, ctx);
            step_nu(st, ctx);
            step_alpha(st, s.h, ctx);
            step_tpr(st, d, s.h, ctx);
            step_fpr(st, d, s.h, ctx, false);
            step_pi(st, s.h, ctx);
            RngStream rr{s.seed, 14, t, 0, 0};
            geweke_redraw(s, st, d, rr);
            const auto g = geweke_functions(s, st, d);
            for (int i = 0; i < 10; ++i) sc[i].push_back(g[i]);
        }
    }

    // z-scores with an iid standard error on the marginal side and a
    // batch-means standard error on the chain side
    const std::size_t n_batches = 100;
    const std::size_t batch = n_sweeps / n_batches;
    double worst_z = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double m1 = mean_of(mc[i]);
        const double se1_sq = var_of(mc[i]) / static_cast<double>(n_marginal);
        const double m2 = mean_of(sc[i]);
        std::vector<double> batch_means(n_batches);
        for (std::size_t b = 0; b < n_batches; ++b) {
            double acc = 0.0;
            for (std::size_t t = b * batch; t < (b + 1) * batch; ++t) acc += sc[i][t];
            batch_means[b] = acc / static_cast<double>(batch);
        }
        const double se2_sq = var_of(batch_means) / static_cast<double>(n_batches);
        const double z = (m1 - m2) / std::sqrt(se1_sq + se2_sq);
        worst_z = std::max(worst_z, std::abs(z));
        std::printf("  %-10s marginal %.4f vs chain %.4f, z = %+.2f\n", names[i], m1, m2, z);
        if (!(std::abs(z) < 4.0)) ok = false;
    }
    verdict(ok, 4, "conjugate counts exact, joint distribution test max |z| = %.2f (bound 4)",
            worst_z);
    return ok;
}

// ---------------------------------------------------------------- criterion 5
// End-to-end recovery on one scenario I dataset with the informative
// sensitivity prior, plus convergence of every monitored functional.

bool criterion5() {
    Timer t;
    const ScenarioSpec truth = scenario_i(0.5);
    const Dataset d = generate(truth, 500, 500, 20260501);

    FitSpec spec;
    spec.label = "nplcm";
    spec.tpr_range = {0.5, 0.99};
    spec.dirichlet_a = 1.0;
    spec.sampler.truncation_K = 5;
    spec.sampler.n_burn = 5000;
    spec.sampler.n_keep = 25000;
    spec.sampler.thin = 10;
    spec.sampler.n_chains = 2;
    spec.sampler.seed = 7;
    spec.sampler.n_jobs = 1;

    const HyperPriors h = make_hyperpriors(d, spec, spec.sampler.truncation_K);
    const PosteriorSamples post = run_sampler(d, h, spec.sampler);

    const std::size_t L = post.n_classes;
    std::vector<double> means(L, 0.0);
    std::size_t n_draws = 0;
    for (const auto& chain : post.chains) {
        n_draws += chain.pi.size();
        for (const auto& draw : chain.pi)
            for (std::size_t l = 0; l < L; ++l) means[l] += draw[l];
    }
    for (double& m : means) m /= static_cast<double>(n_draws);

    double max_err = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        const double err = std::abs(means[l] - truth.pi_true[l]);
        std::printf("  pi[%s]: posterior mean %.4f, truth %.3f, error %+.4f\n",
                    post.pathogen_names[l].c_str(), means[l], truth.pi_true[l],
                    means[l] - truth.pi_true[l]);
        max_err = std::max(max_err, err);
    }

    const DiagnosticsReport rep = summarize(post);
    double max_psrf = 0.0;
    std::string worst_name;
    for (const auto& f : rep.functionals)
        if (f.psrf > max_psrf) {
            max_psrf = f.psrf;
            worst_name = f.name;
        }
    const double secs = t.seconds();
    std::printf("  max error %.4f (bound 0.05), max psrf %.4f on %s (bound 1.1), %.1f s"
                " (bound 1200)\n",
                max_err, max_psrf, worst_name.c_str(), secs);

    const bool ok = max_err <= 0.05 && max_psrf < 1.1 && secs < 1200.0;
    verdict(ok, 5, "max |pi error| = %.4f, max psrf = %.3f, %.0f s", max_err, max_psrf, secs);
    return ok;
}

// ---------------------------------------------------------------- criterion 6
// Replication study on scenario II at eta_o = 0: the single-subclass fit
// must show the large positive bias and poor coverage for class C that the
// subclass mixture avoids.

bool criterion6() {
    Timer t;
    const auto specs = default_fit_specs(99);
    const ReplicationReport rep = replicate(scenario_ii(0.0), 500, 500, 50, specs, 99, 1);

    const auto& np = rep.models[0];
    const auto& pl = rep.models[1];
    const std::size_t c = 2;
    std::printf("  %zu/%zu nplcm fits ok, %zu/%zu plcm fits ok\n", np.n_ok, rep.n_replicates,
                pl.n_ok, rep.n_replicates);
    std::printf("  class C bias:     plcm %+.4f (must exceed +0.15), nplcm %+.4f"
                " (must stay under +0.10)\n",
                pl.bias[c], np.bias[c]);
    std::printf("  class C coverage: plcm %.3f (must stay under 0.20), nplcm %.3f"
                " (must exceed 0.70)\n",
                pl.coverage[c], np.coverage[c]);
    std::printf("  runtime %.0f s\n", t.seconds());

    const bool ok = np.n_ok == rep.n_replicates && pl.n_ok == rep.n_replicates &&
                    pl.bias[c] > 0.15 && np.bias[c] < 0.10 && pl.coverage[c] < 0.20 &&
                    np.coverage[c] > 0.70;
    verdict(ok, 6, "50 replicates, class C: plcm bias %+.3f cover %.2f, nplcm bias %+.3f"
            " cover %.2f",
            pl.bias[c], pl.coverage[c], np.bias[c], np.coverage[c]);
    return ok;
}

// ---------------------------------------------------------------- criterion 7
// Posterior predictive pairwise checks: the subclass mixture fit to its own
// scenario II data should flag few cells, and fewer than the
// single-subclass fit to the same data.

bool criterion7() {
    Timer t;
    const std::size_t n_reps = 20;
    double np_case = 0.0, np_ctrl = 0.0, pl_case = 0.0, pl_ctrl = 0.0;

    auto specs = default_fit_specs(0);
    for (std::size_t r = 0; r < n_reps; ++r) {
        const Dataset d = generate(scenario_ii(0.5), 500, 500, 1000 + r);
        specs[0].sampler.seed = 5000 + r;
        specs[1].sampler.seed = 6000 + r;
        for (std::size_t m = 0; m < 2; ++m) {
            const HyperPriors h = make_hyperpriors(d, specs[m], specs[m].sampler.truncation_K);
            const PosteriorSamples post = run_sampler(d, h, specs[m].sampler);
            const SlordReport rep = slord(post, d, 7000 + 10 * r + m);
            const double fc = static_cast<double>(rep.n_flagged(Population::kCase));
            const double f0 = static_cast<double>(rep.n_flagged(Population::kControl));
            (m == 0 ? np_case : pl_case) += fc;
            (m == 0 ? np_ctrl : pl_ctrl) += f0;
        }
    }
    const double n = static_cast<double>(n_reps);
    np_case /= n;
    np_ctrl /= n;
    pl_case /= n;
    pl_ctrl /= n;
    std::printf("  mean flagged cells over %zu replicates (10 pairs per population):\n", n_reps);
    std::printf("    nplcm: cases %.2f, controls %.2f (bound 4 each)\n", np_case, np_ctrl);
    std::printf("    plcm:  cases %.2f, controls %.2f\n", pl_case, pl_ctrl);
    std::printf("  runtime %.0f s\n", t.seconds());

    const bool ok = np_case <= 4.0 && np_ctrl <= 4.0 &&
                    np_case + np_ctrl < pl_case + pl_ctrl;
    verdict(ok, 7, "nplcm flags %.2f+%.2f per replicate vs plcm %.2f+%.2f", np_case, np_ctrl,
            pl_case, pl_ctrl);
    return ok;
}

// ---------------------------------------------------------------- criterion 8

bool criterion8() {
    std::printf("  the motivating clinical dataset is not distributable, so the real-data\n");
    std::printf("  analysis cannot be re-run here; criteria 1-7 cover the reproducible\n");
    std::printf("  claims on synthetic benchmarks\n");
    verdict(true, 8, "real-data analysis documented as out of scope");
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    bool run[9] = {};
    if (argc < 2) {
        for (int i = 1; i <= 8; ++i) run[i] = true;
    } else {
        for (int a = 1; a < argc; ++a) {
            const int n = std::atoi(argv[a]);
            if (n < 1 || n > 8) {
                std::fprintf(stderr, "usage: %s [criterion 1..8]...\n", argv[0]);
                return 2;
            }
            run[n] = true;
        }
    }

    bool (*criteria[9])() = {nullptr,    criterion1, criterion2, criterion3, criterion4,
                             criterion5, criterion6, criterion7, criterion8};
    bool all_ok = true;
    for (int n = 1; n <= 8; ++n)
        if (run[n]) all_ok &= criteria[n]();
    return all_ok ? 0 : 1;
}
