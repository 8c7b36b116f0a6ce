#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nplcm/diagnostics.hpp"
#include "nplcm/elicitation.hpp"
#include "nplcm/gibbs.hpp"
#include "nplcm/parallel.hpp"
#include "nplcm/rng.hpp"
#include "nplcm/types.hpp"

namespace nplcm {

namespace detail {
// stream ids for the data generator, disjoint by construction from the
// sampler's step ids through the population key below
inline constexpr std::uint64_t kSimCasePop = 1;
inline constexpr std::uint64_t kSimControlPop = 2;
inline constexpr std::uint64_t kSimReplicate = 3;
}  // namespace detail

// A fully specified generating truth. Rate matrices are dimension-major
// (J x K_true) like ModelParams; the factory helpers take subclass rows as
// written out in the benchmark tables and transpose.
struct ScenarioSpec {
    std::string name;  // "I", "II", or a custom label
    std::vector<double> pi_true;
    Matrix theta_true;  // J x K_true
    Matrix psi_true;    // J x K_true
    std::vector<double> nu_true;
    double eta_o = 0.5;              // case weight on subclass 1 when K_true == 2
    std::vector<double> custom_eta;  // overrides eta_o when nonempty

    std::size_t n_dims() const { return theta_true.rows(); }
    std::size_t n_true_subclasses() const { return theta_true.cols(); }

    std::vector<double> eta_true() const {
        if (!custom_eta.empty()) return custom_eta;
        if (n_true_subclasses() == 1) return {1.0};
        if (n_true_subclasses() == 2) return {eta_o, 1.0 - eta_o};
        throw std::invalid_argument(
            "ScenarioSpec: custom_eta is required when K_true > 2");
    }

    ModelParams to_params() const {
        ModelParams p;
        p.pi = pi_true;
        p.theta = theta_true;
        p.psi = psi_true;
        p.eta = eta_true();
        p.nu = nu_true;
        p.alpha0 = p.alpha1 = 1.0;
        p.validate();
        return p;
    }
};

// Two-subclass benchmark truths. Scenario I: subclasses differ only in
// false-positive rates. Scenario II: both rate matrices differ, with one
// weak-signal dimension per subclass.
inline ScenarioSpec scenario_i(double eta_o) {
    ScenarioSpec s;
    s.name = "I";
    s.eta_o = eta_o;
    s.pi_true = {0.5, 0.2, 0.15, 0.1, 0.05};
    s.theta_true = Matrix::from_rows({{0.95, 0.90, 0.90, 0.90, 0.90},
                                      {0.95, 0.90, 0.90, 0.90, 0.90}})
                       .transposed();
    s.psi_true = Matrix::from_rows({{0.25, 0.25, 0.20, 0.15, 0.15},
                                    {0.20, 0.20, 0.25, 0.10, 0.10}})
                     .transposed();
    s.nu_true = {0.5, 0.5};
    return s;
}

inline ScenarioSpec scenario_ii(double eta_o) {
    ScenarioSpec s;
    s.name = "II";
    s.eta_o = eta_o;
    s.pi_true = {0.5, 0.2, 0.15, 0.1, 0.05};
    s.theta_true = Matrix::from_rows({{0.95, 0.95, 0.55, 0.95, 0.95},
                                      {0.95, 0.55, 0.95, 0.55, 0.55}})
                       .transposed();
    s.psi_true = Matrix::from_rows({{0.40, 0.40, 0.05, 0.20, 0.20},
                                    {0.05, 0.05, 0.40, 0.05, 0.05}})
                     .transposed();
    s.nu_true = {0.5, 0.5};
    return s;
}

inline std::vector<std::string> default_pathogen_names(std::size_t n_dims) {
    std::vector<std::string> names;
    names.reserve(n_dims);
    for (std::size_t j = 0; j < n_dims; ++j) {
        if (n_dims <= 26)
            names.emplace_back(1, static_cast<char>('A' + j));
        else
            names.push_back("P" + std::to_string(j + 1));
    }
    return names;
}

// Draw one case-control dataset from explicit parameters. Each subject gets
// its own counter stream keyed by (seed, population, index), so datasets are
// reproducible and any prefix of subjects is stable under resizing.
inline Dataset generate_from_params(const ModelParams& params, std::size_t n_cases,
                                    std::size_t n_controls, std::uint64_t seed,
                                    std::vector<std::string> names = {}) {
    params.validate();
    const std::size_t J = params.n_dims();
    const std::size_t K = params.n_subclasses();
    Dataset d;
    d.include_other_cause = params.has_other_cause();
    d.pathogen_names = names.empty() ? default_pathogen_names(J) : std::move(names);
    if (d.pathogen_names.size() != J)
        throw std::invalid_argument("generate_from_params: names do not match dimensions");
    d.cases = BinaryMatrix(n_cases, J);
    d.controls = BinaryMatrix(n_controls, J);

    for (std::size_t i = 0; i < n_cases; ++i) {
        RngStream rng{seed, 0, detail::kSimCasePop, 0, static_cast<std::uint64_t>(i)};
        std::size_t cls = rng.categorical(params.pi);
        std::size_t z = K == 1 ? 0 : rng.categorical(params.eta);
        auto* row = d.cases.row(i);
        for (std::size_t j = 0; j < J; ++j) {
            double rate = (cls == j) ? params.theta(j, z) : params.psi(j, z);
            row[j] = rng.bernoulli(rate) ? 1 : 0;
        }
    }
    for (std::size_t i = 0; i < n_controls; ++i) {
        RngStream rng{seed, 0, detail::kSimControlPop, 0, static_cast<std::uint64_t>(i)};
        std::size_t z = K == 1 ? 0 : rng.categorical(params.nu);
        auto* row = d.controls.row(i);
        for (std::size_t j = 0; j < J; ++j) row[j] = rng.bernoulli(params.psi(j, z)) ? 1 : 0;
    }
    d.validate();
    return d;
}

inline Dataset generate(const ScenarioSpec& scenario, std::size_t n_cases,
                        std::size_t n_controls, std::uint64_t seed) {
    return generate_from_params(scenario.to_params(), n_cases, n_controls, seed);
}

// One model configuration inside a replication study.
struct FitSpec {
    std::string label;
    SamplerConfig sampler;
    ElicitedRange tpr_range{0.5, 0.99};  // applied to every dimension
    double dirichlet_a = 1.0;
};

// Desk-scale defaults used by the benchmark comparisons: a subclass-mixture
// fit at truncation 5 against the single-subclass fit, both with the same
// chain budget and sensitivity prior.
inline std::vector<FitSpec> default_fit_specs(std::uint64_t seed) {
    SamplerConfig base;
    base.n_burn = 2000;
    base.n_keep = 4000;
    base.thin = 10;
    base.n_chains = 1;
    base.seed = seed;
    base.n_jobs = 1;
    FitSpec np;
    np.label = "nplcm";
    np.sampler = base;
    np.sampler.truncation_K = 5;
    FitSpec p;
    p.label = "plcm";
    p.sampler = base;
    p.sampler.truncation_K = 1;
    return {np, p};
}

inline HyperPriors make_hyperpriors(const Dataset& d, const FitSpec& spec,
                                    std::size_t truncation_K) {
    const std::size_t L = d.n_dims() + (d.include_other_cause ? 1 : 0);
    HyperPriors h = HyperPriors::defaults(d.n_dims(), truncation_K, L);
    auto [c1, c2] = beta_from_quantiles(spec.tpr_range);
    for (std::size_t j = 0; j < d.n_dims(); ++j) h.set_tpr_prior(j, c1, c2);
    for (double& a : h.dirichlet_a) a = spec.dirichlet_a;
    return h;
}

struct FitResult {
    bool ok = false;
    std::string error;
    std::vector<double> post_mean;  // class weights
    std::vector<double> ci_lo, ci_hi;
};

// Fit one spec to one dataset and summarize the class-weight posterior with
// equal-tail 95% intervals over the pooled chains.
inline FitResult fit_class_weights(const Dataset& d, const FitSpec& spec) {
    FitResult r;
    try {
        HyperPriors h = make_hyperpriors(d, spec, spec.sampler.truncation_K);
        PosteriorSamples post = run_sampler(d, h, spec.sampler);
        const std::size_t L = post.n_classes;
        r.post_mean.assign(L, 0.0);
        std::vector<std::vector<double>> per_class(L);
        for (const auto& chain : post.chains)
            for (const auto& draw : chain.pi)
                for (std::size_t l = 0; l < L; ++l) per_class[l].push_back(draw[l]);
        for (std::size_t l = 0; l < L; ++l) {
            double s = 0.0;
            for (double v : per_class[l]) s += v;
            r.post_mean[l] = s / static_cast<double>(per_class[l].size());
            auto q = quantiles5(per_class[l]);
            r.ci_lo.push_back(q[0]);
            r.ci_hi.push_back(q[4]);
        }
        r.ok = true;
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

struct ModelReplicationStats {
    std::string label;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    // per class, over successful replicates
    std::vector<double> bias, bias_se, mse, mse_se, coverage, coverage_se;
};

struct ReplicationReport {
    ScenarioSpec scenario;
    std::size_t n_cases = 0, n_controls = 0, n_replicates = 0;
    std::vector<ModelReplicationStats> models;
    // per class: MSE of models[1] relative to models[0]; empty unless
    // exactly two fit specs were run
    std::vector<double> mse_ratio;
};

// Monte Carlo replication study: T datasets from the scenario truth, each
// fit under every spec. Failed fits are recorded and excluded from the
// averages. Replicate seeds and per-fit sampler seeds are derived from the
// study seed, so reruns are reproducible at any job count.
inline ReplicationReport replicate(const ScenarioSpec& scenario, std::size_t n_cases,
                                   std::size_t n_controls, std::size_t n_replicates,
                                   const std::vector<FitSpec>& fit_specs,
                                   std::uint64_t seed, unsigned n_jobs = 0) {
    if (n_replicates == 0) throw std::invalid_argument("replicate: n_replicates must be >= 1");
    if (fit_specs.empty()) throw std::invalid_argument("replicate: no fit specs");
    const std::vector<double> truth = scenario.pi_true;
    const std::size_t L = truth.size();

    std::vector<std::vector<FitResult>> results(fit_specs.size(),
                                                std::vector<FitResult>(n_replicates));
    parallel_for(n_replicates, n_jobs, [&](std::size_t t) {
        RngStream rep_keys{seed, 0, detail::kSimReplicate, 0, static_cast<std::uint64_t>(t)};
        std::uint64_t data_seed = rep_keys.next_u64();
        Dataset d = generate(scenario, n_cases, n_controls, data_seed);
        for (std::size_t s = 0; s < fit_specs.size(); ++s) {
            FitSpec spec = fit_specs[s];
            spec.sampler.seed = rep_keys.next_u64();
            spec.sampler.n_jobs = 1;
            results[s][t] = fit_class_weights(d, spec);
        }
    });

    ReplicationReport rep;
    rep.scenario = scenario;
    rep.n_cases = n_cases;
    rep.n_controls = n_controls;
    rep.n_replicates = n_replicates;
    for (std::size_t s = 0; s < fit_specs.size(); ++s) {
        ModelReplicationStats st;
        st.label = fit_specs[s].label;
        st.bias.assign(L, 0.0);
        st.bias_se.assign(L, 0.0);
        st.mse.assign(L, 0.0);
        st.mse_se.assign(L, 0.0);
        st.coverage.assign(L, 0.0);
        st.coverage_se.assign(L, 0.0);
        std::vector<std::vector<double>> errs(L), sqerrs(L), cover(L);
        for (const auto& r : results[s]) {
            if (!r.ok) {
                ++st.n_failed;
                continue;
            }
            ++st.n_ok;
            for (std::size_t l = 0; l < L; ++l) {
                double e = r.post_mean[l] - truth[l];
                errs[l].push_back(e);
                sqerrs[l].push_back(e * e);
                cover[l].push_back(r.ci_lo[l] <= truth[l] && truth[l] <= r.ci_hi[l] ? 1.0 : 0.0);
            }
        }
        if (st.n_ok == 0) throw std::runtime_error("replicate: every fit failed for " + st.label);
        auto mean_se = [&](const std::vector<double>& xs, double& mean, double& se) {
            double s_ = 0.0;
            for (double v : xs) s_ += v;
            mean = s_ / static_cast<double>(xs.size());
            double ss = 0.0;
            for (double v : xs) ss += (v - mean) * (v - mean);
            se = xs.size() > 1
                     ? std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                                 static_cast<double>(xs.size()))
                     : 0.0;
        };
        for (std::size_t l = 0; l < L; ++l) {
            mean_se(errs[l], st.bias[l], st.bias_se[l]);
            mean_se(sqerrs[l], st.mse[l], st.mse_se[l]);
            mean_se(cover[l], st.coverage[l], st.coverage_se[l]);
        }
        rep.models.push_back(std::move(st));
    }
    if (rep.models.size() == 2) {
        rep.mse_ratio.resize(L);
        for (std::size_t l = 0; l < L; ++l)
            rep.mse_ratio[l] = rep.models[1].mse[l] / rep.models[0].mse[l];
    }
    return rep;
}

}  // namespace nplcm
