#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nplcm/nplcm.hpp"

namespace fs = std::filesystem;
using nplcm::json;

namespace {

struct Cli {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::optional<std::size_t> k_star;
    bool cut_feedback = false;
    bool other_cause = false;
};

json effective_config(const Cli& cli) {
    json cfg = json::object();
    if (!cli.config_path.empty()) {
        std::ifstream f(cli.config_path);
        if (!f) throw std::runtime_error("cannot open config: " + cli.config_path);
        cfg = json::parse(f);
        if (!cfg.is_object()) throw std::runtime_error("config must be a JSON object");
    }
    if (!cfg.contains("sampler")) cfg["sampler"] = json::object();
    if (cli.seed) cfg["seed"] = *cli.seed;
    if (cli.jobs) cfg["jobs"] = *cli.jobs;
    if (cli.k_star) cfg["sampler"]["k_star"] = *cli.k_star;
    if (cli.cut_feedback) cfg["sampler"]["cut_feedback"] = true;
    if (cli.other_cause) cfg["sampler"]["include_other_cause"] = true;
    if (!cli.out.empty()) cfg["out"] = cli.out;
    return cfg;
}

std::string out_dir(const json& cfg) {
    if (!cfg.contains("out")) throw std::runtime_error("no output directory: pass --out");
    std::string dir = cfg.at("out").get<std::string>();
    fs::create_directories(dir);
    return dir;
}

std::uint64_t base_seed(const json& cfg) { return cfg.value("seed", std::uint64_t{0}); }

unsigned n_jobs(const json& cfg) { return cfg.value("jobs", 0u); }

nplcm::SamplerConfig sampler_from_config(const json& cfg) {
    nplcm::SamplerConfig sc = nplcm::sampler_config_from_json(cfg.value("sampler", json::object()));
    if (!cfg.value("sampler", json::object()).contains("seed")) sc.seed = base_seed(cfg);
    sc.n_jobs = n_jobs(cfg);
    return sc;
}

nplcm::ScenarioSpec scenario_from_config(const json& cfg) {
    if (!cfg.contains("scenario")) throw std::runtime_error("config needs a \"scenario\" object");
    const json& s = cfg.at("scenario");
    std::string name = s.value("name", "custom");
    double eta_o = s.value("eta_o", 0.5);
    if (name == "I") return nplcm::scenario_i(eta_o);
    if (name == "II") return nplcm::scenario_ii(eta_o);
    nplcm::ScenarioSpec spec;
    spec.name = name;
    spec.eta_o = eta_o;
    spec.pi_true = s.at("pi").get<std::vector<double>>();
    spec.theta_true = nplcm::matrix_from_json(s.at("theta"));  // J rows x K_true cols
    spec.psi_true = nplcm::matrix_from_json(s.at("psi"));
    spec.nu_true = s.at("nu").get<std::vector<double>>();
    if (s.contains("eta")) spec.custom_eta = s.at("eta").get<std::vector<double>>();
    spec.to_params();  // validates
    return spec;
}

nplcm::HyperPriors priors_from_config(const json& cfg, const nplcm::Dataset& d,
                                      std::size_t truncation_K) {
    const std::size_t J = d.n_dims();
    const std::size_t L = J + (d.include_other_cause ? 1 : 0);
    nplcm::HyperPriors h = nplcm::HyperPriors::defaults(J, truncation_K, L);
    const json prior = cfg.value("prior", json::object());
    if (prior.contains("dirichlet_a")) {
        const json& a = prior.at("dirichlet_a");
        if (a.is_number()) {
            for (double& v : h.dirichlet_a) v = a.get<double>();
        } else {
            h.dirichlet_a = a.get<std::vector<double>>();
            if (h.dirichlet_a.size() != L)
                throw std::runtime_error("prior.dirichlet_a must have one entry per class");
        }
    }
    auto range_from = [](const json& r) {
        nplcm::ElicitedRange range{r.at("low").get<double>(), r.at("high").get<double>()};
        range.quantile_low = r.value("quantile_low", 0.025);
        range.quantile_high = r.value("quantile_high", 0.975);
        return range;
    };
    if (prior.contains("tpr_range")) {
        auto [c1, c2] = nplcm::beta_from_quantiles(range_from(prior.at("tpr_range")));
        for (std::size_t j = 0; j < J; ++j) h.set_tpr_prior(j, c1, c2);
    }
    if (prior.contains("tpr_ranges")) {
        for (const auto& [name, r] : prior.at("tpr_ranges").items()) {
            auto it = std::find(d.pathogen_names.begin(), d.pathogen_names.end(), name);
            if (it == d.pathogen_names.end())
                throw std::runtime_error("prior.tpr_ranges: unknown pathogen " + name);
            auto [c1, c2] = nplcm::beta_from_quantiles(range_from(r));
            h.set_tpr_prior(static_cast<std::size_t>(it - d.pathogen_names.begin()), c1, c2);
        }
    }
    if (prior.contains("fpr_beta")) {
        auto b = prior.at("fpr_beta").get<std::vector<double>>();
        if (b.size() != 2) throw std::runtime_error("prior.fpr_beta must be [b1, b2]");
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = 0; k < truncation_K; ++k) {
                h.fpr_b1(j, k) = b[0];
                h.fpr_b2(j, k) = b[1];
            }
    }
    h.validate();
    return h;
}

std::vector<std::string> class_names(const std::vector<std::string>& pathogen_names,
                                     std::size_t n_classes) {
    std::vector<std::string> out = pathogen_names;
    if (n_classes == pathogen_names.size() + 1) out.push_back("other");
    return out;
}

int cmd_simulate(const json& cfg) {
    nplcm::ModelParams truth;
    if (cfg.contains("params")) {
        std::ifstream f(cfg.at("params").get<std::string>());
        if (!f) throw std::runtime_error("cannot open params file");
        truth = nplcm::params_from_json(json::parse(f));
    } else {
        truth = scenario_from_config(cfg).to_params();
    }
    const json sim = cfg.value("simulate", json::object());
    const std::size_t n1 = sim.value("n_cases", 500u);
    const std::size_t n0 = sim.value("n_controls", 500u);
    const std::uint64_t seed = base_seed(cfg);
    nplcm::Dataset d = nplcm::generate_from_params(truth, n1, n0, seed);
    std::string dir = out_dir(cfg);
    nplcm::write_dataset_csv(dir + "/data.csv", d);
    json manifest{{"op", "simulate"},
                  {"seed", seed},
                  {"config_hash", nplcm::config_hash_hex(cfg)},
                  {"n_cases", n1},
                  {"n_controls", n0},
                  {"truth", nplcm::params_to_json(truth)}};
    std::ofstream(dir + "/manifest.json") << manifest.dump(2) << '\n';
    std::printf("wrote %s/data.csv (%zu cases, %zu controls, %zu dimensions)\n", dir.c_str(),
                n1, n0, d.n_dims());
    std::printf("config %s  seed %llu\n", nplcm::config_hash_hex(cfg).c_str(),
                static_cast<unsigned long long>(seed));
    return 0;
}

int cmd_fit(const json& cfg) {
    if (!cfg.contains("dataset")) throw std::runtime_error("config needs \"dataset\" (CSV path)");
    nplcm::Dataset d = nplcm::read_dataset_csv(cfg.at("dataset").get<std::string>());
    nplcm::SamplerConfig sc = sampler_from_config(cfg);
    d.include_other_cause = sc.include_other_cause;
    nplcm::HyperPriors h = priors_from_config(cfg, d, sc.truncation_K);
    nplcm::PosteriorSamples post = nplcm::run_sampler(d, h, sc);
    std::string dir = out_dir(cfg);
    nplcm::save_posterior(dir, post, cfg);
    nplcm::DiagnosticsReport diag = nplcm::summarize(post);
    std::ofstream(dir + "/diagnostics.json") << nplcm::diagnostics_to_json(diag).dump(2)
                                             << '\n';
    nplcm::write_trace_csvs(dir + "/traces", post);
    std::printf("config %s  seed %llu\n", nplcm::config_hash_hex(cfg).c_str(),
                static_cast<unsigned long long>(sc.seed));
    std::printf("%zu chains x %zu draws retained\n", post.chains.size(),
                post.draws_per_chain());
    std::printf("%-12s %8s %10s %10s\n", "functional", "psrf", "ess", "median");
    for (const auto& f : diag.functionals)
        std::printf("%-12s %8.4f %10.1f %10.4f\n", f.name.c_str(), f.psrf, f.ess,
                    f.quantiles[2]);
    std::printf("posterior written to %s\n", dir.c_str());
    return 0;
}

int cmd_check(const json& cfg) {
    if (!cfg.contains("dataset") || !cfg.contains("posterior"))
        throw std::runtime_error("config needs \"dataset\" and \"posterior\" paths");
    nplcm::Dataset d = nplcm::read_dataset_csv(cfg.at("dataset").get<std::string>());
    nplcm::PosteriorSamples post = nplcm::load_posterior(cfg.at("posterior").get<std::string>());
    d.include_other_cause = post.config.include_other_cause;
    const json chk = cfg.value("check", json::object());
    const std::size_t top_n = chk.value("top_n", 10u);
    const double epsilon = chk.value("epsilon", 0.05);
    const std::uint64_t seed = base_seed(cfg);
    std::string dir = out_dir(cfg);

    nplcm::write_lor_csv(dir + "/lor_case.csv", nplcm::observed_lor(d.cases),
                         d.pathogen_names);
    nplcm::write_lor_csv(dir + "/lor_control.csv", nplcm::observed_lor(d.controls),
                         d.pathogen_names);
    nplcm::SlordReport sl = nplcm::slord(post, d, seed);
    nplcm::write_slord_csv(dir + "/slord.csv", sl, d.pathogen_names);
    nplcm::PpdReport ppd = nplcm::ppd_pattern_freq(post, d, top_n, seed);
    std::ofstream(dir + "/ppd.json") << nplcm::ppd_to_json(ppd).dump(2) << '\n';
    nplcm::ConcentrationReport conc = nplcm::subclass_concentration(post, epsilon);
    std::ofstream(dir + "/concentration.json")
        << nplcm::concentration_to_json(conc).dump(2) << '\n';

    std::printf("config %s  seed %llu\n", nplcm::config_hash_hex(cfg).c_str(),
                static_cast<unsigned long long>(seed));
    std::printf("flagged pairwise deviations: %zu case, %zu control (of %zu pairs)\n",
                sl.n_flagged(nplcm::Population::kCase),
                sl.n_flagged(nplcm::Population::kControl), sl.case_cells.size());
    std::printf("P(single subclass dominates): cases %.3f, controls %.3f (eps=%.2f)\n",
                conc.prob_eta, conc.prob_nu, epsilon);
    std::printf("checks written to %s\n", dir.c_str());
    return 0;
}

int cmd_predict(const json& cfg) {
    if (!cfg.contains("dataset") || !cfg.contains("posterior"))
        throw std::runtime_error("config needs \"dataset\" and \"posterior\" paths");
    const json pre = cfg.value("predict", json::object());
    if (!pre.contains("pattern"))
        throw std::runtime_error("config needs predict.pattern (e.g. \"10110\")");
    nplcm::Dataset d = nplcm::read_dataset_csv(cfg.at("dataset").get<std::string>());
    nplcm::PosteriorSamples post = nplcm::load_posterior(cfg.at("posterior").get<std::string>());
    auto pattern = nplcm::detail::parse_pattern(pre.at("pattern").get<std::string>());
    std::vector<double> probs = nplcm::individual_etiology(post, d, pattern);
    auto names = class_names(post.pathogen_names, post.n_classes);
    std::printf("config %s\n", nplcm::config_hash_hex(cfg).c_str());
    std::printf("P(cause | pattern %s):\n", pre.at("pattern").get<std::string>().c_str());
    for (std::size_t l = 0; l < probs.size(); ++l)
        std::printf("  %-10s %.4f\n", names[l].c_str(), probs[l]);
    if (cfg.contains("out")) {
        std::string dir = out_dir(cfg);
        std::ofstream(dir + "/etiology.json")
            << nplcm::etiology_to_json(pattern, probs, names).dump(2) << '\n';
        std::printf("written to %s/etiology.json\n", dir.c_str());
    }
    return 0;
}

int cmd_asymp(const json& cfg) {
    const json as = cfg.value("asymp", json::object());
    nplcm::AsymptoticsOptions opt;
    opt.fix_marginal_fpr = as.value("fix_marginal_fpr", false);
    opt.case_weight = as.value("case_weight", 0.5);
    opt.n_total = as.value("n_total", 1000.0);
    std::vector<double> grid =
        as.value("eta_grid", std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});

    nplcm::ScenarioSpec base = scenario_from_config(cfg);
    std::function<nplcm::ScenarioSpec(double)> family;
    if (base.name == "I")
        family = [](double e) { return nplcm::scenario_i(e); };
    else if (base.name == "II")
        family = [](double e) { return nplcm::scenario_ii(e); };
    else {
        family = [&base](double) { return base; };
        grid = {base.eta_o};  // custom truths are a single point
    }
    auto points = nplcm::prab_curve(family, grid, opt);
    auto names = class_names(nplcm::default_pathogen_names(base.n_dims()), base.pi_true.size());
    std::string dir = out_dir(cfg);
    nplcm::write_prab_csv(dir + "/prab.csv", points, names);
    std::printf("config %s\n", nplcm::config_hash_hex(cfg).c_str());
    std::printf("%6s", "eta_o");
    for (const auto& n : names) std::printf(" %9s", n.c_str());
    std::printf("   (percent relative bias)\n");
    for (const auto& p : points) {
        std::printf("%6.2f", p.eta_o);
        for (double v : p.result.prab) std::printf(" %9.3f", v);
        std::printf("\n");
    }
    std::printf("written to %s/prab.csv\n", dir.c_str());
    return 0;
}

int cmd_replicate(const json& cfg) {
    nplcm::ScenarioSpec scenario = scenario_from_config(cfg);
    const json rep = cfg.value("replicate", json::object());
    const std::size_t T = rep.value("n_replicates", 50u);
    const std::size_t n1 = rep.value("n_cases", 500u);
    const std::size_t n0 = rep.value("n_controls", 500u);
    const std::uint64_t seed = base_seed(cfg);

    auto specs = nplcm::default_fit_specs(seed);
    if (rep.contains("sampler")) {
        nplcm::SamplerConfig sc = nplcm::sampler_config_from_json(rep.at("sampler"));
        for (auto& s : specs) {
            std::size_t k = s.sampler.truncation_K;
            s.sampler = sc;
            s.sampler.truncation_K = k;
        }
    }
    if (rep.contains("k_star_nplcm"))
        specs[0].sampler.truncation_K = rep.at("k_star_nplcm").get<std::size_t>();
    if (cfg.contains("prior") && cfg.at("prior").contains("tpr_range")) {
        const json& r = cfg.at("prior").at("tpr_range");
        for (auto& s : specs) {
            s.tpr_range = {r.at("low").get<double>(), r.at("high").get<double>()};
            s.tpr_range.quantile_low = r.value("quantile_low", 0.025);
            s.tpr_range.quantile_high = r.value("quantile_high", 0.975);
        }
    }
    nplcm::ReplicationReport report =
        nplcm::replicate(scenario, n1, n0, T, specs, seed, n_jobs(cfg));
    auto names = class_names(nplcm::default_pathogen_names(scenario.n_dims()),
                             scenario.pi_true.size());
    std::string dir = out_dir(cfg);
    nplcm::write_replication_csv(dir + "/replication.csv", report, names);
    std::ofstream(dir + "/replication.json")
        << nplcm::replication_to_json(report, names).dump(2) << '\n';
    std::printf("config %s  seed %llu\n", nplcm::config_hash_hex(cfg).c_str(),
                static_cast<unsigned long long>(seed));
    for (const auto& m : report.models) {
        std::printf("%s (%zu ok, %zu failed):\n", m.label.c_str(), m.n_ok, m.n_failed);
        for (std::size_t l = 0; l < m.bias.size(); ++l)
            std::printf("  %-10s bias %+7.4f (se %.4f)  coverage %5.1f%%\n",
                        names[l].c_str(), m.bias[l], m.bias_se[l], 100.0 * m.coverage[l]);
    }
    std::printf("written to %s/replication.csv\n", dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian case-control etiology inference with latent subclasses"};
    app.require_subcommand(1);
    app.fallthrough();

    Cli cli;
    app.add_option("--config", cli.config_path, "JSON configuration file");
    app.add_option("--out", cli.out, "output directory");
    app.add_option("--seed", cli.seed, "RNG seed (overrides config)");
    app.add_option("--jobs", cli.jobs, "worker threads, 0 = all cores");
    app.add_option("--k-star", cli.k_star, "subclass truncation level (overrides config)");
    app.add_flag("--cut-feedback", cli.cut_feedback,
                 "estimate false-positive rates from controls only");
    app.add_flag("--other-cause", cli.other_cause,
                 "add a class for cases caused by none of the measured pathogens");

    std::function<int(const json&)> run;
    app.add_subcommand("simulate", "draw a synthetic dataset from a known truth")
        ->callback([&] { run = cmd_simulate; });
    app.add_subcommand("fit", "run the posterior sampler on a dataset")
        ->callback([&] { run = cmd_fit; });
    app.add_subcommand("check", "posterior predictive checks for a fitted posterior")
        ->callback([&] { run = cmd_check; });
    app.add_subcommand("predict", "etiology distribution for a measurement pattern")
        ->callback([&] { run = cmd_predict; });
    app.add_subcommand("asymp", "large-sample bias and variance of the working model")
        ->callback([&] { run = cmd_asymp; });
    app.add_subcommand("replicate", "repeated-simulation comparison of model fits")
        ->callback([&] { run = cmd_replicate; });

    CLI11_PARSE(app, argc, argv);
    try {
        return run(effective_config(cli));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
