#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nplcm/asymptotics.hpp"
#include "nplcm/checking.hpp"
#include "nplcm/diagnostics.hpp"
#include "nplcm/gibbs.hpp"
#include "nplcm/simulation.hpp"
#include "nplcm/types.hpp"

namespace nplcm {

using json = nlohmann::json;

namespace detail {

// Shortest round-trippable decimal form.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::string pattern_string(std::span<const std::uint8_t> pattern) {
    std::string s;
    s.reserve(pattern.size());
    for (auto b : pattern) s += b ? '1' : '0';
    return s;
}

inline std::vector<std::uint8_t> parse_pattern(const std::string& s) {
    std::vector<std::uint8_t> out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("pattern must be a string of 0s and 1s: " + s);
        out.push_back(c == '1' ? 1 : 0);
    }
    return out;
}

}  // namespace detail

// ---- dataset CSV ----
// Header: group,<name_1>,...,<name_J>. One row per subject with group equal
// to "case" or "control" and 0/1 measurements.

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
    d.validate();
    for (const auto& n : d.pathogen_names)
        if (n.find(',') != std::string::npos || n.find('\n') != std::string::npos)
            throw std::invalid_argument("pathogen name not representable in CSV: " + n);
    auto f = detail::open_out(path);
    f << "group";
    auto names = d.pathogen_names.empty() ? default_pathogen_names(d.n_dims())
                                          : d.pathogen_names;
    for (const auto& n : names) f << ',' << n;
    f << '\n';
    auto dump = [&](const BinaryMatrix& m, const char* label) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            f << label;
            for (std::size_t j = 0; j < m.cols(); ++j) f << ',' << int{m(i, j)};
            f << '\n';
        }
    };
    dump(d.cases, "case");
    dump(d.controls, "control");
}

inline Dataset read_dataset_csv(const std::string& path) {
    auto f = detail::open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "group")
        throw std::runtime_error("dataset header must be group,<name>,... : " + path);
    const std::size_t J = header.size() - 1;

    std::vector<std::vector<std::uint8_t>> case_rows, control_rows;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != J + 1)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(J + 1) + " fields");
        std::vector<std::uint8_t> row(J);
        for (std::size_t j = 0; j < J; ++j) {
            if (fields[j + 1] == "0")
                row[j] = 0;
            else if (fields[j + 1] == "1")
                row[j] = 1;
            else
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": measurement must be 0 or 1, got '" +
                                         fields[j + 1] + "'");
        }
        if (fields[0] == "case")
            case_rows.push_back(std::move(row));
        else if (fields[0] == "control")
            control_rows.push_back(std::move(row));
        else
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": group must be case or control, got '" + fields[0] +
                                     "'");
    }
    Dataset d;
    d.pathogen_names.assign(header.begin() + 1, header.end());
    d.cases = BinaryMatrix(case_rows.size(), J);
    for (std::size_t i = 0; i < case_rows.size(); ++i)
        for (std::size_t j = 0; j < J; ++j) d.cases(i, j) = case_rows[i][j];
    d.controls = BinaryMatrix(control_rows.size(), J);
    for (std::size_t i = 0; i < control_rows.size(); ++i)
        for (std::size_t j = 0; j < J; ++j) d.controls(i, j) = control_rows[i][j];
    d.validate();
    return d;
}

// ---- parameters as JSON ----

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& rows) {
    std::vector<std::vector<double>> data;
    for (const auto& row : rows) data.push_back(row.get<std::vector<double>>());
    return Matrix::from_rows(data);
}

inline json params_to_json(const ModelParams& p) {
    return json{{"n_dims", p.n_dims()},
                {"n_subclasses", p.n_subclasses()},
                {"n_classes", p.n_classes()},
                {"pi", p.pi},
                {"theta", matrix_to_json(p.theta)},
                {"psi", matrix_to_json(p.psi)},
                {"eta", p.eta},
                {"nu", p.nu},
                {"alpha0", p.alpha0},
                {"alpha1", p.alpha1}};
}

inline ModelParams params_from_json(const json& j) {
    ModelParams p;
    p.pi = j.at("pi").get<std::vector<double>>();
    p.theta = matrix_from_json(j.at("theta"));
    p.psi = matrix_from_json(j.at("psi"));
    p.eta = j.at("eta").get<std::vector<double>>();
    p.nu = j.at("nu").get<std::vector<double>>();
    p.alpha0 = j.value("alpha0", 1.0);
    p.alpha1 = j.value("alpha1", 1.0);
    if (j.contains("n_dims") && j.at("n_dims").get<std::size_t>() != p.n_dims())
        throw std::invalid_argument("params json: n_dims does not match theta shape");
    if (j.contains("n_subclasses") &&
        j.at("n_subclasses").get<std::size_t>() != p.n_subclasses())
        throw std::invalid_argument("params json: n_subclasses does not match theta shape");
    if (j.contains("n_classes") && j.at("n_classes").get<std::size_t>() != p.n_classes())
        throw std::invalid_argument("params json: n_classes does not match pi length");
    p.validate();
    return p;
}

inline json sampler_config_to_json(const SamplerConfig& c) {
    return json{{"k_star", c.truncation_K}, {"n_burn", c.n_burn},
                {"n_keep", c.n_keep},       {"thin", c.thin},
                {"n_chains", c.n_chains},   {"seed", c.seed},
                {"cut_feedback", c.cut_feedback},
                {"include_other_cause", c.include_other_cause}};
}

inline SamplerConfig sampler_config_from_json(const json& j) {
    SamplerConfig c;
    c.truncation_K = j.value("k_star", c.truncation_K);
    c.n_burn = j.value("n_burn", c.n_burn);
    c.n_keep = j.value("n_keep", c.n_keep);
    c.thin = j.value("thin", c.thin);
    c.n_chains = j.value("n_chains", c.n_chains);
    c.seed = j.value("seed", c.seed);
    c.cut_feedback = j.value("cut_feedback", c.cut_feedback);
    c.include_other_cause = j.value("include_other_cause", c.include_other_cause);
    return c;
}

// FNV-1a over the canonical dump (object keys are stored sorted).
inline std::string config_hash_hex(const json& config) {
    std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---- posterior draw tables ----
// One CSV per parameter block with chain and draw columns (1-based), plus a
// manifest recording shapes, seeds, and the configuration hash.

namespace detail {

template <typename WriteRow>
void write_draw_csv(const std::string& path, const PosteriorSamples& post,
                    const std::string& header, WriteRow&& write_row) {
    auto f = open_out(path);
    f << "chain,draw" << header << '\n';
    for (std::size_t c = 0; c < post.chains.size(); ++c)
        for (std::size_t t = 0; t < post.chains[c].size(); ++t) {
            f << (c + 1) << ',' << (t + 1);
            write_row(f, post.chains[c], t);
            f << '\n';
        }
}

inline void append_vector(std::ofstream& f, const std::vector<double>& v) {
    for (double x : v) f << ',' << fmt_double(x);
}

inline void append_matrix(std::ofstream& f, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) f << ',' << fmt_double(m(i, j));
}

inline void append_indices(std::ofstream& f, const std::vector<int>& v) {
    for (int x : v) f << ',' << (x + 1);
}

inline std::string vector_header(const std::string& stem, std::size_t n) {
    std::string h;
    for (std::size_t i = 1; i <= n; ++i) h += "," + stem + "_" + std::to_string(i);
    return h;
}

inline std::string matrix_header(const std::string& stem, std::size_t rows, std::size_t cols) {
    std::string h;
    for (std::size_t i = 1; i <= rows; ++i)
        for (std::size_t j = 1; j <= cols; ++j)
            h += "," + stem + "_" + std::to_string(i) + "_" + std::to_string(j);
    return h;
}

}  // namespace detail

inline void save_posterior(const std::string& dir, const PosteriorSamples& post,
                           const json& full_config = json::object()) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::size_t J = post.n_dims, K = post.n_subclasses, L = post.n_classes;

    json manifest{{"n_dims", J},
                  {"n_classes", L},
                  {"n_subclasses", K},
                  {"n_chains", post.chains.size()},
                  {"draws_per_chain", post.draws_per_chain()},
                  {"n_case_subjects", post.n_case_subjects},
                  {"n_control_subjects", post.n_control_subjects},
                  {"pathogen_names", post.pathogen_names},
                  {"sampler", sampler_config_to_json(post.config)},
                  {"config", full_config},
                  {"config_hash", config_hash_hex(full_config.empty()
                                                      ? sampler_config_to_json(post.config)
                                                      : full_config)}};
    detail::open_out(dir + "/manifest.json") << manifest.dump(2) << '\n';

    auto path = [&](const char* name) { return dir + "/" + name; };
    detail::write_draw_csv(path("pi.csv"), post, detail::vector_header("pi", L),
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               detail::append_vector(f, c.pi[t]);
                           });
    detail::write_draw_csv(path("eta.csv"), post, detail::vector_header("eta", K),
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               detail::append_vector(f, c.eta[t]);
                           });
    detail::write_draw_csv(path("nu.csv"), post, detail::vector_header("nu", K),
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               detail::append_vector(f, c.nu[t]);
                           });
    detail::write_draw_csv(path("theta.csv"), post, detail::matrix_header("theta", J, K),
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               detail::append_matrix(f, c.theta[t]);
                           });
    detail::write_draw_csv(path("psi.csv"), post, detail::matrix_header("psi", J, K),
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               detail::append_matrix(f, c.psi[t]);
                           });
    detail::write_draw_csv(path("alpha.csv"), post, ",alpha0,alpha1",
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               f << ',' << detail::fmt_double(c.alpha0[t]) << ','
                                 << detail::fmt_double(c.alpha1[t]);
                           });
    detail::write_draw_csv(path("case_class.csv"), post,
                           detail::vector_header("i", post.n_case_subjects),
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               detail::append_indices(f, c.case_class[t]);
                           });
    detail::write_draw_csv(path("case_subclass.csv"), post,
                           detail::vector_header("z", post.n_case_subjects),
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               detail::append_indices(f, c.case_subclass[t]);
                           });
    detail::write_draw_csv(path("control_subclass.csv"), post,
                           detail::vector_header("z", post.n_control_subjects),
                           [](std::ofstream& f, const ChainDraws& c, std::size_t t) {
                               detail::append_indices(f, c.control_subclass[t]);
                           });
}

namespace detail {

// Reads a draw CSV back; cells_per_row excludes the chain/draw columns.
inline std::vector<std::vector<std::vector<double>>> read_draw_csv(const std::string& path,
                                                                   std::size_t n_chains,
                                                                   std::size_t n_draws,
                                                                   std::size_t cells_per_row) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty draw table: " + path);
    std::vector<std::vector<std::vector<double>>> out(
        n_chains, std::vector<std::vector<double>>(n_draws));
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != cells_per_row + 2)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unexpected field count");
        std::size_t chain = std::stoul(fields[0]) - 1;
        std::size_t draw = std::stoul(fields[1]) - 1;
        if (chain >= n_chains || draw >= n_draws)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": chain/draw out of range");
        std::vector<double> row(cells_per_row);
        for (std::size_t i = 0; i < cells_per_row; ++i) row[i] = std::stod(fields[i + 2]);
        out[chain][draw] = std::move(row);
    }
    for (std::size_t c = 0; c < n_chains; ++c)
        for (std::size_t t = 0; t < n_draws; ++t)
            if (out[c][t].size() != cells_per_row)
                throw std::runtime_error(path + ": missing draw " + std::to_string(t + 1) +
                                         " in chain " + std::to_string(c + 1));
    return out;
}

}  // namespace detail

inline PosteriorSamples load_posterior(const std::string& dir) {
    json manifest = json::parse(detail::open_in(dir + "/manifest.json"));
    PosteriorSamples post;
    post.n_dims = manifest.at("n_dims").get<std::size_t>();
    post.n_classes = manifest.at("n_classes").get<std::size_t>();
    post.n_subclasses = manifest.at("n_subclasses").get<std::size_t>();
    post.n_case_subjects = manifest.at("n_case_subjects").get<std::size_t>();
    post.n_control_subjects = manifest.at("n_control_subjects").get<std::size_t>();
    post.pathogen_names = manifest.at("pathogen_names").get<std::vector<std::string>>();
    post.config = sampler_config_from_json(manifest.at("sampler"));
    const std::size_t n_chains = manifest.at("n_chains").get<std::size_t>();
    const std::size_t n_draws = manifest.at("draws_per_chain").get<std::size_t>();
    const std::size_t J = post.n_dims, K = post.n_subclasses, L = post.n_classes;

    post.chains.resize(n_chains);
    auto path = [&](const char* name) { return dir + "/" + name; };
    auto pi = detail::read_draw_csv(path("pi.csv"), n_chains, n_draws, L);
    auto eta = detail::read_draw_csv(path("eta.csv"), n_chains, n_draws, K);
    auto nu = detail::read_draw_csv(path("nu.csv"), n_chains, n_draws, K);
    auto theta = detail::read_draw_csv(path("theta.csv"), n_chains, n_draws, J * K);
    auto psi = detail::read_draw_csv(path("psi.csv"), n_chains, n_draws, J * K);
    auto alpha = detail::read_draw_csv(path("alpha.csv"), n_chains, n_draws, 2);
    auto icls = detail::read_draw_csv(path("case_class.csv"), n_chains, n_draws,
                                      post.n_case_subjects);
    auto zcase = detail::read_draw_csv(path("case_subclass.csv"), n_chains, n_draws,
                                       post.n_case_subjects);
    auto zctrl = detail::read_draw_csv(path("control_subclass.csv"), n_chains, n_draws,
                                       post.n_control_subjects);
    for (std::size_t c = 0; c < n_chains; ++c) {
        ChainDraws& ch = post.chains[c];
        for (std::size_t t = 0; t < n_draws; ++t) {
            ch.pi.push_back(pi[c][t]);
            ch.eta.push_back(eta[c][t]);
            ch.nu.push_back(nu[c][t]);
            Matrix th(J, K), ps(J, K);
            for (std::size_t j = 0; j < J; ++j)
                for (std::size_t k = 0; k < K; ++k) {
                    th(j, k) = theta[c][t][j * K + k];
                    ps(j, k) = psi[c][t][j * K + k];
                }
            ch.theta.push_back(std::move(th));
            ch.psi.push_back(std::move(ps));
            ch.alpha0.push_back(alpha[c][t][0]);
            ch.alpha1.push_back(alpha[c][t][1]);
            auto to_int = [](const std::vector<double>& v) {
                std::vector<int> out(v.size());
                for (std::size_t i = 0; i < v.size(); ++i)
                    out[i] = static_cast<int>(v[i]) - 1;
                return out;
            };
            ch.case_class.push_back(to_int(icls[c][t]));
            ch.case_subclass.push_back(to_int(zcase[c][t]));
            ch.control_subclass.push_back(to_int(zctrl[c][t]));
        }
    }
    return post;
}

// ---- report writers ----

inline json diagnostics_to_json(const DiagnosticsReport& rep) {
    json funcs = json::array();
    for (const auto& f : rep.functionals) {
        json q{{"q2.5", f.quantiles[0]},
               {"q25", f.quantiles[1]},
               {"q50", f.quantiles[2]},
               {"q75", f.quantiles[3]},
               {"q97.5", f.quantiles[4]}};
        json entry{{"name", f.name}, {"ess", f.ess}, {"quantiles", q}};
        if (std::isnan(f.psrf))
            entry["psrf"] = nullptr;
        else
            entry["psrf"] = f.psrf;
        entry["autocorr"] = f.autocorr_mean;
        funcs.push_back(std::move(entry));
    }
    return json{{"n_chains", rep.n_chains},
                {"draws_per_chain", rep.draws_per_chain},
                {"functionals", funcs}};
}

inline void write_trace_csvs(const std::string& dir, const PosteriorSamples& post) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (auto& [name, chains] : monitored_functionals(post)) {
        std::string fname = name;
        for (char& c : fname)
            if (c == '[' || c == ']') c = '_';
        auto f = detail::open_out(dir + "/trace_" + fname + ".csv");
        f << "chain,draw,value\n";
        for (std::size_t c = 0; c < chains.size(); ++c)
            for (std::size_t t = 0; t < chains[c].size(); ++t)
                f << (c + 1) << ',' << (t + 1) << ',' << detail::fmt_double(chains[c][t])
                  << '\n';
    }
}

inline void write_lor_csv(const std::string& path, const LorTable& t,
                          const std::vector<std::string>& names) {
    auto f = detail::open_out(path);
    f << "dim_a,dim_b,name_a,name_b,defined,log_or,se,z\n";
    for (std::size_t j = 0; j + 1 < t.n_dims; ++j)
        for (std::size_t l = j + 1; l < t.n_dims; ++l) {
            const LorCell& c = t.at(j, l);
            f << (j + 1) << ',' << (l + 1) << ',' << names[j] << ',' << names[l] << ','
              << (c.defined ? 1 : 0) << ',';
            if (c.defined)
                f << detail::fmt_double(c.log_or) << ',' << detail::fmt_double(c.se) << ','
                  << detail::fmt_double(c.z);
            else
                f << ",,";
            f << '\n';
        }
}

inline void write_slord_csv(const std::string& path, const SlordReport& rep,
                            const std::vector<std::string>& names) {
    auto f = detail::open_out(path);
    f << "population,dim_a,dim_b,name_a,name_b,defined,observed_log_or,predictive_mean,"
         "predictive_sd,slord,flagged\n";
    auto dump = [&](const char* pop, const std::vector<SlordCell>& cells) {
        for (std::size_t j = 0; j + 1 < rep.n_dims; ++j)
            for (std::size_t l = j + 1; l < rep.n_dims; ++l) {
                const SlordCell& c = cells[detail::pair_index(j, l, rep.n_dims)];
                f << pop << ',' << (j + 1) << ',' << (l + 1) << ',' << names[j] << ','
                  << names[l] << ',' << (c.defined ? 1 : 0) << ',';
                if (c.defined)
                    f << detail::fmt_double(c.observed) << ','
                      << detail::fmt_double(c.predictive_mean) << ','
                      << detail::fmt_double(c.predictive_sd) << ','
                      << detail::fmt_double(c.value) << ',' << (c.flagged ? 1 : 0);
                else
                    f << ",,,,0";
                f << '\n';
            }
    };
    dump("case", rep.case_cells);
    dump("control", rep.control_cells);
}

inline json ppd_to_json(const PpdReport& rep) {
    auto dump = [](const std::vector<PpdPatternSummary>& v) {
        json out = json::array();
        for (const auto& s : v) {
            out.push_back(json{{"pattern", detail::pattern_string(s.pattern)},
                               {"observed_freq", s.observed_freq},
                               {"predictive_mean", s.predictive_mean},
                               {"q2.5", s.predictive_quantiles[0]},
                               {"q25", s.predictive_quantiles[1]},
                               {"q50", s.predictive_quantiles[2]},
                               {"q75", s.predictive_quantiles[3]},
                               {"q97.5", s.predictive_quantiles[4]}});
        }
        return out;
    };
    return json{{"n_draws", rep.n_draws},
                {"case_patterns", dump(rep.case_patterns)},
                {"control_patterns", dump(rep.control_patterns)}};
}

inline json concentration_to_json(const ConcentrationReport& rep) {
    return json{{"epsilon", rep.epsilon},
                {"prob_single_subclass_cases", rep.prob_eta},
                {"prob_single_subclass_controls", rep.prob_nu},
                {"max_eta_q2.5", rep.max_eta_quantiles[0]},
                {"max_eta_q50", rep.max_eta_quantiles[2]},
                {"max_eta_q97.5", rep.max_eta_quantiles[4]},
                {"max_nu_q2.5", rep.max_nu_quantiles[0]},
                {"max_nu_q50", rep.max_nu_quantiles[2]},
                {"max_nu_q97.5", rep.max_nu_quantiles[4]}};
}

inline json etiology_to_json(std::span<const std::uint8_t> pattern,
                             std::span<const double> probs,
                             const std::vector<std::string>& class_names) {
    json classes = json::array();
    for (std::size_t l = 0; l < probs.size(); ++l)
        classes.push_back(json{{"class", class_names[l]}, {"probability", probs[l]}});
    return json{{"pattern", detail::pattern_string(pattern)}, {"etiology", classes}};
}

inline void write_prab_csv(const std::string& path, const std::vector<PrabPoint>& points,
                           const std::vector<std::string>& class_names) {
    auto f = detail::open_out(path);
    f << "eta_o,class,pi_star,prab_percent,variance_ratio\n";
    for (const auto& p : points)
        for (std::size_t l = 0; l < p.result.prab.size(); ++l)
            f << detail::fmt_double(p.eta_o) << ',' << class_names[l] << ','
              << detail::fmt_double(p.result.pi_star[l]) << ','
              << detail::fmt_double(p.result.prab[l]) << ','
              << detail::fmt_double(p.result.variance_ratio[l]) << '\n';
}

inline json replication_to_json(const ReplicationReport& rep,
                                const std::vector<std::string>& class_names) {
    json models = json::array();
    for (const auto& m : rep.models) {
        json per_class = json::array();
        for (std::size_t l = 0; l < m.bias.size(); ++l)
            per_class.push_back(json{{"class", class_names[l]},
                                     {"bias", m.bias[l]},
                                     {"bias_se", m.bias_se[l]},
                                     {"mse", m.mse[l]},
                                     {"mse_se", m.mse_se[l]},
                                     {"coverage", m.coverage[l]},
                                     {"coverage_se", m.coverage_se[l]}});
        models.push_back(json{{"label", m.label},
                              {"n_ok", m.n_ok},
                              {"n_failed", m.n_failed},
                              {"per_class", per_class}});
    }
    json out{{"scenario", rep.scenario.name},
             {"eta_o", rep.scenario.eta_o},
             {"n_cases", rep.n_cases},
             {"n_controls", rep.n_controls},
             {"n_replicates", rep.n_replicates},
             {"pi_true", rep.scenario.pi_true},
             {"models", models}};
    if (!rep.mse_ratio.empty()) out["mse_ratio_second_vs_first"] = rep.mse_ratio;
    return out;
}

inline void write_replication_csv(const std::string& path, const ReplicationReport& rep,
                                  const std::vector<std::string>& class_names) {
    auto f = detail::open_out(path);
    f << "scenario,eta_o,model,class,pi_true,bias,bias_se,mse,mse_se,coverage,coverage_se,"
         "n_ok,n_failed\n";
    for (const auto& m : rep.models)
        for (std::size_t l = 0; l < m.bias.size(); ++l)
            f << rep.scenario.name << ',' << detail::fmt_double(rep.scenario.eta_o) << ','
              << m.label << ',' << class_names[l] << ','
              << detail::fmt_double(rep.scenario.pi_true[l]) << ','
              << detail::fmt_double(m.bias[l]) << ',' << detail::fmt_double(m.bias_se[l])
              << ',' << detail::fmt_double(m.mse[l]) << ','
              << detail::fmt_double(m.mse_se[l]) << ',' << detail::fmt_double(m.coverage[l])
              << ',' << detail::fmt_double(m.coverage_se[l]) << ',' << m.n_ok << ','
              << m.n_failed << '\n';
}

}  // namespace nplcm
