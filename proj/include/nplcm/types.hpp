#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nplcm/matrix.hpp"

namespace nplcm {

inline constexpr double kRateFloor = 1e-12;
inline constexpr double kRateCeil = 1.0 - 1e-12;
inline constexpr double kConcentrationFloor = 1e-100;
inline constexpr double kConcentrationCeil = 1e100;
inline constexpr double kSimplexTol = 1e-12;

inline double clamp_rate(double p) {
    if (p < kRateFloor) return kRateFloor;
    if (p > kRateCeil) return kRateCeil;
    return p;
}

inline bool is_simplex(const std::vector<double>& w, double tol = kSimplexTol) {
    double s = 0.0;
    for (double v : w) {
        if (v < 0.0 || !std::isfinite(v)) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= tol;
}

// Case-control measurement data. Rows are subjects, columns are the J
// measured dimensions (pathogens).
struct Dataset {
    BinaryMatrix cases;
    BinaryMatrix controls;
    std::vector<std::string> pathogen_names;
    bool include_other_cause = false;

    std::size_t n_cases() const { return cases.rows(); }
    std::size_t n_controls() const { return controls.rows(); }
    std::size_t n_dims() const { return cases.cols(); }

    void validate() const {
        if (cases.rows() < 1 || controls.rows() < 1)
            throw std::invalid_argument("Dataset: need at least one case and one control");
        if (cases.cols() < 2)
            throw std::invalid_argument("Dataset: need at least two measurement dimensions");
        if (cases.cols() != controls.cols())
            throw std::invalid_argument("Dataset: case and control column counts differ");
        if (!pathogen_names.empty() && pathogen_names.size() != cases.cols())
            throw std::invalid_argument("Dataset: pathogen name count does not match columns");
        for (std::size_t i = 0; i < cases.rows(); ++i)
            for (std::size_t j = 0; j < cases.cols(); ++j)
                if (cases(i, j) > 1)
                    throw std::invalid_argument("Dataset: case entries must be 0/1");
        for (std::size_t i = 0; i < controls.rows(); ++i)
            for (std::size_t j = 0; j < controls.cols(); ++j)
                if (controls(i, j) > 1)
                    throw std::invalid_argument("Dataset: control entries must be 0/1");
    }
};

// One full parameter state of the model. theta/psi are J x K: row j holds
// the per-subclass rates for dimension j. pi has length J, or J+1 when the
// trailing "none of the J causes" class is in play.
struct ModelParams {
    std::vector<double> pi;
    Matrix theta;
    Matrix psi;
    std::vector<double> eta;
    std::vector<double> nu;
    double alpha0 = 1.0;
    double alpha1 = 1.0;

    std::size_t n_dims() const { return theta.rows(); }
    std::size_t n_subclasses() const { return theta.cols(); }
    std::size_t n_classes() const { return pi.size(); }
    bool has_other_cause() const { return pi.size() == n_dims() + 1; }

    // Pushes boundary rates into (0,1); returns how many entries moved.
    std::size_t clamp_rates() {
        std::size_t n = 0;
        auto fix = [&n](Matrix& m) {
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j) {
                    double c = clamp_rate(m(i, j));
                    if (c != m(i, j)) {
                        m(i, j) = c;
                        ++n;
                    }
                }
        };
        fix(theta);
        fix(psi);
        return n;
    }

    void validate() const {
        const std::size_t J = n_dims();
        const std::size_t K = n_subclasses();
        if (J < 1 || K < 1)
            throw std::invalid_argument("ModelParams: theta must be J x K with J,K >= 1");
        if (psi.rows() != J || psi.cols() != K)
            throw std::invalid_argument("ModelParams: psi shape does not match theta");
        if (pi.size() != J && pi.size() != J + 1)
            throw std::invalid_argument("ModelParams: pi must have length J or J+1");
        if (eta.size() != K || nu.size() != K)
            throw std::invalid_argument("ModelParams: eta/nu must have length K");
        if (!is_simplex(pi) || !is_simplex(eta) || !is_simplex(nu))
            throw std::invalid_argument("ModelParams: pi/eta/nu must be probability simplexes");
        if (!(alpha0 > 0.0) || !(alpha1 > 0.0))
            throw std::invalid_argument("ModelParams: alpha0/alpha1 must be positive");
        auto in_open_unit = [](const Matrix& m) {
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j)
                    if (!(m(i, j) > 0.0) || !(m(i, j) < 1.0)) return false;
            return true;
        };
        if (!in_open_unit(theta) || !in_open_unit(psi))
            throw std::invalid_argument("ModelParams: theta/psi must lie strictly in (0,1)");
    }
};

// Latent indicators. Class and subclass indices are 0-based internally;
// file formats write them 1-based.
struct LatentState {
    std::vector<int> case_class;
    std::vector<int> case_subclass;
    std::vector<int> control_subclass;
};

// Conjugate prior settings. Beta hyperparameters are stored J x K like the
// rates they govern.
struct HyperPriors {
    std::vector<double> dirichlet_a;
    Matrix tpr_c1, tpr_c2;
    Matrix fpr_b1, fpr_b2;
    double gamma_shape = 0.25;
    double gamma_rate = 0.25;

    static HyperPriors defaults(std::size_t n_dims, std::size_t n_subclasses,
                                std::size_t n_classes) {
        HyperPriors h;
        h.dirichlet_a.assign(n_classes, 1.0);
        h.tpr_c1 = Matrix(n_dims, n_subclasses, 1.0);
        h.tpr_c2 = Matrix(n_dims, n_subclasses, 1.0);
        h.fpr_b1 = Matrix(n_dims, n_subclasses, 1.0);
        h.fpr_b2 = Matrix(n_dims, n_subclasses, 1.0);
        return h;
    }

    // Replaces the TPR prior for dimension j with (c1, c2) in every subclass.
    void set_tpr_prior(std::size_t j, double c1, double c2) {
        for (std::size_t k = 0; k < tpr_c1.cols(); ++k) {
            tpr_c1(j, k) = c1;
            tpr_c2(j, k) = c2;
        }
    }

    void validate() const {
        auto pos = [](const Matrix& m) {
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j)
                    if (!(m(i, j) > 0.0)) return false;
            return true;
        };
        for (double a : dirichlet_a)
            if (!(a > 0.0)) throw std::invalid_argument("HyperPriors: dirichlet_a must be positive");
        if (!pos(tpr_c1) || !pos(tpr_c2) || !pos(fpr_b1) || !pos(fpr_b2))
            throw std::invalid_argument("HyperPriors: Beta hyperparameters must be positive");
        if (!(gamma_shape > 0.0) || !(gamma_rate > 0.0))
            throw std::invalid_argument("HyperPriors: Gamma hyperparameters must be positive");
    }
};

enum class Population { kCase, kControl };

}  // namespace nplcm
