#pragma once

// Means of quasi-periodic and almost-periodic functions, and the constant
// coefficients of the homogenized 1D limit problem.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "thinhom/geometry.hpp"

namespace thinhom {

/// Which fast scale a frequency lives on: x / eps^alpha or x / eps^beta.
enum class ScaleGroup { alpha, beta };

struct QPTerm {
    double coefficient = 0.0;
    double frequency = 0.0;  // > 0 after normalisation
    double phase = 0.0;
    ScaleGroup group = ScaleGroup::alpha;
};

/// Trigonometric polynomial c + sum_k c_k sin(w_k s + phi_k).
///
/// Construction normalises the term list: zero frequencies fold into the
/// constant, negative frequencies are flipped, and terms with equal
/// frequency in the same group are merged (phasor sum). Terms whose merged
/// coefficient vanishes are dropped.
class QPFunction {
public:
    QPFunction() = default;
    QPFunction(double constant, std::vector<QPTerm> terms);

    static QPFunction from_profile(const BoundaryProfile& p, ScaleGroup group = ScaleGroup::alpha);

    [[nodiscard]] double operator()(double s) const noexcept;
    [[nodiscard]] double constant_term() const noexcept { return constant_; }
    [[nodiscard]] std::span<const QPTerm> terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_constant() const noexcept { return terms_.empty(); }

    /// f + g (term lists concatenated and re-normalised).
    [[nodiscard]] QPFunction operator+(const QPFunction& other) const;
    [[nodiscard]] QPFunction scaled(double factor) const;

private:
    double constant_ = 0.0;
    std::vector<QPTerm> terms_;
};

/// Period cell I(L) = (0, L_1) x ... x (0, L_d).
struct TorusCell {
    std::vector<double> periods;
    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(periods.size()); }
};

using TorusIntegrand = std::function<double(std::span<const double>)>;
using RealFunction = std::function<double(double)>;

/// Mean of a trigonometric polynomial: its constant term.
[[nodiscard]] double mean_trig(const QPFunction& f);

struct LongIntervalMean {
    double estimate = 0.0;        // value at the largest T
    std::vector<double> tail;     // value at every T of the grid
};

/// (1/2T) int_{-T}^{T} f by composite 8-point Gauss-Legendre, one panel per
/// shortest_period (so >= 8 nodes per period). T_grid must be positive and
/// increasing. Throws NumericError on a non-finite sample.
[[nodiscard]] LongIntervalMean mean_long_interval(const RealFunction& f,
                                                  std::span<const double> T_grid,
                                                  double shortest_period = 6.283185307179586);

/// Cell average (1/|I(L)|) int_{I(L)} F by the tensor trapezoid rule with
/// n_points per axis. dimension <= 4 and n_points >= 16; larger dimensions
/// throw UnsupportedError. Partial sums are combined pairwise over slabs of
/// the first axis, so the result does not depend on the thread count.
[[nodiscard]] double mean_torus(const TorusIntegrand& F, const TorusCell& cell, int n_points, int threads = 1);

enum class InverseMeanMethod {
    exact_constant,  // K_eps constant: P = 1/K
    torus,           // distinct scale exponents: cell integral over both blocks
    long_interval,   // equal scale exponents: Besicovitch mean of 1/(h + g)
};

[[nodiscard]] std::string to_string(InverseMeanMethod m);

struct HomogenizationOptions {
    int torus_points = 256;                     // per axis
    std::vector<double> T_grid = {1e2, 1e3, 1e4};
    /// Frequencies inside a block are rationally independent, so every
    /// component gets its own torus axis. When false a block must be periodic
    /// (at most one frequency) for the torus route.
    bool independent_frequencies = true;
};

/// Limit constants. f0(x) = muH f(x) and fhat = f0 / (K1 + K2) for x-only forcing.
struct HomogenizedCoefficients {
    double K1 = 0.0;    // mean of the lower base profile
    double K2 = 0.0;    // mean of the upper base profile
    double P = 0.0;     // mean of 1 / K
    double q = 0.0;     // 1 / (P (K1 + K2))
    double muH = 0.0;   // mean of the strip height base profile
    InverseMeanMethod method = InverseMeanMethod::exact_constant;
    std::vector<double> P_tail;  // long-interval convergence record, if used
    RealFunction f0;
    RealFunction fhat;
};

/// Mean of 1 / (h + g) on the product torus, one axis per distinct frequency
/// within each scale group (same-group terms of h and g are merged first).
/// Throws UnsupportedError when more than 4 axes would be needed.
[[nodiscard]] double inverse_mean_torus(const QPFunction& lower, const QPFunction& upper, int n_points,
                                        bool independent_frequencies = true);

/// Besicovitch mean of 1 / (h(s) + g(s)) on one common fast variable.
[[nodiscard]] LongIntervalMean inverse_mean_long_interval(const QPFunction& lower, const QPFunction& upper,
                                                          std::span<const double> T_grid);

/// forcing: the x-only profile f(x) (unscaled). Throws DomainError if the
/// thickness lower bound is not positive.
[[nodiscard]] HomogenizedCoefficients homogenized_coefficients(const ThinDomainSpec& spec, RealFunction forcing,
                                                               const HomogenizationOptions& options = {});

}  // namespace thinhom
