#pragma once

// Oscillating thin domains
//
//   R^eps = { (x, y) : x in I, -eps k1_eps(x) < y < eps k2_eps(x) }
//
// with a concentration strip of depth eps^{1+gamma} H_eps(x) below the top
// boundary. Profiles are finite trigonometric polynomials evaluated at the
// fast variable x / eps^scale.

#include <span>
#include <vector>

namespace thinhom {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// One term amplitude * sin(frequency * s + phase).
struct TrigComponent {
    double amplitude = 0.0;
    double frequency = 0.0;  // rad per unit of the fast variable
    double phase = 0.0;
};

/// p(s) = constant + sum_k a_k sin(w_k s + phi_k).
class BoundaryProfile {
public:
    BoundaryProfile() = default;
    explicit BoundaryProfile(double constant, std::vector<TrigComponent> components = {});

    [[nodiscard]] double operator()(double s) const noexcept;
    [[nodiscard]] double derivative(double s) const noexcept;

    [[nodiscard]] double constant_term() const noexcept { return constant_; }
    [[nodiscard]] std::span<const TrigComponent> components() const noexcept { return components_; }
    [[nodiscard]] bool is_constant() const noexcept { return components_.empty(); }

    /// a_0 - sum |a_k|, a certified lower bound of p.
    [[nodiscard]] double lower_bound() const noexcept;
    [[nodiscard]] double upper_bound() const noexcept;
    /// sum |a_k w_k|, a certified bound of |p'|.
    [[nodiscard]] double derivative_bound() const noexcept;
    /// Largest |w_k|, zero for constants.
    [[nodiscard]] double max_frequency() const noexcept;

private:
    double constant_ = 0.0;
    std::vector<TrigComponent> components_;
};

/// k_eps(x) = base(x / eps^scale_exponent), scale_exponent in [0, 1).
class ScaledProfile {
public:
    ScaledProfile() = default;
    ScaledProfile(BoundaryProfile base, double scale_exponent);

    /// Throws DomainError for eps <= 0.
    [[nodiscard]] double value(double x, double eps) const;
    /// d/dx of value(), i.e. eps^{-scale} base'(x / eps^scale).
    [[nodiscard]] double derivative(double x, double eps) const;

    [[nodiscard]] const BoundaryProfile& base() const noexcept { return base_; }
    [[nodiscard]] double scale_exponent() const noexcept { return scale_exponent_; }

    /// Analytic sup |eps dk_eps/dx| = eps^{1-scale} sum|a_k w_k|.
    [[nodiscard]] double eta_bound(double eps) const;
    /// Shortest wavelength in x at this eps (infinity for constants).
    [[nodiscard]] double shortest_wavelength(double eps) const;

private:
    BoundaryProfile base_;
    double scale_exponent_ = 0.0;
};

struct Interval {
    double a = 0.0;
    double b = 1.0;
    [[nodiscard]] double length() const noexcept { return b - a; }
};

struct StripSpec {
    double gamma = 1.0;      // concentration exponent, > 0
    ScaledProfile height;    // H_eps

    [[nodiscard]] double lower_height_bound() const noexcept { return height.base().lower_bound(); }
    [[nodiscard]] double upper_height_bound() const noexcept { return height.base().upper_bound(); }
};

enum class Direction { forward, inverse };

/// Interval, lower and upper boundary profiles and the strip.
///
/// The constructor checks a < b, gamma > 0, scale exponents in [0, 1),
/// H >= 0 and a positive thickness bound K_0 > 0. Positivity of each
/// boundary profile separately is a hypothesis reported by eta_sup(), not a
/// construction requirement.
class ThinDomainSpec {
public:
    ThinDomainSpec(Interval interval, ScaledProfile lower, ScaledProfile upper, StripSpec strip);

    [[nodiscard]] const Interval& interval() const noexcept { return interval_; }
    [[nodiscard]] const ScaledProfile& lower() const noexcept { return lower_; }
    [[nodiscard]] const ScaledProfile& upper() const noexcept { return upper_; }
    [[nodiscard]] const StripSpec& strip() const noexcept { return strip_; }

    /// K_eps(x) = k1_eps(x) + k2_eps(x).
    [[nodiscard]] double thickness(double x, double eps) const;
    [[nodiscard]] double thickness_derivative(double x, double eps) const;

    /// Certified bounds K_0 <= K_eps <= K_1 independent of eps.
    [[nodiscard]] double thickness_lower_bound() const noexcept;
    [[nodiscard]] double thickness_upper_bound() const noexcept;

    [[nodiscard]] double bottom(double x, double eps) const;  // -eps k1
    [[nodiscard]] double top(double x, double eps) const;     //  eps k2
    /// eps^{1+gamma} H_eps(x).
    [[nodiscard]] double strip_depth(double x, double eps) const;
    [[nodiscard]] double strip_floor(double x, double eps) const;  // top - strip_depth

    /// True iff strip_depth < eps K_eps for every x (certified via bounds).
    [[nodiscard]] bool strip_contained(double eps) const;

    [[nodiscard]] bool contains(double x, double y, double eps) const;

private:
    Interval interval_;
    ScaledProfile lower_;
    ScaledProfile upper_;
    StripSpec strip_;
};

[[nodiscard]] double eval_profile(const ScaledProfile& p, double x, double eps);
[[nodiscard]] double eval_profile_derivative(const ScaledProfile& p, double x, double eps);
[[nodiscard]] double thickness(const ThinDomainSpec& spec, double x, double eps);
[[nodiscard]] double thickness_derivative(const ThinDomainSpec& spec, double x, double eps);

/// Strict at both faces: eps[k2 - eps^gamma H] < y < eps k2.
[[nodiscard]] bool in_strip(const ThinDomainSpec& spec, double x, double y, double eps);

/// Vertical shift between R_a^eps (flat bottom) and R^eps.
/// forward: (x, y) -> (x, y - eps k1_eps(x)); inverse adds it back.
[[nodiscard]] Point map_L(const ThinDomainSpec& spec, Point p, double eps, Direction dir);

/// Vertical stretch between Q = I x (0,1) and R_a^eps.
/// forward: (x, y) -> (x, y eps K_eps(x)); inverse divides.
[[nodiscard]] Point map_S(const ThinDomainSpec& spec, Point p, double eps, Direction dir);

struct HypothesisReport {
    double eta1 = 0.0;          // analytic bound of sup |eps k1'|
    double eta2 = 0.0;
    double eta = 0.0;           // eta1 + eta2
    double eta1_sampled = 0.0;  // max over sample points
    double eta2_sampled = 0.0;
    bool h1_ok = false;         // eta bound vanishes as eps -> 0 (scale < 1)
    bool h2_lower_ok = false;   // k1 >= 0
    bool h2_upper_ok = false;   // k2 > 0
    bool strip_ok = false;      // strip contained and H >= 0

    // Sampled weak-limit surrogates (averages over I at this eps).
    double mean_k1 = 0.0;
    double mean_k2 = 0.0;
    double mean_inverse_thickness = 0.0;

    [[nodiscard]] bool h2_ok() const noexcept { return h2_lower_ok && h2_upper_ok; }
};

/// Samples n_samples uniform points of I (n_samples >= 2).
[[nodiscard]] HypothesisReport eta_sup(const ThinDomainSpec& spec, double eps, int n_samples);

}  // namespace thinhom
