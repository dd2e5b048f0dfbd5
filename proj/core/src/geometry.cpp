#include "thinhom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "thinhom/error.hpp"

namespace thinhom {

namespace {

void require_positive_eps(double eps)
{
    if (!(eps > 0.0)) {
        throw DomainError("eps must be positive, got " + std::to_string(eps));
    }
}

// Sum of two profiles on the same fast variable, with terms of identical
// (frequency, phase) combined. Bounds of the sum are exact when oscillations
// cancel, e.g. for constant thickness.
BoundaryProfile joint_thickness_profile(const BoundaryProfile& lower, const BoundaryProfile& upper)
{
    std::vector<TrigComponent> reduced;
    auto add = [&](const TrigComponent& c) {
        auto it = std::find_if(reduced.begin(), reduced.end(), [&](const TrigComponent& r) {
            return r.frequency == c.frequency && r.phase == c.phase;
        });
        if (it == reduced.end()) {
            reduced.push_back(c);
        } else {
            it->amplitude += c.amplitude;
        }
    };
    for (const auto& c : lower.components()) add(c);
    for (const auto& c : upper.components()) add(c);
    std::erase_if(reduced, [](const TrigComponent& c) { return c.amplitude == 0.0; });
    return BoundaryProfile(lower.constant_term() + upper.constant_term(), std::move(reduced));
}

}  // namespace

BoundaryProfile::BoundaryProfile(double constant, std::vector<TrigComponent> components)
    : constant_(constant), components_(std::move(components))
{
    for (const auto& c : components_) {
        if (!std::isfinite(c.amplitude) || !std::isfinite(c.frequency) || !std::isfinite(c.phase)) {
            throw DomainError("profile component has a non-finite entry");
        }
    }
    if (!std::isfinite(constant_)) {
        throw DomainError("profile constant term is not finite");
    }
}

double BoundaryProfile::operator()(double s) const noexcept
{
    double v = constant_;
    for (const auto& c : components_) {
        v += c.amplitude * std::sin(c.frequency * s + c.phase);
    }
    return v;
}

double BoundaryProfile::derivative(double s) const noexcept
{
    double d = 0.0;
    for (const auto& c : components_) {
        d += c.amplitude * c.frequency * std::cos(c.frequency * s + c.phase);
    }
    return d;
}

double BoundaryProfile::lower_bound() const noexcept
{
    double v = constant_;
    for (const auto& c : components_) v -= std::abs(c.amplitude);
    return v;
}

double BoundaryProfile::upper_bound() const noexcept
{
    double v = constant_;
    for (const auto& c : components_) v += std::abs(c.amplitude);
    return v;
}

double BoundaryProfile::derivative_bound() const noexcept
{
    double v = 0.0;
    for (const auto& c : components_) v += std::abs(c.amplitude * c.frequency);
    return v;
}

double BoundaryProfile::max_frequency() const noexcept
{
    double w = 0.0;
    for (const auto& c : components_) {
        if (c.amplitude != 0.0) w = std::max(w, std::abs(c.frequency));
    }
    return w;
}

ScaledProfile::ScaledProfile(BoundaryProfile base, double scale_exponent)
    : base_(std::move(base)), scale_exponent_(scale_exponent)
{
    if (!(scale_exponent >= 0.0 && scale_exponent < 1.0)) {
        throw DomainError("scale exponent must lie in [0, 1), got " + std::to_string(scale_exponent));
    }
}

double ScaledProfile::value(double x, double eps) const
{
    require_positive_eps(eps);
    if (base_.is_constant()) return base_.constant_term();
    return base_(x / std::pow(eps, scale_exponent_));
}

double ScaledProfile::derivative(double x, double eps) const
{
    require_positive_eps(eps);
    if (base_.is_constant()) return 0.0;
    const double scale = std::pow(eps, scale_exponent_);
    return base_.derivative(x / scale) / scale;
}

double ScaledProfile::eta_bound(double eps) const
{
    require_positive_eps(eps);
    return std::pow(eps, 1.0 - scale_exponent_) * base_.derivative_bound();
}

double ScaledProfile::shortest_wavelength(double eps) const
{
    require_positive_eps(eps);
    const double w = base_.max_frequency();
    if (w == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * std::numbers::pi * std::pow(eps, scale_exponent_) / w;
}

ThinDomainSpec::ThinDomainSpec(Interval interval, ScaledProfile lower, ScaledProfile upper, StripSpec strip)
    : interval_(interval), lower_(std::move(lower)), upper_(std::move(upper)), strip_(std::move(strip))
{
    if (!(interval_.a < interval_.b)) {
        throw DomainError("interval must satisfy a < b");
    }
    if (!(strip_.gamma > 0.0)) {
        throw DomainError("concentration exponent gamma must be positive");
    }
    if (strip_.height.base().lower_bound() < 0.0) {
        throw DomainError("strip height profile must be non-negative");
    }
    if (!(thickness_lower_bound() > 0.0)) {
        throw DomainError("thickness lower bound K_0 must be positive");
    }
}

double ThinDomainSpec::thickness(double x, double eps) const
{
    return lower_.value(x, eps) + upper_.value(x, eps);
}

double ThinDomainSpec::thickness_derivative(double x, double eps) const
{
    return lower_.derivative(x, eps) + upper_.derivative(x, eps);
}

double ThinDomainSpec::thickness_lower_bound() const noexcept
{
    if (lower_.scale_exponent() == upper_.scale_exponent()) {
        return joint_thickness_profile(lower_.base(), upper_.base()).lower_bound();
    }
    return lower_.base().lower_bound() + upper_.base().lower_bound();
}

double ThinDomainSpec::thickness_upper_bound() const noexcept
{
    if (lower_.scale_exponent() == upper_.scale_exponent()) {
        return joint_thickness_profile(lower_.base(), upper_.base()).upper_bound();
    }
    return lower_.base().upper_bound() + upper_.base().upper_bound();
}

double ThinDomainSpec::bottom(double x, double eps) const { return -eps * lower_.value(x, eps); }

double ThinDomainSpec::top(double x, double eps) const { return eps * upper_.value(x, eps); }

double ThinDomainSpec::strip_depth(double x, double eps) const
{
    return std::pow(eps, 1.0 + strip_.gamma) * strip_.height.value(x, eps);
}

double ThinDomainSpec::strip_floor(double x, double eps) const
{
    return eps * (upper_.value(x, eps) - std::pow(eps, strip_.gamma) * strip_.height.value(x, eps));
}

bool ThinDomainSpec::strip_contained(double eps) const
{
    if (!(eps > 0.0)) return false;
    return std::pow(eps, strip_.gamma) * strip_.upper_height_bound() < thickness_lower_bound();
}

bool ThinDomainSpec::contains(double x, double y, double eps) const
{
    if (x < interval_.a || x > interval_.b) return false;
    return bottom(x, eps) < y && y < top(x, eps);
}

double eval_profile(const ScaledProfile& p, double x, double eps) { return p.value(x, eps); }

double eval_profile_derivative(const ScaledProfile& p, double x, double eps) { return p.derivative(x, eps); }

double thickness(const ThinDomainSpec& spec, double x, double eps) { return spec.thickness(x, eps); }

double thickness_derivative(const ThinDomainSpec& spec, double x, double eps)
{
    return spec.thickness_derivative(x, eps);
}

bool in_strip(const ThinDomainSpec& spec, double x, double y, double eps)
{
    require_positive_eps(eps);
    return spec.strip_floor(x, eps) < y && y < spec.top(x, eps);
}

Point map_L(const ThinDomainSpec& spec, Point p, double eps, Direction dir)
{
    const double shift = eps * spec.lower().value(p.x, eps);
    return dir == Direction::forward ? Point{p.x, p.y - shift} : Point{p.x, p.y + shift};
}

Point map_S(const ThinDomainSpec& spec, Point p, double eps, Direction dir)
{
    require_positive_eps(eps);
    const double height = eps * spec.thickness(p.x, eps);
    return dir == Direction::forward ? Point{p.x, p.y * height} : Point{p.x, p.y / height};
}

HypothesisReport eta_sup(const ThinDomainSpec& spec, double eps, int n_samples)
{
    require_positive_eps(eps);
    if (n_samples < 2) {
        throw DomainError("eta_sup needs at least two samples");
    }
    HypothesisReport r;
    r.eta1 = spec.lower().eta_bound(eps);
    r.eta2 = spec.upper().eta_bound(eps);
    r.eta = r.eta1 + r.eta2;

    const auto& I = spec.interval();
    const double h = I.length() / (n_samples - 1);
    double sum_k1 = 0.0;
    double sum_k2 = 0.0;
    double sum_inv = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double x = (i + 1 == n_samples) ? I.b : I.a + i * h;
        r.eta1_sampled = std::max(r.eta1_sampled, std::abs(eps * spec.lower().derivative(x, eps)));
        r.eta2_sampled = std::max(r.eta2_sampled, std::abs(eps * spec.upper().derivative(x, eps)));
        // trapezoid weights
        const double w = (i == 0 || i + 1 == n_samples) ? 0.5 : 1.0;
        const double k1 = spec.lower().value(x, eps);
        const double k2 = spec.upper().value(x, eps);
        sum_k1 += w * k1;
        sum_k2 += w * k2;
        sum_inv += w / (k1 + k2);
    }
    const double norm = 1.0 / (n_samples - 1);
    r.mean_k1 = sum_k1 * norm;
    r.mean_k2 = sum_k2 * norm;
    r.mean_inverse_thickness = sum_inv * norm;

    r.h1_ok = spec.lower().scale_exponent() < 1.0 && spec.upper().scale_exponent() < 1.0;
    r.h2_lower_ok = spec.lower().base().lower_bound() >= 0.0;
    r.h2_upper_ok = spec.upper().base().lower_bound() > 0.0;
    r.strip_ok = spec.strip_contained(eps) && spec.strip().height.base().lower_bound() >= 0.0;
    return r;
}

}  // namespace thinhom
