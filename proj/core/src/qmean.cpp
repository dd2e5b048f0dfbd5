#include "thinhom/qmean.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <thread>

#include "thinhom/error.hpp"
#include "thinhom/quadrature.hpp"

namespace thinhom {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Pairwise summation keeps the result independent of how partial sums were
// produced and bounds rounding growth by O(log n).
double pairwise_sum(std::span<const double> v)
{
    if (v.empty()) return 0.0;
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace

QPFunction::QPFunction(double constant, std::vector<QPTerm> terms) : constant_(constant)
{
    for (auto t : terms) {
        if (!std::isfinite(t.coefficient) || !std::isfinite(t.frequency) || !std::isfinite(t.phase)) {
            throw DomainError("quasi-periodic term has a non-finite entry");
        }
        if (t.frequency == 0.0) {
            constant_ += t.coefficient * std::sin(t.phase);
            continue;
        }
        if (t.frequency < 0.0) {
            // a sin(-w s + p) = -a sin(w s - p)
            t = QPTerm{-t.coefficient, -t.frequency, -t.phase, t.group};
        }
        auto it = std::find_if(terms_.begin(), terms_.end(), [&](const QPTerm& r) {
            return r.frequency == t.frequency && r.group == t.group;
        });
        if (it == terms_.end()) {
            terms_.push_back(t);
            continue;
        }
        const std::complex<double> sum = std::polar(it->coefficient, it->phase) +
                                         std::polar(t.coefficient, t.phase);
        if (it->phase == t.phase) {
            it->coefficient += t.coefficient;
        } else {
            it->coefficient = std::abs(sum);
            it->phase = std::arg(sum);
        }
    }
    std::erase_if(terms_, [](const QPTerm& t) { return t.coefficient == 0.0; });
}

QPFunction QPFunction::from_profile(const BoundaryProfile& p, ScaleGroup group)
{
    std::vector<QPTerm> terms;
    for (const auto& c : p.components()) {
        terms.push_back({c.amplitude, c.frequency, c.phase, group});
    }
    return QPFunction(p.constant_term(), std::move(terms));
}

double QPFunction::operator()(double s) const noexcept
{
    double v = constant_;
    for (const auto& t : terms_) v += t.coefficient * std::sin(t.frequency * s + t.phase);
    return v;
}

QPFunction QPFunction::operator+(const QPFunction& other) const
{
    std::vector<QPTerm> all(terms_.begin(), terms_.end());
    all.insert(all.end(), other.terms_.begin(), other.terms_.end());
    return QPFunction(constant_ + other.constant_, std::move(all));
}

QPFunction QPFunction::scaled(double factor) const
{
    std::vector<QPTerm> all(terms_.begin(), terms_.end());
    for (auto& t : all) t.coefficient *= factor;
    return QPFunction(constant_ * factor, std::move(all));
}

double mean_trig(const QPFunction& f) { return f.constant_term(); }

LongIntervalMean mean_long_interval(const RealFunction& f, std::span<const double> T_grid, double shortest_period)
{
    if (T_grid.empty()) {
        throw DomainError("T_grid must not be empty");
    }
    if (!(shortest_period > 0.0)) {
        throw DomainError("shortest_period must be positive");
    }
    for (std::size_t k = 0; k < T_grid.size(); ++k) {
        if (!(T_grid[k] > 0.0) || (k > 0 && !(T_grid[k] > T_grid[k - 1]))) {
            throw DomainError("T_grid must be positive and strictly increasing");
        }
    }

    const GaussRule& rule = gauss_legendre(8);
    auto integrate = [&](double lo, double hi) {
        const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / shortest_period)));
        const double h = (hi - lo) / panels;
        std::vector<double> partial(panels);
        for (int p = 0; p < panels; ++p) {
            const double a = lo + p * h;
            double s = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double v = f(a + 0.5 * h * (rule.nodes[q] + 1.0));
                if (!std::isfinite(v)) {
                    throw NumericError("non-finite sample in long-interval mean");
                }
                s += rule.weights[q] * v;
            }
            partial[p] = 0.5 * h * s;
        }
        return pairwise_sum(partial);
    };

    LongIntervalMean out;
    double integral = 0.0;
    double previous = 0.0;
    for (double T : T_grid) {
        integral += integrate(previous, T) + integrate(-T, -previous);
        out.tail.push_back(integral / (2.0 * T));
        previous = T;
    }
    out.estimate = out.tail.back();
    return out;
}

double mean_torus(const TorusIntegrand& F, const TorusCell& cell, int n_points, int threads)
{
    const int d = cell.dimension();
    if (d < 1) {
        throw DomainError("torus cell needs at least one axis");
    }
    if (d > 4) {
        throw UnsupportedError("torus quadrature supports at most 4 axes; use mean_long_interval");
    }
    if (n_points < 16) {
        throw DomainError("torus quadrature needs at least 16 points per axis");
    }
    for (double L : cell.periods) {
        if (!(L > 0.0)) throw DomainError("torus periods must be positive");
    }

    // Slab i0 of the first axis sums all remaining axes.
    auto slab = [&](int i0) {
        std::vector<double> point(d);
        point[0] = cell.periods[0] * i0 / n_points;
        if (d == 1) return F(point);
        long long rows = 1;
        for (int k = 2; k < d; ++k) rows *= n_points;
        std::vector<double> row(n_points);
        std::vector<double> acc(static_cast<std::size_t>(rows));
        for (long long r = 0; r < rows; ++r) {
            long long rest = r;
            for (int k = 2; k < d; ++k) {
                point[k] = cell.periods[k] * static_cast<double>(rest % n_points) / n_points;
                rest /= n_points;
            }
            for (int j = 0; j < n_points; ++j) {
                point[1] = cell.periods[1] * j / n_points;
                row[j] = F(point);
            }
            acc[static_cast<std::size_t>(r)] = pairwise_sum(row);
        }
        return pairwise_sum(acc);
    };

    std::vector<double> slabs(n_points);
    const int workers = std::clamp(threads, 1, n_points);
    if (workers == 1) {
        for (int i = 0; i < n_points; ++i) slabs[i] = slab(i);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int i = w; i < n_points; i += workers) slabs[i] = slab(i);
            });
        }
    }
    double total = pairwise_sum(slabs);
    for (int k = 0; k < d; ++k) total /= n_points;
    return total;
}

std::string to_string(InverseMeanMethod m)
{
    switch (m) {
    case InverseMeanMethod::exact_constant: return "exact";
    case InverseMeanMethod::torus: return "torus";
    case InverseMeanMethod::long_interval: return "long_interval";
    }
    return "unknown";
}

namespace {

struct AxisTerm {
    int axis;
    double coefficient;
    double phase;
};

// Torus axes for one block: one axis per frequency when independent, else
// a single axis (the block must then be periodic).
void add_block_axes(const QPFunction& f, bool independent, std::vector<double>& periods,
                    std::vector<AxisTerm>& terms)
{
    if (f.is_constant()) return;
    if (independent || f.terms().size() == 1) {
        for (const auto& t : f.terms()) {
            terms.push_back({static_cast<int>(periods.size()), t.coefficient, t.phase});
            periods.push_back(two_pi / t.frequency);
        }
        return;
    }
    throw UnsupportedError("block with several dependent frequencies has no declared torus cell");
}

}  // namespace

double inverse_mean_torus(const QPFunction& lower, const QPFunction& upper, int n_points, bool independent_frequencies)
{
    // Terms of both profiles on the same scale share axes, so merge first.
    const QPFunction K = lower + upper;
    std::vector<double> periods;
    std::vector<AxisTerm> terms;
    for (ScaleGroup g : {ScaleGroup::alpha, ScaleGroup::beta}) {
        std::vector<QPTerm> block;
        for (const auto& t : K.terms()) {
            if (t.group == g) block.push_back(t);
        }
        add_block_axes(QPFunction(0.0, std::move(block)), independent_frequencies, periods, terms);
    }
    const double constant = K.constant_term();
    if (periods.empty()) {
        return 1.0 / constant;
    }
    // Integrate in angle variables theta_k in [0, 2 pi): K = c + sum a_k sin(theta_k + phi_k).
    TorusCell cell{std::vector<double>(periods.size(), two_pi)};
    auto integrand = [&](std::span<const double> theta) {
        double k = constant;
        for (const auto& t : terms) k += t.coefficient * std::sin(theta[t.axis] + t.phase);
        return 1.0 / k;
    };
    return mean_torus(integrand, cell, n_points);
}

LongIntervalMean inverse_mean_long_interval(const QPFunction& lower, const QPFunction& upper,
                                            std::span<const double> T_grid)
{
    const QPFunction K = lower + upper;
    if (K.is_constant()) {
        return {1.0 / K.constant_term(), std::vector<double>(T_grid.size(), 1.0 / K.constant_term())};
    }
    double w_max = 0.0;
    for (const auto& t : K.terms()) w_max = std::max(w_max, t.frequency);
    const double period = w_max > 0.0 ? two_pi / w_max : 1.0;
    return mean_long_interval([&](double s) { return 1.0 / K(s); }, T_grid, period);
}

HomogenizedCoefficients homogenized_coefficients(const ThinDomainSpec& spec, RealFunction forcing,
                                                 const HomogenizationOptions& options)
{
    if (!(spec.thickness_lower_bound() > 0.0)) {
        throw DomainError("thickness lower bound must be positive for the inverse mean");
    }
    const bool same_scale = spec.lower().scale_exponent() == spec.upper().scale_exponent();
    const QPFunction lower = QPFunction::from_profile(spec.lower().base(), ScaleGroup::alpha);
    const QPFunction upper =
        QPFunction::from_profile(spec.upper().base(), same_scale ? ScaleGroup::alpha : ScaleGroup::beta);

    HomogenizedCoefficients c;
    c.K1 = mean_trig(lower);
    c.K2 = mean_trig(upper);
    c.muH = spec.strip().height.base().constant_term();

    const QPFunction K = lower + upper;
    if (K.is_constant()) {
        c.method = InverseMeanMethod::exact_constant;
        c.P = 1.0 / K.constant_term();
    } else if (!same_scale) {
        c.method = InverseMeanMethod::torus;
        c.P = inverse_mean_torus(lower, upper, options.torus_points, options.independent_frequencies);
    } else {
        c.method = InverseMeanMethod::long_interval;
        const auto m = inverse_mean_long_interval(lower, upper, options.T_grid);
        c.P = m.estimate;
        c.P_tail = m.tail;
    }
    const double Ksum = c.K1 + c.K2;
    c.q = 1.0 / (c.P * Ksum);
    const double muH = c.muH;
    c.f0 = [forcing, muH](double x) { return muH * forcing(x); };
    c.fhat = [forcing, muH, Ksum](double x) { return muH * forcing(x) / Ksum; };
    return c;
}

}  // namespace thinhom
