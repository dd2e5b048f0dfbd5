#pragma once

#include <functional>
#include <optional>

#include "thinhom/geometry.hpp"

namespace thinhom {

/// concentrated: eps^{-gamma} chi_strip f, the problem's native load.
/// bulk: f over the whole domain with gamma = 0 (manufactured solutions).
enum class LoadMode { concentrated, bulk };

/// Forcing f(x, y) in physical coordinates of R^eps.
struct Forcing {
    std::function<double(double, double)> f;
    LoadMode mode = LoadMode::concentrated;
    /// Set when f depends on x only; enables the analytic f0.
    std::optional<BoundaryProfile> x_profile;

    [[nodiscard]] double operator()(double x, double y) const { return f(x, y); }

    static Forcing x_only(BoundaryProfile profile, LoadMode mode = LoadMode::concentrated)
    {
        Forcing out;
        out.f = [profile](double x, double) { return profile(x); };
        out.mode = mode;
        out.x_profile = std::move(profile);
        return out;
    }

    static Forcing constant(double value, LoadMode mode = LoadMode::concentrated)
    {
        return x_only(BoundaryProfile(value), mode);
    }
};

}  // namespace thinhom
