#pragma once

// P1 finite elements on an interval with natural (Neumann) boundary
// conditions: the reduced oscillating-coefficient problem and the
// homogenized limit problem.

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "thinhom/forcing.hpp"
#include "thinhom/geometry.hpp"

namespace thinhom {

class Grid1D {
public:
    /// Nodes must be strictly increasing with at least two entries.
    explicit Grid1D(std::vector<double> nodes);
    static std::shared_ptr<const Grid1D> uniform(Interval interval, int n_nodes);

    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] double a() const noexcept { return nodes_.front(); }
    [[nodiscard]] double b() const noexcept { return nodes_.back(); }
    [[nodiscard]] double max_spacing() const noexcept;
    /// Element index e with nodes[e] <= x <= nodes[e+1]; x is clamped to [a, b].
    [[nodiscard]] std::size_t element_of(double x) const noexcept;

private:
    std::vector<double> nodes_;
};

struct Field1D {
    std::shared_ptr<const Grid1D> grid;
    std::vector<double> values;

    Field1D() = default;
    Field1D(std::shared_ptr<const Grid1D> g, std::vector<double> v);

    /// P1 interpolation, constant extrapolation outside [a, b].
    [[nodiscard]] double operator()(double x) const noexcept;
    /// Slope on the element containing x.
    [[nodiscard]] double derivative(double x) const noexcept;
};

using Function1D = std::function<double(double)>;

/// int c u' phi' + int r u phi = int r g phi, all by 2-point Gauss per element.
struct Problem1D {
    Function1D stiffness;    // c(x) > 0
    Function1D mass_weight;  // r(x)
    Function1D load;         // g(x)
};

struct Solution1D {
    Field1D field;
    double energy = 0.0;  // a(u, u)
    double work = 0.0;    // l(u)
};

/// Symmetric tridiagonal system solved by direct elimination.
/// Throws DomainError on a non-positive stiffness sample.
[[nodiscard]] Solution1D solve_1d(const Problem1D& problem, std::shared_ptr<const Grid1D> grid);

/// fhat_eps(x) = (1 / (eps K_eps)) int_strip f(x, y) dy by n_quad_y-point Gauss.
[[nodiscard]] Field1D compute_fhat(const ThinDomainSpec& spec, const Forcing& f, double eps,
                                   std::shared_ptr<const Grid1D> grid, int n_quad_y);

/// eps^{-gamma} fhat_eps(x) evaluated without forming eps^{-gamma} separately:
/// (H_eps / K_eps) int_0^1 f(x, eps k2 - s eps^{1+gamma} H_eps) ds.
[[nodiscard]] double scaled_fhat_at(const ThinDomainSpec& spec, const Forcing& f, double eps, double x,
                                    int n_quad_y);

/// -(1/K)(K w')' + w = eps^{-gamma} fhat_eps with Neumann ends. In bulk load
/// mode the right-hand side is the vertical average of f instead.
[[nodiscard]] Problem1D reduced_problem(const ThinDomainSpec& spec, const Forcing& f, double eps, int n_quad_y = 8);

/// -q w'' + w = fhat.
[[nodiscard]] Problem1D limit_problem(double q, Function1D fhat);

enum class Norm1D { L2, H1 };

/// Exact for two P1 fields (integration over the merged node set).
[[nodiscard]] double error_1d(const Field1D& u, const Field1D& v, Norm1D kind);
/// Against a closed form by 5-point Gauss per element; H1 needs dv.
[[nodiscard]] double error_1d(const Field1D& u, const Function1D& v, Norm1D kind, const Function1D& dv = {});

/// || c_u u' - c_v v' ||_{L2(I)} on the merged node set, 5-point Gauss.
[[nodiscard]] double flux_gap_l2(const Field1D& u, const Function1D& c_u, const Field1D& v, const Function1D& c_v);

/// CSV "x,value".
void write_field1d_csv(std::ostream& out, const Field1D& field);

}  // namespace thinhom
