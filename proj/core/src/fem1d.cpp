#include "thinhom/fem1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "thinhom/error.hpp"
#include "thinhom/quadrature.hpp"

namespace thinhom {

Grid1D::Grid1D(std::vector<double> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.size() < 2) {
        throw DomainError("Grid1D needs at least two nodes");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1])) {
            throw DomainError("Grid1D nodes must be strictly increasing");
        }
    }
}

std::shared_ptr<const Grid1D> Grid1D::uniform(Interval interval, int n_nodes)
{
    if (n_nodes < 2) {
        throw DomainError("uniform grid needs at least two nodes");
    }
    std::vector<double> nodes(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        nodes[i] = interval.a + interval.length() * i / (n_nodes - 1);
    }
    nodes.back() = interval.b;
    return std::make_shared<const Grid1D>(std::move(nodes));
}

double Grid1D::max_spacing() const noexcept
{
    double h = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) h = std::max(h, nodes_[i] - nodes_[i - 1]);
    return h;
}

std::size_t Grid1D::element_of(double x) const noexcept
{
    if (x <= nodes_.front()) return 0;
    if (x >= nodes_.back()) return nodes_.size() - 2;
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

Field1D::Field1D(std::shared_ptr<const Grid1D> g, std::vector<double> v) : grid(std::move(g)), values(std::move(v))
{
    if (!grid || values.size() != grid->size()) {
        throw ContractError("Field1D value count must match the grid");
    }
}

double Field1D::operator()(double x) const noexcept
{
    const auto nodes = grid->nodes();
    if (x <= nodes.front()) return values.front();
    if (x >= nodes.back()) return values.back();
    const std::size_t e = grid->element_of(x);
    const double s = (x - nodes[e]) / (nodes[e + 1] - nodes[e]);
    return (1.0 - s) * values[e] + s * values[e + 1];
}

double Field1D::derivative(double x) const noexcept
{
    const auto nodes = grid->nodes();
    const std::size_t e = grid->element_of(x);
    return (values[e + 1] - values[e]) / (nodes[e + 1] - nodes[e]);
}

Solution1D solve_1d(const Problem1D& problem, std::shared_ptr<const Grid1D> grid)
{
    const auto nodes = grid->nodes();
    const std::size_t n = nodes.size();
    const GaussRule& rule = gauss_legendre(2);

    std::vector<double> diag(n, 0.0);
    std::vector<double> off(n - 1, 0.0);  // (i, i+1)
    std::vector<double> rhs(n, 0.0);

    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double x0 = nodes[e];
        const double h = nodes[e + 1] - x0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = 0.5 * (rule.nodes[q] + 1.0);
            const double x = x0 + s * h;
            const double w = 0.5 * h * rule.weights[q];
            const double c = problem.stiffness(x);
            if (!(c > 0.0)) {
                throw DomainError("solve_1d: non-positive stiffness coefficient at x = " + std::to_string(x));
            }
            const double r = problem.mass_weight(x);
            const double g = problem.load(x);
            const double phi0 = 1.0 - s;
            const double phi1 = s;
            const double k = w * c / (h * h);
            diag[e] += k + w * r * phi0 * phi0;
            diag[e + 1] += k + w * r * phi1 * phi1;
            off[e] += -k + w * r * phi0 * phi1;
            rhs[e] += w * r * g * phi0;
            rhs[e + 1] += w * r * g * phi1;
        }
    }

    // Thomas algorithm; the matrix is SPD so no pivoting is needed.
    std::vector<double> cprime(n, 0.0);
    std::vector<double> dprime(n, 0.0);
    cprime[0] = n > 1 ? off[0] / diag[0] : 0.0;
    dprime[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = diag[i] - off[i - 1] * cprime[i - 1];
        if (!(m > 0.0)) {
            throw NumericError("solve_1d: system is not positive definite");
        }
        cprime[i] = i + 1 < n ? off[i] / m : 0.0;
        dprime[i] = (rhs[i] - off[i - 1] * dprime[i - 1]) / m;
    }
    std::vector<double> u(n);
    u[n - 1] = dprime[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        u[i] = dprime[i] - cprime[i] * u[i + 1];
    }

    Solution1D out;
    for (std::size_t i = 0; i < n; ++i) {
        double au = diag[i] * u[i];
        if (i > 0) au += off[i - 1] * u[i - 1];
        if (i + 1 < n) au += off[i] * u[i + 1];
        out.energy += u[i] * au;
        out.work += rhs[i] * u[i];
    }
    out.field = Field1D(std::move(grid), std::move(u));
    return out;
}

double scaled_fhat_at(const ThinDomainSpec& spec, const Forcing& f, double eps, double x, int n_quad_y)
{
    const GaussRule& rule = gauss_legendre(n_quad_y);
    const double top = spec.top(x, eps);
    const double depth = spec.strip_depth(x, eps);
    double integral = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double s = 0.5 * (rule.nodes[q] + 1.0);
        integral += 0.5 * rule.weights[q] * f(x, top - s * depth);
    }
    return spec.strip().height.value(x, eps) / spec.thickness(x, eps) * integral;
}

Field1D compute_fhat(const ThinDomainSpec& spec, const Forcing& f, double eps, std::shared_ptr<const Grid1D> grid,
                     int n_quad_y)
{
    if (n_quad_y < 2) {
        throw DomainError("compute_fhat: n_quad_y must be >= 2");
    }
    const double scale = std::pow(eps, spec.strip().gamma);
    std::vector<double> v(grid->size());
    const auto nodes = grid->nodes();
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = scale * scaled_fhat_at(spec, f, eps, nodes[i], n_quad_y);
    }
    return Field1D(std::move(grid), std::move(v));
}

Problem1D reduced_problem(const ThinDomainSpec& spec, const Forcing& f, double eps, int n_quad_y)
{
    Problem1D p;
    p.stiffness = [&spec, eps](double x) { return spec.thickness(x, eps); };
    p.mass_weight = p.stiffness;
    if (f.mode == LoadMode::bulk) {
        // vertical average of f over the whole thickness, no amplification
        p.load = [&spec, f, eps, n_quad_y](double x) {
            const GaussRule& rule = gauss_legendre(n_quad_y);
            const double bottom = spec.bottom(x, eps);
            const double top = spec.top(x, eps);
            double avg = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double s = 0.5 * (rule.nodes[q] + 1.0);
                avg += 0.5 * rule.weights[q] * f(x, bottom + s * (top - bottom));
            }
            return avg;
        };
    } else {
        p.load = [&spec, f, eps, n_quad_y](double x) { return scaled_fhat_at(spec, f, eps, x, n_quad_y); };
    }
    return p;
}

Problem1D limit_problem(double q, Function1D fhat)
{
    Problem1D p;
    p.stiffness = [q](double) { return q; };
    p.mass_weight = [](double) { return 1.0; };
    p.load = std::move(fhat);
    return p;
}

namespace {

std::vector<double> merged_nodes(const Grid1D& a, const Grid1D& b)
{
    std::vector<double> all(a.nodes().begin(), a.nodes().end());
    all.insert(all.end(), b.nodes().begin(), b.nodes().end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

}  // namespace

double error_1d(const Field1D& u, const Field1D& v, Norm1D kind)
{
    if (u.grid->a() != v.grid->a() || u.grid->b() != v.grid->b()) {
        throw ContractError("error_1d: fields live on different intervals");
    }
    const std::vector<double> nodes = merged_nodes(*u.grid, *v.grid);
    double sum = 0.0;
    for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
        const double x0 = nodes[e];
        const double x1 = nodes[e + 1];
        const double h = x1 - x0;
        const double mid = 0.5 * (x0 + x1);
        // difference is linear on [x0, x1]: exact Simpson-free formula
        const double d0 = u(x0) - v(x0);
        const double d1 = u(x1) - v(x1);
        sum += h * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        if (kind == Norm1D::H1) {
            const double slope = u.derivative(mid) - v.derivative(mid);
            sum += h * slope * slope;
        }
    }
    return std::sqrt(sum);
}

double error_1d(const Field1D& u, const Function1D& v, Norm1D kind, const Function1D& dv)
{
    if (kind == Norm1D::H1 && !dv) {
        throw ContractError("error_1d: H1 error against a closed form needs its derivative");
    }
    const GaussRule& rule = gauss_legendre(5);
    const auto nodes = u.grid->nodes();
    double sum = 0.0;
    for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
        const double x0 = nodes[e];
        const double h = nodes[e + 1] - x0;
        const double slope = (u.values[e + 1] - u.values[e]) / h;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = 0.5 * (rule.nodes[q] + 1.0);
            const double x = x0 + s * h;
            const double w = 0.5 * h * rule.weights[q];
            const double d = (1.0 - s) * u.values[e] + s * u.values[e + 1] - v(x);
            sum += w * d * d;
            if (kind == Norm1D::H1) {
                const double dd = slope - dv(x);
                sum += w * dd * dd;
            }
        }
    }
    return std::sqrt(sum);
}

double flux_gap_l2(const Field1D& u, const Function1D& c_u, const Field1D& v, const Function1D& c_v)
{
    const std::vector<double> nodes = merged_nodes(*u.grid, *v.grid);
    const GaussRule& rule = gauss_legendre(5);
    double sum = 0.0;
    for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
        const double x0 = nodes[e];
        const double h = nodes[e + 1] - x0;
        const double mid = x0 + 0.5 * h;
        const double du = u.derivative(mid);
        const double dv = v.derivative(mid);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = x0 + 0.5 * (rule.nodes[q] + 1.0) * h;
            const double d = c_u(x) * du - c_v(x) * dv;
            sum += 0.5 * h * rule.weights[q] * d * d;
        }
    }
    return std::sqrt(sum);
}

void write_field1d_csv(std::ostream& out, const Field1D& field)
{
    out << "x,value\n";
    char buf[96];
    const auto nodes = field.grid->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", nodes[i], field.values[i]);
        out << buf;
    }
}

}  // namespace thinhom
