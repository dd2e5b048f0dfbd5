#include "thinhom/fem2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "thinhom/error.hpp"

namespace thinhom {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k] * x[col_idx[k]];
        y[i] = s;
    }
}

std::vector<double> CsrMatrix::diagonal() const
{
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const int k = find(i, i);
        if (k >= 0) d[i] = values[k];
    }
    return d;
}

int CsrMatrix::find(int i, int j) const
{
    const auto first = col_idx.begin() + row_ptr[i];
    const auto last = col_idx.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return -1;
    return static_cast<int>(it - col_idx.begin());
}

double CsrMatrix::quadratic_form(std::span<const double> x) const
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) row += values[k] * x[col_idx[k]];
        s += x[i] * row;
    }
    return s;
}

CoefficientField::CoefficientField(CoefficientVariant variant, const ThinDomainSpec& spec, double eps)
    : variant_(variant), spec_(&spec), eps_(eps)
{
    if (!(eps > 0.0)) {
        throw DomainError("CoefficientField: eps must be positive");
    }
}

MeshTarget CoefficientField::expected_target() const noexcept
{
    switch (variant_) {
    case CoefficientVariant::physical: return MeshTarget::physical;
    case CoefficientVariant::shifted_Ra: return MeshTarget::shifted;
    case CoefficientVariant::Q_full_B:
    case CoefficientVariant::Q_simplified: return MeshTarget::rectangle;
    }
    return MeshTarget::physical;
}

Tensor2 CoefficientField::tensor(double x, double y) const
{
    if (variant_ == CoefficientVariant::physical || variant_ == CoefficientVariant::shifted_Ra) {
        return {};
    }
    const double k = spec_->thickness(x, eps_);
    const double inv = 1.0 / (eps_ * eps_ * k);
    if (variant_ == CoefficientVariant::Q_simplified) {
        return {k, 0.0, inv};
    }
    const double dk = spec_->thickness_derivative(x, eps_);
    const double ydk = y * dk;
    return {k, -ydk, ydk * ydk / k + inv};
}

double CoefficientField::mass_weight(double x, double) const
{
    if (variant_ == CoefficientVariant::physical || variant_ == CoefficientVariant::shifted_Ra) return 1.0;
    return spec_->thickness(x, eps_);
}

double CoefficientField::load_weight(double x, double y) const
{
    return mass_weight(x, y);
}

Point CoefficientField::to_physical(double x, double y) const
{
    switch (variant_) {
    case CoefficientVariant::physical: return {x, y};
    case CoefficientVariant::shifted_Ra: return map_L(*spec_, {x, y}, eps_, Direction::forward);
    case CoefficientVariant::Q_full_B:
    case CoefficientVariant::Q_simplified:
        return map_L(*spec_, map_S(*spec_, {x, y}, eps_, Direction::forward), eps_, Direction::forward);
    }
    return {x, y};
}

namespace {

struct ElementGeometry {
    double area = 0.0;
    std::array<double, 3> gx{};
    std::array<double, 3> gy{};
};

ElementGeometry element_geometry(const TriMesh& mesh, const std::array<int, 3>& tri)
{
    const Point& p0 = mesh.vertices[tri[0]];
    const Point& p1 = mesh.vertices[tri[1]];
    const Point& p2 = mesh.vertices[tri[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    ElementGeometry g;
    g.area = 0.5 * det;
    g.gx = {(p1.y - p2.y) / det, (p2.y - p0.y) / det, (p0.y - p1.y) / det};
    g.gy = {(p2.x - p1.x) / det, (p0.x - p2.x) / det, (p1.x - p0.x) / det};
    return g;
}

// Mid-edge rule: midpoint m_k lies opposite vertex k, where phi_k = 0.
std::array<Point, 3> edge_midpoints(const TriMesh& mesh, const std::array<int, 3>& tri)
{
    const Point& p0 = mesh.vertices[tri[0]];
    const Point& p1 = mesh.vertices[tri[1]];
    const Point& p2 = mesh.vertices[tri[2]];
    return {Point{0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)}, Point{0.5 * (p0.x + p2.x), 0.5 * (p0.y + p2.y)},
            Point{0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y)}};
}

struct Pattern {
    CsrMatrix matrix;
    std::vector<std::array<int, 9>> slots;  // per triangle, row-major local (a, b)
};

Pattern build_pattern(const TriMesh& mesh)
{
    const int n = static_cast<int>(mesh.vertices.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& tri : mesh.triangles) {
        for (int a : tri) {
            for (int b : tri) adj[a].push_back(b);
        }
    }
    Pattern p;
    p.matrix.n = n;
    p.matrix.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        auto& row = adj[i];
        if (row.empty()) row.push_back(i);
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        p.matrix.row_ptr[i + 1] = p.matrix.row_ptr[i] + static_cast<int>(row.size());
    }
    p.matrix.col_idx.reserve(p.matrix.row_ptr[n]);
    for (const auto& row : adj) p.matrix.col_idx.insert(p.matrix.col_idx.end(), row.begin(), row.end());
    p.matrix.values.assign(p.matrix.col_idx.size(), 0.0);

    p.slots.resize(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) p.slots[t][3 * a + b] = p.matrix.find(tri[a], tri[b]);
        }
    }
    return p;
}

void assemble_range(const TriMesh& mesh, const CoefficientField& coeff, const Forcing& load, double load_scale,
                    const std::vector<std::array<int, 9>>& slots, std::size_t t_begin, std::size_t t_end,
                    std::vector<double>& values, std::vector<double>& rhs)
{
    const bool bulk = load.mode == LoadMode::bulk;
    for (std::size_t t = t_begin; t < t_end; ++t) {
        const auto& tri = mesh.triangles[t];
        const ElementGeometry g = element_geometry(mesh, tri);
        const auto mids = edge_midpoints(mesh, tri);
        const double w = g.area / 3.0;

        double axx = 0.0;
        double axy = 0.0;
        double ayy = 0.0;
        std::array<double, 3> rho{};
        for (int q = 0; q < 3; ++q) {
            const Tensor2 a = coeff.tensor(mids[q].x, mids[q].y);
            axx += a.xx;
            axy += a.xy;
            ayy += a.yy;
            rho[q] = coeff.mass_weight(mids[q].x, mids[q].y);
        }
        axx *= w;
        axy *= w;
        ayy *= w;

        const bool loaded = bulk || mesh.regions[t] == Region::strip;
        std::array<double, 3> src{};
        if (loaded && load.f) {
            for (int q = 0; q < 3; ++q) {
                const Point ph = coeff.to_physical(mids[q].x, mids[q].y);
                src[q] = load_scale * coeff.load_weight(mids[q].x, mids[q].y) * load(ph.x, ph.y);
            }
        }

        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                double v = axx * g.gx[a] * g.gx[b] + axy * (g.gx[a] * g.gy[b] + g.gy[a] * g.gx[b]) +
                           ayy * g.gy[a] * g.gy[b];
                // phi_a phi_b at midpoint q: 1/4 if neither is q, else 0
                for (int q = 0; q < 3; ++q) {
                    if (q != a && q != b) v += w * rho[q] * 0.25;
                }
                values[slots[t][3 * a + b]] += v;
            }
            if (loaded) {
                double r = 0.0;
                for (int q = 0; q < 3; ++q) {
                    if (q != a) r += w * src[q] * 0.5;
                }
                rhs[tri[a]] += r;
            }
        }
    }
}

}  // namespace

SparseSystem assemble(const TriMesh& mesh, const CoefficientField& coeff, const Forcing& load,
                      const AssemblyOptions& options)
{
    if (mesh.target != coeff.expected_target()) {
        throw ContractError("assemble: mesh target " + to_string(mesh.target) + " does not match the variant's " +
                            to_string(coeff.expected_target()));
    }
    if (options.threads < 1) {
        throw DomainError("assemble: threads must be >= 1");
    }
    const double gamma = coeff.spec().strip().gamma;
    const double load_scale = load.mode == LoadMode::bulk ? 1.0 : std::pow(coeff.eps(), -gamma);

    Pattern pattern = build_pattern(mesh);
    SparseSystem sys;
    sys.matrix = std::move(pattern.matrix);
    sys.rhs.assign(mesh.vertices.size(), 0.0);

    const std::size_t nt = mesh.triangles.size();
    const std::size_t threads = std::min<std::size_t>(options.threads, std::max<std::size_t>(nt, 1));
    if (threads == 1) {
        assemble_range(mesh, coeff, load, load_scale, pattern.slots, 0, nt, sys.matrix.values, sys.rhs);
        return sys;
    }

    std::vector<std::vector<double>> part_values(threads, std::vector<double>(sys.matrix.values.size(), 0.0));
    std::vector<std::vector<double>> part_rhs(threads, std::vector<double>(sys.rhs.size(), 0.0));
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t k = 0; k < threads; ++k) {
            const std::size_t b = nt * k / threads;
            const std::size_t e = nt * (k + 1) / threads;
            pool.emplace_back([&, k, b, e] {
                assemble_range(mesh, coeff, load, load_scale, pattern.slots, b, e, part_values[k], part_rhs[k]);
            });
        }
    }
    for (std::size_t k = 0; k < threads; ++k) {
        for (std::size_t i = 0; i < sys.matrix.values.size(); ++i) sys.matrix.values[i] += part_values[k][i];
        for (std::size_t i = 0; i < sys.rhs.size(); ++i) sys.rhs[i] += part_rhs[k][i];
    }
    return sys;
}

std::vector<double> solve_cg(const SparseSystem& system, double rel_tol, int max_iter, SolveStats* stats)
{
    const CsrMatrix& a = system.matrix;
    const std::size_t n = static_cast<std::size_t>(a.n);
    if (system.rhs.size() != n) {
        throw ContractError("solve_cg: rhs size does not match the matrix");
    }
    std::vector<double> x(n, 0.0);
    const double bnorm = std::sqrt(std::inner_product(system.rhs.begin(), system.rhs.end(), system.rhs.begin(), 0.0));
    if (stats) *stats = {};
    if (bnorm == 0.0) return x;

    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw NumericError("solve_cg: non-positive diagonal entry");
        d = 1.0 / d;
    }
    std::vector<double> r = system.rhs;
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> ap(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    double rel = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        a.multiply(p, ap);
        const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
        if (!(pap > 0.0)) {
            throw NumericError("solve_cg: matrix is not positive definite");
        }
        const double alpha = rz / pap;
        double rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr += r[i] * r[i];
        }
        rel = std::sqrt(rr) / bnorm;
        if (rel <= rel_tol) {
            if (stats) *stats = {it, rel};
            return x;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw ConvergenceError("solve_cg: no convergence within " + std::to_string(max_iter) + " iterations", max_iter,
                           rel);
}

Field2D::Field2D(std::shared_ptr<const TriMesh> m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v))
{
    if (!mesh || values.size() != mesh->vertices.size()) {
        throw ContractError("Field2D value count must match the mesh");
    }
}

std::optional<double> Field2D::evaluate(Point p) const
{
    const auto loc = locate(*mesh, p);
    if (!loc) return std::nullopt;
    const auto& tri = mesh->triangles[loc->triangle];
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += loc->barycentric[k] * values[tri[k]];
    return s;
}

namespace {

NormParts norm_parts_impl(const TriMesh& mesh, std::span<const double> values, const Region* region)
{
    if (values.size() != mesh.vertices.size()) {
        throw ContractError("norm_parts: value count must match the mesh");
    }
    NormParts out;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (region && mesh.regions[t] != *region) continue;
        const auto& tri = mesh.triangles[t];
        const ElementGeometry g = element_geometry(mesh, tri);
        const double u0 = values[tri[0]];
        const double u1 = values[tri[1]];
        const double u2 = values[tri[2]];
        out.l2 += g.area / 6.0 * (u0 * u0 + u1 * u1 + u2 * u2 + u0 * u1 + u1 * u2 + u0 * u2);
        // differences keep constants exactly gradient-free
        const double ux = g.gx[1] * (u1 - u0) + g.gx[2] * (u2 - u0);
        const double uy = g.gy[1] * (u1 - u0) + g.gy[2] * (u2 - u0);
        out.dx += g.area * ux * ux;
        out.dy += g.area * uy * uy;
    }
    return out;
}

}  // namespace

NormParts norm_parts(const TriMesh& mesh, std::span<const double> values)
{
    return norm_parts_impl(mesh, values, nullptr);
}

NormParts norm_parts(const TriMesh& mesh, std::span<const double> values, Region region)
{
    return norm_parts_impl(mesh, values, &region);
}

namespace {

double combine(const NormParts& p, NormKind kind, double eps)
{
    double sq = 0.0;
    switch (kind.type) {
    case NormType::L2: sq = p.l2; break;
    case NormType::H1: sq = p.l2 + p.dx + p.dy; break;
    case NormType::seminorm_dx: sq = p.dx; break;
    case NormType::seminorm_dy: sq = p.dy; break;
    case NormType::seminorm_grad: sq = p.dx + p.dy; break;
    }
    if (kind.rescaled) {
        if (!(eps > 0.0)) throw DomainError("rescaled norm needs eps > 0");
        sq /= eps;
    }
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace

double norm(const Field2D& field, NormKind kind, double eps)
{
    return combine(norm_parts(*field.mesh, field.values), kind, eps);
}

std::vector<double> extend_1d(const TriMesh& mesh, const Field1D& w1d)
{
    std::vector<double> out(mesh.vertices.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = w1d(mesh.vertices[k].x);
    return out;
}

double diff_with_1d(const Field2D& field, const Field1D& w1d, NormKind kind, double eps)
{
    std::vector<double> d = extend_1d(*field.mesh, w1d);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = field.values[k] - d[k];
    return combine(norm_parts(*field.mesh, d), kind, eps);
}

Field1D slice_extract(const Field2D& field, double y, int n_samples)
{
    if (n_samples < 2) {
        throw DomainError("slice_extract: n_samples must be >= 2");
    }
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    for (const auto& v : field.mesh->vertices) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
    }
    auto grid = Grid1D::uniform({xmin, xmax}, n_samples);
    std::vector<double> values(n_samples);
    std::vector<std::pair<double, double>> failing;
    const auto xs = grid->nodes();
    for (int i = 0; i < n_samples; ++i) {
        const auto v = field.evaluate({xs[i], y});
        if (v) {
            values[i] = *v;
            continue;
        }
        if (!failing.empty() && i > 0 && failing.back().second == xs[i - 1]) {
            failing.back().second = xs[i];
        } else {
            failing.emplace_back(xs[i], xs[i]);
        }
    }
    if (!failing.empty()) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "slice_extract: line y = %g leaves the domain on %zu x range(s), first [%g, %g]",
                      y, failing.size(), failing.front().first, failing.front().second);
        throw SliceError(buf, std::move(failing));
    }
    return Field1D(std::move(grid), std::move(values));
}

double EnergyIdentity::relative_gap() const
{
    const double scale = std::max(std::abs(work), std::abs(energy));
    if (scale == 0.0) return 0.0;
    return std::abs(energy - work) / scale;
}

EnergyIdentity energy_identity(const SparseSystem& system, std::span<const double> u)
{
    EnergyIdentity e;
    e.energy = system.matrix.quadratic_form(u);
    e.work = std::inner_product(system.rhs.begin(), system.rhs.end(), u.begin(), 0.0);
    return e;
}

Field2D transfer_nodal(const Field2D& source, std::shared_ptr<const TriMesh> target,
                       const std::function<Point(Point)>& target_to_source, double* mismatch)
{
    const TriMesh& src = *source.mesh;
    if (!src.lattice || !target->lattice || src.lattice->columns != target->lattice->columns ||
        src.lattice->levels != target->lattice->levels || src.lattice->strip_from != target->lattice->strip_from) {
        throw ContractError("transfer_nodal: meshes do not share a lattice");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < target->vertices.size(); ++k) {
        const Point m = target_to_source(target->vertices[k]);
        const Point& s = src.vertices[k];
        worst = std::max(worst, std::hypot(m.x - s.x, m.y - s.y));
    }
    if (mismatch) *mismatch = worst;
    return Field2D(std::move(target), source.values);
}

void write_field_csv(std::ostream& out, const Field2D& field)
{
    out << "x,y,value\n";
    char buf[128];
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        const Point& p = field.mesh->vertices[k];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.x, p.y, field.values[k]);
        out << buf;
    }
}

void write_raster_csv(std::ostream& out, const Field2D& field, int nx_r, int ny_r)
{
    if (nx_r < 2 || ny_r < 2) {
        throw DomainError("write_raster_csv: raster needs at least 2 x 2 points");
    }
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& v : field.mesh->vertices) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    out << "x,y,value\n";
    char buf[128];
    for (int j = 0; j < ny_r; ++j) {
        const double y = ymin + (ymax - ymin) * j / (ny_r - 1);
        for (int i = 0; i < nx_r; ++i) {
            const double x = xmin + (xmax - xmin) * i / (nx_r - 1);
            const auto v = field.evaluate({x, y});
            if (v) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, y, *v);
            } else {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,nan\n", x, y);
            }
            out << buf;
        }
    }
}

}  // namespace thinhom
