#include "thinhom/meshgen.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "thinhom/error.hpp"

namespace thinhom {

std::string to_string(MeshTarget t)
{
    switch (t) {
    case MeshTarget::physical: return "physical";
    case MeshTarget::shifted: return "shifted";
    case MeshTarget::rectangle: return "rectangle";
    }
    return "unknown";
}

std::string to_string(Region r) { return r == Region::strip ? "strip" : "bulk"; }

double TriMesh::area(std::size_t t) const noexcept
{
    const auto& [i, j, k] = triangles[t];
    const Point& a = vertices[i];
    const Point& b = vertices[j];
    const Point& c = vertices[k];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

int resolving_nx(const ThinDomainSpec& spec, double eps, int cells_per_period)
{
    const double wavelength = std::min({spec.lower().shortest_wavelength(eps), spec.upper().shortest_wavelength(eps),
                                        spec.strip().height.shortest_wavelength(eps)});
    if (!std::isfinite(wavelength)) return cells_per_period;
    return std::max(1, static_cast<int>(std::ceil(cells_per_period * spec.interval().length() / wavelength)));
}

TriMesh generate_mesh(const ThinDomainSpec& spec, double eps, const MeshParams& params, MeshTarget target)
{
    if (!(eps > 0.0)) {
        throw DomainError("generate_mesh: eps must be positive");
    }
    if (params.nx < 1 || params.ny_bulk < 1 || params.ny_strip < 1) {
        throw DomainError("generate_mesh: nx, ny_bulk and ny_strip must be >= 1");
    }
    if (!(params.grading >= 1.0)) {
        throw DomainError("generate_mesh: grading exponent must be >= 1");
    }
    if (!spec.strip_contained(eps)) {
        throw DomainError("generate_mesh: strip does not fit inside the domain at this eps");
    }

    const int nx = params.nx;
    const int nb = params.ny_bulk;
    const int ny = nb + params.ny_strip;
    const Lattice lattice{nx + 1, ny + 1, nb};
    const Interval& I = spec.interval();

    TriMesh mesh;
    mesh.target = target;
    mesh.eps = eps;
    mesh.lattice = lattice;
    mesh.vertices.resize(static_cast<std::size_t>(lattice.columns) * lattice.levels);

    std::vector<double> levels(ny + 1);
    for (int i = 0; i <= nx; ++i) {
        const double x = (i == nx) ? I.b : I.a + I.length() * i / nx;
        const double K = spec.thickness(x, eps);
        const double depth = spec.strip_depth(x, eps);
        const double band = depth / (eps * K);  // strip height in reference units
        const double t_face = 1.0 - band;
        for (int j = 0; j <= nb; ++j) {
            const double s = 1.0 - static_cast<double>(j) / nb;
            levels[j] = t_face * (1.0 - std::pow(s, params.grading));
        }
        for (int j = nb + 1; j <= ny; ++j) {
            levels[j] = t_face + band * (j - nb) / params.ny_strip;
        }
        levels[0] = 0.0;
        levels[ny] = 1.0;

        for (int j = 0; j <= ny; ++j) {
            double y = 0.0;
            switch (target) {
            case MeshTarget::rectangle:
                y = levels[j];
                break;
            case MeshTarget::shifted:
                y = (j == ny) ? eps * K : (j == nb) ? eps * K - depth : levels[j] * eps * K;
                break;
            case MeshTarget::physical:
                // faces are pinned so the strip test is exact at vertices
                if (j == 0) {
                    y = spec.bottom(x, eps);
                } else if (j == ny) {
                    y = spec.top(x, eps);
                } else if (j == nb) {
                    y = spec.strip_floor(x, eps);
                } else {
                    y = spec.bottom(x, eps) + levels[j] * eps * K;
                }
                break;
            }
            mesh.vertices[lattice.vertex(i, j)] = Point{x, y};
        }
    }

    mesh.triangles.reserve(static_cast<std::size_t>(2) * nx * ny);
    mesh.regions.reserve(static_cast<std::size_t>(2) * nx * ny);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const int v00 = lattice.vertex(i, j);
            const int v10 = lattice.vertex(i + 1, j);
            const int v11 = lattice.vertex(i + 1, j + 1);
            const int v01 = lattice.vertex(i, j + 1);
            const Region region = j >= nb ? Region::strip : Region::bulk;
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
            mesh.regions.push_back(region);
            mesh.regions.push_back(region);
        }
    }

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!(mesh.area(t) > 0.0)) {
            std::ostringstream msg;
            msg << "generate_mesh: inverted triangle " << t << " (area " << mesh.area(t)
                << "); nx = " << nx << " may be too small for the boundary oscillation at eps = " << eps;
            throw MeshError(msg.str());
        }
    }

    for (int i = 0; i < nx; ++i) {
        mesh.boundary_edges.push_back({lattice.vertex(i, 0), lattice.vertex(i + 1, 0), Side::bottom});
        mesh.boundary_edges.push_back({lattice.vertex(i + 1, ny), lattice.vertex(i, ny), Side::top});
    }
    for (int j = 0; j < ny; ++j) {
        mesh.boundary_edges.push_back({lattice.vertex(nx, j), lattice.vertex(nx, j + 1), Side::right});
        mesh.boundary_edges.push_back({lattice.vertex(0, j + 1), lattice.vertex(0, j), Side::left});
    }
    return mesh;
}

QualityReport quality_report(const TriMesh& mesh)
{
    QualityReport r;
    r.min_angle_deg = 180.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.area(t);
        if (!(area > 0.0)) ++r.inverted;
        std::array<double, 3> len{};
        for (int e = 0; e < 3; ++e) {
            const Point& p = mesh.vertices[tri[e]];
            const Point& q = mesh.vertices[tri[(e + 1) % 3]];
            len[e] = std::hypot(q.x - p.x, q.y - p.y);
        }
        for (int e = 0; e < 3; ++e) {
            // angle opposite edge e via the law of cosines
            const double a = len[e];
            const double b = len[(e + 1) % 3];
            const double c = len[(e + 2) % 3];
            const double cosine = std::clamp((b * b + c * c - a * a) / (2.0 * b * c), -1.0, 1.0);
            r.min_angle_deg = std::min(r.min_angle_deg, std::acos(cosine) * 180.0 / std::numbers::pi);
        }
        const double longest = *std::max_element(len.begin(), len.end());
        const double shortest_altitude = 2.0 * std::abs(area) / longest;
        r.max_aspect = std::max(r.max_aspect, longest / shortest_altitude * std::sqrt(3.0) / 2.0);
        r.total_area += area;
        if (mesh.regions[t] == Region::strip) {
            ++r.strip_triangles;
            r.strip_area += area;
        } else {
            ++r.bulk_triangles;
        }
    }
    return r;
}

namespace {

std::optional<std::array<double, 3>> barycentric(const TriMesh& mesh, int t, Point p, double tolerance)
{
    const auto& [i, j, k] = mesh.triangles[t];
    const Point& a = mesh.vertices[i];
    const Point& b = mesh.vertices[j];
    const Point& c = mesh.vertices[k];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
    const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    const double l0 = 1.0 - l1 - l2;
    if (l0 < -tolerance || l1 < -tolerance || l2 < -tolerance) return std::nullopt;
    return std::array<double, 3>{l0, l1, l2};
}

std::optional<Location> locate_in_lattice(const TriMesh& mesh, const Lattice& lat, Point p, double tolerance)
{
    const int nx = lat.columns - 1;
    const int ny = lat.levels - 1;
    const double x0 = mesh.vertices[lat.vertex(0, 0)].x;
    const double x1 = mesh.vertices[lat.vertex(nx, 0)].x;
    const double span = x1 - x0;
    if (p.x < x0 - tolerance * span || p.x > x1 + tolerance * span) return std::nullopt;

    // Column search: first column whose left x exceeds p.x.
    int lo = 0;
    int hi = nx;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (mesh.vertices[lat.vertex(mid, 0)].x <= p.x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const int i = lo;
    const double xa = mesh.vertices[lat.vertex(i, 0)].x;
    const double xb = mesh.vertices[lat.vertex(i + 1, 0)].x;
    const double s = std::clamp((p.x - xa) / (xb - xa), 0.0, 1.0);
    auto level_height = [&](int j) {
        return (1.0 - s) * mesh.vertices[lat.vertex(i, j)].y + s * mesh.vertices[lat.vertex(i + 1, j)].y;
    };
    const double ybot = level_height(0);
    const double ytop = level_height(ny);
    const double slack = tolerance * std::max(1.0, ytop - ybot);
    if (p.y < ybot - slack || p.y > ytop + slack) return std::nullopt;

    int jlo = 0;
    int jhi = ny;
    while (jhi - jlo > 1) {
        const int mid = (jlo + jhi) / 2;
        if (level_height(mid) <= p.y) {
            jlo = mid;
        } else {
            jhi = mid;
        }
    }
    const int base = 2 * (i * ny + jlo);
    std::optional<Location> best;
    double best_min = -std::numeric_limits<double>::infinity();
    for (int t = base; t < base + 2; ++t) {
        if (auto bc = barycentric(mesh, t, p, std::numeric_limits<double>::infinity())) {
            const double m = std::min({(*bc)[0], (*bc)[1], (*bc)[2]});
            if (m > best_min) {
                best_min = m;
                best = Location{t, *bc};
            }
        }
    }
    if (best && best_min >= -1e-9) return best;
    return std::nullopt;
}

}  // namespace

std::optional<Location> locate(const TriMesh& mesh, Point p, double tolerance)
{
    if (mesh.lattice) {
        return locate_in_lattice(mesh, *mesh.lattice, p, tolerance);
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (auto bc = barycentric(mesh, static_cast<int>(t), p, tolerance)) {
            return Location{static_cast<int>(t), *bc};
        }
    }
    return std::nullopt;
}

void write_mesh(std::ostream& out, const TriMesh& mesh)
{
    out << "vertices " << mesh.vertices.size() << " triangles " << mesh.triangles.size() << '\n';
    char buf[64];
    for (const auto& v : mesh.vertices) {
        // %.17g round-trips every double
        std::snprintf(buf, sizeof buf, "%.17g", v.x);
        out << buf << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", v.y);
        out << buf << '\n';
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << to_string(mesh.regions[t]) << '\n';
    }
}

TriMesh read_mesh(std::istream& in, MeshTarget target, double eps)
{
    std::string word1;
    std::string word2;
    std::size_t n = 0;
    std::size_t m = 0;
    if (!(in >> word1 >> n >> word2 >> m) || word1 != "vertices" || word2 != "triangles") {
        throw ConfigError("mesh file: expected header 'vertices N triangles M'");
    }
    TriMesh mesh;
    mesh.target = target;
    mesh.eps = eps;
    mesh.vertices.resize(n);
    for (auto& v : mesh.vertices) {
        std::string xs;
        std::string ys;
        if (!(in >> xs >> ys)) throw ConfigError("mesh file: truncated vertex list");
        auto parse = [](const std::string& s) {
            double d = 0.0;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), d);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
                throw ConfigError("mesh file: bad coordinate '" + s + "'");
            }
            return d;
        };
        v = Point{parse(xs), parse(ys)};
    }
    mesh.triangles.resize(m);
    mesh.regions.resize(m);
    for (std::size_t t = 0; t < m; ++t) {
        std::string tag;
        auto& tri = mesh.triangles[t];
        if (!(in >> tri[0] >> tri[1] >> tri[2] >> tag)) throw ConfigError("mesh file: truncated triangle list");
        for (int idx : tri) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= n) throw ConfigError("mesh file: vertex index out of range");
        }
        if (tag == "strip" || tag == "1") {
            mesh.regions[t] = Region::strip;
        } else if (tag == "bulk" || tag == "0") {
            mesh.regions[t] = Region::bulk;
        } else {
            throw ConfigError("mesh file: unknown region tag '" + tag + "'");
        }
    }
    return mesh;
}

}  // namespace thinhom
