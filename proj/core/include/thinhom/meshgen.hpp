#pragma once

// Mapped tensor-product triangulations of R^eps, R_a^eps and Q.
//
// Vertex (i, j) sits at column x_i and reference level t_j in [0, 1]. The top
// ny_strip levels span the strip band, so the strip's lower face is a union of
// mesh edges; the ny_bulk levels below are graded toward the strip.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thinhom/geometry.hpp"

namespace thinhom {

enum class Region : std::uint8_t { bulk, strip };
enum class Side : std::uint8_t { bottom, right, top, left };

/// physical: R^eps; shifted: R_a^eps = L^{-1}(R^eps); rectangle: Q = I x (0, 1).
enum class MeshTarget { physical, shifted, rectangle };

[[nodiscard]] std::string to_string(MeshTarget t);
[[nodiscard]] std::string to_string(Region r);

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    Side side = Side::bottom;
};

/// Structured layout: vertex (i, j) has index i * levels + j.
struct Lattice {
    int columns = 0;    // nx + 1
    int levels = 0;     // ny + 1
    int strip_from = 0; // first level index of the strip band
    [[nodiscard]] int vertex(int i, int j) const noexcept { return i * levels + j; }
};

struct TriMesh {
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<Region> regions;                // per triangle
    std::vector<BoundaryEdge> boundary_edges;
    MeshTarget target = MeshTarget::physical;
    double eps = 0.0;
    std::optional<Lattice> lattice;

    [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices.size(); }
    [[nodiscard]] std::size_t triangle_count() const noexcept { return triangles.size(); }
    /// Signed area of triangle t.
    [[nodiscard]] double area(std::size_t t) const noexcept;
};

struct MeshParams {
    int nx = 64;
    int ny_bulk = 16;
    int ny_strip = 4;
    double grading = 1.0;  // >= 1, clusters bulk levels toward the strip
};

/// Columns needed for `cells_per_period` cells per shortest oscillation
/// wavelength (boundaries and strip height) at this eps.
[[nodiscard]] int resolving_nx(const ThinDomainSpec& spec, double eps, int cells_per_period = 16);

/// Throws DomainError on eps <= 0, invalid params or a strip that does not fit,
/// MeshError if a mapped triangle is inverted.
[[nodiscard]] TriMesh generate_mesh(const ThinDomainSpec& spec, double eps, const MeshParams& params,
                                    MeshTarget target);

struct QualityReport {
    double min_angle_deg = 0.0;
    double max_aspect = 0.0;  // longest edge / shortest altitude, 1 for equilateral
    std::size_t bulk_triangles = 0;
    std::size_t strip_triangles = 0;
    double total_area = 0.0;
    double strip_area = 0.0;
    std::size_t inverted = 0;
};

[[nodiscard]] QualityReport quality_report(const TriMesh& mesh);

/// Triangle containing p and its barycentric coordinates; nullopt outside.
struct Location {
    int triangle = -1;
    std::array<double, 3> barycentric{};
};

[[nodiscard]] std::optional<Location> locate(const TriMesh& mesh, Point p, double tolerance = 1e-12);

/// Plain-text mesh format:
///   vertices N triangles M
///   x y            (N lines, 17 significant digits)
///   i j k tag      (M lines, tag is bulk|strip)
void write_mesh(std::ostream& out, const TriMesh& mesh);
/// The format stores neither lattice nor boundary edges; both stay empty.
[[nodiscard]] TriMesh read_mesh(std::istream& in, MeshTarget target = MeshTarget::physical, double eps = 0.0);

}  // namespace thinhom
