#pragma once

// P1 Galerkin on the triangulations of meshgen.
//
// All variants assemble  int A grad u . grad phi + int rho u phi = l(phi)
// with homogeneous Neumann conditions (natural, no boundary terms).

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "thinhom/fem1d.hpp"
#include "thinhom/forcing.hpp"
#include "thinhom/geometry.hpp"
#include "thinhom/meshgen.hpp"

namespace thinhom {

/// Symmetric sparse matrix, compressed sparse row, full pattern stored.
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;  // sorted within each row
    std::vector<double> values;

    void multiply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] std::vector<double> diagonal() const;
    /// Position of (i, j) in values, or -1 when outside the pattern.
    [[nodiscard]] int find(int i, int j) const;
    [[nodiscard]] double quadratic_form(std::span<const double> x) const;
};

struct SparseSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
};

struct Tensor2 {
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;
    [[nodiscard]] double det() const noexcept { return xx * yy - xy * xy; }
};

/// physical: problem on R^eps.
/// shifted_Ra: same operator on R_a^eps with load f o L.
/// Q_full_B: the exact pull-back to Q (tensor B^eps, mass weight K_eps).
/// Q_simplified: the diagonal part of B^eps.
enum class CoefficientVariant { physical, shifted_Ra, Q_full_B, Q_simplified };

class CoefficientField {
public:
    CoefficientField(CoefficientVariant variant, const ThinDomainSpec& spec, double eps);

    [[nodiscard]] CoefficientVariant variant() const noexcept { return variant_; }
    [[nodiscard]] MeshTarget expected_target() const noexcept;
    [[nodiscard]] double eps() const noexcept { return eps_; }
    [[nodiscard]] const ThinDomainSpec& spec() const noexcept { return *spec_; }

    [[nodiscard]] Tensor2 tensor(double x, double y) const;
    [[nodiscard]] double mass_weight(double x, double y) const;
    /// Weight multiplying the forcing in the load functional (K_eps on Q).
    [[nodiscard]] double load_weight(double x, double y) const;
    /// Physical point of R^eps corresponding to (x, y) in this variant's domain.
    [[nodiscard]] Point to_physical(double x, double y) const;

private:
    CoefficientVariant variant_;
    const ThinDomainSpec* spec_;
    double eps_;
};

struct AssemblyOptions {
    /// Per-thread partial value arrays merged in thread order; the result is
    /// independent of scheduling for a fixed thread count.
    int threads = 1;
};

/// Throws ContractError when the mesh target does not match the variant.
[[nodiscard]] SparseSystem assemble(const TriMesh& mesh, const CoefficientField& coeff, const Forcing& load,
                                    const AssemblyOptions& options = {});

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
/// Stops at ||r|| <= rel_tol ||b||; throws ConvergenceError after max_iter.
[[nodiscard]] std::vector<double> solve_cg(const SparseSystem& system, double rel_tol, int max_iter,
                                           SolveStats* stats = nullptr);

struct Field2D {
    std::shared_ptr<const TriMesh> mesh;
    std::vector<double> values;

    Field2D() = default;
    Field2D(std::shared_ptr<const TriMesh> m, std::vector<double> v);

    /// P1 interpolation; nullopt outside the mesh.
    [[nodiscard]] std::optional<double> evaluate(Point p) const;
};

enum class NormType { L2, H1, seminorm_dx, seminorm_dy, seminorm_grad };

struct NormKind {
    NormType type = NormType::L2;
    bool rescaled = false;  // multiply the squared norm by 1/eps
};

/// Squared integrals of a P1 field, each exact on the mesh.
struct NormParts {
    double l2 = 0.0;  // int u^2
    double dx = 0.0;  // int u_x^2
    double dy = 0.0;  // int u_y^2
};

[[nodiscard]] NormParts norm_parts(const TriMesh& mesh, std::span<const double> values);
/// Same, restricted to triangles tagged `region`.
[[nodiscard]] NormParts norm_parts(const TriMesh& mesh, std::span<const double> values, Region region);
[[nodiscard]] double norm(const Field2D& field, NormKind kind, double eps);

/// Norm of (field - w1d extended constantly in y), w1d interpolated at the vertices.
[[nodiscard]] double diff_with_1d(const Field2D& field, const Field1D& w1d, NormKind kind, double eps);

/// Nodal values of w1d (constant in y) on the mesh vertices.
[[nodiscard]] std::vector<double> extend_1d(const TriMesh& mesh, const Field1D& w1d);

/// Samples along the horizontal line y, n_samples uniform in I (n_samples >= 2).
/// Throws SliceError listing the x ranges where the line leaves the mesh.
[[nodiscard]] Field1D slice_extract(const Field2D& field, double y, int n_samples);

/// Energy a(u, u) and load l(u) of a discrete solution.
struct EnergyIdentity {
    double energy = 0.0;
    double work = 0.0;
    [[nodiscard]] double relative_gap() const;
};

[[nodiscard]] EnergyIdentity energy_identity(const SparseSystem& system, std::span<const double> u);

/// Values of `source` transported to `target` through matching lattice
/// vertices. Both meshes must come from the same MeshParams. `mismatch`
/// receives max |map(target vertex) - source vertex|.
[[nodiscard]] Field2D transfer_nodal(const Field2D& source, std::shared_ptr<const TriMesh> target,
                                     const std::function<Point(Point)>& target_to_source, double* mismatch);

/// CSV "x,y,value" per vertex.
void write_field_csv(std::ostream& out, const Field2D& field);
/// CSV raster "x,y,value" on nx_r x ny_r points of the bounding box, NaN outside.
void write_raster_csv(std::ostream& out, const Field2D& field, int nx_r, int ny_r);

}  // namespace thinhom
