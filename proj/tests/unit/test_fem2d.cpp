#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "specs.hpp"
#include "thinhom/error.hpp"
#include "thinhom/fem2d.hpp"
#include "thinhom/quadrature.hpp"

using namespace thinhom;
using thinhom::testing::constant_spec;
using thinhom::testing::oscillating_example;

namespace {

CsrMatrix dense_to_csr(const std::vector<std::vector<double>>& a)
{
    CsrMatrix m;
    m.n = static_cast<int>(a.size());
    m.row_ptr.push_back(0);
    for (const auto& row : a) {
        for (int j = 0; j < m.n; ++j) {
            m.col_idx.push_back(j);
            m.values.push_back(row[j]);
        }
        m.row_ptr.push_back(static_cast<int>(m.col_idx.size()));
    }
    return m;
}

// Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

struct Solved {
    std::shared_ptr<const TriMesh> mesh;
    SparseSystem system;
    std::vector<double> u;
};

Solved solve_physical(const ThinDomainSpec& spec, double eps, const MeshParams& p, const Forcing& f,
                      int threads = 1)
{
    Solved s;
    s.mesh = std::make_shared<const TriMesh>(generate_mesh(spec, eps, p, MeshTarget::physical));
    s.system = assemble(*s.mesh, CoefficientField(CoefficientVariant::physical, spec, eps), f, {threads});
    s.u = solve_cg(s.system, 1e-12, 100000);
    return s;
}

Forcing example_forcing() { return Forcing::x_only(BoundaryProfile(1.0, {{1.0, 1.0, 0.0}})); }

}  // namespace

TEST(Assembly, ZeroForcingGivesZeroSolution)
{
    const Solved s = solve_physical(oscillating_example(), 0.1, {256, 4, 2, 1.0}, Forcing::constant(0.0));
    EXPECT_TRUE(std::all_of(s.system.rhs.begin(), s.system.rhs.end(), [](double v) { return v == 0.0; }));
    EXPECT_TRUE(std::all_of(s.u.begin(), s.u.end(), [](double v) { return v == 0.0; }));
}

TEST(Assembly, BulkConstantLoadGivesConstantSolution)
{
    const Solved s =
        solve_physical(oscillating_example(), 0.1, {400, 4, 2, 1.0}, Forcing::constant(2.5, LoadMode::bulk));
    for (double v : s.u) EXPECT_NEAR(v, 2.5, 1e-9);
}

TEST(Assembly, MatrixIsSymmetric)
{
    const ThinDomainSpec spec = oscillating_example();
    const double eps = 0.1;
    const TriMesh rect = generate_mesh(spec, eps, {128, 4, 2, 1.0}, MeshTarget::rectangle);
    const SparseSystem s = assemble(rect, CoefficientField(CoefficientVariant::Q_full_B, spec, eps), example_forcing());
    const CsrMatrix& a = s.matrix;
    for (int i = 0; i < a.n; ++i) {
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const int j = a.col_idx[k];
            const int t = a.find(j, i);
            ASSERT_GE(t, 0);
            EXPECT_NEAR(a.values[t], a.values[k], 1e-12 * std::abs(a.values[k]));
        }
    }
    EXPECT_EQ(a.find(0, a.n - 1), -1);
}

TEST(Assembly, StripOnlyLoad)
{
    // x-only forcing: the load vanishes on vertices not touching the strip.
    const ThinDomainSpec spec = oscillating_example();
    const double eps = 0.1;
    const TriMesh m = generate_mesh(spec, eps, {64, 4, 2, 1.0}, MeshTarget::physical);
    const SparseSystem s = assemble(m, CoefficientField(CoefficientVariant::physical, spec, eps), Forcing::constant(1.0));
    const Lattice lat = *m.lattice;
    double total = 0.0;
    for (int i = 0; i < lat.columns; ++i) {
        for (int j = 0; j < lat.levels; ++j) {
            const double r = s.rhs[lat.vertex(i, j)];
            if (j < lat.strip_from) EXPECT_EQ(r, 0.0);
            total += r;
        }
    }
    // sum of rhs = eps^{-gamma} |strip|
    const double strip = quality_report(m).strip_area;
    EXPECT_NEAR(total, std::pow(eps, -1.0 / 18.0) * strip, 1e-12);
}

TEST(Assembly, VariantTargetMismatchThrows)
{
    const ThinDomainSpec spec = oscillating_example();
    const TriMesh m = generate_mesh(spec, 0.1, {64, 4, 2, 1.0}, MeshTarget::physical);
    EXPECT_THROW((void)assemble(m, CoefficientField(CoefficientVariant::Q_full_B, spec, 0.1), example_forcing()),
                 ContractError);
    EXPECT_THROW((void)assemble(m, CoefficientField(CoefficientVariant::shifted_Ra, spec, 0.1), example_forcing()),
                 ContractError);
    EXPECT_THROW(CoefficientField(CoefficientVariant::physical, spec, 0.0), DomainError);
}

TEST(Assembly, FixedThreadCountIsReproducible)
{
    const ThinDomainSpec spec = oscillating_example();
    const TriMesh m = generate_mesh(spec, 0.08, {300, 6, 2, 1.0}, MeshTarget::physical);
    const CoefficientField c(CoefficientVariant::physical, spec, 0.08);
    const SparseSystem one = assemble(m, c, example_forcing(), {1});
    const SparseSystem four = assemble(m, c, example_forcing(), {4});
    const SparseSystem again = assemble(m, c, example_forcing(), {4});
    EXPECT_EQ(four.matrix.values, again.matrix.values);
    EXPECT_EQ(four.rhs, again.rhs);
    // partial sums merge in a different order, so only rounding may differ
    ASSERT_EQ(one.matrix.values.size(), four.matrix.values.size());
    for (std::size_t k = 0; k < one.matrix.values.size(); ++k)
        EXPECT_NEAR(one.matrix.values[k], four.matrix.values[k], 1e-12 * (1 + std::abs(one.matrix.values[k])));
    for (std::size_t k = 0; k < one.rhs.size(); ++k) EXPECT_NEAR(one.rhs[k], four.rhs[k], 1e-15);
}

TEST(Tensor, FullTensorDeterminant)
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < 3; ++s) {
        const ThinDomainSpec spec = thinhom::testing::random_spec(rng);
        for (double eps : {0.3, 0.05, 0.01}) {
            const CoefficientField c(CoefficientVariant::Q_full_B, spec, eps);
            for (int k = 0; k < 200; ++k) {
                const double x = 10.0 * unit(rng);
                const double y = unit(rng);
                EXPECT_NEAR(c.tensor(x, y).det() * eps * eps, 1.0, 1e-12);
            }
        }
    }
}

TEST(Tensor, SimplifiedIsDiagonalPart)
{
    std::mt19937 rng(9);
    const ThinDomainSpec spec = thinhom::testing::random_spec(rng);
    const CoefficientField full(CoefficientVariant::Q_full_B, spec, 0.1);
    const CoefficientField diag(CoefficientVariant::Q_simplified, spec, 0.1);
    for (double x : {0.5, 3.0, 8.2}) {
        const Tensor2 a = full.tensor(x, 0.7);
        const Tensor2 b = diag.tensor(x, 0.7);
        const double K = spec.thickness(x, 0.1);
        EXPECT_EQ(b.xy, 0.0);
        EXPECT_DOUBLE_EQ(b.xx, a.xx);
        EXPECT_DOUBLE_EQ(b.xx, K);
        EXPECT_NEAR(b.yy, 1.0 / (0.01 * K), 1e-12 * b.yy);
        EXPECT_DOUBLE_EQ(full.mass_weight(x, 0.7), K);
        EXPECT_DOUBLE_EQ(full.load_weight(x, 0.7), K);
    }
}

TEST(Tensor, ToPhysicalComposesMaps)
{
    const ThinDomainSpec spec = oscillating_example();
    const double eps = 0.1;
    const CoefficientField q(CoefficientVariant::Q_full_B, spec, eps);
    const Point p = q.to_physical(3.0, 0.25);
    EXPECT_NEAR(p.y, spec.bottom(3.0, eps) + 0.25 * eps * 16.0, 1e-15);
    const Point top = q.to_physical(3.0, 1.0);
    EXPECT_NEAR(top.y, spec.top(3.0, eps), 1e-14);
}

TEST(Cg, IdentityConvergesInOneIteration)
{
    std::vector<std::vector<double>> eye(6, std::vector<double>(6, 0.0));
    for (int i = 0; i < 6; ++i) eye[i][i] = 1.0;
    SparseSystem s{dense_to_csr(eye), {1, -2, 3, 0.5, 7, -1}};
    SolveStats st;
    const auto x = solve_cg(s, 1e-14, 10, &st);
    EXPECT_EQ(st.iterations, 1);
    EXPECT_EQ(x, s.rhs);
}

TEST(Cg, ZeroRhs)
{
    std::vector<std::vector<double>> a{{2, 1}, {1, 2}};
    SparseSystem s{dense_to_csr(a), {0, 0}};
    SolveStats st;
    st.iterations = 99;
    const auto x = solve_cg(s, 1e-10, 10, &st);
    EXPECT_EQ(st.iterations, 0);
    EXPECT_EQ(x, (std::vector<double>{0, 0}));
}

TEST(Cg, RandomSpdMatchesDenseElimination)
{
    std::mt19937 rng(42);
    std::normal_distribution<double> g;
    const int n = 50;
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    for (auto& row : m)
        for (double& v : row) v = g(rng);
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) a[i][j] += m[k][i] * m[k][j];
            if (i == j) a[i][j] += n;
        }
    std::vector<double> b(n);
    for (double& v : b) v = g(rng);
    const auto oracle = dense_solve(a, b);
    const auto x = solve_cg({dense_to_csr(a), b}, 1e-13, 1000);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], oracle[i], 1e-8);
}

TEST(Cg, ConvergenceErrorCarriesResidual)
{
    std::vector<std::vector<double>> a{{4, 1, 0}, {1, 3, 1}, {0, 1, 2}};
    try {
        (void)solve_cg({dense_to_csr(a), {1, 2, 3}}, 1e-30, 1);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_EQ(e.iterations(), 1);
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(Norms, ConstantOnExampleDomain)
{
    const double eps = 0.1;
    auto mesh = std::make_shared<const TriMesh>(
        generate_mesh(oscillating_example(), eps, {512, 4, 2, 1.0}, MeshTarget::physical));
    const Field2D one(mesh, std::vector<double>(mesh->vertex_count(), 1.0));
    EXPECT_NEAR(norm(one, {NormType::L2, true}, eps), std::sqrt(320.0), 1e-10);
    EXPECT_NEAR(norm(one, {NormType::H1, true}, eps), std::sqrt(320.0), 1e-10);
    EXPECT_EQ(norm(one, {NormType::seminorm_grad, false}, eps), 0.0);
    const Field2D zero(mesh, std::vector<double>(mesh->vertex_count(), 0.0));
    EXPECT_EQ(norm(zero, {NormType::H1, true}, eps), 0.0);
}

TEST(Norms, LinearFieldOnUnitSquare)
{
    auto mesh = std::make_shared<const TriMesh>(
        generate_mesh(constant_spec({0, 1}, 0.5, 0.5, 1.0, 1.0), 0.5, {16, 8, 8, 1.0}, MeshTarget::rectangle));
    std::vector<double> x(mesh->vertex_count());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = mesh->vertices[k].x;
    const Field2D f(mesh, x);
    // P1 interpolation of x is exact, so the integrals are too
    EXPECT_NEAR(norm(f, {NormType::L2, false}, 1.0), 1.0 / std::sqrt(3.0), 1e-14);
    EXPECT_NEAR(norm(f, {NormType::seminorm_dx, false}, 1.0), 1.0, 1e-14);
    EXPECT_NEAR(norm(f, {NormType::seminorm_dy, false}, 1.0), 0.0, 1e-14);
    EXPECT_NEAR(norm(f, {NormType::L2, true}, 0.25), 2.0 / std::sqrt(3.0), 1e-14);
}

TEST(Norms, DiffWithOneDimensional)
{
    const double eps = 0.1;
    auto mesh = std::make_shared<const TriMesh>(
        generate_mesh(oscillating_example(), eps, {256, 4, 2, 1.0}, MeshTarget::physical));
    std::vector<double> vals(mesh->vertex_count());
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = std::sin(mesh->vertices[k].x) + mesh->vertices[k].y;
    const Field2D f(mesh, vals);
    const auto grid = Grid1D::uniform({0, 20}, 11);
    const Field1D zero(grid, std::vector<double>(11, 0.0));
    for (NormType t : {NormType::L2, NormType::H1}) {
        EXPECT_NEAR(diff_with_1d(f, zero, {t, true}, eps), norm(f, {t, true}, eps), 1e-12);
    }
    const Field2D c(mesh, std::vector<double>(mesh->vertex_count(), 3.0));
    const Field1D three(grid, std::vector<double>(11, 3.0));
    EXPECT_EQ(diff_with_1d(c, three, {NormType::H1, true}, eps), 0.0);
}

TEST(Slices, ConstantAndLinearFields)
{
    const double eps = 0.1;
    auto mesh = std::make_shared<const TriMesh>(
        generate_mesh(oscillating_example(), eps, {256, 4, 2, 1.0}, MeshTarget::physical));
    std::vector<double> x(mesh->vertex_count());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = mesh->vertices[k].x;
    const Field1D s = slice_extract(Field2D(mesh, x), 0.0, 101);
    ASSERT_EQ(s.values.size(), 101u);
    for (std::size_t k = 0; k < 101; ++k) EXPECT_NEAR(s.values[k], s.grid->nodes()[k], 1e-12);
    const Field1D c = slice_extract(Field2D(mesh, std::vector<double>(mesh->vertex_count(), 4.0)), 0.3, 50);
    for (double v : c.values) EXPECT_NEAR(v, 4.0, 1e-14);
}

TEST(Slices, LeavingTheDomainReportsRanges)
{
    const double eps = 0.1;
    auto mesh = std::make_shared<const TriMesh>(
        generate_mesh(oscillating_example(), eps, {256, 4, 2, 1.0}, MeshTarget::physical));
    const Field2D f(mesh, std::vector<double>(mesh->vertex_count(), 1.0));
    // y = 0.95 is inside only where eps k2 > 0.95, i.e. near the crests of k2
    try {
        (void)slice_extract(f, 0.95, 400);
        FAIL() << "expected SliceError";
    } catch (const SliceError& e) {
        ASSERT_FALSE(e.failing_ranges().empty());
        for (const auto& [a, b] : e.failing_ranges()) EXPECT_LE(a, b);
    }
    EXPECT_THROW((void)slice_extract(f, 0.0, 1), DomainError);
}

TEST(Slices, ExampleSlicesCloserAtSmallerEps)
{
    const ThinDomainSpec spec = oscillating_example();
    auto spread = [&](double eps) {
        const MeshParams p{resolving_nx(spec, eps, 16), 8, 2, 1.0};
        const Solved s = solve_physical(spec, eps, p, example_forcing());
        const Field2D f(s.mesh, s.u);
        const Field1D lo = slice_extract(f, -0.2, 2001);
        const Field1D mid = slice_extract(f, 0.0, 2001);
        const Field1D hi = slice_extract(f, 0.2, 2001);
        return std::max({error_1d(lo, mid, Norm1D::L2), error_1d(mid, hi, Norm1D::L2), error_1d(lo, hi, Norm1D::L2)});
    };
    EXPECT_LT(spread(0.05), spread(0.2));
}

TEST(Energy, GalerkinIdentityOnEveryVariant)
{
    const ThinDomainSpec spec = oscillating_example();
    const double eps = 0.1;
    const MeshParams p{512, 6, 2, 1.0};
    const Forcing f = example_forcing();
    struct Case {
        CoefficientVariant variant;
        MeshTarget target;
    };
    for (const Case c : {Case{CoefficientVariant::physical, MeshTarget::physical},
                         Case{CoefficientVariant::shifted_Ra, MeshTarget::shifted},
                         Case{CoefficientVariant::Q_full_B, MeshTarget::rectangle},
                         Case{CoefficientVariant::Q_simplified, MeshTarget::rectangle}}) {
        const TriMesh m = generate_mesh(spec, eps, p, c.target);
        const SparseSystem s = assemble(m, CoefficientField(c.variant, spec, eps), f);
        const auto u = solve_cg(s, 1e-12, 200000);
        EXPECT_LE(energy_identity(s, u).relative_gap(), 1e-8) << to_string(c.target);
    }
    EXPECT_EQ((EnergyIdentity{0.0, 0.0}).relative_gap(), 0.0);
}

TEST(Energy, NonNegativeLoadGivesNoSpuriousNegativity)
{
    const Solved s = solve_physical(oscillating_example(), 0.08, {512, 6, 2, 1.0}, example_forcing());
    const double mx = *std::max_element(s.u.begin(), s.u.end());
    const double mn = *std::min_element(s.u.begin(), s.u.end());
    EXPECT_GT(mx, 0.0);
    EXPECT_GE(mn, -1e-8 * mx);
}

TEST(Transfer, ShiftedToPhysicalIsExactOnLattice)
{
    const ThinDomainSpec spec = oscillating_example();
    const double eps = 0.1;
    const MeshParams p{200, 4, 2, 1.0};
    auto phys = std::make_shared<const TriMesh>(generate_mesh(spec, eps, p, MeshTarget::physical));
    auto ra = std::make_shared<const TriMesh>(generate_mesh(spec, eps, p, MeshTarget::shifted));
    std::vector<double> v(phys->vertex_count());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = phys->vertices[k].x * 2 + phys->vertices[k].y;
    double mismatch = -1.0;
    const Field2D moved = transfer_nodal(
        Field2D(phys, v), ra, [&](Point q) { return map_L(spec, q, eps, Direction::forward); }, &mismatch);
    EXPECT_LT(mismatch, 1e-14);
    EXPECT_EQ(moved.values, v);

    auto other = std::make_shared<const TriMesh>(generate_mesh(spec, eps, {100, 4, 2, 1.0}, MeshTarget::shifted));
    EXPECT_THROW((void)transfer_nodal(Field2D(phys, v), other, [](Point q) { return q; }, nullptr), ContractError);
}

TEST(Export, FieldAndRasterCsv)
{
    const double eps = 0.1;
    auto mesh = std::make_shared<const TriMesh>(
        generate_mesh(oscillating_example(), eps, {64, 2, 1, 1.0}, MeshTarget::physical));
    const Field2D f(mesh, std::vector<double>(mesh->vertex_count(), 1.5));
    std::ostringstream a;
    write_field_csv(a, f);
    const std::string s = a.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "x,y,value");
    EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), mesh->vertex_count() + 1);

    std::ostringstream r;
    write_raster_csv(r, f, 20, 10);
    const std::string rs = r.str();
    EXPECT_EQ(std::count(rs.begin(), rs.end(), '\n'), 201);
    EXPECT_NE(rs.find("nan"), std::string::npos);
    std::ostringstream bad;
    EXPECT_THROW(write_raster_csv(bad, f, 1, 10), DomainError);
}
