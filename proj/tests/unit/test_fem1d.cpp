#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "specs.hpp"
#include "thinhom/error.hpp"
#include "thinhom/fem1d.hpp"
#include "thinhom/qmean.hpp"

using namespace thinhom;

namespace {

const double pi = std::numbers::pi;

Solution1D manufactured(int n)
{
    const Problem1D p = limit_problem(1.0, [](double x) { return (1 + pi * pi) * std::cos(pi * x); });
    return solve_1d(p, Grid1D::uniform({0, 1}, n));
}

}  // namespace

TEST(Grid, Validation)
{
    EXPECT_THROW(Grid1D({1.0}), DomainError);
    EXPECT_THROW(Grid1D({0.0, 1.0, 1.0}), DomainError);
    const auto g = Grid1D::uniform({0, 2}, 5);
    EXPECT_EQ(g->size(), 5u);
    EXPECT_EQ(g->b(), 2.0);
    EXPECT_DOUBLE_EQ(g->max_spacing(), 0.5);
    EXPECT_EQ(g->element_of(-1.0), 0u);
    EXPECT_EQ(g->element_of(0.7), 1u);
    EXPECT_EQ(g->element_of(5.0), 3u);
}

TEST(Field, InterpolationAndExtrapolation)
{
    const Field1D f(Grid1D::uniform({0, 1}, 3), {0.0, 1.0, 4.0});
    EXPECT_DOUBLE_EQ(f(0.25), 0.5);
    EXPECT_DOUBLE_EQ(f(0.75), 2.5);
    EXPECT_EQ(f(-3.0), 0.0);
    EXPECT_EQ(f(9.0), 4.0);
    EXPECT_DOUBLE_EQ(f.derivative(0.8), 6.0);
    EXPECT_THROW(Field1D(Grid1D::uniform({0, 1}, 3), {1.0}), ContractError);
}

TEST(Solve1D, ConstantLoadIsExact)
{
    const Solution1D s = solve_1d(limit_problem(1.0, [](double) { return 1.0; }), Grid1D::uniform({0, 3}, 40));
    for (double v : s.field.values) EXPECT_NEAR(v, 1.0, 1e-13);
}

TEST(Solve1D, ManufacturedCosineSecondOrder)
{
    const auto exact = [](double x) { return std::cos(pi * x); };
    double prev = 0.0;
    for (int n : {33, 65, 129, 257}) {
        const Solution1D s = manufactured(n);
        const double e = error_1d(s.field, exact, Norm1D::L2);
        if (prev > 0.0) EXPECT_NEAR(prev / e, 4.0, 0.4) << n;
        prev = e;
        EXPECT_LE(std::abs(s.energy - s.work), 1e-10 * std::abs(s.work));
    }
}

TEST(Solve1D, ManufacturedH1FirstOrder)
{
    const auto exact = [](double x) { return std::cos(pi * x); };
    const auto slope = [](double x) { return -pi * std::sin(pi * x); };
    const double e1 = error_1d(manufactured(65).field, exact, Norm1D::H1, slope);
    const double e2 = error_1d(manufactured(129).field, exact, Norm1D::H1, slope);
    EXPECT_NEAR(e1 / e2, 2.0, 0.15);
    EXPECT_THROW((void)error_1d(manufactured(9).field, exact, Norm1D::H1), ContractError);
}

TEST(Solve1D, ExampleLimitClosedForm)
{
    const thinhom::testing::ExampleLimit w;
    // 30-digit values of the same coefficients
    EXPECT_NEAR(w.d1, -0.0255051287345148978348366992511, 1e-15);
    EXPECT_NEAR(w.c2, 0.062499999947430011518092868055, 1e-15);
    EXPECT_NEAR(w(0.0), 0.18749999989486002303618573611, 1e-15);
    EXPECT_NEAR(w(10.0), 0.0910003601339690251811318758017, 1e-15);
    EXPECT_NEAR(w(20.0), 0.156553949564783931857724591796, 1e-15);
    EXPECT_NEAR(w.slope(0.0), 0.0, 1e-16);
    EXPECT_NEAR(w.slope(20.0), 0.0, 1e-16);

    const Problem1D p = limit_problem(1.0, [](double x) { return (1 + std::sin(x)) / 8; });
    const Solution1D s = solve_1d(p, Grid1D::uniform({0, 20}, 8192));
    EXPECT_LE(error_1d(s.field, [&](double x) { return w(x); }, Norm1D::L2), 1e-6);
    const Solution1D coarse = solve_1d(p, Grid1D::uniform({0, 20}, 1025));
    const double ec = error_1d(coarse.field, [&](double x) { return w(x); }, Norm1D::L2);
    const Solution1D fine = solve_1d(p, Grid1D::uniform({0, 20}, 2049));
    const double ef = error_1d(fine.field, [&](double x) { return w(x); }, Norm1D::L2);
    EXPECT_NEAR(ec / ef, 4.0, 0.4);
}

TEST(Solve1D, RejectsNonPositiveStiffness)
{
    Problem1D p = limit_problem(1.0, [](double) { return 1.0; });
    p.stiffness = [](double x) { return x - 0.5; };
    EXPECT_THROW((void)solve_1d(p, Grid1D::uniform({0, 1}, 11)), DomainError);
    EXPECT_THROW((void)solve_1d(limit_problem(0.0, [](double) { return 1.0; }), Grid1D::uniform({0, 1}, 5)),
                 DomainError);
}

TEST(Fhat, UnitForcingIsHeightOverThickness)
{
    const ThinDomainSpec spec = thinhom::testing::oscillating_example();
    const double eps = 0.08;
    const auto grid = Grid1D::uniform({0, 20}, 101);
    const Field1D f = compute_fhat(spec, Forcing::constant(1.0), eps, grid, 4);
    for (std::size_t k = 0; k < grid->size(); ++k) {
        const double x = grid->nodes()[k];
        const double expected = std::pow(eps, 1.0 / 18.0) * spec.strip().height.value(x, eps) / 16.0;
        EXPECT_NEAR(f.values[k], expected, 1e-15);
    }
    EXPECT_THROW((void)compute_fhat(spec, Forcing::constant(1.0), eps, grid, 1), DomainError);
}

TEST(Fhat, ExampleScaledLoadIsProduct)
{
    const ThinDomainSpec spec = thinhom::testing::oscillating_example();
    const Forcing f = Forcing::x_only(BoundaryProfile(1.0, {{1.0, 1.0, 0.0}}));
    const double eps = 0.04;
    for (double x : {0.0, 2.5, 13.1}) {
        const double expected = (1 + std::sin(x)) * (2 + std::sin(x / std::cbrt(eps))) / 16;
        EXPECT_NEAR(scaled_fhat_at(spec, f, eps, x, 8), expected, 1e-14);
    }
    // a forcing varying in y is integrated by the Gauss rule
    Forcing fy;
    fy.f = [](double, double y) { return y; };
    const double x = 1.0;
    const double top = spec.top(x, eps);
    const double d = spec.strip_depth(x, eps);
    const double mean = top - d / 2;
    EXPECT_NEAR(scaled_fhat_at(spec, fy, eps, x, 3), mean * spec.strip().height.value(x, eps) / 16, 1e-15);
    EXPECT_EQ(scaled_fhat_at(spec, Forcing::constant(0.0), eps, x, 4), 0.0);
}

TEST(Error1D, Basics)
{
    const auto g = Grid1D::uniform({0, 20}, 7);
    const Field1D one(g, std::vector<double>(7, 1.0));
    const Field1D zero(Grid1D::uniform({0, 20}, 4), std::vector<double>(4, 0.0));
    EXPECT_NEAR(error_1d(one, zero, Norm1D::L2), std::sqrt(20.0), 1e-13);
    EXPECT_EQ(error_1d(one, one, Norm1D::H1), 0.0);
    const Field1D elsewhere(Grid1D::uniform({0, 10}, 3), std::vector<double>(3, 0.0));
    EXPECT_THROW((void)error_1d(one, elsewhere, Norm1D::L2), ContractError);
}

TEST(Error1D, MergedNodesAreExact)
{
    // x on a coarse grid vs x^2 interpolated on a finer one, computed by hand:
    // int_0^1 (x - I_h x^2)^2 with h = 1/2.
    const Field1D lin(Grid1D::uniform({0, 1}, 2), {0.0, 1.0});
    const Field1D quad(Grid1D::uniform({0, 1}, 3), {0.0, 0.25, 1.0});
    // difference is piecewise linear: 0 -> 0.25 -> 0 on [0, 1/2, 1]
    EXPECT_NEAR(error_1d(lin, quad, Norm1D::L2), std::sqrt(0.0625 / 3.0), 1e-15);
}

TEST(Reduced, ConstantThicknessMatchesLimit)
{
    const ThinDomainSpec spec = thinhom::testing::constant_spec({0, 2}, 0.25, 0.75, 1.0, 0.5);
    const Forcing f = Forcing::x_only(BoundaryProfile(0.0, {{1.0, 2.0, 0.3}}));
    const double eps = 0.05;
    const auto grid = Grid1D::uniform({0, 2}, 513);
    const Solution1D red = solve_1d(reduced_problem(spec, f, eps), grid);
    const Problem1D lim = limit_problem(1.0, [&](double x) { return scaled_fhat_at(spec, f, eps, x, 8); });
    const Solution1D l = solve_1d(lim, grid);
    for (std::size_t k = 0; k < grid->size(); ++k) EXPECT_NEAR(red.field.values[k], l.field.values[k], 1e-12);
}

TEST(Reduced, ConvergesToLimitAlongEps)
{
    // non-constant quasi-periodic thickness on one scale
    const double a = 0.3;
    const ThinDomainSpec spec({0, 10}, ScaledProfile(BoundaryProfile(1.0, {{0.4, 1.0, 0.0}}), a),
                              ScaledProfile(BoundaryProfile(1.5, {{0.5, std::sqrt(2.0), 0.0}}), a),
                              StripSpec{0.5, ScaledProfile(BoundaryProfile(1.0), 0.0)});
    const Forcing f = Forcing::x_only(BoundaryProfile(1.0, {{0.5, 1.0, 0.0}}));
    HomogenizationOptions opt;
    opt.T_grid = {1e3, 1e4};
    const HomogenizedCoefficients c = homogenized_coefficients(spec, [&](double x) { return f(x, 0.0); }, opt);
    EXPECT_LT(c.q, 1.0);
    const auto grid = Grid1D::uniform({0, 10}, 40001);
    const Solution1D lim = solve_1d(limit_problem(c.q, c.fhat), grid);
    const double flux = 1.0 / c.P;
    double prev_l2 = INFINITY;
    double prev_flux = INFINITY;
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
        const Solution1D red = solve_1d(reduced_problem(spec, f, eps), grid);
        EXPECT_LE(std::abs(red.energy - red.work), 1e-10 * std::abs(red.work));
        const double e = error_1d(red.field, lim.field, Norm1D::L2);
        const double g = flux_gap_l2(red.field, [&](double x) { return spec.thickness(x, eps); }, lim.field,
                                     [&](double) { return flux; });
        EXPECT_LT(e, prev_l2) << eps;
        EXPECT_LT(g, prev_flux) << eps;
        prev_l2 = e;
        prev_flux = g;
    }
}

TEST(Export, CsvHeaderAndRows)
{
    const Field1D f(Grid1D::uniform({0, 1}, 3), {1.0, 2.0, 3.0});
    std::ostringstream out;
    write_field1d_csv(out, f);
    EXPECT_EQ(out.str(), "x,value\n0,1\n0.5,2\n1,3\n");
}
