#pragma once

// Experiment runner: configuration, end-to-end pipelines and reports.
//
// Config files are "key = value" lines; '#' starts a comment. Numbers accept
// arithmetic with pi, sqrt(), ^ and parentheses, so "pi/8" or "1/18" are
// valid. Profile terms are "amplitude frequency phase" triples separated
// by ';'. See configs/example.cfg for the full key list.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "thinhom/fem1d.hpp"
#include "thinhom/fem2d.hpp"
#include "thinhom/forcing.hpp"
#include "thinhom/geometry.hpp"
#include "thinhom/meshgen.hpp"
#include "thinhom/qmean.hpp"

namespace thinhom {

/// Evaluates a numeric expression: + - * / ^, unary minus, parentheses,
/// the constant pi and the functions sqrt, sin, cos, exp, log.
/// Throws ConfigError on malformed input.
[[nodiscard]] double parse_number(std::string_view text);

struct ResolutionPolicy {
    int nx = 0;                  // 0 selects resolving_nx at each eps
    int cells_per_period = 32;
    int min_nx = 64;
    int ny_bulk = 16;
    int ny_strip = 4;
    double grading = 1.0;
    int grid1d = 4096;           // nodes of the fixed limit-problem grid
    int n_quad_y = 8;            // Gauss points across the strip for fhat
};

enum class Pipeline { solve2d, reduced, limit, chain, means };

[[nodiscard]] std::string to_string(Pipeline p);
[[nodiscard]] Pipeline pipeline_from_string(std::string_view name);

struct StudyConfig {
    StudyConfig(ThinDomainSpec s, BoundaryProfile f) : spec(std::move(s)), forcing(std::move(f)) {}

    ThinDomainSpec spec;
    BoundaryProfile forcing;   // f(x), unscaled in x
    LoadMode load_mode = LoadMode::concentrated;
    std::vector<double> eps;   // positive, strictly decreasing
    ResolutionPolicy resolution;
    double tol = 1e-10;
    int max_iter = 200000;
    int threads = 1;
    std::set<Pipeline> pipelines = {Pipeline::solve2d, Pipeline::limit};
    std::filesystem::path out_dir = "results";
    /// Slice heights for exports; slices leaving the domain are skipped.
    std::vector<double> slice_y = {-0.2, 0.0, 0.2};
    int raster_nx = 400;
    int raster_ny = 60;
    HomogenizationOptions means;

    [[nodiscard]] Forcing make_forcing() const { return Forcing::x_only(forcing, load_mode); }
    /// Throws ConfigError if eps is empty, non-positive or not strictly decreasing.
    void validate() const;
};

/// The oscillating-boundary example on I = (0, 20): k1, k2 = 8 -/+ (sin(s) +
/// sin(pi s / 8)) at s = x / eps^{1/5}, H = 2 + sin(x / eps^{1/3}),
/// gamma = 1/18, f = 1 + sin x, eps in {0.1, 0.08, 0.04}.
[[nodiscard]] StudyConfig example_config();

/// Keys absent from the stream keep the example_config() value.
[[nodiscard]] StudyConfig parse_config(std::istream& in);
[[nodiscard]] StudyConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const StudyConfig& config);

[[nodiscard]] MeshParams mesh_params_for(const StudyConfig& config, double eps);

struct LimitResult {
    HomogenizedCoefficients coefficients;
    Solution1D solution;
};

[[nodiscard]] LimitResult run_limit(const StudyConfig& config);

struct ReducedResult {
    double eps = 0.0;
    Solution1D solution;
    double l2_vs_limit = 0.0;         // ||w_hat^eps - w_hat||_{L2(I)}
    double flux_gap = 0.0;            // ||K w_hat^eps_x - (1/P) w_hat_x||_{L2(I)}
};

/// Reduced problem on a grid resolving the oscillations of K_eps and H_eps.
[[nodiscard]] ReducedResult run_reduced(const StudyConfig& config, double eps, const LimitResult& limit);

struct Solve2DResult {
    double eps = 0.0;
    MeshParams params;
    std::size_t vertices = 0;
    std::size_t triangles = 0;
    int iterations = 0;
    double residual = 0.0;
    double energy_gap = 0.0;          // relative Galerkin identity gap
    double l2_error = 0.0;            // rescaled |||w - w_hat|||_{L2}
    double h1_error = 0.0;            // rescaled |||w - w_hat|||_{H1}
    double l2_norm = 0.0;             // rescaled |||w|||_{L2}
    double h1_norm = 0.0;             // rescaled |||w|||_{H1}
    double min_value = 0.0;
    double max_value = 0.0;
    double seconds = 0.0;
    Field2D field;
};

/// Mesh, assemble, solve and compare with the limit solution. When
/// `export_dir` is set, writes mesh.txt, field.csv, raster.csv and one
/// slice_y<value>.csv per slice height that stays inside the domain.
[[nodiscard]] Solve2DResult run_solve2d(const StudyConfig& config, double eps, const LimitResult& limit,
                                        const std::optional<std::filesystem::path>& export_dir = std::nullopt);

struct StudyRow {
    double eps = 0.0;
    bool ok = false;
    std::string error;                // set when !ok
    double l2_error = 0.0;
    double h1_error = 0.0;
    double reduced_vs_limit = 0.0;
    int iterations = 0;
    double energy_gap = 0.0;
    double seconds = 0.0;
};

struct StudyReport {
    std::vector<StudyRow> rows;
    /// Least-squares slope of log(l2_error) against log(eps) over the ok rows.
    std::optional<double> slope;
};

/// Per-eps failures are recorded in the row and the study continues.
[[nodiscard]] StudyReport run_study(const StudyConfig& config, bool export_fields = false);

/// Least-squares slope of log y against log x; nullopt with fewer than two points.
[[nodiscard]] std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y);

struct ChainRow {
    double eps = 0.0;
    double gap_shift = 0.0;      // rescaled |||w o L - v|||_{H1(R_a)}
    double gap_tensor = 0.0;     // Q norm of u - w1 (full tensor vs its diagonal)
    double gap_average = 0.0;    // Q norm of w1 - u1 (u1 = reduced solution, constant in y)
    double gap_total = 0.0;      // rescaled |||w - w_hat^eps|||_{H1(R)}
    double interpolation = 0.0;  // max vertex mismatch of the nodal transfers
    double det_jacobian_L = 1.0;
};

/// Q norm: (||d_x||^2 + eps^-2 ||d_y||^2 + ||d||^2)^{1/2} on Q.
[[nodiscard]] double q_norm(const TriMesh& rectangle, std::span<const double> d, double eps);

[[nodiscard]] std::vector<ChainRow> run_chain(const StudyConfig& config);

struct MeansRow {
    std::string quantity;
    std::string method;
    double value = 0.0;
    std::string detail;
};

/// K1, K2, mu(K), P by every applicable method, q, mu(H) and the
/// torus/long-interval deviation when both apply.
[[nodiscard]] std::vector<MeansRow> run_means(const StudyConfig& config);

/// eps^{-gamma} int_theta v^2 / (eps^{-1} ||v||^2_{H1(R^eps)}) for v given at
/// the mesh vertices of the physical mesh.
[[nodiscard]] double concentrated_ratio(const ThinDomainSpec& spec, double eps, const MeshParams& params,
                                        const std::function<double(double, double)>& v);

void write_study_csv(std::ostream& out, const StudyReport& report);
void write_chain_csv(std::ostream& out, std::span<const ChainRow> rows);
void write_means_csv(std::ostream& out, std::span<const MeansRow> rows);

/// JSON run summary: version, parameters, rows, slope, timings.
[[nodiscard]] std::string study_json(const StudyConfig& config, const StudyReport& report);

/// Directory name for one eps, e.g. "eps_0.08".
[[nodiscard]] std::string eps_dirname(double eps);

[[nodiscard]] std::string version_string();

}  // namespace thinhom
