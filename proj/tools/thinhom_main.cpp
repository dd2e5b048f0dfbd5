// thinhom: command-line front end for the thin-domain solvers.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thinhom/error.hpp"
#include "thinhom/harness.hpp"

namespace fs = std::filesystem;
using namespace thinhom;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string eps_list;
    std::string out_dir;
    int nx = -1;
    int ny_bulk = -1;
    int ny_strip = -1;
    int grid1d = -1;
    double tol = -1.0;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config_path, "Key-value config file (default: built-in example)");
    cmd->add_option("--eps", f.eps_list, "Comma-separated eps list, strictly decreasing");
    cmd->add_option("--out", f.out_dir, "Output directory");
    cmd->add_option("--nx", f.nx, "Mesh columns (0 = resolve the oscillations)");
    cmd->add_option("--ny-bulk", f.ny_bulk, "Mesh levels below the strip");
    cmd->add_option("--ny-strip", f.ny_strip, "Mesh levels inside the strip");
    cmd->add_option("--grid1d", f.grid1d, "Nodes of the 1D limit grid");
    cmd->add_option("--tol", f.tol, "CG relative tolerance");
    cmd->add_option("--threads", f.threads, "Assembly threads");
}

StudyConfig resolve(const CommonFlags& f)
{
    StudyConfig c = f.config_path.empty() ? example_config() : load_config(f.config_path);
    if (!f.eps_list.empty()) {
        c.eps.clear();
        std::string item;
        for (char ch : f.eps_list + ",") {
            if (ch == ',') {
                if (!item.empty()) c.eps.push_back(parse_number(item));
                item.clear();
            } else {
                item += ch;
            }
        }
    }
    if (!f.out_dir.empty()) c.out_dir = f.out_dir;
    if (f.nx >= 0) c.resolution.nx = f.nx;
    if (f.ny_bulk > 0) c.resolution.ny_bulk = f.ny_bulk;
    if (f.ny_strip > 0) c.resolution.ny_strip = f.ny_strip;
    if (f.grid1d > 0) c.resolution.grid1d = f.grid1d;
    if (f.tol > 0.0) c.tol = f.tol;
    if (f.threads > 0) c.threads = f.threads;
    c.validate();
    return c;
}

std::ofstream open_file(const fs::path& p)
{
    fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    return out;
}

int cmd_solve2d(const StudyConfig& c)
{
    const LimitResult limit = run_limit(c);
    std::printf("%-8s %8s %10s %6s %12s %12s %12s\n", "eps", "nx", "vertices", "iters", "L2 error", "H1 error",
                "energy gap");
    for (double eps : c.eps) {
        const Solve2DResult r = run_solve2d(c, eps, limit, c.out_dir / eps_dirname(eps));
        std::printf("%-8g %8d %10zu %6d %12.6g %12.6g %12.3e\n", eps, r.params.nx, r.vertices, r.iterations,
                    r.l2_error, r.h1_error, r.energy_gap);
    }
    std::printf("fields written under %s\n", c.out_dir.string().c_str());
    return 0;
}

int cmd_reduced(const StudyConfig& c)
{
    const LimitResult limit = run_limit(c);
    std::printf("%-8s %10s %14s %14s\n", "eps", "nodes", "L2 vs limit", "flux gap");
    for (double eps : c.eps) {
        const ReducedResult r = run_reduced(c, eps, limit);
        auto out = open_file(c.out_dir / eps_dirname(eps) / "reduced.csv");
        write_field1d_csv(out, r.solution.field);
        std::printf("%-8g %10zu %14.6g %14.6g\n", eps, r.solution.field.grid->size(), r.l2_vs_limit, r.flux_gap);
    }
    return 0;
}

int cmd_limit(const StudyConfig& c)
{
    const LimitResult r = run_limit(c);
    auto out = open_file(c.out_dir / "limit.csv");
    write_field1d_csv(out, r.solution.field);
    std::printf("q = %.17g\nP = %.17g (%s)\nmu(H) = %.17g\nnodes = %zu\nenergy = %.17g\nwork = %.17g\n",
                r.coefficients.q, r.coefficients.P, to_string(r.coefficients.method).c_str(), r.coefficients.muH,
                r.solution.field.grid->size(), r.solution.energy, r.solution.work);
    return 0;
}

int cmd_study(const StudyConfig& c, bool export_fields)
{
    const StudyReport report = run_study(c, export_fields);
    fs::create_directories(c.out_dir);
    {
        auto out = open_file(c.out_dir / "study.csv");
        write_study_csv(out, report);
    }
    {
        auto out = open_file(c.out_dir / "study.json");
        out << study_json(c, report) << '\n';
    }
    write_study_csv(std::cout, report);
    if (report.slope) std::printf("log-log slope: %.4f\n", *report.slope);
    bool all_ok = true;
    for (const auto& r : report.rows) {
        if (!r.ok) {
            std::fprintf(stderr, "eps %g failed: %s\n", r.eps, r.error.c_str());
            all_ok = false;
        }
    }
    return all_ok ? 0 : 1;
}

int cmd_chain(const StudyConfig& c)
{
    const auto rows = run_chain(c);
    auto out = open_file(c.out_dir / "chain.csv");
    write_chain_csv(out, rows);
    write_chain_csv(std::cout, rows);
    return 0;
}

int cmd_means(const StudyConfig& c)
{
    const auto rows = run_means(c);
    auto out = open_file(c.out_dir / "means.csv");
    write_means_csv(out, rows);
    write_means_csv(std::cout, rows);
    return 0;
}

int cmd_mesh(const StudyConfig& c, const std::string& target_name)
{
    MeshTarget target = MeshTarget::physical;
    if (target_name == "shifted") {
        target = MeshTarget::shifted;
    } else if (target_name == "rectangle") {
        target = MeshTarget::rectangle;
    } else if (target_name != "physical") {
        throw ConfigError("--target must be physical, shifted or rectangle");
    }
    std::printf("%-8s %8s %10s %10s %12s %12s %14s %14s\n", "eps", "nx", "vertices", "triangles", "min angle",
                "max aspect", "area", "strip area");
    for (double eps : c.eps) {
        const MeshParams p = mesh_params_for(c, eps);
        const TriMesh mesh = generate_mesh(c.spec, eps, p, target);
        const QualityReport q = quality_report(mesh);
        auto out = open_file(c.out_dir / eps_dirname(eps) / ("mesh_" + to_string(target) + ".txt"));
        write_mesh(out, mesh);
        std::printf("%-8g %8d %10zu %10zu %12.4f %12.4g %14.8g %14.8g\n", eps, p.nx, mesh.vertex_count(),
                    mesh.triangle_count(), q.min_angle_deg, q.max_aspect, q.total_area, q.strip_area);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Thin-domain homogenization solvers"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    CommonFlags flags;
    bool export_fields = false;
    std::string mesh_target = "physical";
    bool dump_config = false;

    auto* solve2d = app.add_subcommand("solve2d", "Solve the 2D problem and export fields, slices and raster");
    auto* reduced = app.add_subcommand("reduced", "Solve the reduced 1D problem at each eps");
    auto* limit = app.add_subcommand("limit", "Solve the homogenized limit problem");
    auto* study = app.add_subcommand("study", "Error table against the limit and log-log slope");
    auto* chain = app.add_subcommand("chain", "Gaps along the intermediate problems");
    auto* means = app.add_subcommand("means", "Homogenized coefficients by every available method");
    auto* mesh = app.add_subcommand("mesh", "Generate meshes and print quality statistics");
    auto* config = app.add_subcommand("config", "Print the effective configuration");
    for (auto* cmd : {solve2d, reduced, limit, study, chain, means, mesh, config}) add_common(cmd, flags);
    study->add_flag("--export-fields", export_fields, "Also write per-eps field directories");
    mesh->add_option("--target", mesh_target, "physical, shifted or rectangle");
    config->add_flag("--dump", dump_config, "Print in config-file syntax (default)");

    CLI11_PARSE(app, argc, argv);

    try {
        const StudyConfig c = resolve(flags);
        if (solve2d->parsed()) return cmd_solve2d(c);
        if (reduced->parsed()) return cmd_reduced(c);
        if (limit->parsed()) return cmd_limit(c);
        if (study->parsed()) return cmd_study(c, export_fields);
        if (chain->parsed()) return cmd_chain(c);
        if (means->parsed()) return cmd_means(c);
        if (mesh->parsed()) return cmd_mesh(c, mesh_target);
        if (config->parsed()) {
            write_config(std::cout, c);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
