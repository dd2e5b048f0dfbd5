#include "thinhom/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "thinhom/error.hpp"

#ifndef THINHOM_VERSION
#define THINHOM_VERSION "0.0.0"
#endif

namespace thinhom {

std::string version_string()
{
    return THINHOM_VERSION;
}

// ---------------------------------------------------------------------------
// Expressions

namespace {

class ExprParser {
public:
    explicit ExprParser(std::string_view s) : s_(s) {}

    double parse()
    {
        const double v = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError("bad number '" + std::string(s_) + "': " + msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    double sum()
    {
        double v = product();
        for (;;) {
            if (eat('+')) {
                v += product();
            } else if (eat('-')) {
                v -= product();
            } else {
                return v;
            }
        }
    }

    double product()
    {
        double v = unary();
        for (;;) {
            if (eat('*')) {
                v *= unary();
            } else if (eat('/')) {
                v /= unary();
            } else {
                return v;
            }
        }
    }

    double unary()
    {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return power();
    }

    double power()
    {
        const double base = atom();
        if (eat('^')) return std::pow(base, unary());
        return base;
    }

    double atom()
    {
        skip();
        if (eat('(')) {
            const double v = sum();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string_view name = s_.substr(start, pos_ - start);
            if (name == "pi") return std::numbers::pi;
            if (!eat('(')) fail("unknown name '" + std::string(name) + "'");
            const double arg = sum();
            if (!eat(')')) fail("missing ')'");
            if (name == "sqrt") return std::sqrt(arg);
            if (name == "sin") return std::sin(arg);
            if (name == "cos") return std::cos(arg);
            if (name == "exp") return std::exp(arg);
            if (name == "log") return std::log(arg);
            fail("unknown function '" + std::string(name) + "'");
        }
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr == first) fail("expected a number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }
};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto p = s.find(sep, start);
        std::string part = trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (!part.empty()) out.push_back(std::move(part));
        if (p == std::string_view::npos) return out;
        start = p + 1;
    }
}

std::vector<double> parse_list(std::string_view s)
{
    std::vector<double> out;
    std::string normalized(s);
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    for (const auto& tok : split(normalized, ' ')) out.push_back(parse_number(tok));
    return out;
}

std::vector<TrigComponent> parse_terms(std::string_view s)
{
    std::vector<TrigComponent> out;
    for (const auto& term : split(s, ';')) {
        const auto v = parse_list(term);
        if (v.size() != 2 && v.size() != 3) {
            throw ConfigError("profile term '" + term + "' needs 'amplitude frequency [phase]'");
        }
        out.push_back({v[0], v[1], v.size() == 3 ? v[2] : 0.0});
    }
    return out;
}

int parse_int(std::string_view s)
{
    const double v = parse_number(s);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw ConfigError("expected an integer, got '" + std::string(s) + "'");
    }
    return static_cast<int>(v);
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_terms(std::span<const TrigComponent> terms)
{
    std::string out;
    for (const auto& t : terms) {
        if (!out.empty()) out += "; ";
        out += format_double(t.amplitude) + " " + format_double(t.frequency) + " " + format_double(t.phase);
    }
    return out;
}

}  // namespace

double parse_number(std::string_view text)
{
    return ExprParser(text).parse();
}

// ---------------------------------------------------------------------------
// Configuration

std::string to_string(Pipeline p)
{
    switch (p) {
    case Pipeline::solve2d: return "solve2d";
    case Pipeline::reduced: return "reduced";
    case Pipeline::limit: return "limit";
    case Pipeline::chain: return "chain";
    case Pipeline::means: return "means";
    }
    return "unknown";
}

Pipeline pipeline_from_string(std::string_view name)
{
    for (Pipeline p : {Pipeline::solve2d, Pipeline::reduced, Pipeline::limit, Pipeline::chain, Pipeline::means}) {
        if (to_string(p) == name) return p;
    }
    throw ConfigError("unknown pipeline '" + std::string(name) + "'");
}

void StudyConfig::validate() const
{
    if (eps.empty()) throw ConfigError("eps list is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw ConfigError("eps values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("eps values must be strictly decreasing");
    }
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (resolution.grid1d < 2) throw ConfigError("grid1d must be >= 2");
    if (resolution.n_quad_y < 2) throw ConfigError("n_quad_y must be >= 2");
}

StudyConfig example_config()
{
    const double pi = std::numbers::pi;
    BoundaryProfile lower(8.0, {{-1.0, 1.0, 0.0}, {-1.0, pi / 8.0, 0.0}});
    BoundaryProfile upper(8.0, {{1.0, 1.0, 0.0}, {1.0, pi / 8.0, 0.0}});
    BoundaryProfile height(2.0, {{1.0, 1.0, 0.0}});
    ThinDomainSpec spec({0.0, 20.0}, ScaledProfile(lower, 0.2), ScaledProfile(upper, 0.2),
                        StripSpec{1.0 / 18.0, ScaledProfile(height, 1.0 / 3.0)});
    StudyConfig c(std::move(spec), BoundaryProfile(1.0, {{1.0, 1.0, 0.0}}));
    c.eps = {0.1, 0.08, 0.04};
    return c;
}

namespace {

struct ProfileFields {
    double constant = 0.0;
    double scale = 0.0;
    std::vector<TrigComponent> terms;
};

ProfileFields fields_of(const ScaledProfile& p)
{
    const auto c = p.base().components();
    return {p.base().constant_term(), p.scale_exponent(), {c.begin(), c.end()}};
}

ScaledProfile build(const ProfileFields& f)
{
    return ScaledProfile(BoundaryProfile(f.constant, f.terms), f.scale);
}

}  // namespace

StudyConfig parse_config(std::istream& in)
{
    StudyConfig c = example_config();
    Interval interval = c.spec.interval();
    ProfileFields lower = fields_of(c.spec.lower());
    ProfileFields upper = fields_of(c.spec.upper());
    ProfileFields height = fields_of(c.spec.strip().height);
    double gamma = c.spec.strip().gamma;
    double f_const = c.forcing.constant_term();
    std::vector<TrigComponent> f_terms(c.forcing.components().begin(), c.forcing.components().end());

    std::map<std::string, ProfileFields*> profiles{{"lower", &lower}, {"upper", &upper}, {"height", &height}};

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        try {
            if (const auto dot = key.find('.'); dot != std::string::npos && profiles.count(key.substr(0, dot))) {
                ProfileFields& p = *profiles[key.substr(0, dot)];
                const std::string field = key.substr(dot + 1);
                if (field == "constant") {
                    p.constant = parse_number(value);
                } else if (field == "scale") {
                    p.scale = parse_number(value);
                } else if (field == "terms") {
                    p.terms = parse_terms(value);
                } else {
                    throw ConfigError("unknown key '" + key + "'");
                }
            } else if (key == "interval") {
                const auto v = parse_list(value);
                if (v.size() != 2) throw ConfigError("interval needs two numbers");
                interval = {v[0], v[1]};
            } else if (key == "gamma") {
                gamma = parse_number(value);
            } else if (key == "forcing.constant") {
                f_const = parse_number(value);
            } else if (key == "forcing.terms") {
                f_terms = parse_terms(value);
            } else if (key == "forcing.mode") {
                if (value == "concentrated") {
                    c.load_mode = LoadMode::concentrated;
                } else if (value == "bulk") {
                    c.load_mode = LoadMode::bulk;
                } else {
                    throw ConfigError("forcing.mode must be concentrated or bulk");
                }
            } else if (key == "eps") {
                c.eps = parse_list(value);
            } else if (key == "nx") {
                c.resolution.nx = parse_int(value);
            } else if (key == "cells_per_period") {
                c.resolution.cells_per_period = parse_int(value);
            } else if (key == "min_nx") {
                c.resolution.min_nx = parse_int(value);
            } else if (key == "ny_bulk") {
                c.resolution.ny_bulk = parse_int(value);
            } else if (key == "ny_strip") {
                c.resolution.ny_strip = parse_int(value);
            } else if (key == "grading") {
                c.resolution.grading = parse_number(value);
            } else if (key == "grid1d") {
                c.resolution.grid1d = parse_int(value);
            } else if (key == "n_quad_y") {
                c.resolution.n_quad_y = parse_int(value);
            } else if (key == "tol") {
                c.tol = parse_number(value);
            } else if (key == "max_iter") {
                c.max_iter = parse_int(value);
            } else if (key == "threads") {
                c.threads = parse_int(value);
            } else if (key == "pipelines") {
                c.pipelines.clear();
                std::string v = value;
                std::replace(v.begin(), v.end(), ',', ' ');
                for (const auto& name : split(v, ' ')) c.pipelines.insert(pipeline_from_string(name));
            } else if (key == "out") {
                c.out_dir = value;
            } else if (key == "slice_y") {
                c.slice_y = parse_list(value);
            } else if (key == "raster") {
                const auto v = parse_list(value);
                if (v.size() != 2) throw ConfigError("raster needs 'nx ny'");
                c.raster_nx = static_cast<int>(v[0]);
                c.raster_ny = static_cast<int>(v[1]);
            } else if (key == "torus_points") {
                c.means.torus_points = parse_int(value);
            } else if (key == "T_grid") {
                c.means.T_grid = parse_list(value);
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    try {
        c.spec = ThinDomainSpec(interval, build(lower), build(upper), StripSpec{gamma, build(height)});
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid domain: ") + e.what());
    }
    c.forcing = BoundaryProfile(f_const, std::move(f_terms));
    c.validate();
    return c;
}

StudyConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_config(in);
}

void write_config(std::ostream& out, const StudyConfig& c)
{
    const auto& s = c.spec;
    out << "interval = " << format_double(s.interval().a) << ' ' << format_double(s.interval().b) << '\n';
    const std::pair<const char*, const ScaledProfile*> profiles[] = {
        {"lower", &s.lower()}, {"upper", &s.upper()}, {"height", &s.strip().height}};
    for (const auto& [name, p] : profiles) {
        out << name << ".constant = " << format_double(p->base().constant_term()) << '\n';
        out << name << ".scale = " << format_double(p->scale_exponent()) << '\n';
        out << name << ".terms = " << format_terms(p->base().components()) << '\n';
    }
    out << "gamma = " << format_double(s.strip().gamma) << '\n';
    out << "forcing.constant = " << format_double(c.forcing.constant_term()) << '\n';
    out << "forcing.terms = " << format_terms(c.forcing.components()) << '\n';
    out << "forcing.mode = " << (c.load_mode == LoadMode::bulk ? "bulk" : "concentrated") << '\n';
    out << "eps =";
    for (double e : c.eps) out << ' ' << format_double(e);
    out << '\n';
    const auto& r = c.resolution;
    out << "nx = " << r.nx << "\ncells_per_period = " << r.cells_per_period << "\nmin_nx = " << r.min_nx
        << "\nny_bulk = " << r.ny_bulk << "\nny_strip = " << r.ny_strip << "\ngrading = " << format_double(r.grading)
        << "\ngrid1d = " << r.grid1d << "\nn_quad_y = " << r.n_quad_y << '\n';
    out << "tol = " << format_double(c.tol) << "\nmax_iter = " << c.max_iter << "\nthreads = " << c.threads << '\n';
    out << "pipelines =";
    for (Pipeline p : c.pipelines) out << ' ' << to_string(p);
    out << "\nout = " << c.out_dir.string() << '\n';
    out << "slice_y =";
    for (double y : c.slice_y) out << ' ' << format_double(y);
    out << "\nraster = " << c.raster_nx << ' ' << c.raster_ny << '\n';
    out << "torus_points = " << c.means.torus_points << "\nT_grid =";
    for (double t : c.means.T_grid) out << ' ' << format_double(t);
    out << '\n';
}

MeshParams mesh_params_for(const StudyConfig& config, double eps)
{
    const ResolutionPolicy& r = config.resolution;
    MeshParams p;
    p.nx = r.nx > 0 ? r.nx : std::max(r.min_nx, resolving_nx(config.spec, eps, r.cells_per_period));
    p.ny_bulk = r.ny_bulk;
    p.ny_strip = r.ny_strip;
    p.grading = r.grading;
    return p;
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<const Grid1D> reduced_grid(const StudyConfig& config, double eps)
{
    const auto& spec = config.spec;
    double wl = std::min({spec.lower().shortest_wavelength(eps), spec.upper().shortest_wavelength(eps),
                          spec.strip().height.shortest_wavelength(eps)});
    int n = config.resolution.grid1d;
    if (std::isfinite(wl)) {
        const double cells = std::ceil(spec.interval().length() / wl * config.resolution.cells_per_period);
        n = std::max(n, static_cast<int>(std::min(cells, 1e7)) + 1);
    }
    return Grid1D::uniform(spec.interval(), n);
}

std::string slice_name(double y)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "slice_y%g.csv", y);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream out(p);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    return out;
}

}  // namespace

std::string eps_dirname(double eps)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "eps_%g", eps);
    return buf;
}

LimitResult run_limit(const StudyConfig& config)
{
    LimitResult r;
    const BoundaryProfile f = config.forcing;
    r.coefficients = homogenized_coefficients(config.spec, [f](double x) { return f(x); }, config.means);
    const auto grid = Grid1D::uniform(config.spec.interval(), config.resolution.grid1d);
    r.solution = solve_1d(limit_problem(r.coefficients.q, r.coefficients.fhat), grid);
    return r;
}

ReducedResult run_reduced(const StudyConfig& config, double eps, const LimitResult& limit)
{
    ReducedResult r;
    r.eps = eps;
    const Forcing forcing = config.make_forcing();
    r.solution = solve_1d(reduced_problem(config.spec, forcing, eps, config.resolution.n_quad_y),
                          reduced_grid(config, eps));
    r.l2_vs_limit = error_1d(r.solution.field, limit.solution.field, Norm1D::L2);
    const ThinDomainSpec& spec = config.spec;
    const double inv_p = 1.0 / limit.coefficients.P;
    r.flux_gap = flux_gap_l2(
        r.solution.field, [&spec, eps](double x) { return spec.thickness(x, eps); }, limit.solution.field,
        [inv_p](double) { return inv_p; });
    return r;
}

Solve2DResult run_solve2d(const StudyConfig& config, double eps, const LimitResult& limit,
                          const std::optional<std::filesystem::path>& export_dir)
{
    const auto t0 = Clock::now();
    Solve2DResult r;
    r.eps = eps;
    r.params = mesh_params_for(config, eps);
    auto mesh = std::make_shared<const TriMesh>(generate_mesh(config.spec, eps, r.params, MeshTarget::physical));
    r.vertices = mesh->vertex_count();
    r.triangles = mesh->triangle_count();

    const CoefficientField coeff(CoefficientVariant::physical, config.spec, eps);
    const SparseSystem sys = assemble(*mesh, coeff, config.make_forcing(), AssemblyOptions{config.threads});
    SolveStats stats;
    std::vector<double> u = solve_cg(sys, config.tol, config.max_iter, &stats);
    r.iterations = stats.iterations;
    r.residual = stats.relative_residual;
    r.energy_gap = energy_identity(sys, u).relative_gap();
    const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
    r.min_value = *mn;
    r.max_value = *mx;

    r.field = Field2D(mesh, std::move(u));
    r.l2_norm = norm(r.field, {NormType::L2, true}, eps);
    r.h1_norm = norm(r.field, {NormType::H1, true}, eps);
    r.l2_error = diff_with_1d(r.field, limit.solution.field, {NormType::L2, true}, eps);
    r.h1_error = diff_with_1d(r.field, limit.solution.field, {NormType::H1, true}, eps);

    if (export_dir) {
        std::filesystem::create_directories(*export_dir);
        {
            auto out = open_out(*export_dir / "mesh.txt");
            write_mesh(out, *mesh);
        }
        {
            auto out = open_out(*export_dir / "field.csv");
            write_field_csv(out, r.field);
        }
        {
            auto out = open_out(*export_dir / "raster.csv");
            write_raster_csv(out, r.field, config.raster_nx, config.raster_ny);
        }
        const int n_samples = std::max(2 * r.params.nx + 1, 2);
        for (double y : config.slice_y) {
            try {
                const Field1D slice = slice_extract(r.field, y, n_samples);
                auto out = open_out(*export_dir / slice_name(y));
                write_field1d_csv(out, slice);
            } catch (const SliceError&) {
                // the line leaves this thin domain; nothing to export
            }
        }
    }
    r.seconds = seconds_since(t0);
    return r;
}

std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw ContractError("loglog_slope: size mismatch");
    if (x.size() < 2) return std::nullopt;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

StudyReport run_study(const StudyConfig& config, bool export_fields)
{
    config.validate();
    StudyReport report;
    const LimitResult limit = run_limit(config);
    for (double eps : config.eps) {
        StudyRow row;
        row.eps = eps;
        try {
            std::optional<std::filesystem::path> dir;
            if (export_fields) dir = config.out_dir / eps_dirname(eps);
            const Solve2DResult s = run_solve2d(config, eps, limit, dir);
            const ReducedResult red = run_reduced(config, eps, limit);
            row.l2_error = s.l2_error;
            row.h1_error = s.h1_error;
            row.reduced_vs_limit = red.l2_vs_limit;
            row.iterations = s.iterations;
            row.energy_gap = s.energy_gap;
            row.seconds = s.seconds;
            row.ok = true;
            if (dir) {
                auto out = open_out(*dir / "reduced.csv");
                write_field1d_csv(out, red.solution.field);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& row : report.rows) {
        if (row.ok && row.l2_error > 0.0) {
            xs.push_back(row.eps);
            ys.push_back(row.l2_error);
        }
    }
    report.slope = loglog_slope(xs, ys);
    return report;
}

double q_norm(const TriMesh& rectangle, std::span<const double> d, double eps)
{
    const NormParts p = norm_parts(rectangle, d);
    return std::sqrt(p.dx + p.dy / (eps * eps) + p.l2);
}

std::vector<ChainRow> run_chain(const StudyConfig& config)
{
    config.validate();
    std::vector<ChainRow> rows;
    const ThinDomainSpec& spec = config.spec;
    const Forcing forcing = config.make_forcing();
    const LimitResult limit = run_limit(config);
    const AssemblyOptions opts{config.threads};

    for (double eps : config.eps) {
        ChainRow row;
        row.eps = eps;
        const MeshParams params = mesh_params_for(config, eps);
        auto solve = [&](const TriMesh& mesh, CoefficientVariant variant) {
            const CoefficientField coeff(variant, spec, eps);
            return solve_cg(assemble(mesh, coeff, forcing, opts), config.tol, config.max_iter);
        };

        auto physical = std::make_shared<const TriMesh>(generate_mesh(spec, eps, params, MeshTarget::physical));
        auto shifted = std::make_shared<const TriMesh>(generate_mesh(spec, eps, params, MeshTarget::shifted));
        auto rect = std::make_shared<const TriMesh>(generate_mesh(spec, eps, params, MeshTarget::rectangle));

        const Field2D w(physical, solve(*physical, CoefficientVariant::physical));
        const std::vector<double> v = solve(*shifted, CoefficientVariant::shifted_Ra);
        const std::vector<double> u = solve(*rect, CoefficientVariant::Q_full_B);
        const std::vector<double> w1 = solve(*rect, CoefficientVariant::Q_simplified);

        double mismatch_l = 0.0;
        const Field2D w_on_ra = transfer_nodal(
            w, shifted, [&](Point p) { return map_L(spec, p, eps, Direction::forward); }, &mismatch_l);
        std::vector<double> d(v.size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = w_on_ra.values[k] - v[k];
        const NormParts pl = norm_parts(*shifted, d);
        row.gap_shift = std::sqrt((pl.l2 + pl.dx + pl.dy) / eps);

        for (std::size_t k = 0; k < u.size(); ++k) d[k] = u[k] - w1[k];
        row.gap_tensor = q_norm(*rect, d, eps);

        const ReducedResult red = run_reduced(config, eps, limit);
        const std::vector<double> u1 = extend_1d(*rect, red.solution.field);
        for (std::size_t k = 0; k < u.size(); ++k) d[k] = w1[k] - u1[k];
        row.gap_average = q_norm(*rect, d, eps);

        row.gap_total = diff_with_1d(w, red.solution.field, {NormType::H1, true}, eps);

        // Q vertices map onto R_a vertices through S.
        double mismatch_s = 0.0;
        const Field2D v_field(shifted, v);
        (void)transfer_nodal(
            v_field, rect, [&](Point p) { return map_S(spec, p, eps, Direction::forward); }, &mismatch_s);
        row.interpolation = std::max(mismatch_l, mismatch_s);
        row.det_jacobian_L = 1.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<MeansRow> run_means(const StudyConfig& config)
{
    std::vector<MeansRow> rows;
    const ThinDomainSpec& spec = config.spec;
    const BoundaryProfile f = config.forcing;
    const HomogenizedCoefficients c = homogenized_coefficients(spec, [f](double x) { return f(x); }, config.means);
    rows.push_back({"K1", "exact", c.K1, "constant term"});
    rows.push_back({"K2", "exact", c.K2, "constant term"});
    rows.push_back({"mu(K)", "exact", c.K1 + c.K2, "constant term"});
    rows.push_back({"mu(H)", "exact", c.muH, "constant term"});

    const bool same_scale = spec.lower().scale_exponent() == spec.upper().scale_exponent();
    const QPFunction lower = QPFunction::from_profile(spec.lower().base(), ScaleGroup::alpha);
    const QPFunction upper =
        QPFunction::from_profile(spec.upper().base(), same_scale ? ScaleGroup::alpha : ScaleGroup::beta);
    const QPFunction K = lower + upper;

    std::optional<double> p_torus;
    std::optional<double> p_long;
    if (K.is_constant()) {
        rows.push_back({"P", "exact_constant", 1.0 / K.constant_term(), "1/K"});
    }
    try {
        p_torus = inverse_mean_torus(lower, upper, config.means.torus_points, config.means.independent_frequencies);
        rows.push_back({"P", "torus", *p_torus, "n=" + std::to_string(config.means.torus_points)});
    } catch (const UnsupportedError& e) {
        rows.push_back({"P", "torus", std::nan(""), e.what()});
    }
    if (same_scale) {
        const LongIntervalMean m = inverse_mean_long_interval(lower, upper, config.means.T_grid);
        p_long = m.estimate;
        for (std::size_t i = 0; i < m.tail.size() && i < config.means.T_grid.size(); ++i) {
            rows.push_back({"P", "long_interval", m.tail[i], "T=" + format_double(config.means.T_grid[i])});
        }
    }
    if (p_torus && p_long) {
        rows.push_back({"P", "deviation", std::abs(*p_torus - *p_long), "|torus - long_interval|"});
    }
    rows.push_back({"P", "selected", c.P, to_string(c.method)});
    rows.push_back({"q", "selected", c.q, "1/(P(K1+K2))"});
    rows.push_back({"jensen", "selected", c.P * (c.K1 + c.K2), "mu(1/K) mu(K) >= 1"});
    return rows;
}

double concentrated_ratio(const ThinDomainSpec& spec, double eps, const MeshParams& params,
                          const std::function<double(double, double)>& v)
{
    const TriMesh mesh = generate_mesh(spec, eps, params, MeshTarget::physical);
    std::vector<double> values(mesh.vertex_count());
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = v(mesh.vertices[k].x, mesh.vertices[k].y);
    const NormParts all = norm_parts(mesh, values);
    const NormParts strip = norm_parts(mesh, values, Region::strip);
    const double num = std::pow(eps, -spec.strip().gamma) * strip.l2;
    const double den = (all.l2 + all.dx + all.dy) / eps;
    return num / den;
}

// ---------------------------------------------------------------------------
// Reports

void write_study_csv(std::ostream& out, const StudyReport& report)
{
    out << "eps,status,l2_error,h1_error,reduced_vs_limit,iterations,energy_gap\n";
    for (const auto& r : report.rows) {
        out << format_double(r.eps) << ',' << (r.ok ? "ok" : "failed") << ',' << format_double(r.l2_error) << ','
            << format_double(r.h1_error) << ',' << format_double(r.reduced_vs_limit) << ',' << r.iterations << ','
            << format_double(r.energy_gap) << '\n';
    }
}

void write_chain_csv(std::ostream& out, std::span<const ChainRow> rows)
{
    out << "eps,gap_shift,gap_tensor,gap_average,gap_total,interpolation,det_jacobian_L\n";
    for (const auto& r : rows) {
        out << format_double(r.eps) << ',' << format_double(r.gap_shift) << ',' << format_double(r.gap_tensor) << ','
            << format_double(r.gap_average) << ',' << format_double(r.gap_total) << ','
            << format_double(r.interpolation) << ',' << format_double(r.det_jacobian_L) << '\n';
    }
}

void write_means_csv(std::ostream& out, std::span<const MeansRow> rows)
{
    out << "quantity,method,value,detail\n";
    for (const auto& r : rows) {
        out << r.quantity << ',' << r.method << ',' << format_double(r.value) << ',' << r.detail << '\n';
    }
}

std::string study_json(const StudyConfig& config, const StudyReport& report)
{
    nlohmann::ordered_json j;
    j["version"] = version_string();
    std::ostringstream cfg;
    write_config(cfg, config);
    j["config"] = cfg.str();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    double total = 0.0;
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["eps"] = r.eps;
        row["ok"] = r.ok;
        if (!r.ok) row["error"] = r.error;
        row["l2_error"] = r.l2_error;
        row["h1_error"] = r.h1_error;
        row["reduced_vs_limit"] = r.reduced_vs_limit;
        row["iterations"] = r.iterations;
        row["energy_gap"] = r.energy_gap;
        const MeshParams p = mesh_params_for(config, r.eps);
        row["mesh"] = {{"nx", p.nx}, {"ny_bulk", p.ny_bulk}, {"ny_strip", p.ny_strip}, {"grading", p.grading}};
        row["seconds"] = r.seconds;
        total += r.seconds;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["slope"] = report.slope ? nlohmann::ordered_json(*report.slope) : nlohmann::ordered_json(nullptr);
    j["seconds_total"] = total;
    return j.dump(2);
}

}  // namespace thinhom
