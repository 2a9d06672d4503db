// Command-line front end: nodes, discover, solve, bench.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <new>
#include <sstream>

#include <CLI11.hpp>

#include "surfpde/discovery.hpp"
#include "surfpde/errors.hpp"
#include "surfpde/fields.hpp"
#include "surfpde/io.hpp"
#include "surfpde/recipes.hpp"
#include "surfpde/solver.hpp"

namespace {

using namespace surfpde;

constexpr const char* kVersion = "0.1.0";
constexpr int kUsage = 1;
constexpr int kNumerical = 2;

struct Shared {
    std::string output_dir = ".";
};

std::string in_dir(const Shared& s, const std::string& path, const std::string& fallback) {
    if (!path.empty()) return path;
    std::filesystem::create_directories(s.output_dir);
    return (std::filesystem::path(s.output_dir) / fallback).string();
}

/// Config echo for replay; printed as comments and saved beside the outputs.
void write_metadata(const Shared& s, const CLI::App& sub) {
    // Unset options print as key=""; they are dropped so the file replays.
    std::string cfg;
    {
        std::istringstream all(sub.config_to_str(true, false));
        for (std::string line; std::getline(all, line);) {
            if (line.size() < 3 || line.compare(line.size() - 3, 3, "=\"\"") != 0) cfg += line + "\n";
        }
    }
    std::cout << "# surfpde " << kVersion << " " << sub.get_name() << "\n";
    std::istringstream lines(cfg);
    for (std::string line; std::getline(lines, line);) {
        if (!line.empty()) std::cout << "#   " << line << "\n";
    }
    std::filesystem::create_directories(s.output_dir);
    std::ofstream out(std::filesystem::path(s.output_dir) / (sub.get_name() + ".run.cfg"));
    out << "# surfpde " << kVersion << " " << sub.get_name() << "\n[" << sub.get_name() << "]\n" << cfg;
}

void add_common(CLI::App* sub, Shared& shared) {
    // --config belongs to the root app; fallthrough lets it follow the
    // subcommand name.
    sub->fallthrough();
    sub->add_option("--output-dir", shared.output_dir, "output directory")->envname("SURFPDE_OUTPUT_DIR");
}

// --- cloud preparation -----------------------------------------------------

struct NormalOptions {
    std::string mode = "auto";  // auto | file | analytic | extension
    std::string surface;
    double delta = 0.0;
};

void add_normal_options(CLI::App* sub, NormalOptions& n) {
    sub->add_option("--normals", n.mode, "normal source")
        ->check(CLI::IsMember({"auto", "file", "analytic", "extension"}))
        ->capture_default_str();
    sub->add_option("--surface", n.surface, "named surface for analytic normals");
    sub->add_option("--delta", n.delta, "normal-extension offset (0: half the minimum spacing)")
        ->check(CLI::NonNegativeNumber);
}

PointCloud with_normals(const PointCloud& cloud, const NormalOptions& n) {
    std::string mode = n.mode;
    if (mode == "auto") mode = cloud.has_normals() ? "file" : (n.surface.empty() ? "extension" : "analytic");
    if (mode == "file") {
        require(cloud.has_normals(), "point-cloud file carries no normals; use --normals analytic or extension");
        return cloud;
    }
    if (mode == "analytic") {
        require(!n.surface.empty(), "--normals analytic needs --surface");
        return analytic_normals(surface_by_name(n.surface), cloud);
    }
    const PointCloud rough = rough_normals(cloud);
    const double delta = n.delta > 0.0 ? n.delta : default_extension_offset(cloud);
    return normal_extension(cloud, rough, delta, KernelSpec::matern(cloud.dim(), 4)).second;
}

KernelSpec kernel_for(const PointCloud& cloud, int m) {
    return KernelSpec::matern(cloud.dim(), m > 0 ? m : (cloud.dim() == 2 ? 6 : 4));
}

// --- nodes -------------------------------------------------------------------

struct NodesArgs {
    std::string surface;
    int n = 0;
    std::uint64_t seed = 1;
    std::string normals = "analytic";
    double delta = 0.0;
    std::string out;
    std::string field;
    std::string pde = "plain";
    double a = 1.0, r = 1.0, dt = 0.01;
    int steps = 100;
    std::string time = "sin";
    double noise = 0.0;
    int source = 0;
    std::string data_out;
};

int run_nodes(const NodesArgs& a, const Shared& s) {
    const Surface surface = surface_by_name(a.surface);
    PointCloud cloud = a.surface == "circle"   ? circle_nodes(a.n)
                       : a.surface == "sphere" ? sphere_nodes(a.n)
                                               : implicit_surface_nodes(surface, a.n, a.seed);
    if (a.normals == "analytic") {
        cloud = analytic_normals(surface, cloud);
    } else if (a.normals == "extension") {
        cloud = with_normals(cloud, {"extension", "", a.delta});
    }
    const std::string path = in_dir(s, a.out, "nodes.csv");
    write_point_cloud(path, cloud);
    std::cout << "N = " << cloud.size() << "\n";
    std::cout << "fill distance estimate = " << format_double(cloud.fill_distance_estimate()) << "\n";
    std::cout << "seed = " << a.seed << "\n";
    std::cout << "nodes written to " << path << "\n";
    if (a.field.empty() && a.pde != "distance") return 0;

    Snapshots snaps;
    if (a.pde == "reaction-diffusion") {
        require(!a.field.empty(), "--pde reaction-diffusion needs --field");
        const AmbientField g = field_by_name(a.field, cloud.dim());
        const SeparableField sep = a.time == "exp" ? exp_decay_field(g) : sine_time_field(g);
        snaps = manufactured_snapshots(surface, cloud, sep, a.a, a.r, a.dt, a.steps);
        snaps.values = add_noise(snaps.values, a.noise, a.seed);
    } else {
        Vector u, f;
        if (a.pde == "distance") {
            require(a.source >= 0 && a.source < cloud.size(), "--source is not a node index");
            if (a.surface == "circle") {
                u = circle_geodesic_distance(cloud, a.source);
            } else if (a.surface == "sphere") {
                u = sphere_geodesic_distance(cloud, cloud.node(a.source));
            } else if (a.surface == "torus") {
                u = torus_equator_distance(cloud);
            } else {
                fail(ErrorKind::invalid_argument, "distance data exists for circle, sphere and torus only");
            }
            f = Vector::Zero(cloud.size());
        } else {
            const AmbientField g = field_by_name(a.field, cloud.dim());
            u = sample_field(g, cloud);
            f = a.pde == "helmholtz" ? Vector(u - surface_laplacian_samples(surface, g, cloud))
                                     : Vector(Vector::Zero(cloud.size()));
        }
        snaps.times = Vector::Zero(1);
        snaps.values = add_noise(u, a.noise, a.seed).transpose();
        snaps.forcing = f.transpose();
    }
    const std::string data_path = in_dir(s, a.data_out, "data.csv");
    write_snapshots(data_path, snaps);
    std::cout << "dataset (" << snaps.times.size() << " time levels) written to " << data_path << "\n";
    return 0;
}

// --- discover ----------------------------------------------------------------

struct DiscoverArgs {
    std::string mode;
    std::string cloud;
    std::string data;
    NormalOptions normals;
    int m = 0;
    int ell = 2;
    std::string method = "lasso_cd";
    std::string mu;  // empty: per-mode default; "auto": square-root LASSO recommendation
    double prune = -1.0;
    bool normalize = false;
    std::vector<double> p_values;
    double mu2 = 1e-3;
    double sigma2 = 1.0;
    std::string gaussian = "squared";
    std::string model_out;
    std::string table_out;
};

RegressionMethod parse_method(const std::string& name) {
    for (RegressionMethod m : {RegressionMethod::lasso_cd, RegressionMethod::qp, RegressionMethod::sqrt_lasso,
                               RegressionMethod::least_squares}) {
        if (to_string(m) == name) return m;
    }
    fail(ErrorKind::invalid_argument, "unknown method '" + name + "'");
}

RegressionConfig regression_config(const DiscoverArgs& a, double default_mu, double default_prune) {
    RegressionConfig c;
    c.method = parse_method(a.method);
    if (a.mu == "auto") {
        c.mu.reset();
    } else if (a.mu.empty()) {
        c.mu = c.method == RegressionMethod::sqrt_lasso ? std::optional<double>() : default_mu;
    } else {
        try {
            c.mu = std::stod(a.mu);
        } catch (const std::logic_error&) {
            fail(ErrorKind::parse, "--mu expects a number or 'auto', got '" + a.mu + "'");
        }
    }
    c.prune_rel_tol = a.prune >= 0.0 ? a.prune : default_prune;
    c.normalize_columns = a.normalize;
    return c;
}

int run_discover(const DiscoverArgs& a, const Shared& s) {
    const PointCloud cloud = with_normals(read_point_cloud(a.cloud), a.normals);
    const Snapshots snaps = read_snapshots(a.data, cloud.size());
    const KernelSpec kernel = kernel_for(cloud, a.m);
    const ModelKind kind = model_kind_from_string(a.mode);
    SparseModel model;
    switch (kind) {
        case ModelKind::stationary:
            model = discover_stationary(cloud, snaps.values.row(0).transpose(), snaps.forcing.row(0).transpose(),
                                        kernel, a.ell, regression_config(a, 0.01, 1e-4));
            break;
        case ModelKind::evolution:
            snaps.validate(cloud.size());
            model = discover_evolution(cloud, snaps, kernel, a.ell, regression_config(a, 0.0, 1e-4));
            break;
        case ModelKind::biharmonic:
            model = discover_biharmonic(cloud, snaps.values.row(0).transpose(), kernel, a.ell,
                                        regression_config(a, 1e-2, 1e-4));
            break;
        case ModelKind::eikonal: {
            EikonalConfig e;
            if (!a.p_values.empty()) e.p_values = a.p_values;
            e.step1 = regression_config(a, 1e-3, 0.0);
            e.mu2 = a.mu2;
            e.sigma2 = a.sigma2;
            e.gaussian_squared = a.gaussian == "squared";
            model = discover_eikonal(cloud, snaps.values.row(0).transpose(), kernel, e);
            break;
        }
    }
    const std::string model_path = in_dir(s, a.model_out, "model.txt");
    const std::string table_path = in_dir(s, a.table_out, "coefficients.csv");
    write_model(model_path, model);
    write_coefficient_table(table_path, model);
    for (const auto& w : model.diagnostics.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << model.equation() << "\n";
    std::cout << "# kkt_residual = " << format_double(model.diagnostics.kkt_residual)
              << ", jitter = " << format_double(model.diagnostics.jitter)
              << ", runtime_seconds = " << format_double(model.diagnostics.runtime_seconds) << "\n";
    std::cout << "model written to " << model_path << ", coefficients to " << table_path << "\n";
    return 0;
}

// --- solve -------------------------------------------------------------------

struct SolveArgs {
    std::string model;
    std::string cloud;
    std::string data;
    NormalOptions normals;
    int m = 0;
    bool reference = false;
    std::string out;
};

int run_solve(const SolveArgs& a, const Shared& s) {
    const SparseModel model = read_model(a.model);
    const PointCloud cloud = with_normals(read_point_cloud(a.cloud), a.normals);
    const Snapshots snaps = read_snapshots(a.data, cloud.size());
    const DiscreteOperators ops(cloud, kernel_for(cloud, a.m));

    Vector times;
    Matrix traj;
    if (model.kind == ModelKind::stationary) {
        const StationaryResult r = solve_stationary(model, ops, snaps.forcing.row(0).transpose());
        times = snaps.times.head(1);
        traj = r.u.transpose();
        std::cout << "# residual = " << format_double(r.residual) << ", newton_iterations = " << r.newton_iterations
                  << "\n";
    } else if (model.kind == ModelKind::evolution) {
        snaps.validate(cloud.size());
        const EvolutionResult r =
            solve_evolution(model, ops, snaps.values.row(0).transpose(), snaps.forcing, snaps.dt, snaps.steps());
        times = r.times.array() + snaps.times[0];
        traj = r.trajectory;
    } else {
        fail(ErrorKind::invalid_argument, "solve handles stationary and evolution models, not " + to_string(model.kind));
    }
    const std::string path = in_dir(s, a.out, "solution.csv");
    write_trajectory(path, cloud, times, traj);
    std::cout << "solution written to " << path << "\n";
    if (!a.reference) return 0;

    std::vector<std::vector<std::string>> rel;
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        const Vector ref = snaps.values.row(j).transpose();
        const Vector got = traj.row(j).transpose();
        const double e = ref.norm() > 0.0 ? relative_l2(got, ref) : (got - ref).norm();
        rel.push_back({format_double(times[j]), format_double(e)});
    }
    std::vector<std::vector<std::string>> abs;
    const Eigen::Index last = times.size() - 1;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (int k = 0; k < cloud.dim(); ++k) row.push_back(format_double(cloud.nodes()(i, k)));
        row.push_back(format_double(std::abs(traj(last, i) - snaps.values(last, i))));
        abs.push_back(std::move(row));
    }
    std::vector<std::string> header{"node_index", "x", "y"};
    if (cloud.dim() == 3) header.push_back("z");
    header.push_back("abs_error");
    const std::string rel_path = in_dir(s, "", "relative_l2.csv");
    const std::string abs_path = in_dir(s, "", "abs_error.csv");
    write_csv(rel_path, {"t", "relative_l2"}, rel);
    write_csv(abs_path, header, abs);
    std::cout << "relative L2 at final time = " << rel.back()[1] << "\n";
    std::cout << "error tables written to " << rel_path << " and " << abs_path << "\n";
    return 0;
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
    std::string recipe;
    int n = 0;
    std::uint64_t seed = 1;
    std::vector<std::string> surfaces;
};

int run_bench(const BenchArgs& a, const Shared& s) {
    RecipeOptions opt;
    opt.n = a.n;
    opt.seed = a.seed;
    opt.surfaces = a.surfaces;
    opt.output_dir = s.output_dir;
    opt.log = &std::cerr;
    const RecipeReport report = run_recipe(a.recipe, opt);
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : report.rows) {
        std::cout << row.format() << "\n";
        rows.push_back({row.name, format_double(row.measured), format_double(row.target), format_double(row.tol),
                        row.pass ? "PASS" : "FAIL"});
    }
    for (auto& r : rows) {
        for (auto& field : r) std::replace(field.begin(), field.end(), ',', ';');
    }
    write_csv(in_dir(s, "", "bench_" + a.recipe + ".csv"), {"check", "measured", "target", "tol", "verdict"}, rows);
    std::cout << a.recipe << ": " << (report.passed() ? "PASS" : "FAIL") << " ("
              << format_double(report.runtime_seconds) << " s)\n";
    return report.passed() ? 0 : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meshfree discovery of PDEs on surfaces"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.set_config("--config", "", "INI file with a [subcommand] section of key=value lines; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    Shared shared;

    NodesArgs na;
    auto* nodes = app.add_subcommand("nodes", "generate a point cloud and optional dataset");
    add_common(nodes, shared);
    nodes->add_option("--surface", na.surface, "circle, sphere, torus, cyclide or bretzel2")
        ->required()
        ->check(CLI::IsMember({"circle", "sphere", "torus", "cyclide", "bretzel2"}));
    nodes->add_option("--n", na.n, "number of nodes")->required()->check(CLI::Range(1, 200000));
    nodes->add_option("--seed", na.seed, "sampling and noise seed")->capture_default_str();
    nodes->add_option("--normals", na.normals, "normals written with the nodes")
        ->check(CLI::IsMember({"none", "analytic", "extension"}))
        ->capture_default_str();
    nodes->add_option("--delta", na.delta, "normal-extension offset")->check(CLI::NonNegativeNumber);
    nodes->add_option("--out", na.out, "point-cloud path (default <output-dir>/nodes.csv)");
    nodes->add_option("--field", na.field, "circle-exp, cubic, exp-sum, sin-product, z or one");
    nodes->add_option("--pde", na.pde, "dataset kind")
        ->check(CLI::IsMember({"plain", "helmholtz", "reaction-diffusion", "distance"}))
        ->capture_default_str();
    nodes->add_option("--a", na.a, "diffusion coefficient")->capture_default_str();
    nodes->add_option("--r", na.r, "reaction coefficient")->capture_default_str();
    nodes->add_option("--dt", na.dt, "time step")->check(CLI::PositiveNumber)->capture_default_str();
    nodes->add_option("--steps", na.steps, "time steps M")->check(CLI::Range(1, 100000))->capture_default_str();
    nodes->add_option("--time", na.time, "time factor")->check(CLI::IsMember({"sin", "exp"}))->capture_default_str();
    nodes->add_option("--noise", na.noise, "noise level relative to RMS")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    nodes->add_option("--source", na.source, "source node for distance data")->capture_default_str();
    nodes->add_option("--data-out", na.data_out, "dataset path (default <output-dir>/data.csv)");

    DiscoverArgs da;
    auto* discover = app.add_subcommand("discover", "learn a sparse PDE model from data");
    add_common(discover, shared);
    discover->add_option("--mode", da.mode, "model kind")
        ->required()
        ->check(CLI::IsMember({"stationary", "evolution", "eikonal", "biharmonic"}));
    discover->add_option("--cloud", da.cloud, "point-cloud CSV")->required()->check(CLI::ExistingFile);
    discover->add_option("--data", da.data, "dataset CSV t,node_index,u,f")->required()->check(CLI::ExistingFile);
    add_normal_options(discover, da.normals);
    discover->add_option("--m", da.m, "kernel smoothness (0: 6 on curves, 4 on surfaces)")->check(CLI::Range(0, 20));
    discover->add_option("--ell", da.ell, "polynomial degree")->check(CLI::Range(1, 6))->capture_default_str();
    discover->add_option("--method", da.method, "regression method")
        ->check(CLI::IsMember({"lasso_cd", "qp", "sqrt_lasso", "least_squares"}))
        ->capture_default_str();
    discover->add_option("--mu", da.mu, "penalty, or 'auto' for the square-root LASSO default");
    discover->add_option("--prune", da.prune, "relative pruning threshold (negative: per-mode default)");
    discover->add_flag("--normalize", da.normalize, "solve in the column-normalized basis");
    discover->add_option("--p-values", da.p_values, "eikonal p-Laplacian exponents")->delimiter(',');
    discover->add_option("--mu2", da.mu2, "eikonal source penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
    discover->add_option("--sigma2", da.sigma2, "eikonal Gaussian width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    discover->add_option("--gaussian", da.gaussian, "Gaussian exponent uses the squared norm or the norm")
        ->check(CLI::IsMember({"squared", "norm"}))
        ->capture_default_str();
    discover->add_option("--model-out", da.model_out, "model path (default <output-dir>/model.txt)");
    discover->add_option("--table-out", da.table_out, "coefficient table (default <output-dir>/coefficients.csv)");

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "forward-solve a learned model");
    add_common(solve, shared);
    solve->add_option("--model", sa.model, "model file")->required();
    solve->add_option("--cloud", sa.cloud, "point-cloud CSV")->required()->check(CLI::ExistingFile);
    solve->add_option("--data", sa.data, "dataset with forcing and initial state")->required()->check(CLI::ExistingFile);
    add_normal_options(solve, sa.normals);
    solve->add_option("--m", sa.m, "kernel smoothness (0: 6 on curves, 4 on surfaces)")->check(CLI::Range(0, 20));
    solve->add_flag("--reference", sa.reference, "treat the dataset values as the reference solution");
    solve->add_option("--out", sa.out, "solution path (default <output-dir>/solution.csv)");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "run a named reproduction recipe");
    add_common(bench, shared);
    bench->add_option("recipe", ba.recipe, "recipe name")->required()->check(CLI::IsMember(recipe_names()));
    bench->add_option("--n", ba.n, "override the node count")->check(CLI::Range(0, 200000));
    bench->add_option("--seed", ba.seed, "sampling and noise seed")->capture_default_str();
    bench->add_option("--surfaces", ba.surfaces, "ex2-surfaces: torus, cyclide, bretzel2")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        write_metadata(shared, *sub);
        if (sub == nodes) return run_nodes(na, shared);
        if (sub == discover) return run_discover(da, shared);
        if (sub == solve) return run_solve(sa, shared);
        return run_bench(ba, shared);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return e.kind() == ErrorKind::parse || e.kind() == ErrorKind::invalid_argument ? kUsage : kNumerical;
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return kNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
