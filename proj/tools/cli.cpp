#include "cli.hpp"

#include "pkgrid/artifact.hpp"
#include "pkgrid/bench.hpp"
#include "pkgrid/config.hpp"
#include "pkgrid/particles.hpp"
#include "pkgrid/triangle_mesh.hpp"
#include "pkgrid/vtk.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <memory>

namespace pkgrid::cli
{
namespace
{
namespace fs = std::filesystem;

/// Bad input that is not a config syntax problem (missing files, bad windows).
struct InputError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

template <int D>
Vecd<D> toVec(const std::vector<Real> &values)
{
    Vecd<D> v;
    for (int k = 0; k < D; ++k)
        v[k] = values[static_cast<std::size_t>(k)];
    return v;
}

Real finestSpacing(const RunConfig &config)
{
    const std::size_t layers = countLayers(config.coarsest_spacing, config.target_spacing);
    return config.coarsest_spacing / static_cast<Real>(std::size_t(1) << (layers - 1));
}

ExecutionPolicy policyOf(const RunConfig &config) { return parseHostPolicy(config.policy, config.threads); }

std::unique_ptr<Shape<3>> makeShape3d(const RunConfig &config)
{
    const Vecd<3> center = toVec<3>(config.shapeCenter());
    if (config.geometry == "analytic:shell")
        return std::make_unique<ShellShape<3>>(center, config.inner_radius, config.outer_radius);
    if (config.geometry == "analytic:sphere")
        return std::make_unique<SphereShape<3>>(center, config.radius);
    const fs::path path = config.geometryPath();
    if (!fs::is_regular_file(path))
        throw InputError("geometry file '" + path.string() + "' not found");
    auto mesh = std::make_shared<const TriangleMesh>(TriangleMesh::loadStlFile(path.string()));
    return std::make_unique<TriangleMeshShape>(std::move(mesh));
}

/// Rounded slab across the lower part of the domain with a fin of width h / 2
/// on top, h being the cleaning kernel's smoothing length.
std::unique_ptr<Shape<2>> makeShape2d(const RunConfig &config)
{
    const Vecd<2> lower = toVec<2>(config.lowerCorner());
    const Vecd<2> extent = toVec<2>(config.upperCorner()) - lower;
    const Real h = config.kernel_h_ratio * finestSpacing(config);
    return std::make_unique<SlabWithFinShape>(
        lower + Vecd<2>(0.1 * extent[0], 0.2 * extent[1]), lower + Vecd<2>(0.9 * extent[0], 0.4 * extent[1]),
        0.05 * extent.minCoeff(), lower[0] + 0.5 * extent[0], 0.5 * h, 0.25 * extent[1]);
}

template <int D>
MultiResolutionLevelSet<D> loadLevelSet(const RunConfig &config)
{
    const fs::path path = config.artifactPath();
    if (!fs::is_regular_file(path))
        throw InputError("artifact '" + path.string() + "' not found; run build first");
    return deserializeArtifact<D>(readFileBytes(path));
}

int artifactDimensionOf(const RunConfig &config)
{
    const fs::path path = config.artifactPath();
    if (!fs::is_regular_file(path))
        throw InputError("artifact '" + path.string() + "' not found; run build first");
    return artifactDimension(readFileBytes(path));
}

template <int D>
void buildWith(const RunConfig &config, const Shape<D> &shape, std::ostream &out)
{
    PipelineOptions options;
    options.policy = policyOf(config);
    options.pkg_size = config.pkg_size;
    options.correct_signs = config.correct;
    options.trust_band_ratio = config.trust_band_ratio;
    std::vector<SignCorrectionReport> reports;
    options.correction_reports = &reports;
    const MultiResolutionLevelSet<D> levelset =
        initializeMultiResolution<D>(shape, toVec<D>(config.lowerCorner()), toVec<D>(config.upperCorner()),
                                     config.coarsest_spacing, config.target_spacing, options);
    for (std::size_t l = 0; l < levelset.layers.size(); ++l)
        out << "layer " << l << ": data spacing " << levelset.layers[l].dataSpacing() << ", "
            << levelset.layers[l].mesh().numActivatedCells() << " packages\n";
    if (config.correct)
    {
        std::size_t flips = 0;
        for (const SignCorrectionReport &report : reports)
            flips += report.flipped_points;
        out << "sign flips: " << flips << '\n';
    }
    writeFileBytes(config.artifactPath(), serializeArtifact(levelset));
    out << "wrote " << config.artifactPath().string() << '\n';
}

void cmdBuild(const RunConfig &config, std::ostream &out)
{
    if (config.dimension() == 2)
        buildWith<2>(config, *makeShape2d(config), out);
    else
        buildWith<3>(config, *makeShape3d(config), out);
}

template <int D>
void cleanIn(const RunConfig &config, std::ostream &out)
{
    MultiResolutionLevelSet<D> levelset = loadLevelSet<D>(config);
    LevelSetLayer<D> &finest = levelset.finest();
    const SmoothingKernel<D> kernel(config.kernel_h_ratio * finest.dataSpacing());
    CleaningOptions options;
    options.threshold = config.clean_threshold;
    options.reinit_steps = config.reinit_steps;
    options.cfl = config.cfl;
    options.max_rounds = config.clean_max_rounds;
    const CleaningReport report = cleanSmallFeatures(finest, kernel, options, policyOf(config));
    out << "modified points: " << report.modified_points << " in " << report.rounds << " rounds\n";
    writeFileBytes(config.artifactPath(), serializeArtifact(levelset));
    out << "wrote " << config.artifactPath().string() << '\n';
}

void cmdClean(const RunConfig &config, std::ostream &out)
{
    if (artifactDimensionOf(config) == 2)
        cleanIn<2>(config, out);
    else
        cleanIn<3>(config, out);
}

template <int D>
void writeParticles(const RunConfig &config, const ParticleSet<D> &particles, const std::string &stem,
                    std::ostream &out)
{
    const fs::path path = fs::path(config.output) / (stem + "." + config.particle_format);
    writeFileBytes(path, exportParticles(particles, config.particle_format));
    out << "wrote " << particles.size() << " particles to " << path.string() << '\n';
}

template <int D>
void relaxIn(const RunConfig &config, std::ostream &out)
{
    MultiResolutionLevelSet<D> levelset = loadLevelSet<D>(config);
    LevelSetLayer<D> &finest = levelset.finest();
    ParticleSet<D> particles = generateLatticeParticles(finest, config.particle_spacing);
    if (particles.size() == 0)
        throw std::runtime_error("no lattice point inside the body");
    if (config.jitter > 0.0)
        jitterParticles(particles, config.jitter * config.particle_spacing, config.seed);
    const DistanceStatistics before = nearestNeighborStatistics(particles);
    RelaxationParams params;
    params.steps = config.relax_steps;
    params.step_scale = config.step_scale;
    const ParticleSet<D> relaxed = relaxParticles(finest, particles, params, policyOf(config));
    const DistanceStatistics after = nearestNeighborStatistics(relaxed);
    std::size_t outside = 0;
    for (const Vecd<D> &x : relaxed.positions)
        outside += finest.probePhiClamped(x) > 0.0;
    out << "particles: " << relaxed.size() << ", spacing variation " << before.coefficient_of_variation << " -> "
        << after.coefficient_of_variation << ", outside " << outside << '\n';
    writeParticles(config, relaxed, "particles", out);
    if (outside != 0)
        throw std::runtime_error("relaxation left particles outside the body");
}

void cmdRelax(const RunConfig &config, std::ostream &out)
{
    if (artifactDimensionOf(config) == 2)
        relaxIn<2>(config, out);
    else
        relaxIn<3>(config, out);
}

template <int D>
void exportIn(const RunConfig &config, std::ostream &out)
{
    const MultiResolutionLevelSet<D> levelset = loadLevelSet<D>(config);
    const LevelSetLayer<D> &finest = levelset.finest();
    const Vecd<D> lower = config.window_lower ? toVec<D>(*config.window_lower) : finest.geometry().lower_corner;
    const Vecd<D> upper = config.window_upper ? toVec<D>(*config.window_upper) : finest.geometry().upperCorner();
    std::string vtk;
    try
    {
        vtk = exportVtkWindow(finest, lower, upper);
    }
    catch (const std::invalid_argument &e)
    {
        throw InputError(e.what());
    }
    const fs::path path = fs::path(config.output) / "phi.vtk";
    writeFileBytes(path, vtk);
    out << "wrote " << path.string() << '\n';
    writeParticles(config, generateLatticeParticles(finest, config.particle_spacing), "lattice", out);
}

void cmdExport(const RunConfig &config, std::ostream &out)
{
    if (config.window_lower && static_cast<int>(config.window_lower->size()) != artifactDimensionOf(config))
        throw InputError("window dimension does not match the artifact");
    if (artifactDimensionOf(config) == 2)
        exportIn<2>(config, out);
    else
        exportIn<3>(config, out);
}

void cmdBench(const RunConfig &config, std::ostream &out)
{
    bench::BenchOptions options;
    options.resolution = config.bench_resolution;
    options.threads = config.bench_threads;
    options.runs = config.bench_runs;
    options.inner_radius = config.inner_radius;
    options.outer_radius = config.outer_radius;
    const bench::BenchReport report = bench::runBenchmark(options);
    out << report.table();
    const fs::path path = fs::path(config.output) / "bench.csv";
    writeFileBytes(path, report.csv());
    out << "wrote " << path.string() << '\n';
}
} // namespace
//=================================================================================================//
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"pkgrid: sparse narrow-band level sets, cleaning, particles and benchmarks"};
    app.require_subcommand(1);
    std::string config_path, policy, out_dir, resolution;
    int threads = 0;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--policy", policy, "execution policy")->check(CLI::IsMember({"seq", "par"}));
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--resolution", resolution, "target data spacing, e.g. 1/256 (bench: band spacing)");
    app.add_option("--out", out_dir, "output directory");
    std::vector<CLI::App *> commands = {
        app.add_subcommand("build", "build the multi-resolution level set and write the artifact"),
        app.add_subcommand("clean", "remove features thinner than the kernel support"),
        app.add_subcommand("relax", "generate and relax particles inside the body"),
        app.add_subcommand("bench", "compare package, dense and hash layouts"),
        app.add_subcommand("export", "write a VTK window of phi and lattice particles"),
    };
    for (CLI::App *command : commands)
        command->fallthrough();

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp &)
    {
        out << app.help();
        return kSuccess;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return kUsageError;
    }

    try
    {
        RunConfig config = config_path.empty() ? RunConfig{} : loadRunConfig(config_path);
        if (!policy.empty())
            config.policy = policy;
        if (threads > 0)
            config.threads = config.bench_threads = threads;
        if (!out_dir.empty())
            config.output = out_dir;
        if (!resolution.empty())
        {
            const Real r = parseNumber(resolution);
            config.bench_resolution = r;
            config.target_spacing = r;
            config.coarsest_spacing = std::max(config.coarsest_spacing, r);
        }
        config.validate();

        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "build")
            cmdBuild(config, out);
        else if (name == "clean")
            cmdClean(config, out);
        else if (name == "relax")
            cmdRelax(config, out);
        else if (name == "bench")
            cmdBench(config, out);
        else
            cmdExport(config, out);
        return kSuccess;
    }
    catch (const ConfigError &e)
    {
        err << "config error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const InputError &e)
    {
        err << "input error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const StlParseError &e)
    {
        err << "STL error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const ArtifactError &e)
    {
        err << "artifact error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const std::exception &e)
    {
        err << "failed: " << e.what() << '\n';
        return kPipelineFailure;
    }
}
} // namespace pkgrid::cli
