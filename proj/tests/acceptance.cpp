// Acceptance run: one PASS/FAIL line per criterion with the measured numbers.
// Usage: acceptance [criterion ...]   (all criteria when none given)

#include "support.hpp"

#include "pkgrid/bench.hpp"
#include "pkgrid/particles.hpp"

#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

using namespace pkgrid;
using namespace pkgrid::testing;

namespace
{
struct Outcome
{
    bool pass = false;
    std::string detail;
};

struct Criterion
{
    int id;
    const char *name;
    double limit_seconds;
    std::function<Outcome()> run;
};

class Detail
{
  public:
    template <typename T>
    Detail &operator<<(const T &value)
    {
        stream_ << value;
        return *this;
    }
    std::string str() const { return stream_.str(); }

  private:
    std::ostringstream stream_{std::ios::out};
};

template <typename T, int D>
bool bitwiseEqual(const Mesh<D> &a, const MeshVariable<T> &x, const Mesh<D> &b, const MeshVariable<T> &y)
{
    return a.numPackages() == b.numPackages() &&
           std::memcmp(x.data(), y.data(), a.numPackages() * a.pointsPerPackage() * sizeof(T)) == 0;
}

template <int D>
Vecd<D> pointPosition(const Mesh<D> &mesh, PackageIndex p, std::size_t i)
{
    return mesh.geometry().dataPointPosition(mesh.cellOfPackage(p), mesh.geometry().dataFromLinear(i));
}

//----------------------------------------------------------------------------------------------//
Outcome indexShift()
{
    const auto layer = sphereLayer<3>(6, 0.3);
    const Mesh<3> &mesh = layer.mesh();
    const int pkg = mesh.pkgSize();
    std::size_t compared = 0, off_mesh = 0, mismatches = 0;
    for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
    {
        const Arrayi<3> cell = mesh.cellOfPackage(p);
        for (int x = -4; x <= 7; ++x)
            for (int y = -4; y <= 7; ++y)
                for (int z = -4; z <= 7; ++z)
                {
                    const Arrayi<3> shift(x, y, z);
                    if (!inRange<3>(cell * pkg + shift, mesh.geometry().dataPointsPerAxis()))
                    {
                        ++off_mesh; // general shift has no answer beyond the mesh
                        continue;
                    }
                    ++compared;
                    mismatches += !(neighbourIndexShift<3>(shift, mesh.cellNeighborhood().data()[p], pkg) ==
                                    generalShift<3>(mesh, cell, Arrayi<3>::Zero(), shift));
                }
    }
    return {mismatches == 0 && compared > 0,
            (Detail() << mesh.numActivatedCells() << " packages, " << compared << " shifts compared, " << mismatches
                      << " mismatches, " << off_mesh << " off-mesh shifts skipped")
                .str()};
}

//----------------------------------------------------------------------------------------------//
Outcome denseOperators()
{
    auto f = [](const Vecd<3> &x) { return std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]) + x[2] * x[2] - 0.2; };
    auto layer = sphereLayer<3>(8, 0.3);
    Mesh<3> &mesh = layer.mesh();
    fillActive<3>(mesh, layer.phi(), f);
    const DenseField<3> dense(mesh, f, mesh.farFieldValue());
    const MeshData<Real, 3> phi = mesh.meshData(layer.phi());
    const Real ds = mesh.dataSpacing();
    const int pkg = mesh.pkgSize();
    const Arrayi<3> n = mesh.geometry().dataPointsPerAxis();
    auto relative = [](Real a, Real b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); };

    Real worst_probe = 0.0, worst_gradient = 0.0, worst_laplacian = 0.0;
    std::size_t points = 0;
    for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
        for (std::size_t i = 0; i < mesh.pointsPerPackage(); ++i)
        {
            const Arrayi<3> data = mesh.geometry().dataFromLinear(i);
            const Arrayi<3> g = mesh.cellOfPackage(p) * pkg + data;
            const Vecd<3> x = pointPosition(mesh, p, i);
            ++points;
            worst_probe = std::max(worst_probe, relative(layer.probePhi(x), denseProbe(dense, x)));
            if (((g < n - 1)).all())
            {
                const Vecd<3> off = x + Vecd<3>(0.37, 0.61, 0.13) * ds;
                worst_probe = std::max(worst_probe, relative(layer.probePhi(off), denseProbe(dense, off)));
            }
            if (!((g > 0) && (g < n - 1)).all())
                continue;
            const Vecd<3> gradient = regularizedCentralDifference<3>(phi, mesh.cellNeighborhood().data()[p], data,
                                                                     CentralAverage{});
            Real sum = 0.0;
            for (int k = 0; k < 3; ++k)
            {
                const Real minus = dense(g - unitIndex<3>(k)), plus = dense(g + unitIndex<3>(k)), center = dense(g);
                worst_gradient = std::max(worst_gradient, relative(gradient[k], 0.5 * ((plus - center) + (center - minus))));
                sum = sum + minus;
                sum = sum + plus;
            }
            const Real expected = (sum - 6.0 * dense(g)) / (ds * ds);
            worst_laplacian = std::max(
                worst_laplacian, relative(laplacian7pt<3>(phi, mesh.cellNeighborhood().data()[p], data, ds), expected));
        }

    // |x|^2 has Laplacian 6; values are exact binary fractions at spacing 1/32.
    auto quadratic = sphereLayer<3>(8, 0.3);
    Mesh<3> &qmesh = quadratic.mesh();
    fillActive<3>(qmesh, quadratic.phi(), [](const Vecd<3> &x) { return x.squaredNorm(); });
    const MeshData<Real, 3> q = qmesh.meshData(quadratic.phi());
    std::size_t interior = 0, not_six = 0;
    for (PackageIndex p = kNumSingularPackages; p < qmesh.numPackages(); ++p)
        for (std::size_t i = 0; i < qmesh.pointsPerPackage(); ++i)
        {
            const Arrayi<3> g = qmesh.cellOfPackage(p) * pkg + qmesh.geometry().dataFromLinear(i);
            bool all_active = true;
            for (int k = 0; k < 3; ++k)
                for (int side : {-1, 1})
                {
                    const Arrayi<3> m = g + side * unitIndex<3>(k);
                    all_active &= inRange<3>(m, n) && qmesh.packageAt(m / pkg) >= kNumSingularPackages;
                }
            if (!all_active)
                continue;
            ++interior;
            not_six += laplacian7pt<3>(q, qmesh.cellNeighborhood().data()[p], qmesh.geometry().dataFromLinear(i), ds) != 6.0;
        }
    const bool pass = worst_probe <= 1e-13 && worst_gradient <= 1e-13 && worst_laplacian <= 1e-13 && not_six == 0 &&
                      interior > 0;
    return {pass, (Detail() << points << " band points; max relative error probe " << worst_probe << ", gradient "
                            << worst_gradient << ", laplacian " << worst_laplacian << "; laplacian of |x|^2 = 6 at "
                            << interior - not_six << "/" << interior << " interior points")
                      .str()};
}

//----------------------------------------------------------------------------------------------//
template <int D>
bool memoryAudit(Detail &detail)
{
    auto layer = sphereLayer<D>(8, 0.3);
    Mesh<D> &mesh = layer.mesh();
    const std::size_t packages = mesh.numPackages();
    const std::size_t expected = ipow(3, D) * sizeof(PackageIndex) + sizeof(MetaCell);
    const std::size_t measured = (mesh.cellNeighborhood().hostBytes() + mesh.metaCell().hostBytes()) / packages;
    const std::size_t variables_before = mesh.topologyAudit().mesh_variable_count;
    const TopologyAudit before = mesh.topologyAudit();
    for (const char *name : {"audit_a", "audit_b", "audit_c", "audit_d"})
        mesh.template registerMeshVariable<Real>(name);
    const TopologyAudit after = mesh.topologyAudit();
    const std::size_t measured_after = (mesh.cellNeighborhood().hostBytes() + mesh.metaCell().hostBytes()) / packages;
    // Every mesh variable holds exactly pkg_size^D values per package, no skin.
    std::size_t skin_bytes = 0;
    for (const char *name : {"audit_a", "audit_b", "audit_c", "audit_d"})
        skin_bytes += mesh.template getMeshVariable<Real>(name).hostBytes() - packages * mesh.pointsPerPackage() * sizeof(Real);
    const std::size_t padded = ipow(mesh.pkgSize() + 2, D) * sizeof(Real);
    detail << D << "D: " << measured << " topology bytes per cell (expected " << expected << "), " << measured_after
           << " after adding variables " << variables_before << " -> " << after.mesh_variable_count
           << ", skin bytes 0 == " << skin_bytes << " (a skin layout would store " << padded << " instead of "
           << mesh.pointsPerPackage() * sizeof(Real) << " bytes per cell per variable); ";
    return measured == expected && measured_after == expected && before.topology_bytes_per_cell == expected &&
           after.topology_bytes_per_cell == expected && skin_bytes == 0 && after.mesh_variable_excess_bytes == 0 &&
           after.mesh_variable_count == variables_before + 4;
}

Outcome memoryClaim()
{
    Detail detail;
    const bool two = memoryAudit<2>(detail);
    const bool three = memoryAudit<3>(detail);
    return {two && three, detail.str()};
}

//----------------------------------------------------------------------------------------------//
Outcome signRepair()
{
    const int subdivisions = 3;
    const TriangleMesh full = makeIcosphere(Vec3::Constant(0.5), 0.3, subdivisions);
    // Through an STL file, as a user would supply it.
    auto leaky = std::make_shared<TriangleMesh>(TriangleMesh::loadStl(writeStlBinary(leakySphere(subdivisions, 3)->toSoup())));
    const TriangleMeshShape shape(leaky);
    // Containment in the intact convex polyhedron.
    auto inside = [&](const Vec3 &x)
    {
        for (std::size_t t = 0; t < full.triangles().size(); ++t)
            if (full.faceNormal(t).dot(x - full.vertices()[full.triangles()[t][0]]) > 0.0)
                return false;
        return true;
    };
    auto agreement = [&](const LevelSetLayer<3> &layer)
    {
        const Mesh<3> &mesh = layer.mesh();
        std::size_t agree = 0, total = 0;
        for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
            for (std::size_t i = 0; i < mesh.pointsPerPackage(); ++i)
            {
                ++total;
                agree += (layer.phi().data()[p * mesh.pointsPerPackage() + i] <= 0.0) == inside(pointPosition(mesh, p, i));
            }
        return Real(agree) / Real(total);
    };
    PipelineOptions options;
    const auto baseline = initializeMultiResolution<3>(shape, Vecd<3>::Zero(), Vecd<3>::Ones(), 1.0 / 64, 1.0 / 128, options);
    std::vector<SignCorrectionReport> reports;
    options.correct_signs = true;
    options.correction_reports = &reports;
    const auto corrected = initializeMultiResolution<3>(shape, Vecd<3>::Zero(), Vecd<3>::Ones(), 1.0 / 64, 1.0 / 128, options);
    const Real before = agreement(baseline.finest());
    const Real after = agreement(corrected.finest());
    std::size_t flips = 0;
    for (const auto &r : reports)
        flips += r.flipped_points;
    return {before < 0.99 && after >= 0.999,
            (Detail() << "icosphere (" << full.triangles().size() << " triangles, 3 removed): agreement "
                      << std::setprecision(6) << before << " uncorrected (needs < 0.99), " << after
                      << " corrected (needs >= 0.999), " << flips << " flips")
                .str()};
}

//----------------------------------------------------------------------------------------------//
Outcome reinitialization()
{
    const ShellShape<3> shell(Vecd<3>::Constant(0.5), 0.3, 0.31);
    const ScaledShape<3> doubled(shell, 2.0);
    auto layer = initializeSingleLayer<3>(doubled, unitGeometry<3>(64)); // data spacing 1/256
    const Real initial = bandGradientResidual(layer);
    const std::vector<Real> residuals = reinitializeLevelSet(layer, 100, 0.3, ExecutionPolicy::sequential());
    std::size_t increases = residuals.front() > initial;
    for (std::size_t i = 1; i < residuals.size(); ++i)
        increases += residuals[i] > residuals[i - 1];
    return {residuals.size() == 100 && residuals.back() < 0.05 && increases == 0,
            (Detail() << "residual " << initial << " -> " << residuals.back() << " after " << residuals.size()
                      << " steps, " << increases << " increases")
                .str()};
}

//----------------------------------------------------------------------------------------------//
Outcome kernelIntegrals()
{
    const Real ds = 1.0 / 64;
    const Real h = 2.0 * ds;
    const HalfSpaceShape<3> plane(Vecd<3>(32.5 * ds, 0.5, 0.5), Vecd<3>(1, 0, 0));
    auto layer = initializeSingleLayer<3>(plane, unitGeometry<3>(16));
    computeKernelIntegrals(layer, SmoothingKernel<3>(h), ExecutionPolicy::sequential());
    const HalfSpaceKernelOracle oracle(h);
    const Mesh<3> &mesh = layer.mesh();
    const std::size_t ppp = mesh.pointsPerPackage();
    Real inside_error = 0.0, outside_error = 0.0, surface_error = 0.0;
    std::size_t inside = 0, outside = 0, surface = 0;
    for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
        for (std::size_t i = 0; i < ppp; ++i)
        {
            const Real phi = layer.phi().data()[p * ppp + i];
            const Real value = layer.kernelIntegral().data()[p * ppp + i];
            if (phi <= -2.0 * h - ds)
                ++inside, inside_error = std::max(inside_error, std::abs(value - oracle(phi)));
            else if (phi >= 2.0 * h + ds)
                ++outside, outside_error = std::max(outside_error, std::abs(value - oracle(phi)));
            else if (std::abs(phi) < 1e-12)
                ++surface, surface_error = std::max(surface_error, std::abs(value - oracle(0.0)));
        }
    const bool pass = inside > 0 && outside > 0 && surface > 0 && inside_error <= 1e-2 && outside_error <= 1e-12 &&
                      surface_error <= 2e-2 && std::abs(oracle(-2.0 * h) - 1.0) < 1e-12 && std::abs(oracle(0.0) - 0.5) < 1e-9;
    return {pass, (Detail() << "max deviation from quadrature: deep inside " << inside_error << " (" << inside
                            << " points), deep outside " << outside_error << " (" << outside << "), on surface "
                            << surface_error << " (" << surface << ")")
                      .str()};
}

//----------------------------------------------------------------------------------------------//
Outcome cleaning()
{
    const Real ds = 1.0 / 128;
    const Real h = 2.0 * ds;
    const SlabWithFinShape shape(Vecd<2>(0.1, 0.2), Vecd<2>(0.9, 0.4), 0.05, 0.5, 0.5 * h, 0.25);
    const auto original = initializeSingleLayer<2>(shape, unitGeometry<2>(32));
    auto layer = initializeSingleLayer<2>(shape, unitGeometry<2>(32));
    const SmoothingKernel<2> kernel(h);

    // Fin region well above the slab; the root within the kernel support is not judged.
    auto finInside = [&](const LevelSetLayer<2> &l)
    {
        std::size_t count = 0;
        for (Real y = 0.4 + 2.0 * h + ds; y < 0.4 + 0.25; y += ds / 4)
            for (Real x = 0.5 - h; x <= 0.5 + h; x += ds / 8)
                count += l.probePhi(Vecd<2>(x, y)) <= 0.0;
        return count;
    };
    const std::size_t fin_before = finInside(layer);
    const CleaningReport first = cleanSmallFeatures(layer, kernel, CleaningOptions{}, ExecutionPolicy::sequential());
    const std::size_t fin_after = finInside(layer);
    const CleaningReport second = cleanSmallFeatures(layer, kernel, CleaningOptions{}, ExecutionPolicy::sequential());

    // Zero crossing along a segment from an inside point a to an outside point b.
    auto crossing = [](const LevelSetLayer<2> &l, Vecd<2> a, Vecd<2> b)
    {
        for (int it = 0; it < 60; ++it)
        {
            const Vecd<2> m = 0.5 * (a + b);
            (l.probePhi(m) <= 0.0 ? a : b) = m;
        }
        return a;
    };
    Real displacement = 0.0;
    for (Real x = 0.16; x <= 0.84; x += ds / 3)
    {
        if (std::abs(x - 0.5) < 4.0 * h)
            continue;
        for (Real outside : {0.5, 0.1})
        {
            const Vecd<2> a(x, 0.3), b(x, outside);
            displacement = std::max(displacement, (crossing(layer, a, b) - crossing(original, a, b)).norm());
        }
    }
    for (Real y = 0.26; y <= 0.34; y += ds / 3)
        for (Real outside : {0.0, 1.0})
        {
            const Vecd<2> a(0.5, y), b(outside, y);
            displacement = std::max(displacement, (crossing(layer, a, b) - crossing(original, a, b)).norm());
        }
    const bool pass = fin_before > 0 && fin_after == 0 && first.modified_points > 0 && second.modified_points == 0 &&
                      displacement < ds;
    return {pass, (Detail() << "fin samples inside " << fin_before << " -> " << fin_after << ", modified "
                            << first.modified_points << " points in " << first.rounds << " rounds, second run "
                            << second.modified_points << ", slab displacement " << displacement / ds << " ds")
                      .str()};
}

//----------------------------------------------------------------------------------------------//
Outcome particles()
{
    const Real dp = 1.0 / 64;
    const SphereShape<3> sphere(Vecd<3>::Constant(0.5), 0.3);
    auto levels = initializeMultiResolution<3>(sphere, Vecd<3>::Zero(), Vecd<3>::Ones(), dp, dp / 2, PipelineOptions{});
    LevelSetLayer<3> &layer = levels.finest();
    ParticleSet<3> lattice = generateLatticeParticles(layer, dp);
    const Real expected = 4.0 / 3.0 * std::numbers::pi * 0.027 / (dp * dp * dp);
    const Real ratio = Real(lattice.size()) / expected;
    jitterParticles(lattice, 0.1 * dp, 42);
    const DistanceStatistics before = nearestNeighborStatistics(lattice);
    RelaxationParams params;
    params.steps = 200;
    const ParticleSet<3> relaxed = relaxParticles(layer, lattice, params, ExecutionPolicy::sequential());
    const DistanceStatistics after = nearestNeighborStatistics(relaxed);
    std::size_t outside = 0;
    for (const Vecd<3> &x : relaxed.positions)
        outside += layer.probePhi(x) > 0.0;
    const bool pass = std::abs(ratio - 1.0) <= 0.03 && outside == 0 &&
                      after.coefficient_of_variation < before.coefficient_of_variation;
    return {pass, (Detail() << lattice.size() << " particles (" << std::setprecision(5) << ratio
                            << " of the analytic count), spacing variation " << before.coefficient_of_variation
                            << " -> " << after.coefficient_of_variation << ", " << outside << " outside")
                      .str()};
}

//----------------------------------------------------------------------------------------------//
Outcome benchmark()
{
    bench::BenchOptions options;
    options.resolution = 1.0 / 256;
    options.threads = 4;
    options.runs = 5;
    bench::BenchReport report;
    try
    {
        report = bench::runBenchmark(options);
    }
    catch (const bench::ChecksumMismatch &e)
    {
        return {false, std::string("checksum mismatch: ") + e.what()};
    }
    using bench::BackendKind;
    const auto &pkg1 = report.find("stencil", BackendKind::PackageArray, 1);
    const auto &pkg4 = report.find("stencil", BackendKind::PackageArray, 4);
    const auto &hash1 = report.find("stencil", BackendKind::HashGrid, 1);
    const auto &hash4 = report.find("stencil", BackendKind::HashGrid, 4);
    const double speedup = pkg1.median_seconds / pkg4.median_seconds;
    const bool pass = pkg1.median_seconds < hash1.median_seconds && pkg4.median_seconds < hash4.median_seconds &&
                      speedup >= 2.0;
    return {pass, (Detail() << "checksums equal over " << pkg1.count << " points; stencil median PackageArray "
                            << pkg1.median_seconds << " s vs HashGrid " << hash1.median_seconds << " s at 1 thread, "
                            << pkg4.median_seconds << " s vs " << hash4.median_seconds
                            << " s at 4 threads; 4-thread speedup " << std::setprecision(3) << speedup
                            << "x (needs >= 2) with " << std::thread::hardware_concurrency() << " hardware threads")
                      .str()};
}

//----------------------------------------------------------------------------------------------//
Outcome executionEquivalence()
{
    const ExecutionPolicy seq = ExecutionPolicy::sequential();
    const ExecutionPolicy par = ExecutionPolicy::parallelHost(4);
    std::vector<std::string> differing;
    auto expect = [&](bool same, const char *stage)
    {
        if (!same)
            differing.emplace_back(stage);
    };

    const TriangleMeshShape leaky(leakySphere(2, 3));
    PipelineOptions options;
    options.correct_signs = true;
    options.policy = seq;
    auto a = initializeMultiResolution<3>(leaky, Vecd<3>::Zero(), Vecd<3>::Ones(), 1.0 / 32, 1.0 / 64, options);
    options.policy = par;
    auto b = initializeMultiResolution<3>(leaky, Vecd<3>::Zero(), Vecd<3>::Ones(), 1.0 / 32, 1.0 / 64, options);
    for (std::size_t l = 0; l < a.layers.size(); ++l)
    {
        const Mesh<3> &ma = a.layers[l].mesh();
        const Mesh<3> &mb = b.layers[l].mesh();
        bool topology = ma.numPackages() == mb.numPackages() &&
                        std::memcmp(ma.cellPackageIndex().data(), mb.cellPackageIndex().data(),
                                    ma.geometry().totalCells() * sizeof(PackageIndex)) == 0;
        for (PackageIndex p = 0; topology && p < ma.numPackages(); ++p)
            topology = ma.cellNeighborhood().data()[p].slots == mb.cellNeighborhood().data()[p].slots &&
                       ma.metaCell().data()[p].linear_cell == mb.metaCell().data()[p].linear_cell;
        expect(topology, "tagging, sorting and neighborhoods");
        expect(bitwiseEqual(ma, a.layers[l].phi(), mb, b.layers[l].phi()), "values and sign correction");
    }
    auto &la = a.finest();
    auto &lb = b.finest();
    expect(reinitializeLevelSet(la, 20, 0.3, seq) == reinitializeLevelSet(lb, 20, 0.3, par), "reinitialization residuals");
    expect(bitwiseEqual(la.mesh(), la.phi(), lb.mesh(), lb.phi()), "reinitialization");
    updateLevelSetGradient(la, seq);
    updateLevelSetGradient(lb, par);
    expect(bitwiseEqual(la.mesh(), la.phiGradient(), lb.mesh(), lb.phiGradient()), "gradient");
    const SmoothingKernel<3> kernel(2.0 * la.dataSpacing());
    computeKernelIntegrals(la, kernel, seq);
    computeKernelIntegrals(lb, kernel, par);
    expect(bitwiseEqual(la.mesh(), la.kernelIntegral(), lb.mesh(), lb.kernelIntegral()), "kernel integral");
    expect(bitwiseEqual(la.mesh(), la.kernelGradientIntegral(), lb.mesh(), lb.kernelGradientIntegral()),
           "kernel gradient integral");

    ParticleSet<3> lattice = generateLatticeParticles(la, 1.0 / 64);
    jitterParticles(lattice, 0.1 / 64, 7);
    RelaxationParams params;
    params.steps = 20;
    expect(relaxParticles(la, lattice, params, seq).positions == relaxParticles(lb, lattice, params, par).positions,
           "particle relaxation");

    const Real h = 2.0 / 128;
    const SlabWithFinShape shape(Vecd<2>(0.1, 0.2), Vecd<2>(0.9, 0.4), 0.05, 0.5, 0.5 * h, 0.25);
    auto ca = initializeSingleLayer<2>(shape, unitGeometry<2>(32), seq);
    auto cb = initializeSingleLayer<2>(shape, unitGeometry<2>(32), par);
    cleanSmallFeatures(ca, SmoothingKernel<2>(h), CleaningOptions{}, seq);
    cleanSmallFeatures(cb, SmoothingKernel<2>(h), CleaningOptions{}, par);
    expect(bitwiseEqual(ca.mesh(), ca.phi(), cb.mesh(), cb.phi()), "cleaning");

    Detail detail;
    detail << "9 stages compared at 1 vs 4 threads";
    for (const std::string &stage : differing)
        detail << "; differs: " << stage;
    return {differing.empty(), detail.str()};
}

//----------------------------------------------------------------------------------------------//
Outcome stlAndBvh()
{
    const auto cube_soup = makeBox(Vec3::Zero(), Vec3::Ones()).toSoup();
    const TriangleMesh binary = TriangleMesh::loadStl(writeStlBinary(cube_soup));
    const TriangleMesh ascii = TriangleMesh::loadStl(writeStlAscii(cube_soup));
    const bool topology = binary.vertices().size() == 8 && binary.triangles().size() == 12 &&
                          ascii.vertices().size() == 8 && ascii.triangles().size() == 12 &&
                          binary.triangles() == ascii.triangles();

    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    Real worst = 0.0;
    const TriangleMesh sphere = TriangleMesh::loadStl(writeStlBinary(makeIcosphere(Vec3::Constant(0.5), 0.3, 2).toSoup()));
    for (const TriangleMesh *mesh : {&binary, &sphere})
        for (int i = 0; i < 100; ++i)
        {
            const Vec3 p(u(rng), u(rng), u(rng));
            worst = std::max(worst, std::abs(std::abs(mesh->signedDistance(p).distance) - bruteForceDistance(*mesh, p)));
        }
    return {topology && worst <= 1e-12 && sphere.triangles().size() <= 500,
            (Detail() << "cube: " << binary.vertices().size() << " vertices / " << binary.triangles().size()
                      << " triangles (binary and ASCII); max |BVH - brute force| " << worst
                      << " over 200 points on 12- and " << sphere.triangles().size() << "-triangle meshes")
                .str()};
}
} // namespace

int main(int argc, char **argv)
{
    const std::vector<Criterion> criteria = {
        {1, "index-shift oracle equivalence", 5, indexShift},
        {2, "dense-grid operator equivalence", 5, denseOperators},
        {3, "topology memory audit", 5, memoryClaim},
        {4, "sign-consistency repair", 30, signRepair},
        {5, "reinitialization", 30, reinitialization},
        {6, "kernel integral properties", 30, kernelIntegrals},
        {7, "small feature cleaning", 60, cleaning},
        {8, "particle pipeline", 120, particles},
        {9, "benchmark", 60, benchmark},
        {10, "execution equivalence", 60, executionEquivalence},
        {11, "STL round trip and BVH", 5, stlAndBvh},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion &criterion : criteria)
    {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), criterion.id) == selected.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try
        {
            outcome = criterion.run();
        }
        catch (const std::exception &e)
        {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < criterion.limit_seconds;
        const bool pass = outcome.pass && in_time;
        failures += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << std::setw(2) << criterion.id << " "
                  << criterion.name << ": " << outcome.detail << " [" << std::fixed << std::setprecision(2) << seconds
                  << " s, limit " << std::setprecision(0) << criterion.limit_seconds << " s"
                  << (in_time ? "" : ", over time") << "]" << std::defaultfloat << std::endl;
    }
    std::cout << failures << " failing criteria" << std::endl;
    return failures == 0 ? 0 : 1;
}
