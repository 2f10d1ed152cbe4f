#include "support.hpp"

#include "pkgrid/particles.hpp"

#include <doctest.h>

#include <cstring>
#include <numbers>

using namespace pkgrid;
using namespace pkgrid::testing;

namespace
{
// Large body with a band far from its center, so the center sees no surface.
LevelSetLayer<3> bigSphere() { return sphereLayer<3>(16, 0.45); }
} // namespace

TEST_CASE("lattice generation fills the body")
{
    const Real dp = 1.0 / 64;
    const auto layer = sphereLayer<3>(32, 0.3);
    const ParticleSet<3> particles = generateLatticeParticles(layer, dp);
    const Real expected = 4.0 / 3.0 * std::numbers::pi * 0.027 / (dp * dp * dp);
    CHECK(std::abs(Real(particles.size()) / expected - 1.0) <= 0.03);
    CHECK(particles.reference_spacing == dp);
    for (const Vecd<3> &x : particles.positions)
    {
        REQUIRE(layer.probePhi(x) <= 0.0);
        // On the lattice lower + (i + 0.5) dp.
        const Eigen::Array3d i = x.array() / dp - 0.5;
        CHECK((i - i.round()).abs().maxCoeff() < 1e-9);
    }

    // Dense containment oracle on the same lattice.
    std::size_t inside = 0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j)
            for (int k = 0; k < 64; ++k)
                inside += (dp * (Vecd<3>(i, j, k).array() + 0.5).matrix() - Vecd<3>::Constant(0.5)).norm() <= 0.3;
    CHECK(std::abs(Real(particles.size()) - Real(inside)) <= 0.01 * inside);

    const SphereShape<3> away(Vecd<3>::Constant(5.0), 0.3);
    const auto empty = initializeSingleLayer<3>(away, unitGeometry<3>(8));
    CHECK(generateLatticeParticles(empty, dp).size() == 0);
}

TEST_CASE("a lone particle in the middle of a body does not move")
{
    LevelSetLayer<3> layer = bigSphere();
    ParticleSet<3> one;
    one.reference_spacing = 1.0 / 64;
    one.positions = {Vecd<3>::Constant(0.5)};
    RelaxationParams params;
    params.steps = 10;
    const ParticleSet<3> out = relaxParticles(layer, one, params);
    CHECK(out.positions[0] == one.positions[0]);
}

TEST_CASE("a close pair separates symmetrically along its axis")
{
    LevelSetLayer<3> layer = bigSphere();
    const Real dp = 1.0 / 64;
    const Vecd<3> axis = Vecd<3>(1, 2, 2) / 3.0;
    ParticleSet<3> pair;
    pair.reference_spacing = dp;
    pair.positions = {Vecd<3>::Constant(0.5) - 0.25 * dp * axis, Vecd<3>::Constant(0.5) + 0.25 * dp * axis};
    RelaxationParams params;
    params.steps = 1;
    const ParticleSet<3> out = relaxParticles(layer, pair, params);
    const Vecd<3> move0 = out.positions[0] - pair.positions[0];
    const Vecd<3> move1 = out.positions[1] - pair.positions[1];

    // The largest force sets the pseudo time step so that it moves h/32.
    const Real h = params.smoothing_ratio * dp;
    CHECK(move1.norm() == doctest::Approx(h / 32.0).epsilon(1e-12));
    CHECK(move1.dot(axis) > 0.0);
    CHECK((move1 - move1.dot(axis) * axis).norm() <= 1e-12 * dp);
    CHECK((move0 + move1).norm() <= 1e-12 * dp);
    CHECK(((out.positions[0] + out.positions[1]) - (pair.positions[0] + pair.positions[1])).norm() <= 2e-12 * dp);
}

TEST_CASE("pairwise force matches the closed-form kernel gradient")
{
    // Below the step cap the move scales with the force, so a third particle
    // far away from the pair lets the ratio of two closed-form forces show.
    LevelSetLayer<3> layer = bigSphere();
    const Real dp = 1.0 / 64;
    const Real h = 1.3 * dp;
    const Real factor = 21.0 / (16.0 * std::numbers::pi * h * h * h);
    auto force = [&](Real r)
    {
        const Real q = r / h;
        const Real a = 1.0 - 0.5 * q;
        return 5.0 * factor * q * a * a * a / h * dp * dp * dp; // -dW/dr V
    };
    ParticleSet<3> set;
    set.reference_spacing = dp;
    const Vecd<3> c = Vecd<3>::Constant(0.5);
    set.positions = {c, c + Vecd<3>(0.5 * dp, 0, 0), c + Vecd<3>(0, 0.1, 0), c + Vecd<3>(0.7 * dp, 0.1, 0)};
    RelaxationParams params;
    params.steps = 1;
    const ParticleSet<3> out = relaxParticles(layer, set, params);
    const Real near = (out.positions[1] - set.positions[1]).norm();
    const Real far = (out.positions[3] - set.positions[3]).norm();
    CHECK(far / near == doctest::Approx(force(0.7 * dp) / force(0.5 * dp)).epsilon(1e-10));
}

TEST_CASE("relaxation is deterministic and policy independent")
{
    LevelSetLayer<3> layer = sphereLayer<3>(16, 0.3);
    ParticleSet<3> particles = generateLatticeParticles(layer, 1.0 / 64);
    jitterParticles(particles, 0.1 / 64, 3);
    RelaxationParams params;
    params.steps = 5;
    const auto a = relaxParticles(layer, particles, params, ExecutionPolicy::sequential());
    const auto b = relaxParticles(layer, particles, params, ExecutionPolicy::sequential());
    const auto c = relaxParticles(layer, particles, params, ExecutionPolicy::parallelHost(4));
    CHECK(a.positions == b.positions);
    CHECK(a.positions == c.positions);
    for (const Vecd<3> &x : a.positions)
        CHECK(layer.probePhi(x) <= 0.0);

    params.steps = 0;
    CHECK(relaxParticles(layer, particles, params).positions == particles.positions);
}

TEST_CASE("nearest neighbor statistics of a regular lattice")
{
    ParticleSet<2> grid;
    grid.reference_spacing = 0.1;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            grid.positions.emplace_back(0.1 * i, 0.1 * j);
    const DistanceStatistics stats = nearestNeighborStatistics(grid);
    CHECK(stats.counted == 25);
    CHECK(stats.mean == doctest::Approx(0.1));
    CHECK(stats.coefficient_of_variation == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("particle export")
{
    ParticleSet<3> origin;
    origin.positions = {Vecd<3>::Zero()};
    CHECK(exportParticles(origin, "csv") == "x,y,z\n0,0,0\n");

    ParticleSet<2> flat;
    flat.positions = {Vecd<2>(0.5, -1.25)};
    CHECK(exportParticles(flat, "csv") == "x,y,z\n0.5,-1.25,0\n");

    ParticleSet<3> random;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i)
        random.positions.emplace_back(u(rng), u(rng) * 1e-7, u(rng) * 1e9);
    const ParticleSet<3> back = parseParticlesCsv(exportParticles(random, "csv"));
    REQUIRE(back.size() == random.size());
    CHECK(std::memcmp(back.positions.data(), random.positions.data(), sizeof(Vecd<3>) * random.size()) == 0);

    const std::string ply = exportParticles(random, "ply");
    CHECK(ply.starts_with("ply\nformat binary_little_endian 1.0\n"));
    CHECK(ply.find("element vertex 1000\n") != std::string::npos);
    const std::size_t body = ply.find("end_header\n") + std::string("end_header\n").size();
    REQUIRE(ply.size() == body + 1000 * 3 * sizeof(double));
    double first[3];
    std::memcpy(first, ply.data() + body, sizeof first);
    CHECK(first[0] == random.positions[0][0]);
    CHECK(first[2] == random.positions[0][2]);

    CHECK_THROWS_AS(exportParticles(random, "obj"), std::invalid_argument);
    CHECK_THROWS(parseParticlesCsv("a,b\n1,2\n"));
}
