#include "support.hpp"

#include <doctest.h>

using namespace pkgrid;
using pkgrid::testing::unitGeometry;

namespace
{
GridGeometry<2> geometry2d()
{
    GridGeometry<2> g;
    g.lower_corner = Vecd<2>::Zero();
    g.coarse_cell_size = 1.0;
    g.cells_per_axis = Arrayi<2>(8, 8);
    g.pkg_size = 4;
    return g;
}
} // namespace

TEST_CASE("data spacing follows from cell size and package size")
{
    const Mesh<2> mesh(geometry2d());
    CHECK(mesh.dataSpacing() == 0.25);
    CHECK(mesh.dataSpacing() * mesh.pkgSize() == mesh.geometry().coarse_cell_size);
    CHECK(mesh.numPackages() == kNumSingularPackages);
}

TEST_CASE("invalid geometries are rejected")
{
    GridGeometry<2> g = geometry2d();
    g.pkg_size = 0;
    CHECK_THROWS_AS(Mesh<2>{g}, std::invalid_argument);
    g = geometry2d();
    g.cells_per_axis = Arrayi<2>(0, 8);
    CHECK_THROWS_AS(Mesh<2>{g}, std::invalid_argument);
}

TEST_CASE("huge background mesh allocates no per-cell storage up front")
{
    GridGeometry<3> g;
    g.coarse_cell_size = 1.0 / 256;
    g.cells_per_axis = Arrayi<3>::Constant(1024);
    const Mesh<3> mesh(g);
    CHECK_FALSE(mesh.backgroundAllocated());
    CHECK(mesh.cellPackageIndex().hostBytes() == 0);
    CHECK(mesh.topologyAudit().mesh_variable_bytes == 0);
}

TEST_CASE("linearization round trip")
{
    const Arrayi<3> extent(3, 5, 7);
    for (std::size_t i = 0; i < 105; ++i)
        CHECK(linearizeRowMajor<3>(delinearizeRowMajor<3>(i, extent), extent) == i);
    CHECK(linearizeRowMajor<3>(Arrayi<3>(1, 2, 3), extent) == (1 * 5 + 2) * 7 + 3);
}

TEST_CASE("variable registry is keyed by type and name")
{
    Mesh<2> mesh(geometry2d());
    auto &phi = mesh.registerMeshVariable<Real>("phi");
    CHECK(&mesh.getMeshVariable<Real>("phi") == &phi);
    CHECK_THROWS_AS(mesh.registerMeshVariable<Real>("phi"), std::invalid_argument);
    CHECK_NOTHROW(mesh.registerMeshVariable<Vecd<2>>("phi"));
    CHECK_THROWS_AS(mesh.getMeshVariable<int>("phi"), std::out_of_range);
    CHECK(phi.numEntries() == mesh.numPackages());
}

TEST_CASE("reallocation preserves existing packages")
{
    Mesh<2> mesh(geometry2d());
    auto &phi = mesh.registerMeshVariable<Real>("phi");
    phi.data()[0] = -7.0;
    phi.data()[mesh.pointsPerPackage()] = 7.0;
    mesh.reallocatePackages(100);
    CHECK(phi.numEntries() == 100);
    CHECK(phi.data()[0] == -7.0);
    CHECK(phi.data()[mesh.pointsPerPackage()] == 7.0);

    for (std::size_t i = 0; i < mesh.pointsPerPackage(); ++i)
        phi.data()[50 * mesh.pointsPerPackage() + i] = static_cast<Real>(i);
    mesh.reallocatePackages(100);
    mesh.reallocatePackages(200);
    for (std::size_t i = 0; i < mesh.pointsPerPackage(); ++i)
        CHECK(phi.data()[50 * mesh.pointsPerPackage() + i] == static_cast<Real>(i));
    CHECK(mesh.cellNeighborhood().numEntries() == 200);
    CHECK(mesh.metaCell().numEntries() == 200);
    CHECK_THROWS(mesh.reallocatePackages(1));
}

TEST_CASE("data point positions use the cell-centered convention")
{
    const GridGeometry<2> g = geometry2d();
    const Vecd<2> a = g.dataPointPosition(Arrayi<2>(0, 0), Arrayi<2>(0, 0));
    CHECK(a[0] == 0.125);
    CHECK(a[1] == 0.125);
    const Vecd<2> b = g.dataPointPosition(Arrayi<2>(1, 0), Arrayi<2>(3, 3));
    CHECK(b[0] == 1.875);
    CHECK(b[1] == 0.875);
    CHECK_THROWS_AS(g.dataPointPosition(Arrayi<2>(8, 0), Arrayi<2>(0, 0)), std::out_of_range);
    CHECK_THROWS_AS(g.dataPointPosition(Arrayi<2>(0, 0), Arrayi<2>(4, 0)), std::out_of_range);
}

TEST_CASE("position to indices inverts data point positions on the whole mesh")
{
    const GridGeometry<2> g = geometry2d();
    for (int cx = 0; cx < 8; ++cx)
        for (int cy = 0; cy < 8; ++cy)
            for (int dx = 0; dx < 4; ++dx)
                for (int dy = 0; dy < 4; ++dy)
                {
                    const auto [cell, data] = g.positionToIndices(g.dataPointPosition({cx, cy}, {dx, dy}));
                    REQUIRE(cell[0] == cx);
                    REQUIRE(cell[1] == cy);
                    REQUIRE(data[0] == dx);
                    REQUIRE(data[1] == dy);
                }
    const auto [cell, data] = g.positionToIndices(Vecd<2>(0.1, 0.1));
    CHECK((cell == 0).all());
    CHECK((data == 0).all());
    CHECK_THROWS_AS(g.positionToIndices(Vecd<2>(-0.01, 0.5)), std::out_of_range);
    CHECK_THROWS_AS(g.positionToIndices(Vecd<2>(8.01, 0.5)), std::out_of_range);
}

TEST_CASE("sub-cell boundaries belong to the higher index")
{
    const GridGeometry<2> g = geometry2d();
    for (int k = 1; k < 32; ++k)
    {
        const Real x = 0.25 * k; // exact in binary
        const auto [cell, data] = g.positionToIndices(Vecd<2>(x, 0.3));
        CHECK(cell[0] * 4 + data[0] == k);
    }
    const auto [cell, data] = g.positionToIndices(Vecd<2>(8.0, 0.3));
    CHECK(cell[0] * 4 + data[0] == 31);
}

TEST_CASE("activation and the background/meta bijection")
{
    Mesh<2> mesh(geometry2d());
    CHECK_FALSE(mesh.isActivated(Arrayi<2>(3, 3)));
    const std::vector<std::pair<LinearCellIndex, PackageCategory>> cells = {
        {1, PackageCategory::Inner}, {5, PackageCategory::Core}, {9, PackageCategory::Core}, {40, PackageCategory::Inner}};
    mesh.activateCells(cells);
    CHECK(mesh.numPackages() == 6);
    CHECK(mesh.isActivated(mesh.geometry().cellFromLinear(9)));
    CHECK(mesh.packageAt(mesh.geometry().cellFromLinear(9)) == 4);
    std::size_t activated = 0;
    for (std::size_t c = 0; c < mesh.geometry().totalCells(); ++c)
    {
        const PackageIndex p = mesh.cellPackageIndex().data()[c];
        if (p >= kNumSingularPackages)
        {
            ++activated;
            CHECK(mesh.metaCell().data()[p].linear_cell == c);
        }
    }
    CHECK(activated == mesh.numPackages() - kNumSingularPackages);
    CHECK(mesh.category(0) == PackageCategory::SingularNegative);
    CHECK(mesh.category(1) == PackageCategory::SingularPositive);
    CHECK(mesh.category(3) == PackageCategory::Core);

    Mesh<2> twice(geometry2d());
    CHECK_THROWS_AS(twice.activateCells({{3, PackageCategory::Core}, {3, PackageCategory::Core}}),
                    std::invalid_argument);
}

TEST_CASE("singular neighborhoods refer to themselves and built meshes pass the topology check")
{
    const auto layer = pkgrid::testing::sphereLayer<3>(8);
    const Mesh<3> &mesh = layer.mesh();
    for (PackageIndex s : {kNegativeFarField, kPositiveFarField})
        for (PackageIndex slot : mesh.cellNeighborhood().data()[s].slots)
            CHECK(slot == s);
    for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
        CHECK(mesh.cellNeighborhood().data()[p].self() == p);
    CHECK_NOTHROW(mesh.checkTopology());
}

TEST_CASE("topology overhead per cell does not depend on the number of variables")
{
    Mesh<3> mesh(unitGeometry<3>(6));
    mesh.activateCells({{10, PackageCategory::Core}, {11, PackageCategory::Inner}});
    mesh.registerMeshVariable<Real>("a");
    const TopologyAudit one = mesh.topologyAudit();
    for (const char *name : {"b", "c", "d", "e"})
        mesh.registerMeshVariable<Real>(name);
    const TopologyAudit five = mesh.topologyAudit();
    CHECK(one.neighborhood_words_per_cell == 27);
    CHECK(one.neighborhood_bytes_per_cell == 27 * sizeof(PackageIndex));
    CHECK(one.meta_bytes_per_cell == sizeof(MetaCell));
    CHECK(five.topology_bytes_per_cell == one.topology_bytes_per_cell);
    CHECK(five.mesh_variable_count == 5);
    CHECK(five.mesh_variable_excess_bytes == 0);
}
