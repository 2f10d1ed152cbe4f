#ifndef PKGRID_TRIANGLE_MESH_HPP
#define PKGRID_TRIANGLE_MESH_HPP

#include "pkgrid/grid_geometry.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pkgrid
{
using Vec3 = Eigen::Vector3d;

struct StlParseError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// One facet as it appears in an STL file: three corners, no connectivity.
struct RawTriangle
{
    std::array<Vec3, 3> corners;
};

/// Parses binary or ASCII STL. ASCII is recognized by a leading "solid"
/// keyword whose body also contains "facet"; anything else must be a
/// well-formed binary file whose size matches its record count.
std::vector<RawTriangle> parseStl(std::string_view bytes);
std::string writeStlBinary(const std::vector<RawTriangle> &triangles);
std::string writeStlAscii(const std::vector<RawTriangle> &triangles, const std::string &solid_name = "pkgrid");

enum class ClosestFeature : std::uint8_t
{
    Face,
    Edge,
    Vertex
};

struct SignedDistanceResult
{
    Real distance = 0.0;
    Vec3 closest_point = Vec3::Zero();
    ClosestFeature feature = ClosestFeature::Face;
    std::uint32_t triangle = 0;
};

/// Closest point on triangle (a, b, c) to p, with the Voronoi feature it lies
/// on. local_feature is the vertex (0..2) or edge (0: ab, 1: bc, 2: ca).
Vec3 closestPointOnTriangle(const Vec3 &p, const Vec3 &a, const Vec3 &b, const Vec3 &c,
                            ClosestFeature &feature, int &local_feature);

/// Indexed triangle surface with angle-weighted pseudonormals and a BVH.
///
/// Built from a triangle soup by welding coincident corners. Welding may leave
/// cracks on inputs whose facets do not share exact corners; the surface is
/// still usable, only the sign of far queries may become unreliable.
class TriangleMesh
{
  public:
    using Triangle = std::array<std::uint32_t, 3>;

    static TriangleMesh fromSoup(const std::vector<RawTriangle> &soup);
    static TriangleMesh fromIndexed(std::vector<Vec3> vertices, std::vector<Triangle> triangles);
    static TriangleMesh loadStl(std::string_view bytes) { return fromSoup(parseStl(bytes)); }
    static TriangleMesh loadStlFile(const std::string &path);

    const std::vector<Vec3> &vertices() const { return vertices_; }
    const std::vector<Triangle> &triangles() const { return triangles_; }
    const Vec3 &faceNormal(std::size_t t) const { return face_normals_[t]; }
    const Vec3 &vertexPseudonormal(std::size_t v) const { return vertex_normals_[v]; }
    Vec3 edgePseudonormal(std::uint32_t a, std::uint32_t b) const;
    Eigen::AlignedBox3d boundingBox() const { return bounds_; }
    std::vector<RawTriangle> toSoup() const;

    /// Unsigned distance via the BVH; the sign comes from the pseudonormal of
    /// the closest feature (negative inside).
    SignedDistanceResult signedDistance(const Vec3 &p) const;
    Real distanceToSurface(const Vec3 &p) const { return std::abs(signedDistance(p).distance); }

  private:
    struct BvhNode
    {
        Eigen::AlignedBox3d box;
        std::uint32_t first = 0; ///< first child (inner) or first primitive (leaf)
        std::uint32_t count = 0; ///< primitives in a leaf, 0 for inner nodes
        std::uint32_t right = 0; ///< second child of an inner node
    };

    void buildNormals();
    void buildBvh();
    std::uint32_t buildNode(std::uint32_t begin, std::uint32_t end, std::vector<Vec3> &centroids);

    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Vec3> face_normals_;
    std::vector<Vec3> vertex_normals_;
    std::vector<std::pair<std::uint64_t, Vec3>> edge_normals_; ///< sorted by edge key
    std::vector<BvhNode> nodes_;
    std::vector<std::uint32_t> primitive_order_;
    Eigen::AlignedBox3d bounds_;
};

} // namespace pkgrid
#endif // PKGRID_TRIANGLE_MESH_HPP
