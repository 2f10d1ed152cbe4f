#include "pkgrid/triangle_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace pkgrid
{
namespace
{
constexpr std::uint32_t kLeafSize = 4;

std::uint64_t edgeKey(std::uint32_t a, std::uint32_t b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

Real angleBetween(const Vec3 &u, const Vec3 &v)
{
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

/// Closest point on segment ab; t is the parameter along ab.
Vec3 closestOnSegment(const Vec3 &p, const Vec3 &a, const Vec3 &b, Real &t)
{
    const Vec3 ab = b - a;
    const Real length2 = ab.squaredNorm();
    t = length2 > 0.0 ? std::clamp((p - a).dot(ab) / length2, 0.0, 1.0) : 0.0;
    return a + t * ab;
}

struct WeldKey
{
    std::int64_t x, y, z;
    bool operator==(const WeldKey &) const = default;
};

struct WeldKeyHash
{
    std::size_t operator()(const WeldKey &k) const
    {
        std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
        h ^= static_cast<std::size_t>(k.y) * 19349663u;
        h ^= static_cast<std::size_t>(k.z) * 83492791u;
        return h;
    }
};
} // namespace

Vec3 closestPointOnTriangle(const Vec3 &p, const Vec3 &a, const Vec3 &b, const Vec3 &c,
                            ClosestFeature &feature, int &local_feature)
{
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    if (ab.cross(ac).squaredNorm() == 0.0)
    {
        // Degenerate: closest among the three edges.
        const Vec3 *corners[3] = {&a, &b, &c};
        Vec3 best = a;
        Real best_d2 = std::numeric_limits<Real>::infinity();
        for (int e = 0; e < 3; ++e)
        {
            Real t;
            const Vec3 q = closestOnSegment(p, *corners[e], *corners[(e + 1) % 3], t);
            const Real d2 = (p - q).squaredNorm();
            if (d2 < best_d2)
            {
                best_d2 = d2;
                best = q;
                if (t <= 0.0 || t >= 1.0)
                {
                    feature = ClosestFeature::Vertex;
                    local_feature = t <= 0.0 ? e : (e + 1) % 3;
                }
                else
                {
                    feature = ClosestFeature::Edge;
                    local_feature = e;
                }
            }
        }
        return best;
    }

    const Real d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0)
    {
        feature = ClosestFeature::Vertex;
        local_feature = 0;
        return a;
    }
    const Vec3 bp = p - b;
    const Real d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3)
    {
        feature = ClosestFeature::Vertex;
        local_feature = 1;
        return b;
    }
    const Real vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
    {
        feature = ClosestFeature::Edge;
        local_feature = 0;
        return a + (d1 / (d1 - d3)) * ab;
    }
    const Vec3 cp = p - c;
    const Real d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6)
    {
        feature = ClosestFeature::Vertex;
        local_feature = 2;
        return c;
    }
    const Real vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
    {
        feature = ClosestFeature::Edge;
        local_feature = 2;
        return a + (d2 / (d2 - d6)) * ac;
    }
    const Real va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    {
        feature = ClosestFeature::Edge;
        local_feature = 1;
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }
    feature = ClosestFeature::Face;
    local_feature = 0;
    const Real denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}
//=================================================================================================//
TriangleMesh TriangleMesh::fromSoup(const std::vector<RawTriangle> &soup)
{
    if (soup.empty())
        throw StlParseError("geometry contains no triangles");
    Eigen::AlignedBox3d box;
    for (const RawTriangle &t : soup)
        for (const Vec3 &corner : t.corners)
        {
            if (!corner.allFinite())
                throw StlParseError("geometry contains non-finite coordinates");
            box.extend(corner);
        }
    const Real tolerance = std::max(1.0e-6 * box.diagonal().norm(), std::numeric_limits<Real>::min());

    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    triangles.reserve(soup.size());
    std::unordered_map<WeldKey, std::vector<std::uint32_t>, WeldKeyHash> buckets;
    auto weld = [&](const Vec3 &p) -> std::uint32_t
    {
        const WeldKey base{static_cast<std::int64_t>(std::floor(p[0] / tolerance)),
                           static_cast<std::int64_t>(std::floor(p[1] / tolerance)),
                           static_cast<std::int64_t>(std::floor(p[2] / tolerance))};
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz)
                {
                    auto it = buckets.find({base.x + dx, base.y + dy, base.z + dz});
                    if (it == buckets.end())
                        continue;
                    for (std::uint32_t v : it->second)
                        if ((vertices[v] - p).norm() <= tolerance)
                            return v;
                }
        const auto index = static_cast<std::uint32_t>(vertices.size());
        vertices.push_back(p);
        buckets[base].push_back(index);
        return index;
    };
    for (const RawTriangle &t : soup)
        triangles.push_back({weld(t.corners[0]), weld(t.corners[1]), weld(t.corners[2])});
    return fromIndexed(std::move(vertices), std::move(triangles));
}
//=================================================================================================//
TriangleMesh TriangleMesh::fromIndexed(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
{
    if (triangles.empty())
        throw StlParseError("geometry contains no triangles");
    TriangleMesh mesh;
    mesh.vertices_ = std::move(vertices);
    mesh.triangles_ = std::move(triangles);
    for (const Triangle &t : mesh.triangles_)
        for (std::uint32_t v : t)
            if (v >= mesh.vertices_.size())
                throw std::out_of_range("triangle references a missing vertex");
    for (const Vec3 &v : mesh.vertices_)
        mesh.bounds_.extend(v);
    mesh.buildNormals();
    if (std::all_of(mesh.face_normals_.begin(), mesh.face_normals_.end(), [](const Vec3 &n)
                    { return n.isZero(0.0); }))
        throw StlParseError("geometry contains only degenerate triangles");
    mesh.buildBvh();
    return mesh;
}
//=================================================================================================//
void TriangleMesh::buildNormals()
{
    face_normals_.assign(triangles_.size(), Vec3::Zero());
    vertex_normals_.assign(vertices_.size(), Vec3::Zero());
    std::unordered_map<std::uint64_t, Vec3> edges;
    for (std::size_t t = 0; t < triangles_.size(); ++t)
    {
        const Triangle &tri = triangles_[t];
        const Vec3 &a = vertices_[tri[0]], &b = vertices_[tri[1]], &c = vertices_[tri[2]];
        const Vec3 n = (b - a).cross(c - a);
        const Real area2 = n.norm();
        if (area2 == 0.0 || tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            continue; // degenerate: kept for distance, skipped for pseudonormals
        const Vec3 unit = n / area2;
        face_normals_[t] = unit;
        for (int i = 0; i < 3; ++i)
        {
            const Vec3 &p = vertices_[tri[i]];
            const Vec3 &q = vertices_[tri[(i + 1) % 3]];
            const Vec3 &r = vertices_[tri[(i + 2) % 3]];
            vertex_normals_[tri[i]] += angleBetween(q - p, r - p) * unit;
            edges.try_emplace(edgeKey(tri[i], tri[(i + 1) % 3]), Vec3::Zero()).first->second += unit;
        }
    }
    for (Vec3 &n : vertex_normals_)
        if (n.norm() > 0.0)
            n.normalize();
    edge_normals_.assign(edges.begin(), edges.end());
    std::sort(edge_normals_.begin(), edge_normals_.end(), [](const auto &x, const auto &y)
              { return x.first < y.first; });
    for (auto &[key, n] : edge_normals_)
        if (n.norm() > 0.0)
            n.normalize();
}
//=================================================================================================//
Vec3 TriangleMesh::edgePseudonormal(std::uint32_t a, std::uint32_t b) const
{
    const std::uint64_t key = edgeKey(a, b);
    auto it = std::lower_bound(edge_normals_.begin(), edge_normals_.end(), key,
                               [](const auto &entry, std::uint64_t k)
                               { return entry.first < k; });
    if (it == edge_normals_.end() || it->first != key)
        return Vec3::Zero();
    return it->second;
}
//=================================================================================================//
void TriangleMesh::buildBvh()
{
    std::vector<Vec3> centroids(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t)
    {
        const Triangle &tri = triangles_[t];
        centroids[t] = (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
    }
    primitive_order_.resize(triangles_.size());
    std::iota(primitive_order_.begin(), primitive_order_.end(), 0u);
    nodes_.clear();
    nodes_.reserve(2 * triangles_.size() / kLeafSize + 2);
    buildNode(0, static_cast<std::uint32_t>(triangles_.size()), centroids);
}

std::uint32_t TriangleMesh::buildNode(std::uint32_t begin, std::uint32_t end, std::vector<Vec3> &centroids)
{
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Eigen::AlignedBox3d box, centroid_box;
    for (std::uint32_t i = begin; i < end; ++i)
    {
        const Triangle &tri = triangles_[primitive_order_[i]];
        for (std::uint32_t v : tri)
            box.extend(vertices_[v]);
        centroid_box.extend(centroids[primitive_order_[i]]);
    }
    nodes_[index].box = box;
    if (end - begin <= kLeafSize)
    {
        nodes_[index].first = begin;
        nodes_[index].count = end - begin;
        return index;
    }
    int axis;
    centroid_box.diagonal().maxCoeff(&axis);
    const std::uint32_t middle = begin + (end - begin) / 2;
    std::nth_element(primitive_order_.begin() + begin, primitive_order_.begin() + middle,
                     primitive_order_.begin() + end, [&](std::uint32_t x, std::uint32_t y)
                     {
                         if (centroids[x][axis] != centroids[y][axis])
                             return centroids[x][axis] < centroids[y][axis];
                         return x < y; });
    const std::uint32_t left = buildNode(begin, middle, centroids);
    const std::uint32_t right = buildNode(middle, end, centroids);
    nodes_[index].first = left;
    nodes_[index].right = right;
    nodes_[index].count = 0;
    return index;
}
//=================================================================================================//
SignedDistanceResult TriangleMesh::signedDistance(const Vec3 &p) const
{
    Real best_d2 = std::numeric_limits<Real>::infinity();
    std::uint32_t best_triangle = 0;
    Vec3 best_point = Vec3::Zero();
    ClosestFeature best_feature = ClosestFeature::Face;
    int best_local = 0;

    struct Entry
    {
        std::uint32_t node;
        Real d2;
    };
    std::vector<Entry> stack;
    stack.reserve(64);
    stack.push_back({0, nodes_[0].box.squaredExteriorDistance(p)});
    while (!stack.empty())
    {
        const Entry entry = stack.back();
        stack.pop_back();
        if (entry.d2 > best_d2)
            continue;
        const BvhNode &node = nodes_[entry.node];
        if (node.count > 0)
        {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
            {
                const std::uint32_t t = primitive_order_[i];
                const Triangle &tri = triangles_[t];
                ClosestFeature feature;
                int local;
                const Vec3 q = closestPointOnTriangle(p, vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]],
                                                      feature, local);
                const Real d2 = (p - q).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && t < best_triangle))
                {
                    best_d2 = d2;
                    best_triangle = t;
                    best_point = q;
                    best_feature = feature;
                    best_local = local;
                }
            }
            continue;
        }
        const std::uint32_t left = node.first;
        const std::uint32_t right = node.right;
        const Real dl = nodes_[left].box.squaredExteriorDistance(p);
        const Real dr = nodes_[right].box.squaredExteriorDistance(p);
        // Push the farther child first so the nearer one is visited next.
        if (dl <= dr)
        {
            stack.push_back({right, dr});
            stack.push_back({left, dl});
        }
        else
        {
            stack.push_back({left, dl});
            stack.push_back({right, dr});
        }
    }

    const Triangle &tri = triangles_[best_triangle];
    Vec3 pseudonormal;
    switch (best_feature)
    {
    case ClosestFeature::Vertex:
        pseudonormal = vertex_normals_[tri[best_local]];
        break;
    case ClosestFeature::Edge:
        pseudonormal = edgePseudonormal(tri[best_local], tri[(best_local + 1) % 3]);
        break;
    default:
        pseudonormal = face_normals_[best_triangle];
        break;
    }
    const Real distance = std::sqrt(best_d2);
    const Real side = pseudonormal.dot(p - best_point);
    return {side < 0.0 ? -distance : distance, best_point, best_feature, best_triangle};
}
//=================================================================================================//
std::vector<RawTriangle> TriangleMesh::toSoup() const
{
    std::vector<RawTriangle> soup(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t)
        for (int v = 0; v < 3; ++v)
            soup[t].corners[v] = vertices_[triangles_[t][v]];
    return soup;
}
} // namespace pkgrid
