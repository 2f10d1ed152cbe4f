#include "pkgrid/shapes.hpp"

#include <map>

namespace pkgrid
{
namespace
{
Real boxDistance(const Vecd<2> &p, const Vecd<2> &center, const Vecd<2> &half, Real rounding)
{
    const Vecd<2> q = (p - center).cwiseAbs() - (half.array() - rounding).matrix();
    return q.cwiseMax(0.0).norm() + std::min(std::max(q[0], q[1]), 0.0) - rounding;
}
} // namespace

Real SlabWithFinShape::slabSignedDistance(const Vecd<2> &p) const
{
    return boxDistance(p, 0.5 * (slab_lower_ + slab_upper_), 0.5 * (slab_upper_ - slab_lower_), corner_radius_);
}

Real SlabWithFinShape::signedDistance(const Vecd<2> &p) const
{
    const Vecd<2> fin_center(fin_x_, slab_upper_[1] + 0.5 * fin_height_);
    const Real fin = boxDistance(p, fin_center, Vecd<2>(0.5 * fin_width_, 0.5 * fin_height_), 0.0);
    return std::min(slabSignedDistance(p), fin);
}

TriangleMesh makeIcosphere(const Vec3 &center, Real radius, int subdivisions)
{
    const Real t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> unit = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3 &v : unit)
        v.normalize();
    std::vector<TriangleMesh::Triangle> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int level = 0; level < subdivisions; ++level)
    {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b)
        {
            const auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end())
                return it->second;
            unit.push_back((unit[a] + unit[b]).normalized());
            const auto index = static_cast<std::uint32_t>(unit.size() - 1);
            midpoints.emplace(key, index);
            return index;
        };
        std::vector<TriangleMesh::Triangle> refined;
        refined.reserve(faces.size() * 4);
        for (const auto &f : faces)
        {
            const std::uint32_t ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
            refined.push_back({f[0], ab, ca});
            refined.push_back({f[1], bc, ab});
            refined.push_back({f[2], ca, bc});
            refined.push_back({ab, bc, ca});
        }
        faces = std::move(refined);
    }
    for (Vec3 &v : unit)
        v = center + radius * v;
    return TriangleMesh::fromIndexed(std::move(unit), std::move(faces));
}

TriangleMesh makeBox(const Vec3 &lower, const Vec3 &upper)
{
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i)
        v.emplace_back((i & 4) ? upper[0] : lower[0], (i & 2) ? upper[1] : lower[1], (i & 1) ? upper[2] : lower[2]);
    // Corner i has bits (x, y, z) = (i & 4, i & 2, i & 1); faces wound outward.
    std::vector<TriangleMesh::Triangle> f = {
        {0, 1, 3}, {0, 3, 2}, // x = lower
        {4, 6, 7}, {4, 7, 5}, // x = upper
        {0, 4, 5}, {0, 5, 1}, // y = lower
        {2, 3, 7}, {2, 7, 6}, // y = upper
        {0, 2, 6}, {0, 6, 4}, // z = lower
        {1, 5, 7}, {1, 7, 3}, // z = upper
    };
    return TriangleMesh::fromIndexed(std::move(v), std::move(f));
}
} // namespace pkgrid
