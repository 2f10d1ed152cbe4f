#ifndef PKGRID_SHAPES_HPP
#define PKGRID_SHAPES_HPP

#include "pkgrid/triangle_mesh.hpp"

#include <memory>

namespace pkgrid
{
/// Signed-distance source for level-set construction (negative inside).
template <int D>
class Shape
{
  public:
    virtual ~Shape() = default;
    virtual Real signedDistance(const Vecd<D> &p) const = 0;
    virtual Real distance(const Vecd<D> &p) const { return std::abs(signedDistance(p)); }
};

template <int D>
class SphereShape : public Shape<D>
{
  public:
    SphereShape(const Vecd<D> &center, Real radius) : center_(center), radius_(radius) {}
    Real signedDistance(const Vecd<D> &p) const override { return (p - center_).norm() - radius_; }

  private:
    Vecd<D> center_;
    Real radius_;
};

/// Solid spherical shell between two radii.
template <int D>
class ShellShape : public Shape<D>
{
  public:
    ShellShape(const Vecd<D> &center, Real inner_radius, Real outer_radius)
        : center_(center), inner_(inner_radius), outer_(outer_radius) {}
    Real signedDistance(const Vecd<D> &p) const override
    {
        const Real r = (p - center_).norm();
        return std::max(inner_ - r, r - outer_);
    }

  private:
    Vecd<D> center_;
    Real inner_, outer_;
};

/// Half space {x : normal . (x - origin) <= 0}.
template <int D>
class HalfSpaceShape : public Shape<D>
{
  public:
    HalfSpaceShape(const Vecd<D> &origin, const Vecd<D> &normal) : origin_(origin), normal_(normal.normalized()) {}
    Real signedDistance(const Vecd<D> &p) const override { return normal_.dot(p - origin_); }

  private:
    Vecd<D> origin_, normal_;
};

/// 2D slab (a rectangle with rounded corners) with a thin vertical fin
/// standing on the middle of its top face.
class SlabWithFinShape : public Shape<2>
{
  public:
    SlabWithFinShape(const Vecd<2> &slab_lower, const Vecd<2> &slab_upper, Real corner_radius, Real fin_center_x,
                     Real fin_width, Real fin_height)
        : slab_lower_(slab_lower), slab_upper_(slab_upper), corner_radius_(corner_radius), fin_x_(fin_center_x),
          fin_width_(fin_width), fin_height_(fin_height) {}
    Real signedDistance(const Vecd<2> &p) const override;
    Real slabSignedDistance(const Vecd<2> &p) const;
    Real slabTop() const { return slab_upper_[1]; }
    const Vecd<2> &slabLower() const { return slab_lower_; }
    const Vecd<2> &slabUpper() const { return slab_upper_; }
    Real cornerRadius() const { return corner_radius_; }
    Real finCenterX() const { return fin_x_; }
    Real finWidth() const { return fin_width_; }
    Real finHeight() const { return fin_height_; }

  private:
    Vecd<2> slab_lower_, slab_upper_;
    Real corner_radius_, fin_x_, fin_width_, fin_height_;
};

class TriangleMeshShape : public Shape<3>
{
  public:
    explicit TriangleMeshShape(std::shared_ptr<const TriangleMesh> mesh) : mesh_(std::move(mesh)) {}
    Real signedDistance(const Vecd<3> &p) const override { return mesh_->signedDistance(p).distance; }
    Real distance(const Vecd<3> &p) const override { return mesh_->distanceToSurface(p); }
    const TriangleMesh &mesh() const { return *mesh_; }

  private:
    std::shared_ptr<const TriangleMesh> mesh_;
};

/// Icosahedron refined by repeated 4-way splits, vertices projected to the sphere.
TriangleMesh makeIcosphere(const Vec3 &center, Real radius, int subdivisions);
/// Axis-aligned box, two outward-facing triangles per face.
TriangleMesh makeBox(const Vec3 &lower, const Vec3 &upper);

} // namespace pkgrid
#endif // PKGRID_SHAPES_HPP
