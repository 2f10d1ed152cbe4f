#ifndef PKGRID_SMOOTHING_KERNEL_HPP
#define PKGRID_SMOOTHING_KERNEL_HPP

#include "pkgrid/grid_geometry.hpp"

#include <numbers>
#include <stdexcept>

namespace pkgrid
{
/// Wendland C2 kernel with support radius 2h, normalized in D dimensions.
template <int D>
class SmoothingKernel
{
  public:
    explicit SmoothingKernel(Real smoothing_length) : h_(smoothing_length)
    {
        if (!(h_ > 0.0))
            throw std::invalid_argument("smoothing length must be positive");
        static_assert(D == 2 || D == 3, "kernel normalized for 2D and 3D only");
        const Real pi = std::numbers::pi;
        factor_ = D == 2 ? 7.0 / (4.0 * pi * h_ * h_) : 21.0 / (16.0 * pi * h_ * h_ * h_);
    }

    Real smoothingLength() const { return h_; }
    Real cutoffRadius() const { return 2.0 * h_; }

    Real W(Real r) const
    {
        const Real q = r / h_;
        if (q >= 2.0)
            return 0.0;
        const Real a = 1.0 - 0.5 * q;
        return factor_ * a * a * a * a * (2.0 * q + 1.0);
    }

    /// dW/dr, never positive.
    Real dW(Real r) const
    {
        const Real q = r / h_;
        if (q >= 2.0)
            return 0.0;
        const Real a = 1.0 - 0.5 * q;
        return -5.0 * factor_ * q * a * a * a / h_;
    }

    /// Gradient of W with respect to the displacement vector r (W'(|r|) r/|r|).
    Vecd<D> gradW(const Vecd<D> &displacement) const
    {
        const Real r = displacement.norm();
        if (r == 0.0)
            return Vecd<D>::Zero();
        return dW(r) / r * displacement;
    }

  private:
    Real h_;
    Real factor_;
};

/// Mollified Heaviside of half-width epsilon.
inline Real smoothedHeaviside(Real u, Real epsilon)
{
    if (u < -epsilon)
        return 0.0;
    if (u > epsilon)
        return 1.0;
    const Real s = u / epsilon;
    return 0.5 * (1.0 + s + std::sin(std::numbers::pi * s) / std::numbers::pi);
}

} // namespace pkgrid
#endif // PKGRID_SMOOTHING_KERNEL_HPP
