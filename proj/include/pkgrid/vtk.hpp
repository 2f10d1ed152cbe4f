#ifndef PKGRID_VTK_HPP
#define PKGRID_VTK_HPP

#include "pkgrid/levelset.hpp"

#include <string>

namespace pkgrid
{
/// Data-point sample grid of one layer restricted to a window.
template <int D>
struct SampleWindow
{
    Arrayi<D> first;  ///< global index of the first data point
    Arrayi<D> counts; ///< data points per axis
};

/// Data points of the layer whose positions lie inside [lower, upper].
/// Throws std::invalid_argument when the window leaves the layer bounds or holds no point.
template <int D>
SampleWindow<D> sampleWindow(const LevelSetLayer<D> &layer, const Vecd<D> &lower, const Vecd<D> &upper);

/// Legacy VTK structured points (ASCII) with the probed phi at every window point.
template <int D>
std::string exportVtkWindow(const LevelSetLayer<D> &layer, const Vecd<D> &lower, const Vecd<D> &upper);

} // namespace pkgrid
#endif // PKGRID_VTK_HPP
