#include "pkgrid/vtk.hpp"

#include <charconv>

namespace pkgrid
{
namespace
{
void appendNumber(std::string &out, Real value)
{
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    out.append(buffer, result.ptr);
}
} // namespace
//=================================================================================================//
template <int D>
SampleWindow<D> sampleWindow(const LevelSetLayer<D> &layer, const Vecd<D> &lower, const Vecd<D> &upper)
{
    const GridGeometry<D> &geometry = layer.geometry();
    const Real ds = geometry.dataSpacing();
    const Real slack = 1e-9 * ds;
    const Vecd<D> mesh_upper = geometry.upperCorner();
    SampleWindow<D> window;
    for (int k = 0; k < D; ++k)
    {
        if (lower[k] < geometry.lower_corner[k] - slack || upper[k] > mesh_upper[k] + slack)
            throw std::invalid_argument("export window outside the layer bounds");
        const int first = static_cast<int>(std::ceil((lower[k] - geometry.lower_corner[k]) / ds - 0.5 - 1e-9));
        const int last = static_cast<int>(std::floor((upper[k] - geometry.lower_corner[k]) / ds - 0.5 + 1e-9));
        window.first[k] = std::max(first, 0);
        window.counts[k] = std::min(last, geometry.dataPointsPerAxis()[k] - 1) - window.first[k] + 1;
        if (window.counts[k] < 1)
            throw std::invalid_argument("export window contains no data point");
    }
    return window;
}
//=================================================================================================//
template <int D>
std::string exportVtkWindow(const LevelSetLayer<D> &layer, const Vecd<D> &lower, const Vecd<D> &upper)
{
    const SampleWindow<D> window = sampleWindow(layer, lower, upper);
    const GridGeometry<D> &geometry = layer.geometry();
    const Real ds = geometry.dataSpacing();
    auto position = [&](const Arrayi<D> &global)
    { return Vecd<D>(geometry.lower_corner + ds * (global.template cast<Real>() + 0.5).matrix()); };

    std::string out = "# vtk DataFile Version 3.0\npkgrid phi\nASCII\nDATASET STRUCTURED_POINTS\nDIMENSIONS";
    for (int k = 0; k < 3; ++k)
        out += " " + std::to_string(k < D ? window.counts[k] : 1);
    const Vecd<D> origin = position(window.first);
    out += "\nORIGIN";
    for (int k = 0; k < 3; ++k)
    {
        out += ' ';
        appendNumber(out, k < D ? origin[k] : 0.0);
    }
    out += "\nSPACING";
    for (int k = 0; k < 3; ++k)
    {
        out += ' ';
        appendNumber(out, ds);
    }
    const std::size_t total = static_cast<std::size_t>(window.counts.prod());
    out += "\nPOINT_DATA " + std::to_string(total) + "\nSCALARS phi double 1\nLOOKUP_TABLE default\n";

    // VTK wants x fastest, so walk the window in reversed row-major order.
    Arrayi<D> reversed_counts = window.counts.reverse();
    for (std::size_t i = 0; i < total; ++i)
    {
        const Arrayi<D> local = delinearizeRowMajor<D>(i, reversed_counts).reverse();
        appendNumber(out, layer.probePhi(position(window.first + local)));
        out += '\n';
    }
    return out;
}
//=================================================================================================//
template SampleWindow<2> sampleWindow<2>(const LevelSetLayer<2> &, const Vecd<2> &, const Vecd<2> &);
template SampleWindow<3> sampleWindow<3>(const LevelSetLayer<3> &, const Vecd<3> &, const Vecd<3> &);
template std::string exportVtkWindow<2>(const LevelSetLayer<2> &, const Vecd<2> &, const Vecd<2> &);
template std::string exportVtkWindow<3>(const LevelSetLayer<3> &, const Vecd<3> &, const Vecd<3> &);
} // namespace pkgrid
