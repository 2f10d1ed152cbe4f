#include "pkgrid/simd/kernels.hpp"

namespace pkgrid::simd::scalar
{
void addConstant(std::span<double> values, double constant)
{
    for (double &v : values)
        v += constant;
}

void laplacianPadded3d(const double *padded, double *out, int n, double data_spacing)
{
    const std::size_t row = static_cast<std::size_t>(n) + 2;
    const std::size_t plane = row * row;
    const double denominator = data_spacing * data_spacing;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            const double *c = padded + (i + 1) * plane + (j + 1) * row + 1;
            double *o = out + (static_cast<std::size_t>(i) * n + j) * n;
            for (int k = 0; k < n; ++k)
            {
                double sum = c[k - plane];
                sum = sum + c[k + plane];
                sum = sum + c[k - row];
                sum = sum + c[k + row];
                sum = sum + c[k - 1];
                sum = sum + c[k + 1];
                o[k] = (sum - 6.0 * c[k]) / denominator;
            }
        }
}
} // namespace pkgrid::simd::scalar
