#include "pkgrid/simd/kernels.hpp"

#if defined(PKGRID_HAVE_AVX2)
#include <immintrin.h>

namespace pkgrid::simd::avx2
{
void addConstant(std::span<double> values, double constant)
{
    double *v = values.data();
    const std::size_t n = values.size();
    const __m256d c = _mm256_set1_pd(constant);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(v + i, _mm256_add_pd(_mm256_loadu_pd(v + i), c));
    for (; i < n; ++i)
        v[i] += constant;
}

void laplacianPadded3d(const double *padded, double *out, int n, double data_spacing)
{
    const std::size_t row = static_cast<std::size_t>(n) + 2;
    const std::size_t plane = row * row;
    const double denominator = data_spacing * data_spacing;
    const __m256d six = _mm256_set1_pd(6.0);
    const __m256d denom = _mm256_set1_pd(denominator);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            const double *c = padded + (i + 1) * plane + (j + 1) * row + 1;
            double *o = out + (static_cast<std::size_t>(i) * n + j) * n;
            int k = 0;
            for (; k + 4 <= n; k += 4)
            {
                __m256d sum = _mm256_loadu_pd(c + k - plane);
                sum = _mm256_add_pd(sum, _mm256_loadu_pd(c + k + plane));
                sum = _mm256_add_pd(sum, _mm256_loadu_pd(c + k - row));
                sum = _mm256_add_pd(sum, _mm256_loadu_pd(c + k + row));
                sum = _mm256_add_pd(sum, _mm256_loadu_pd(c + k - 1));
                sum = _mm256_add_pd(sum, _mm256_loadu_pd(c + k + 1));
                const __m256d center = _mm256_mul_pd(six, _mm256_loadu_pd(c + k));
                _mm256_storeu_pd(o + k, _mm256_div_pd(_mm256_sub_pd(sum, center), denom));
            }
            for (; k < n; ++k)
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
} // namespace pkgrid::simd::avx2

#else

#include "pkgrid/simd/kernels.hpp"

namespace pkgrid::simd::avx2
{
// Not built for this target; dispatch never selects these.
void addConstant(std::span<double> values, double constant) { scalar::addConstant(values, constant); }
void laplacianPadded3d(const double *padded, double *out, int n, double data_spacing)
{
    scalar::laplacianPadded3d(padded, out, n, data_spacing);
}
} // namespace pkgrid::simd::avx2
#endif
