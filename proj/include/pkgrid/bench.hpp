#ifndef PKGRID_BENCH_HPP
#define PKGRID_BENCH_HPP

#include "pkgrid/levelset.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pkgrid::bench
{
/// Order-independent exact sum: every value is rounded to a multiple of 2^-32 first.
using Checksum = __int128;
Checksum fixedPoint(double value);
std::string toString(Checksum checksum);

enum class BackendKind
{
    PackageArray,
    DenseArray,
    HashGrid
};
const char *backendName(BackendKind kind);

/// Same band data held in one of three layouts. Every backend exposes the two
/// benchmark workloads and checksums over the active (band) data points.
class Backend
{
  public:
    virtual ~Backend() = default;
    virtual BackendKind kind() const = 0;
    /// Restores the values from the band's phi.
    virtual void reset() = 0;
    /// values += constant at every active data point
    virtual void addConstant(double constant, const ExecutionPolicy &policy) = 0;
    /// 7-point Laplacian of the values at every active data point, written to a second array
    virtual void laplacian(const ExecutionPolicy &policy) = 0;
    virtual Checksum valueChecksum() const = 0;
    virtual Checksum laplacianChecksum() const = 0;
    virtual std::size_t activeCount() const = 0;
    /// Bytes spent beyond the active values themselves, per activated cell.
    virtual double overheadBytesPerCell() const = 0;
};

/// Layer built from the shell, shared source for all backends.
LevelSetLayer<3> buildShellBand(Real resolution, Real inner_radius = 0.3, Real outer_radius = 0.31);

std::unique_ptr<Backend> makeBackend(BackendKind kind, LevelSetLayer<3> &band);

struct BenchOptions
{
    Real resolution = 1.0 / 256;
    int threads = 4;
    int runs = 5;
    Real inner_radius = 0.3;
    Real outer_radius = 0.31;
};

struct BenchRow
{
    std::string workload; ///< "sequential" or "stencil"
    BackendKind backend;
    int threads;
    double median_seconds;
    std::size_t count;
    Checksum checksum;
    double bytes_per_cell;
};

class ChecksumMismatch : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct BenchReport
{
    std::vector<BenchRow> rows;

    const BenchRow &find(const std::string &workload, BackendKind backend, int threads) const;
    /// workload,backend,threads,median_s,count,checksum,bytes_per_cell
    std::string csv() const;
    std::string table() const;
};

/// Runs both workloads on all backends at 1 and options.threads threads.
/// A warm-up run per case fixes the checksum; cases whose checksums differ
/// across backends throw ChecksumMismatch before any timing is returned.
BenchReport runBenchmark(const BenchOptions &options);

double median(std::vector<double> samples);

} // namespace pkgrid::bench
#endif // PKGRID_BENCH_HPP
