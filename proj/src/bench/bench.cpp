#include "pkgrid/bench.hpp"

#include "pkgrid/simd/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace pkgrid::bench
{
namespace
{
constexpr double kChecksumScale = 4294967296.0; // 2^32

Checksum sumFixedPoint(const double *values, std::size_t n)
{
    Checksum sum = 0;
    for (std::size_t i = 0; i < n; ++i)
        sum += fixedPoint(values[i]);
    return sum;
}

// Face neighbor slot of a 3x3x3 neighborhood: axis a, side -1 or +1.
std::size_t faceSlot(int axis, int side)
{
    Arrayi<3> offset = Arrayi<3>::Ones();
    offset[axis] += side;
    return CellNeighborhood<3>::slotIndex(offset);
}

/// Copies a package and the facing layers of its six neighbors into an
/// (n+2)^3 block. faces: -x, +x, -y, +y, -z, +z. Edge and corner entries are
/// not read by the 7-point stencil and stay untouched.
void fillPadded(double *padded, int n, const double *self, const std::array<const double *, 6> &faces)
{
    const int m = n + 2;
    auto at = [&](int i, int j, int k) { return padded + ((i + 1) * m + (j + 1)) * m + (k + 1); };
    auto src = [n](const double *block, int i, int j, int k) { return block[(i * n + j) * n + k]; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            std::memcpy(at(i, j, 0), self + (i * n + j) * n, sizeof(double) * static_cast<std::size_t>(n));
            *at(i, j, -1) = src(faces[4], i, j, n - 1);
            *at(i, j, n) = src(faces[5], i, j, 0);
        }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
        {
            *at(-1, a, b) = src(faces[0], n - 1, a, b);
            *at(n, a, b) = src(faces[1], 0, a, b);
            *at(a, -1, b) = src(faces[2], a, n - 1, b);
            *at(a, n, b) = src(faces[3], a, 0, b);
        }
}

template <typename Function>
double timeOnce(Function &&function)
{
    const auto start = std::chrono::steady_clock::now();
    function();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

MeshVariable<Real> &variableOn(Mesh<3> &mesh, const std::string &name)
{
    return mesh.hasMeshVariable<Real>(name) ? mesh.getMeshVariable<Real>(name)
                                            : mesh.registerMeshVariable<Real>(name);
}

//=================================================================================================//
class PackageArrayBackend : public Backend
{
  public:
    explicit PackageArrayBackend(LevelSetLayer<3> &band)
        : band_(band), mesh_(band.mesh()), values_(variableOn(mesh_, "bench_values")),
          results_(variableOn(mesh_, "bench_laplacian"))
    {
        reset();
    }

    BackendKind kind() const override { return BackendKind::PackageArray; }

    void reset() override
    {
        std::copy(band_.phi().hostData().begin(), band_.phi().hostData().end(), values_.hostData().begin());
    }

    void addConstant(double constant, const ExecutionPolicy &policy) override
    {
        const std::size_t ppp = mesh_.pointsPerPackage();
        double *data = values_.data() + kNumSingularPackages * ppp;
        parallelChunks(policy, mesh_.numActivatedCells(),
                       [&](std::size_t begin, std::size_t end)
                       { simd::addConstant({data + begin * ppp, (end - begin) * ppp}, constant); });
    }

    void laplacian(const ExecutionPolicy &policy) override
    {
        const int n = mesh_.pkgSize();
        const std::size_t ppp = mesh_.pointsPerPackage();
        const double ds = mesh_.dataSpacing();
        const double *values = values_.data();
        double *results = results_.data();
        const CellNeighborhood<3> *neighborhoods = mesh_.cellNeighborhood().data();
        parallelChunks(policy, mesh_.numActivatedCells(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           std::vector<double> padded(ipow(static_cast<std::size_t>(n + 2), 3), 0.0);
                           for (std::size_t i = begin; i != end; ++i)
                           {
                               const PackageIndex p = static_cast<PackageIndex>(i + kNumSingularPackages);
                               std::array<const double *, 6> faces;
                               for (int f = 0; f < 6; ++f)
                                   faces[f] = values + neighborhoods[p].slots[faceSlot(f / 2, f % 2 ? 1 : -1)] * ppp;
                               fillPadded(padded.data(), n, values + p * ppp, faces);
                               simd::laplacianPadded3d(padded.data(), results + p * ppp, n, ds);
                           }
                       });
    }

    Checksum valueChecksum() const override { return activeSum(values_); }
    Checksum laplacianChecksum() const override { return activeSum(results_); }
    std::size_t activeCount() const override { return mesh_.numActivatedCells() * mesh_.pointsPerPackage(); }

    double overheadBytesPerCell() const override
    {
        const TopologyAudit audit = mesh_.topologyAudit();
        return static_cast<double>(audit.topology_bytes_per_cell) +
               static_cast<double>(audit.background_bytes) / static_cast<double>(mesh_.numActivatedCells());
    }

  private:
    Checksum activeSum(const MeshVariable<Real> &variable) const
    {
        const std::size_t ppp = mesh_.pointsPerPackage();
        return sumFixedPoint(variable.data() + kNumSingularPackages * ppp, activeCount());
    }

    LevelSetLayer<3> &band_;
    Mesh<3> &mesh_;
    MeshVariable<Real> &values_, &results_;
};

//=================================================================================================//
class DenseArrayBackend : public Backend
{
  public:
    explicit DenseArrayBackend(LevelSetLayer<3> &band)
        : band_(band), n_(band.mesh().pkgSize()), points_(band.geometry().dataPointsPerAxis()),
          far_(band.mesh().farFieldValue())
    {
        const Mesh<3> &mesh = band.mesh();
        for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
            active_.push_back(mesh.cellOfPackage(p) * n_);
        const std::size_t total = static_cast<std::size_t>(points_.prod());
        values_.assign(total, 0.0);
        results_.assign(total, 0.0);
        reset();
    }

    BackendKind kind() const override { return BackendKind::DenseArray; }

    void reset() override
    {
        const Mesh<3> &mesh = band_.mesh();
        const GridGeometry<3> &geometry = mesh.geometry();
        const std::size_t ppp = mesh.pointsPerPackage();
        const Real *phi = band_.phi().data();
        for (std::size_t c = 0; c < geometry.totalCells(); ++c)
        {
            const PackageIndex p = mesh.cellPackageIndex().data()[c];
            const Arrayi<3> origin = geometry.cellFromLinear(c) * n_;
            for (std::size_t i = 0; i < ppp; ++i)
                values_[index(origin + geometry.dataFromLinear(i))] = phi[p * ppp + i];
        }
    }

    void addConstant(double constant, const ExecutionPolicy &policy) override
    {
        parallelChunks(policy, active_.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           for (std::size_t a = begin; a != end; ++a)
                               for (int i = 0; i < n_; ++i)
                                   for (int j = 0; j < n_; ++j)
                                       simd::addConstant({&values_[index(active_[a] + Arrayi<3>(i, j, 0))],
                                                          static_cast<std::size_t>(n_)},
                                                         constant);
                       });
    }

    void laplacian(const ExecutionPolicy &policy) override
    {
        const double ds = band_.dataSpacing();
        const int m = n_ + 2;
        parallelChunks(policy, active_.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           std::vector<double> padded(ipow(static_cast<std::size_t>(m), 3));
                           std::vector<double> out(ipow(static_cast<std::size_t>(n_), 3));
                           for (std::size_t a = begin; a != end; ++a)
                           {
                               const Arrayi<3> origin = active_[a];
                               for (int i = -1; i <= n_; ++i)
                                   for (int j = -1; j <= n_; ++j)
                                   {
                                       double *row = &padded[static_cast<std::size_t>(((i + 1) * m + (j + 1)) * m)];
                                       const Arrayi<3> start = origin + Arrayi<3>(i, j, -1);
                                       if ((start >= 0).all() && (start + Arrayi<3>(0, 0, m - 1) < points_).all())
                                           std::memcpy(row, &values_[index(start)], sizeof(double) * m);
                                       else
                                           for (int k = 0; k < m; ++k)
                                               row[k] = valueOrFar(start + Arrayi<3>(0, 0, k));
                                   }
                               simd::laplacianPadded3d(padded.data(), out.data(), n_, ds);
                               for (int i = 0; i < n_; ++i)
                                   for (int j = 0; j < n_; ++j)
                                       std::memcpy(&results_[index(origin + Arrayi<3>(i, j, 0))],
                                                   &out[static_cast<std::size_t>((i * n_ + j) * n_)],
                                                   sizeof(double) * n_);
                           }
                       });
    }

    Checksum valueChecksum() const override { return activeSum(values_); }
    Checksum laplacianChecksum() const override { return activeSum(results_); }
    std::size_t activeCount() const override { return active_.size() * ipow(static_cast<std::size_t>(n_), 3); }

    double overheadBytesPerCell() const override
    {
        const double idle = static_cast<double>(values_.size() - activeCount());
        return idle * sizeof(double) / static_cast<double>(active_.size());
    }

  private:
    std::size_t index(const Arrayi<3> &g) const { return linearizeRowMajor<3>(g, points_); }

    double valueOrFar(const Arrayi<3> &g) const { return inRange<3>(g, points_) ? values_[index(g)] : far_; }

    Checksum activeSum(const std::vector<double> &array) const
    {
        Checksum sum = 0;
        for (const Arrayi<3> &origin : active_)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j)
                    sum += sumFixedPoint(&array[index(origin + Arrayi<3>(i, j, 0))], static_cast<std::size_t>(n_));
        return sum;
    }

    LevelSetLayer<3> &band_;
    int n_;
    Arrayi<3> points_;
    double far_;
    std::vector<Arrayi<3>> active_; ///< first data point of each activated cell
    std::vector<double> values_, results_;
};

//=================================================================================================//
/// Cell-keyed open-addressing map (linear probing) into a package pool. Band
/// cells map to their package; the unactivated cells around the band map to
/// pool entries 0/1 holding the far-field values. Lookups that miss are
/// treated as outside.
class HashGridBackend : public Backend
{
    struct Slot
    {
        std::uint64_t key = 0; ///< linear cell + 1, 0 marks an empty slot
        std::uint32_t package = 0;
    };

  public:
    explicit HashGridBackend(LevelSetLayer<3> &band)
        : band_(band), n_(band.mesh().pkgSize()), ppp_(band.mesh().pointsPerPackage()),
          cells_(band.geometry().cells_per_axis)
    {
        const Mesh<3> &mesh = band.mesh();
        const GridGeometry<3> &geometry = mesh.geometry();
        std::vector<std::pair<LinearCellIndex, PackageIndex>> entries;
        for (PackageIndex p = kNumSingularPackages; p < mesh.numPackages(); ++p)
        {
            const Arrayi<3> cell = mesh.cellOfPackage(p);
            entries.emplace_back(geometry.linearCell(cell), p);
            for (int f = 0; f < 6; ++f)
            {
                const Arrayi<3> neighbor = cell + (f % 2 ? 1 : -1) * unitIndex<3>(f / 2);
                if (geometry.cellInRange(neighbor) && !mesh.isActivated(neighbor))
                    entries.emplace_back(geometry.linearCell(neighbor), mesh.packageAt(neighbor));
            }
        }
        std::size_t capacity = 16;
        while (capacity < 2 * entries.size())
            capacity *= 2;
        mask_ = capacity - 1;
        table_.resize(capacity);
        for (const auto &[cell, package] : entries)
            insert(cell, package);
        for (const Slot &slot : table_)
            if (slot.key != 0)
                ++occupied_;
        values_.resize(mesh.numPackages() * ppp_);
        results_.assign(values_.size(), 0.0);
        reset();
    }

    BackendKind kind() const override { return BackendKind::HashGrid; }

    void reset() override
    {
        std::copy(band_.phi().hostData().begin(), band_.phi().hostData().end(), values_.begin());
    }

    void addConstant(double constant, const ExecutionPolicy &policy) override
    {
        parallelChunks(policy, table_.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           for (std::size_t s = begin; s != end; ++s)
                               if (table_[s].key != 0 && table_[s].package >= kNumSingularPackages)
                                   simd::addConstant({&values_[table_[s].package * ppp_], ppp_}, constant);
                       });
    }

    void laplacian(const ExecutionPolicy &policy) override
    {
        const double ds = band_.dataSpacing();
        parallelChunks(policy, table_.size(),
                       [&](std::size_t begin, std::size_t end)
                       {
                           std::vector<double> padded(ipow(static_cast<std::size_t>(n_ + 2), 3), 0.0);
                           for (std::size_t s = begin; s != end; ++s)
                           {
                               const Slot slot = table_[s];
                               if (slot.key == 0 || slot.package < kNumSingularPackages)
                                   continue;
                               const Arrayi<3> cell = delinearizeRowMajor<3>(slot.key - 1, cells_);
                               std::array<const double *, 6> faces;
                               for (int f = 0; f < 6; ++f)
                                   faces[f] = &values_[lookup(cell + (f % 2 ? 1 : -1) * unitIndex<3>(f / 2)) * ppp_];
                               fillPadded(padded.data(), n_, &values_[slot.package * ppp_], faces);
                               simd::laplacianPadded3d(padded.data(), &results_[slot.package * ppp_], n_, ds);
                           }
                       });
    }

    Checksum valueChecksum() const override { return activeSum(values_); }
    Checksum laplacianChecksum() const override { return activeSum(results_); }
    std::size_t activeCount() const override { return (band_.mesh().numPackages() - kNumSingularPackages) * ppp_; }

    double overheadBytesPerCell() const override
    {
        const double activated = static_cast<double>(band_.mesh().numActivatedCells());
        return static_cast<double>(table_.size() * sizeof(Slot) + kNumSingularPackages * ppp_ * sizeof(double)) /
               activated;
    }

    std::size_t occupiedSlots() const { return occupied_; }

  private:
    static std::uint64_t hash(std::uint64_t key)
    {
        key ^= key >> 33;
        key *= 0xff51afd7ed558ccdULL;
        key ^= key >> 33;
        return key;
    }

    void insert(LinearCellIndex cell, PackageIndex package)
    {
        const std::uint64_t key = static_cast<std::uint64_t>(cell) + 1;
        for (std::size_t s = hash(key) & mask_;; s = (s + 1) & mask_)
        {
            if (table_[s].key == key)
                return; // ring cells shared by several band cells
            if (table_[s].key == 0)
            {
                table_[s] = {key, package};
                return;
            }
        }
    }

    PackageIndex lookup(const Arrayi<3> &cell) const
    {
        if (!inRange<3>(cell, cells_))
            return kPositiveFarField;
        const std::uint64_t key = linearizeRowMajor<3>(cell, cells_) + 1;
        for (std::size_t s = hash(key) & mask_;; s = (s + 1) & mask_)
        {
            if (table_[s].key == key)
                return table_[s].package;
            if (table_[s].key == 0)
                return kPositiveFarField;
        }
    }

    Checksum activeSum(const std::vector<double> &pool) const
    {
        Checksum sum = 0;
        for (const Slot &slot : table_)
            if (slot.key != 0 && slot.package >= kNumSingularPackages)
                sum += sumFixedPoint(&pool[slot.package * ppp_], ppp_);
        return sum;
    }

    LevelSetLayer<3> &band_;
    int n_;
    std::size_t ppp_;
    Arrayi<3> cells_;
    std::vector<Slot> table_;
    std::size_t mask_ = 0;
    std::size_t occupied_ = 0;
    std::vector<double> values_, results_;
};
} // namespace
//=================================================================================================//
Checksum fixedPoint(double value) { return static_cast<Checksum>(std::llround(value * kChecksumScale)); }
//=================================================================================================//
std::string toString(Checksum checksum)
{
    if (checksum == 0)
        return "0";
    const bool negative = checksum < 0;
    unsigned __int128 magnitude = negative ? -static_cast<unsigned __int128>(checksum)
                                           : static_cast<unsigned __int128>(checksum);
    std::string digits;
    while (magnitude != 0)
    {
        digits.push_back(static_cast<char>('0' + static_cast<int>(magnitude % 10)));
        magnitude /= 10;
    }
    if (negative)
        digits.push_back('-');
    return {digits.rbegin(), digits.rend()};
}
//=================================================================================================//
const char *backendName(BackendKind kind)
{
    switch (kind)
    {
    case BackendKind::PackageArray:
        return "PackageArray";
    case BackendKind::DenseArray:
        return "DenseArray";
    case BackendKind::HashGrid:
        return "HashGrid";
    }
    return "?";
}
//=================================================================================================//
LevelSetLayer<3> buildShellBand(Real resolution, Real inner_radius, Real outer_radius)
{
    const ShellShape<3> shell(Vecd<3>::Constant(0.5), inner_radius, outer_radius);
    GridGeometry<3> geometry;
    geometry.pkg_size = 4;
    geometry.coarse_cell_size = geometry.pkg_size * resolution;
    geometry.cells_per_axis = Arrayi<3>::Constant(static_cast<int>(std::ceil(1.0 / geometry.coarse_cell_size - 1e-9)));
    return initializeSingleLayer<3>(shell, geometry);
}
//=================================================================================================//
std::unique_ptr<Backend> makeBackend(BackendKind kind, LevelSetLayer<3> &band)
{
    switch (kind)
    {
    case BackendKind::PackageArray:
        return std::make_unique<PackageArrayBackend>(band);
    case BackendKind::DenseArray:
        return std::make_unique<DenseArrayBackend>(band);
    case BackendKind::HashGrid:
        return std::make_unique<HashGridBackend>(band);
    }
    throw std::invalid_argument("unknown backend");
}
//=================================================================================================//
double median(std::vector<double> samples)
{
    if (samples.empty())
        throw std::invalid_argument("median of nothing");
    std::sort(samples.begin(), samples.end());
    const std::size_t mid = samples.size() / 2;
    return samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
}
//=================================================================================================//
BenchReport runBenchmark(const BenchOptions &options)
{
    if (options.runs < 1 || options.threads < 1 || !(options.resolution > 0.0))
        throw std::invalid_argument("benchmark needs runs >= 1, threads >= 1 and a positive resolution");
    LevelSetLayer<3> band = buildShellBand(options.resolution, options.inner_radius, options.outer_radius);
    std::vector<std::unique_ptr<Backend>> backends;
    for (BackendKind kind : {BackendKind::PackageArray, BackendKind::DenseArray, BackendKind::HashGrid})
        backends.push_back(makeBackend(kind, band));

    std::vector<int> thread_counts = {1};
    if (options.threads > 1)
        thread_counts.push_back(options.threads);

    BenchReport report;
    for (const std::string workload : {"sequential", "stencil"})
        for (int threads : thread_counts)
        {
            const ExecutionPolicy policy = ExecutionPolicy::parallelHost(threads);
            std::vector<BenchRow> rows;
            for (auto &backend : backends)
            {
                auto run = [&]
                {
                    if (workload == "sequential")
                        backend->addConstant(1.0, policy);
                    else
                        backend->laplacian(policy);
                };
                backend->reset();
                run(); // warm-up, fixes the checksum
                const Checksum checksum =
                    workload == "sequential" ? backend->valueChecksum() : backend->laplacianChecksum();
                std::vector<double> samples;
                for (int r = 0; r < options.runs; ++r)
                    samples.push_back(timeOnce(run));
                rows.push_back({workload, backend->kind(), threads, median(samples), backend->activeCount(), checksum,
                                backend->overheadBytesPerCell()});
            }
            for (const BenchRow &row : rows)
                if (row.checksum != rows.front().checksum || row.count != rows.front().count)
                    throw ChecksumMismatch(workload + " workload: " + backendName(row.backend) +
                                           " disagrees with " + backendName(rows.front().backend));
            report.rows.insert(report.rows.end(), rows.begin(), rows.end());
        }
    return report;
}
//=================================================================================================//
const BenchRow &BenchReport::find(const std::string &workload, BackendKind backend, int threads) const
{
    for (const BenchRow &row : rows)
        if (row.workload == workload && row.backend == backend && row.threads == threads)
            return row;
    throw std::out_of_range("no benchmark row for " + workload + "/" + backendName(backend));
}
//=================================================================================================//
std::string BenchReport::csv() const
{
    std::ostringstream out;
    out << "workload,backend,threads,median_s,count,checksum,bytes_per_cell\n";
    out << std::setprecision(9);
    for (const BenchRow &row : rows)
        out << row.workload << ',' << backendName(row.backend) << ',' << row.threads << ',' << row.median_seconds
            << ',' << row.count << ',' << toString(row.checksum) << ',' << row.bytes_per_cell << '\n';
    return out.str();
}
//=================================================================================================//
std::string BenchReport::table() const
{
    std::ostringstream out;
    out << std::left << std::setw(12) << "workload" << std::setw(14) << "backend" << std::right << std::setw(8)
        << "threads" << std::setw(14) << "median [s]" << std::setw(12) << "points" << std::setw(16)
        << "bytes/cell" << '\n';
    for (const BenchRow &row : rows)
        out << std::left << std::setw(12) << row.workload << std::setw(14) << backendName(row.backend) << std::right
            << std::setw(8) << row.threads << std::setw(14) << std::scientific << std::setprecision(4)
            << row.median_seconds << std::setw(12) << row.count << std::setw(16) << std::fixed << std::setprecision(1)
            << row.bytes_per_cell << '\n';
    return out.str();
}
} // namespace pkgrid::bench
