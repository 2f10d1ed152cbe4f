#include "pkgrid/artifact.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pkgrid
{
static_assert(std::endian::native == std::endian::little, "artifact I/O assumes a little-endian host");

namespace
{
constexpr std::string_view kMagic = "PKGGRID1";

class Writer
{
  public:
    template <typename T>
    void put(const T &value)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        bytes_.append(reinterpret_cast<const char *>(&value), sizeof(T));
    }
    template <typename T>
    void putArray(const T *values, std::size_t count)
    {
        bytes_.append(reinterpret_cast<const char *>(values), count * sizeof(T));
    }
    void putRaw(std::string_view raw) { bytes_.append(raw); }
    std::string take() { return std::move(bytes_); }

  private:
    std::string bytes_;
};

class Reader
{
  public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get()
    {
        T value;
        getArray(&value, 1);
        return value;
    }
    template <typename T>
    void getArray(T *values, std::size_t count)
    {
        const std::size_t size = count * sizeof(T);
        if (count > bytes_.size() || size > bytes_.size() - position_)
            throw ArtifactError("artifact truncated");
        std::memcpy(values, bytes_.data() + position_, size);
        position_ += size;
    }
    std::string_view getRaw(std::size_t size)
    {
        if (size > bytes_.size() - position_)
            throw ArtifactError("artifact truncated");
        const std::string_view raw = bytes_.substr(position_, size);
        position_ += size;
        return raw;
    }
    bool atEnd() const { return position_ == bytes_.size(); }

  private:
    std::string_view bytes_;
    std::size_t position_ = 0;
};

template <int D>
void writeLayer(Writer &out, const LevelSetLayer<D> &layer)
{
    const Mesh<D> &mesh = layer.mesh();
    const GridGeometry<D> &geometry = mesh.geometry();
    for (int k = 0; k < D; ++k)
        out.put<double>(geometry.lower_corner[k]);
    out.put<double>(geometry.coarse_cell_size);
    for (int k = 0; k < D; ++k)
        out.put<std::int32_t>(geometry.cells_per_axis[k]);
    out.put<std::int32_t>(geometry.pkg_size);

    const std::size_t packages = mesh.numPackages();
    out.put<std::uint64_t>(packages);
    const MetaCell *meta = mesh.metaCell().data();
    for (std::size_t p = 0; p < packages; ++p)
    {
        out.put<std::uint32_t>(meta[p].linear_cell);
        out.put<std::uint8_t>(static_cast<std::uint8_t>(meta[p].category));
    }
    const CellNeighborhood<D> *neighborhoods = mesh.cellNeighborhood().data();
    for (std::size_t p = 0; p < packages; ++p)
        out.putArray(neighborhoods[p].slots.data(), CellNeighborhood<D>::kSize);

    const std::size_t cells = geometry.totalCells();
    out.put<std::uint64_t>(cells);
    out.putArray(mesh.cellPackageIndex().data(), cells);
    out.putArray(layer.phi().data(), packages * mesh.pointsPerPackage());
}

template <int D>
LevelSetLayer<D> readLayer(Reader &in)
{
    GridGeometry<D> geometry;
    for (int k = 0; k < D; ++k)
        geometry.lower_corner[k] = in.get<double>();
    geometry.coarse_cell_size = in.get<double>();
    for (int k = 0; k < D; ++k)
        geometry.cells_per_axis[k] = in.get<std::int32_t>();
    geometry.pkg_size = in.get<std::int32_t>();
    if (!(geometry.coarse_cell_size > 0.0) || (geometry.cells_per_axis < 1).any() || geometry.pkg_size < 1 ||
        geometry.pkg_size > 64)
        throw ArtifactError("artifact has an invalid layer geometry");

    const auto packages = in.get<std::uint64_t>();
    if (packages < kNumSingularPackages || packages - kNumSingularPackages > geometry.totalCells())
        throw ArtifactError("artifact package count out of range");
    std::vector<MetaCell> meta(packages);
    for (MetaCell &entry : meta)
    {
        entry.linear_cell = in.get<std::uint32_t>();
        const auto category = in.get<std::uint8_t>();
        if (category > static_cast<std::uint8_t>(PackageCategory::Core))
            throw ArtifactError("artifact has an unknown package category");
        entry.category = static_cast<PackageCategory>(category);
    }

    LevelSetLayer<D> layer(geometry);
    Mesh<D> &mesh = layer.mesh();
    TaggedCells cells;
    cells.reserve(packages - kNumSingularPackages);
    for (std::size_t p = kNumSingularPackages; p < packages; ++p)
        cells.emplace_back(meta[p].linear_cell, meta[p].category);
    try
    {
        mesh.activateCells(cells);
    }
    catch (const std::exception &e)
    {
        throw ArtifactError(std::string("artifact cells inconsistent: ") + e.what());
    }
    std::copy(meta.begin(), meta.end(), mesh.metaCell().data());

    CellNeighborhood<D> *neighborhoods = mesh.cellNeighborhood().data();
    for (std::size_t p = 0; p < packages; ++p)
        in.getArray(neighborhoods[p].slots.data(), CellNeighborhood<D>::kSize);
    if (in.get<std::uint64_t>() != geometry.totalCells())
        throw ArtifactError("artifact background size does not match its geometry");
    in.getArray(mesh.cellPackageIndex().data(), geometry.totalCells());
    in.getArray(layer.phi().data(), packages * mesh.pointsPerPackage());
    try
    {
        mesh.checkTopology();
    }
    catch (const std::logic_error &e)
    {
        throw ArtifactError(std::string("artifact topology invalid: ") + e.what());
    }
    return layer;
}
} // namespace
//=================================================================================================//
template <int D>
std::string serializeArtifact(const MultiResolutionLevelSet<D> &levelset)
{
    Writer out;
    out.putRaw(kMagic);
    out.put<std::uint32_t>(D);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(levelset.layers.size()));
    for (const LevelSetLayer<D> &layer : levelset.layers)
        writeLayer(out, layer);
    return out.take();
}
//=================================================================================================//
int artifactDimension(std::string_view bytes)
{
    Reader in(bytes);
    if (in.getRaw(kMagic.size()) != kMagic)
        throw ArtifactError("not a PKGGRID1 artifact");
    return static_cast<int>(in.get<std::uint32_t>());
}
//=================================================================================================//
template <int D>
MultiResolutionLevelSet<D> deserializeArtifact(std::string_view bytes)
{
    if (artifactDimension(bytes) != D)
        throw ArtifactError("artifact dimension is not " + std::to_string(D));
    Reader in(bytes);
    in.getRaw(kMagic.size());
    in.get<std::uint32_t>();
    const auto n_layers = in.get<std::uint32_t>();
    if (n_layers == 0)
        throw ArtifactError("artifact has no layers");
    MultiResolutionLevelSet<D> levelset;
    levelset.layers.reserve(n_layers);
    for (std::uint32_t l = 0; l < n_layers; ++l)
        levelset.layers.push_back(readLayer<D>(in));
    if (!in.atEnd())
        throw ArtifactError("trailing bytes after artifact");
    return levelset;
}
//=================================================================================================//
std::string readFileBytes(const std::filesystem::path &path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw ArtifactError("cannot read '" + path.string() + "'");
    std::ostringstream bytes;
    bytes << file.rdbuf();
    return bytes.str();
}
//=================================================================================================//
void writeFileBytes(const std::filesystem::path &path, std::string_view bytes)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!file)
        throw std::runtime_error("cannot write '" + path.string() + "'");
}
//=================================================================================================//
template std::string serializeArtifact<2>(const MultiResolutionLevelSet<2> &);
template std::string serializeArtifact<3>(const MultiResolutionLevelSet<3> &);
template MultiResolutionLevelSet<2> deserializeArtifact<2>(std::string_view);
template MultiResolutionLevelSet<3> deserializeArtifact<3>(std::string_view);
} // namespace pkgrid
