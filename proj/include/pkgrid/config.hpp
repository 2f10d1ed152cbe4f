#ifndef PKGRID_CONFIG_HPP
#define PKGRID_CONFIG_HPP

#include "pkgrid/grid_geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pkgrid
{
/// Bad config text or values. The CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Settings read from a `key = value` text file. Numbers may be written as
/// fractions (`1/256`), vectors as space separated numbers.
struct RunConfig
{
    // geometry: an STL path, or analytic:shell | analytic:sphere | analytic:slab_fin (2D)
    std::string geometry = "analytic:shell";
    std::optional<std::vector<Real>> lower, upper; ///< domain, unit box by default
    std::vector<Real> center;                     ///< analytic shapes, box center by default
    Real radius = 0.3;
    Real inner_radius = 0.3;
    Real outer_radius = 0.31;

    Real coarsest_spacing = 1.0 / 64; ///< data spacing of the coarsest layer
    Real target_spacing = 1.0 / 128;
    int pkg_size = 4;
    bool correct = false;
    Real trust_band_ratio = 1.0;

    std::string policy = "seq";
    int threads = 1;
    std::string output = "out";
    std::string artifact = "levelset.pkggrid";

    Real kernel_h_ratio = 2.0;
    Real clean_threshold = 0.45;
    int reinit_steps = 50;
    Real cfl = 0.3;
    int clean_max_rounds = 5;

    Real particle_spacing = 1.0 / 64;
    int relax_steps = 100;
    Real step_scale = 0.2;
    Real jitter = 0.0; ///< in units of particle_spacing
    std::uint64_t seed = 1;
    std::string particle_format = "ply";

    std::optional<std::vector<Real>> window_lower, window_upper;

    Real bench_resolution = 1.0 / 256;
    int bench_runs = 5;
    int bench_threads = 4;

    /// Directory of the config file; relative geometry paths resolve against it.
    std::filesystem::path base_directory;

    /// 2 for analytic:slab_fin, 3 otherwise.
    int dimension() const;
    bool isAnalytic() const { return geometry.rfind("analytic:", 0) == 0; }
    std::filesystem::path geometryPath() const;
    std::filesystem::path artifactPath() const { return std::filesystem::path(output) / artifact; }
    std::vector<Real> lowerCorner() const;
    std::vector<Real> upperCorner() const;
    std::vector<Real> shapeCenter() const;

    /// Throws ConfigError on any inconsistent or non-positive value.
    void validate() const;
};

RunConfig parseRunConfig(std::string_view text);
/// Reads and parses a file; relative geometry paths become relative to its directory.
RunConfig loadRunConfig(const std::filesystem::path &path);

/// "0.25", "1e-3" or "1/256".
Real parseNumber(std::string_view text);

} // namespace pkgrid
#endif // PKGRID_CONFIG_HPP
