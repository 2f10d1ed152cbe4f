#ifndef PKGRID_LEVELSET_HPP
#define PKGRID_LEVELSET_HPP

#include "pkgrid/access.hpp"
#include "pkgrid/execution.hpp"
#include "pkgrid/shapes.hpp"
#include "pkgrid/smoothing_kernel.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace pkgrid
{
/// One resolution layer: a mesh plus the level-set variables living on it.
template <int D>
class LevelSetLayer
{
  public:
    explicit LevelSetLayer(const GridGeometry<D> &geometry);

    Mesh<D> &mesh() { return *mesh_; }
    const Mesh<D> &mesh() const { return *mesh_; }
    const GridGeometry<D> &geometry() const { return mesh_->geometry(); }
    Real dataSpacing() const { return mesh_->dataSpacing(); }

    MeshVariable<Real> &phi() { return *phi_; }
    const MeshVariable<Real> &phi() const { return *phi_; }
    MeshVariable<Vecd<D>> &phiGradient() { return *phi_gradient_; }
    MeshVariable<Real> &kernelIntegral() { return *kernel_integral_; }
    MeshVariable<Vecd<D>> &kernelGradientIntegral() { return *kernel_gradient_integral_; }
    MeshVariable<int> &nearInterfaceId() { return *near_interface_id_; }
    /// Second phi buffer for updates that read neighbors while writing.
    MeshVariable<Real> &phiBuffer() { return *phi_buffer_; }

    /// Writes the far-field constants into the two singular packages of every variable.
    void fillSingularPackages();

    Real probePhi(const Vecd<D> &p) const { return probe<D, Real>(*mesh_, mesh_->meshData(*phi_), p); }
    /// Like probePhi but clamps p into the interpolation domain first.
    Real probePhiClamped(const Vecd<D> &p) const;

  private:
    std::unique_ptr<Mesh<D>> mesh_;
    MeshVariable<Real> *phi_;
    MeshVariable<Vecd<D>> *phi_gradient_;
    MeshVariable<Real> *kernel_integral_;
    MeshVariable<Vecd<D>> *kernel_gradient_integral_;
    MeshVariable<int> *near_interface_id_;
    MeshVariable<Real> *phi_buffer_;
};

using TaggedCells = std::vector<std::pair<LinearCellIndex, PackageCategory>>;

/// Smallest n with coarsest / 2^(n-1) <= target.
std::size_t countLayers(Real coarsest_spacing, Real target_spacing);

/// Cells whose center lies closer than one coarse cell to the surface. With a
/// parent layer only children of parent core cells are examined.
template <int D>
TaggedCells tagCoreCells(const GridGeometry<D> &geometry, const Shape<D> &shape, const LevelSetLayer<D> *parent,
                         const ExecutionPolicy &policy);

/// Non-core cells with at least one core cell among their 3^D - 1 neighbors.
template <int D>
TaggedCells tagInnerCells(const GridGeometry<D> &geometry, const TaggedCells &core, const ExecutionPolicy &policy);

/// Orders tagged cells by linear index, assigns packages 2, 3, ... in that
/// order and fills meta data and background field. Throws on duplicates.
template <int D>
void sortActivatedCells(LevelSetLayer<D> &layer, TaggedCells tagged);

/// phi = signed distance at every data point of every activated package.
template <int D>
void evaluateLevelSetValues(LevelSetLayer<D> &layer, const Shape<D> &shape, const ExecutionPolicy &policy);

/// Returns true where a position is inside the body. Used to stamp unactivated cells.
template <int D>
using InsideTest = std::function<bool(const Vecd<D> &)>;

/// Stamps unactivated cells with their far-field package and fills every
/// package's 3^D neighborhood.
template <int D>
void buildNeighborhoods(LevelSetLayer<D> &layer, const InsideTest<D> &inside, const ExecutionPolicy &policy);

/// Refreshes neighborhood slots that point at unactivated cells from the
/// current background stamps.
template <int D>
void refreshNeighborhoods(LevelSetLayer<D> &layer, const InsideTest<D> &inside, const ExecutionPolicy &policy);

template <int D>
struct MultiResolutionLevelSet
{
    std::vector<LevelSetLayer<D>> layers; ///< coarse to fine
    LevelSetLayer<D> &finest() { return layers.back(); }
    const LevelSetLayer<D> &finest() const { return layers.back(); }
};

struct SignCorrectionReport
{
    std::size_t trusted_points = 0;
    std::size_t flipped_points = 0;
    std::size_t restamped_cells = 0;
    std::size_t cell_sweeps = 0;
    std::size_t data_sweeps = 0;
};

struct PipelineOptions
{
    ExecutionPolicy policy = ExecutionPolicy::sequential();
    int pkg_size = 4;
    bool correct_signs = false;
    Real trust_band_ratio = 1.0; ///< trust band in units of each layer's data spacing
    std::vector<SignCorrectionReport> *correction_reports = nullptr;
};

/// Builds layers coarse to fine over [lower, upper]; each refined layer doubles
/// the cell count per axis and tags only inside the previous layer's core.
template <int D>
MultiResolutionLevelSet<D> initializeMultiResolution(const Shape<D> &shape, const Vecd<D> &lower, const Vecd<D> &upper,
                                                     Real coarsest_spacing, Real target_spacing,
                                                     const PipelineOptions &options = {});

/// Builds a single layer with the given geometry (steps 1-5 without a parent).
template <int D>
LevelSetLayer<D> initializeSingleLayer(const Shape<D> &shape, const GridGeometry<D> &geometry,
                                       const ExecutionPolicy &policy = ExecutionPolicy::sequential());

/// Keeps the sign of data points with |phi| < trust_band and diffuses it to
/// the rest of the layer, first per cell, then per data point. Magnitudes are
/// unchanged. On a refined layer (parent given) only activated cells take part
/// in the cell-level step; unactivated cells keep the stamps inherited from
/// the parent.
template <int D>
SignCorrectionReport correctSignConsistency(LevelSetLayer<D> &layer, Real trust_band, const ExecutionPolicy &policy,
                                            const LevelSetLayer<D> *parent = nullptr);

/// Mean of ||grad phi|_Godunov - 1| over the data points of core packages.
template <int D>
Real bandGradientResidual(LevelSetLayer<D> &layer);

/// Pseudo-time reinitialization toward |grad phi| = 1 on inner and core packages.
/// Returns the band residual after each step.
template <int D>
std::vector<Real> reinitializeLevelSet(LevelSetLayer<D> &layer, int n_steps, Real cfl, const ExecutionPolicy &policy);

/// phi_gradient = central difference of phi / data_spacing.
template <int D>
void updateLevelSetGradient(LevelSetLayer<D> &layer, const ExecutionPolicy &policy);

/// Interior-indicator convolution with the kernel and with its gradient.
template <int D>
void computeKernelIntegrals(LevelSetLayer<D> &layer, const SmoothingKernel<D> &kernel, const ExecutionPolicy &policy);

struct CleaningOptions
{
    Real threshold = 0.45;
    int reinit_steps = 50;
    Real cfl = 0.3;
    int max_rounds = 5;
};

struct CleaningReport
{
    std::size_t modified_points = 0;
    int rounds = 0;
};

/// Carves away thin features: interior points next to the zero level whose
/// kernel integral falls below the threshold are pushed outside, then the
/// field is reinitialized. Repeats until nothing changes.
template <int D>
CleaningReport cleanSmallFeatures(LevelSetLayer<D> &layer, const SmoothingKernel<D> &kernel,
                                  const CleaningOptions &options, const ExecutionPolicy &policy);

} // namespace pkgrid
#endif // PKGRID_LEVELSET_HPP
