#pragma once

#include "tactskin/heatmap.hpp"
#include "tactskin/shell.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tactskin {

/// Floor applied to density weights before inverting them, so barely painted
/// regions cap out at 20 * d_min instead of an infinite spacing.
inline constexpr double kWeightFloor = 0.05;
/// Clearance kept between neighbouring nodule discs (m).
inline constexpr double kRadiusGap = 0.0005;
/// Sampling stops after this many consecutive rejections per requested sample.
inline constexpr std::size_t kRejectionBudgetFactor = 30;

struct SamplingParams {
    /// Base minimum distance (m) at full density.
    double d_min = 0.06;
    double fill_tolerance = 0.1;
    double radius_factor = 0.5;
    std::size_t max_samples = 1000;
    std::uint64_t seed = 0;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// d_min / max(weight, 0.05), or +infinity when weight < fill_tolerance.
double local_min_distance(double weight, const SamplingParams& params);

struct Nodule {
    std::uint32_t id = 0;
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    double radius = 0.0;
    double local_weight = 0.0;
    /// Which shell of the build the nodule sits on, and where on its outer surface.
    std::uint32_t shell = 0;
    std::uint32_t face = 0;
    std::array<double, 3> bary{1.0, 0.0, 0.0};
};

struct NoduleLayout {
    std::vector<Nodule> nodules;
    SamplingParams params;

    std::size_t size() const noexcept { return nodules.size(); }
    bool empty() const noexcept { return nodules.empty(); }
    /// Throws ConfigError for an id that is not in the layout.
    const Nodule& by_id(std::uint32_t id) const;
    /// Local minimum distance of every nodule, in layout order.
    std::vector<double> local_distances() const;
};

/// Serial dart throwing on the outer shell surface. Candidates are drawn
/// area-uniformly; one is kept iff its density weight reaches fill_tolerance
/// and it lies at least its own local minimum distance from every nodule
/// kept so far. Stops at max_samples or after 30 * max_samples consecutive
/// rejections. Ids are assigned in acceptance order starting at `first_id`.
NoduleLayout sample_nodules(const SkinShell& shell, const HeatMap& density_map, const SamplingParams& params,
                            std::uint32_t shell_index = 0, std::uint32_t first_id = 0);

/// Samples every shell with its own derived seed and concatenates the
/// layouts. Throws GeometryError when no shell receives a nodule.
NoduleLayout sample_shells(std::span<const SkinShell> shells, const HeatMap& density_map, const SamplingParams& params);

/// radius = min(radius_factor * local_min_distance, half the distance to the
/// nearest nodule minus the 0.5 mm gap).
NoduleLayout assign_radii(NoduleLayout layout, const SamplingParams& params);

/// SHA-256 of the layout's ids, shells, positions, normals, radii and weights.
std::string layout_sha256(const NoduleLayout& layout);

} // namespace tactskin
