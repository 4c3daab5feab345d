#pragma once

// Slow, independent reference implementations used to check the library.
// None of these call into the code under test beyond plain data types.

#include "tactskin/contact.hpp"
#include "tactskin/mesh.hpp"
#include "tactskin/sampler.hpp"
#include "tactskin/shell.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

using tactskin::Vec3;

/// Closed triangle overlap built from segment/triangle crossings plus a 2D
/// test for coplanar pairs.
bool triangles_touch(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& q0, const Vec3& q1, const Vec3& q2);

/// All-pairs scan of triangles sharing no vertex.
std::vector<std::pair<std::uint32_t, std::uint32_t>> all_pairs_intersections(const tactskin::TriMesh& mesh);

/// Double loop over vertices and nodules.
std::vector<double> heatmap(const tactskin::TriMesh& mesh, const tactskin::NoduleLayout& layout,
                            const tactskin::ContactHistogram& hist, double alpha, int order, bool normalize);

/// O(n^2) greedy nearest neighbour, ties to the lower id.
std::vector<std::uint32_t> greedy_order(const tactskin::NoduleLayout& layout, std::uint32_t start);

/// Time interval during which a sphere moving at unit speed from a to b keeps
/// `p` within `reach`, clipped to the path. Empty when it never does.
std::optional<std::pair<double, double>> contact_interval(const Vec3& a, const Vec3& b, const Vec3& p, double reach);

/// Smallest pairwise distance ratio |x_i - x_j| / r_j over accepted order
/// (j accepted after i, r_j its own local distance). >= 1 means the
/// dart-throwing rule held.
double min_spacing_ratio(const tactskin::NoduleLayout& layout);

/// Probe points on a regular xy grid lying on a z-constant outer surface
/// that are farther than `d` from every nodule.
std::size_t uncovered_probes(const tactskin::SkinShell& shell, const tactskin::NoduleLayout& layout, double d,
                             double spacing);

/// |mu_u - mu_p| / sigma with sigma the population deviation of `unpressed`.
double snr_from_samples(std::span<const double> unpressed, std::span<const double> pressed);

} // namespace oracle
