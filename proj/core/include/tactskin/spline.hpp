#pragma once

#include "tactskin/cutout.hpp"
#include "tactskin/mesh.hpp"

#include <span>
#include <vector>

namespace tactskin {

/// Closed Catmull-Rom curve with chordal-power knot spacing
/// (alpha = 0.5 is centripetal, 0 uniform, 1 chordal).
///
/// Segment i runs from control point i to i+1 (cyclically) over the global
/// parameter interval [knot(i), knot(i+1)]. The curve is evaluated with the
/// Barry-Goldman pyramid, which interpolates every control point and is C1 in
/// the global parameter.
class CatmullRomLoop {
public:
    explicit CatmullRomLoop(std::vector<Vec3> control_points, double alpha = 0.5);

    std::size_t segment_count() const noexcept { return points_.size(); }
    const std::vector<Vec3>& control_points() const noexcept { return points_; }
    /// knots()[i] is the parameter of control point i; knots().back() closes the loop.
    const std::vector<double>& knots() const noexcept { return knots_; }

    /// Position on segment `seg` at global parameter t in [knot(seg), knot(seg+1)].
    Vec3 eval(std::size_t seg, double t) const;
    /// d/dt of eval.
    Vec3 derivative(std::size_t seg, double t) const;
    /// Position at local parameter u in [0, 1] of a segment.
    Vec3 at(std::size_t seg, double u) const;

    /// `count` points spaced uniformly in arc length, starting at control
    /// point 0. Arc length is tabulated from `dense` samples per segment, and
    /// every returned point is an exact curve evaluation.
    std::vector<Vec3> resample_uniform(std::size_t count, std::size_t dense = 64) const;

    double length(std::size_t dense = 64) const;

private:
    struct Window {
        Vec3 p0, p1, p2, p3;
        double t0, t1, t2, t3;
    };
    Window window(std::size_t seg) const;

    std::vector<Vec3> points_;
    std::vector<double> knots_;
    double alpha_;
};

struct BoundarySpline {
    std::vector<Vec3> control_points;
    std::vector<Vec3> resampled;
    std::vector<double> knots;
};

struct SmoothedLoop {
    BoundarySpline spline;
    /// Input points moved to their closest point on the resampled polyline.
    std::vector<Vec3> snapped;
};

inline constexpr std::size_t kMinResampleCount = 8;

/// Resample count rule: max(8, ceil(ratio * n)).
std::size_t resample_count(std::size_t boundary_vertices, double resample_ratio);

/// Fits a closed centripetal spline through `loop`, resamples it, and snaps
/// each loop vertex to the nearest point of the resampled polyline. Throws
/// GeometryError for loops of fewer than 4 vertices.
SmoothedLoop smooth_boundary(std::span<const Vec3> loop, double resample_ratio);

/// Closest point on a closed polyline.
Vec3 closest_point_on_closed_polyline(std::span<const Vec3> polyline, const Vec3& p);

/// Closest point on segment [a, b].
Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& p);

/// Smooths every boundary loop of `sub` in place and returns the splines.
/// Loops shorter than 4 vertices are left as they are.
std::vector<BoundarySpline> smooth_submesh_boundary(SubMesh& sub, double resample_ratio);

} // namespace tactskin
