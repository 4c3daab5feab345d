#include "tactskin/spline.hpp"

#include "tactskin/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tactskin {

namespace {

// Knot increments below this collapse the pyramid weights; coincident
// control points are rare after welding but must not divide by zero.
constexpr double kMinKnotStep = 1e-12;

double knot_step(const Vec3& a, const Vec3& b, double alpha) {
    return std::max(std::pow((b - a).norm(), alpha), kMinKnotStep);
}

} // namespace

CatmullRomLoop::CatmullRomLoop(std::vector<Vec3> control_points, double alpha)
    : points_(std::move(control_points)), alpha_(alpha) {
    if (points_.size() < 3) throw GeometryError("closed spline needs at least 3 control points");
    const auto n = points_.size();
    knots_.resize(n + 1);
    knots_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) knots_[i + 1] = knots_[i] + knot_step(points_[i], points_[(i + 1) % n], alpha_);
}

CatmullRomLoop::Window CatmullRomLoop::window(std::size_t seg) const {
    const auto n = points_.size();
    Window w;
    w.p0 = points_[(seg + n - 1) % n];
    w.p1 = points_[seg % n];
    w.p2 = points_[(seg + 1) % n];
    w.p3 = points_[(seg + 2) % n];
    w.t1 = knots_[seg];
    w.t2 = knots_[seg + 1];
    w.t0 = w.t1 - knot_step(w.p0, w.p1, alpha_);
    w.t3 = w.t2 + knot_step(w.p2, w.p3, alpha_);
    return w;
}

Vec3 CatmullRomLoop::eval(std::size_t seg, double t) const {
    const Window w = window(seg);
    const Vec3 a1 = ((w.t1 - t) * w.p0 + (t - w.t0) * w.p1) / (w.t1 - w.t0);
    const Vec3 a2 = ((w.t2 - t) * w.p1 + (t - w.t1) * w.p2) / (w.t2 - w.t1);
    const Vec3 a3 = ((w.t3 - t) * w.p2 + (t - w.t2) * w.p3) / (w.t3 - w.t2);
    const Vec3 b1 = ((w.t2 - t) * a1 + (t - w.t0) * a2) / (w.t2 - w.t0);
    const Vec3 b2 = ((w.t3 - t) * a2 + (t - w.t1) * a3) / (w.t3 - w.t1);
    return ((w.t2 - t) * b1 + (t - w.t1) * b2) / (w.t2 - w.t1);
}

Vec3 CatmullRomLoop::derivative(std::size_t seg, double t) const {
    const Window w = window(seg);
    const Vec3 a1 = ((w.t1 - t) * w.p0 + (t - w.t0) * w.p1) / (w.t1 - w.t0);
    const Vec3 a2 = ((w.t2 - t) * w.p1 + (t - w.t1) * w.p2) / (w.t2 - w.t1);
    const Vec3 a3 = ((w.t3 - t) * w.p2 + (t - w.t2) * w.p3) / (w.t3 - w.t2);
    const Vec3 da1 = (w.p1 - w.p0) / (w.t1 - w.t0);
    const Vec3 da2 = (w.p2 - w.p1) / (w.t2 - w.t1);
    const Vec3 da3 = (w.p3 - w.p2) / (w.t3 - w.t2);
    const Vec3 b1 = ((w.t2 - t) * a1 + (t - w.t0) * a2) / (w.t2 - w.t0);
    const Vec3 b2 = ((w.t3 - t) * a2 + (t - w.t1) * a3) / (w.t3 - w.t1);
    const Vec3 db1 = (a2 - a1) / (w.t2 - w.t0) + ((w.t2 - t) * da1 + (t - w.t0) * da2) / (w.t2 - w.t0);
    const Vec3 db2 = (a3 - a2) / (w.t3 - w.t1) + ((w.t3 - t) * da2 + (t - w.t1) * da3) / (w.t3 - w.t1);
    return (b2 - b1) / (w.t2 - w.t1) + ((w.t2 - t) * db1 + (t - w.t1) * db2) / (w.t2 - w.t1);
}

Vec3 CatmullRomLoop::at(std::size_t seg, double u) const {
    return eval(seg, knots_[seg] + u * (knots_[seg + 1] - knots_[seg]));
}

double CatmullRomLoop::length(std::size_t dense) const {
    double len = 0.0;
    for (std::size_t s = 0; s < segment_count(); ++s) {
        Vec3 prev = at(s, 0.0);
        for (std::size_t k = 1; k <= dense; ++k) {
            const Vec3 cur = at(s, double(k) / double(dense));
            len += (cur - prev).norm();
            prev = cur;
        }
    }
    return len;
}

std::vector<Vec3> CatmullRomLoop::resample_uniform(std::size_t count, std::size_t dense) const {
    // Tabulate (global parameter, cumulative arc length).
    std::vector<double> params;
    std::vector<double> arc;
    std::vector<std::size_t> seg_of;
    params.reserve(segment_count() * dense + 1);
    arc.reserve(segment_count() * dense + 1);
    double acc = 0.0;
    Vec3 prev = at(0, 0.0);
    params.push_back(knots_[0]);
    arc.push_back(0.0);
    seg_of.push_back(0);
    for (std::size_t s = 0; s < segment_count(); ++s) {
        for (std::size_t k = 1; k <= dense; ++k) {
            const double u = double(k) / double(dense);
            const double t = knots_[s] + u * (knots_[s + 1] - knots_[s]);
            const Vec3 cur = eval(s, t);
            acc += (cur - prev).norm();
            prev = cur;
            params.push_back(t);
            arc.push_back(acc);
            seg_of.push_back(s);
        }
    }

    std::vector<Vec3> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double target = acc * double(k) / double(count);
        auto it = std::upper_bound(arc.begin(), arc.end(), target);
        std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - arc.begin()), arc.size() - 1);
        if (hi == 0) hi = 1;
        const std::size_t lo = hi - 1;
        const double span = arc[hi] - arc[lo];
        const double frac = span > 0 ? (target - arc[lo]) / span : 0.0;
        const double t = params[lo] + frac * (params[hi] - params[lo]);
        out.push_back(eval(seg_of[hi], t));
    }
    return out;
}

std::size_t resample_count(std::size_t boundary_vertices, double resample_ratio) {
    const auto scaled = static_cast<std::size_t>(std::ceil(resample_ratio * double(boundary_vertices) - 1e-12));
    return std::max(kMinResampleCount, scaled);
}

Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return a;
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

Vec3 closest_point_on_closed_polyline(std::span<const Vec3> polyline, const Vec3& p) {
    Vec3 best = polyline.front();
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < polyline.size(); ++i) {
        const Vec3 q = closest_point_on_segment(polyline[i], polyline[(i + 1) % polyline.size()], p);
        const double d2 = (q - p).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = q;
        }
    }
    return best;
}

SmoothedLoop smooth_boundary(std::span<const Vec3> loop, double resample_ratio) {
    if (loop.size() < 4) {
        throw GeometryError("boundary loop has " + std::to_string(loop.size()) + " vertices; smoothing needs at least 4");
    }
    if (!(resample_ratio > 0.0 && resample_ratio <= 1.0)) throw ConfigError("resample_ratio must be in (0, 1]");

    CatmullRomLoop curve(std::vector<Vec3>(loop.begin(), loop.end()), 0.5);
    SmoothedLoop out;
    out.spline.control_points = curve.control_points();
    out.spline.knots = curve.knots();
    out.spline.resampled = curve.resample_uniform(resample_count(loop.size(), resample_ratio));
    out.snapped.reserve(loop.size());
    for (const auto& p : loop) out.snapped.push_back(closest_point_on_closed_polyline(out.spline.resampled, p));
    return out;
}

std::vector<BoundarySpline> smooth_submesh_boundary(SubMesh& sub, double resample_ratio) {
    std::vector<BoundarySpline> splines;
    for (const auto& loop : boundary_loops(sub)) {
        if (loop.size() < 4) continue;
        std::vector<Vec3> pts;
        pts.reserve(loop.size());
        for (auto v : loop) pts.push_back(sub.positions[v]);
        SmoothedLoop s = smooth_boundary(pts, resample_ratio);
        for (std::size_t i = 0; i < loop.size(); ++i) sub.positions[loop[i]] = s.snapped[i];
        splines.push_back(std::move(s.spline));
    }
    return splines;
}

} // namespace tactskin
