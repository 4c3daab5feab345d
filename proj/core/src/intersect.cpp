// Triangle/triangle overlap after Guigue & Devillers, "Fast and robust
// triangle-triangle overlap test using orientation predicates" (2003).

#include "tactskin/shell.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace tactskin {

namespace {

double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment_2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
           p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect_2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                           const Eigen::Vector2d& d) {
    const double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
    const double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
    if (o1 == 0 && on_segment_2d(a, b, c)) return true;
    if (o2 == 0 && on_segment_2d(a, b, d)) return true;
    if (o3 == 0 && on_segment_2d(c, d, a)) return true;
    if (o4 == 0 && on_segment_2d(c, d, b)) return true;
    return false;
}

bool point_in_triangle_2d(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                          const Eigen::Vector2d& c) {
    const double d1 = orient2d(a, b, p), d2 = orient2d(b, c, p), d3 = orient2d(c, a, p);
    const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

bool coplanar_overlap(const Vec3& p1, const Vec3& q1, const Vec3& r1, const Vec3& p2, const Vec3& q2,
                      const Vec3& r2, const Vec3& normal) {
    // Drop the dominant axis of the shared plane normal.
    int drop = 0;
    normal.cwiseAbs().maxCoeff(&drop);
    const int i = (drop + 1) % 3, j = (drop + 2) % 3;
    auto proj = [i, j](const Vec3& v) { return Eigen::Vector2d(v[i], v[j]); };
    const std::array<Eigen::Vector2d, 3> a{proj(p1), proj(q1), proj(r1)};
    const std::array<Eigen::Vector2d, 3> b{proj(p2), proj(q2), proj(r2)};
    for (int e = 0; e < 3; ++e) {
        for (int f = 0; f < 3; ++f) {
            if (segments_intersect_2d(a[e], a[(e + 1) % 3], b[f], b[(f + 1) % 3])) return true;
        }
    }
    return point_in_triangle_2d(a[0], b[0], b[1], b[2]) || point_in_triangle_2d(b[0], a[0], a[1], a[2]);
}

bool check_min_max(const Vec3& p1, const Vec3& q1, const Vec3& r1, const Vec3& p2, const Vec3& q2, const Vec3& r2,
                   double tol) {
    Vec3 n = (p2 - q1).cross(p1 - q1);
    if ((q2 - q1).dot(n) > tol) return false;
    n = (p2 - p1).cross(r1 - p1);
    if ((r2 - p1).dot(n) > tol) return false;
    return true;
}

bool tri_tri_3d(const Vec3& p1, const Vec3& q1, const Vec3& r1, const Vec3& p2, const Vec3& q2, const Vec3& r2,
                double dp2, double dq2, double dr2, const Vec3& n1, double tol) {
    if (dp2 > 0.0) {
        if (dq2 > 0.0) return check_min_max(p1, r1, q1, r2, p2, q2, tol);
        if (dr2 > 0.0) return check_min_max(p1, r1, q1, q2, r2, p2, tol);
        return check_min_max(p1, q1, r1, p2, q2, r2, tol);
    }
    if (dp2 < 0.0) {
        if (dq2 < 0.0) return check_min_max(p1, q1, r1, r2, p2, q2, tol);
        if (dr2 < 0.0) return check_min_max(p1, q1, r1, q2, r2, p2, tol);
        return check_min_max(p1, r1, q1, p2, q2, r2, tol);
    }
    if (dq2 < 0.0) {
        if (dr2 >= 0.0) return check_min_max(p1, r1, q1, q2, r2, p2, tol);
        return check_min_max(p1, q1, r1, p2, q2, r2, tol);
    }
    if (dq2 > 0.0) {
        if (dr2 > 0.0) return check_min_max(p1, r1, q1, p2, q2, r2, tol);
        return check_min_max(p1, q1, r1, q2, r2, p2, tol);
    }
    if (dr2 > 0.0) return check_min_max(p1, q1, r1, r2, p2, q2, tol);
    if (dr2 < 0.0) return check_min_max(p1, r1, q1, r2, p2, q2, tol);
    return coplanar_overlap(p1, q1, r1, p2, q2, r2, n1);
}

// Signed distances this small relative to the pair's scale are treated as on-plane.
constexpr double kFlat = 1e-10;

double snap(double d, double tol) { return std::abs(d) <= tol ? 0.0 : d; }

struct Box {
    Vec3 lo, hi;
};

struct Cell {
    std::int64_t x, y, z;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct CellHash {
    std::size_t operator()(const Cell& c) const noexcept {
        std::uint64_t h = std::uint64_t(c.x) * 0x9E3779B97F4A7C15ull;
        h ^= std::uint64_t(c.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
        h ^= std::uint64_t(c.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

} // namespace

bool triangles_intersect(const Vec3& p1, const Vec3& q1, const Vec3& r1, const Vec3& p2, const Vec3& q2,
                         const Vec3& r2) {
    const double scale = std::max({(q1 - p1).norm(), (r1 - q1).norm(), (p1 - r1).norm(), (q2 - p2).norm(),
                                   (r2 - q2).norm(), (p2 - r2).norm()});
    const double tol = kFlat * scale * scale * scale;
    const Vec3 n2 = (p2 - r2).cross(q2 - r2);
    const double dp1 = snap((p1 - r2).dot(n2), tol);
    const double dq1 = snap((q1 - r2).dot(n2), tol);
    const double dr1 = snap((r1 - r2).dot(n2), tol);
    if (dp1 * dq1 > 0.0 && dp1 * dr1 > 0.0) return false;

    const Vec3 n1 = (q1 - p1).cross(r1 - p1);
    const double dp2 = snap((p2 - r1).dot(n1), tol);
    const double dq2 = snap((q2 - r1).dot(n1), tol);
    const double dr2 = snap((r2 - r1).dot(n1), tol);
    if (dp2 * dq2 > 0.0 && dp2 * dr2 > 0.0) return false;

    if (dp1 > 0.0) {
        if (dq1 > 0.0) return tri_tri_3d(r1, p1, q1, p2, r2, q2, dp2, dr2, dq2, n1, tol);
        if (dr1 > 0.0) return tri_tri_3d(q1, r1, p1, p2, r2, q2, dp2, dr2, dq2, n1, tol);
        return tri_tri_3d(p1, q1, r1, p2, q2, r2, dp2, dq2, dr2, n1, tol);
    }
    if (dp1 < 0.0) {
        if (dq1 < 0.0) return tri_tri_3d(r1, p1, q1, p2, q2, r2, dp2, dq2, dr2, n1, tol);
        if (dr1 < 0.0) return tri_tri_3d(q1, r1, p1, p2, q2, r2, dp2, dq2, dr2, n1, tol);
        return tri_tri_3d(p1, q1, r1, p2, r2, q2, dp2, dr2, dq2, n1, tol);
    }
    if (dq1 < 0.0) {
        if (dr1 >= 0.0) return tri_tri_3d(q1, r1, p1, p2, r2, q2, dp2, dr2, dq2, n1, tol);
        return tri_tri_3d(p1, q1, r1, p2, q2, r2, dp2, dq2, dr2, n1, tol);
    }
    if (dq1 > 0.0) {
        if (dr1 > 0.0) return tri_tri_3d(p1, q1, r1, p2, r2, q2, dp2, dr2, dq2, n1, tol);
        return tri_tri_3d(q1, r1, p1, p2, q2, r2, dp2, dq2, dr2, n1, tol);
    }
    if (dr1 > 0.0) return tri_tri_3d(r1, p1, q1, p2, q2, r2, dp2, dq2, dr2, n1, tol);
    if (dr1 < 0.0) return tri_tri_3d(r1, p1, q1, p2, r2, q2, dp2, dr2, dq2, n1, tol);
    return coplanar_overlap(p1, q1, r1, p2, q2, r2, n1);
}

std::vector<TrianglePair> detect_self_intersections(const TriMesh& mesh) {
    const auto nf = mesh.face_count();
    std::vector<TrianglePair> hits;
    if (nf < 2) return hits;

    std::vector<Box> boxes(nf);
    Vec3 glo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 ghi = -glo;
    double mean_extent = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
        const auto& [a, b, c] = mesh.face(f);
        boxes[f].lo = mesh.vertex(a).cwiseMin(mesh.vertex(b)).cwiseMin(mesh.vertex(c));
        boxes[f].hi = mesh.vertex(a).cwiseMax(mesh.vertex(b)).cwiseMax(mesh.vertex(c));
        glo = glo.cwiseMin(boxes[f].lo);
        ghi = ghi.cwiseMax(boxes[f].hi);
        mean_extent += (boxes[f].hi - boxes[f].lo).maxCoeff();
    }
    mean_extent /= double(nf);
    const double cell = std::max({mean_extent, (ghi - glo).maxCoeff() / 256.0, 1e-9});
    const double inv = 1.0 / cell;
    auto cell_range = [&](const Box& b) {
        Cell lo{static_cast<std::int64_t>(std::floor((b.lo.x() - glo.x()) * inv)),
                static_cast<std::int64_t>(std::floor((b.lo.y() - glo.y()) * inv)),
                static_cast<std::int64_t>(std::floor((b.lo.z() - glo.z()) * inv))};
        Cell hi{static_cast<std::int64_t>(std::floor((b.hi.x() - glo.x()) * inv)),
                static_cast<std::int64_t>(std::floor((b.hi.y() - glo.y()) * inv)),
                static_cast<std::int64_t>(std::floor((b.hi.z() - glo.z()) * inv))};
        return std::pair{lo, hi};
    };

    std::unordered_map<Cell, std::vector<std::uint32_t>, CellHash> grid;
    for (std::uint32_t f = 0; f < nf; ++f) {
        auto [lo, hi] = cell_range(boxes[f]);
        for (auto x = lo.x; x <= hi.x; ++x)
            for (auto y = lo.y; y <= hi.y; ++y)
                for (auto z = lo.z; z <= hi.z; ++z) grid[{x, y, z}].push_back(f);
    }

    auto shares_vertex = [&](std::uint32_t f, std::uint32_t g) {
        for (auto i : mesh.face(f))
            for (auto j : mesh.face(g))
                if (i == j) return true;
        return false;
    };

    for (const auto& [c, members] : grid) {
        for (std::size_t s = 0; s < members.size(); ++s) {
            for (std::size_t t = s + 1; t < members.size(); ++t) {
                const auto f = std::min(members[s], members[t]);
                const auto g = std::max(members[s], members[t]);
                const Box& bf = boxes[f];
                const Box& bg = boxes[g];
                if ((bf.hi.array() < bg.lo.array()).any() || (bg.hi.array() < bf.lo.array()).any()) continue;
                // Test each pair only in the lowest cell of their box overlap.
                Box overlap{bf.lo.cwiseMax(bg.lo), bf.hi.cwiseMin(bg.hi)};
                if (cell_range(overlap).first != c) continue;
                if (shares_vertex(f, g)) continue;
                const auto& [a0, a1, a2] = mesh.face(f);
                const auto& [b0, b1, b2] = mesh.face(g);
                if (triangles_intersect(mesh.vertex(a0), mesh.vertex(a1), mesh.vertex(a2), mesh.vertex(b0),
                                        mesh.vertex(b1), mesh.vertex(b2))) {
                    hits.push_back({f, g});
                }
            }
        }
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

} // namespace tactskin
