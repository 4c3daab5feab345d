#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace oracle {

namespace {

double orient(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).dot((c - a).cross(d - a));
}

// Orientation volumes below this fraction of scale^3 count as coplanar.
constexpr double kFlat = 1e-10;
thread_local double g_scale3 = 1.0;

int sign(double v) {
    if (std::abs(v) <= kFlat * g_scale3) return 0;
    return (v > 0) - (v < 0);
}

using P2 = std::pair<double, double>;

double cross2(const P2& o, const P2& a, const P2& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

bool on_segment2(const P2& a, const P2& b, const P2& p) {
    return std::min(a.first, b.first) <= p.first && p.first <= std::max(a.first, b.first) &&
           std::min(a.second, b.second) <= p.second && p.second <= std::max(a.second, b.second);
}

bool segments_cross2(const P2& a, const P2& b, const P2& c, const P2& d) {
    const double d1 = cross2(c, d, a), d2 = cross2(c, d, b), d3 = cross2(a, b, c), d4 = cross2(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && on_segment2(c, d, a)) return true;
    if (d2 == 0 && on_segment2(c, d, b)) return true;
    if (d3 == 0 && on_segment2(a, b, c)) return true;
    if (d4 == 0 && on_segment2(a, b, d)) return true;
    return false;
}

bool inside2(const P2& p, const std::array<P2, 3>& t) {
    const double c0 = cross2(t[0], t[1], p), c1 = cross2(t[1], t[2], p), c2 = cross2(t[2], t[0], p);
    return (c0 >= 0 && c1 >= 0 && c2 >= 0) || (c0 <= 0 && c1 <= 0 && c2 <= 0);
}

// Closed segment vs closed triangle.
bool segment_hits_triangle(const Vec3& a, const Vec3& b, const Vec3& p, const Vec3& q, const Vec3& r) {
    const int sa = sign(orient(p, q, r, a));
    const int sb = sign(orient(p, q, r, b));
    if (sa == sb && sa != 0) return false;
    if (sa == 0 && sb == 0) {
        // Segment in the triangle's plane: test in 2D.
        const Vec3 n = (q - p).cross(r - p);
        int drop = 0;
        if (std::abs(n.y()) > std::abs(n[drop])) drop = 1;
        if (std::abs(n.z()) > std::abs(n[drop])) drop = 2;
        const int u = (drop + 1) % 3, v = (drop + 2) % 3;
        const P2 a2{a[u], a[v]}, b2{b[u], b[v]};
        const std::array<P2, 3> t{P2{p[u], p[v]}, P2{q[u], q[v]}, P2{r[u], r[v]}};
        if (inside2(a2, t) || inside2(b2, t)) return true;
        for (int i = 0; i < 3; ++i)
            if (segments_cross2(a2, b2, t[i], t[(i + 1) % 3])) return true;
        return false;
    }
    const int s1 = sign(orient(a, b, p, q));
    const int s2 = sign(orient(a, b, q, r));
    const int s3 = sign(orient(a, b, r, p));
    const bool nonneg = s1 >= 0 && s2 >= 0 && s3 >= 0;
    const bool nonpos = s1 <= 0 && s2 <= 0 && s3 <= 0;
    return nonneg || nonpos;
}

bool coplanar_touch(const std::array<Vec3, 3>& P, const std::array<Vec3, 3>& Q, const Vec3& n) {
    int drop = 0;
    if (std::abs(n.y()) > std::abs(n[drop])) drop = 1;
    if (std::abs(n.z()) > std::abs(n[drop])) drop = 2;
    const int u = (drop + 1) % 3, v = (drop + 2) % 3;
    std::array<P2, 3> p, q;
    for (int i = 0; i < 3; ++i) {
        p[i] = {P[i][u], P[i][v]};
        q[i] = {Q[i][u], Q[i][v]};
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (segments_cross2(p[i], p[(i + 1) % 3], q[j], q[(j + 1) % 3])) return true;
    return inside2(p[0], q) || inside2(q[0], p);
}

} // namespace

bool triangles_touch(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& q0, const Vec3& q1, const Vec3& q2) {
    const std::array<Vec3, 3> P{p0, p1, p2}, Q{q0, q1, q2};
    double scale = 0.0;
    for (int i = 0; i < 3; ++i)
        scale = std::max({scale, (P[i] - P[(i + 1) % 3]).norm(), (Q[i] - Q[(i + 1) % 3]).norm()});
    g_scale3 = scale * scale * scale;
    bool coplanar = true;
    for (const auto& x : Q)
        if (sign(orient(p0, p1, p2, x)) != 0) coplanar = false;
    if (coplanar) return coplanar_touch(P, Q, (p1 - p0).cross(p2 - p0));
    for (int i = 0; i < 3; ++i) {
        if (segment_hits_triangle(P[i], P[(i + 1) % 3], q0, q1, q2)) return true;
        if (segment_hits_triangle(Q[i], Q[(i + 1) % 3], p0, p1, p2)) return true;
    }
    return false;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> all_pairs_intersections(const tactskin::TriMesh& mesh) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    const auto& f = mesh.faces();
    for (std::uint32_t i = 0; i < f.size(); ++i) {
        for (std::uint32_t j = i + 1; j < f.size(); ++j) {
            bool shared = false;
            for (auto a : f[i])
                for (auto b : f[j]) shared = shared || a == b;
            if (shared) continue;
            const auto& v = mesh.vertices();
            if (triangles_touch(v[f[i][0]], v[f[i][1]], v[f[i][2]], v[f[j][0]], v[f[j][1]], v[f[j][2]]))
                out.emplace_back(i, j);
        }
    }
    return out;
}

std::vector<double> heatmap(const tactskin::TriMesh& mesh, const tactskin::NoduleLayout& layout,
                            const tactskin::ContactHistogram& hist, double alpha, int order, bool normalize) {
    double max_count = 0.0;
    for (const auto& [id, c] : hist.counts) max_count = std::max(max_count, double(c));
    std::vector<double> out(mesh.vertex_count(), 0.0);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        for (const auto& n : layout.nodules) {
            const auto it = hist.counts.find(n.id);
            if (it == hist.counts.end() || it->second == 0) continue;
            const double c = normalize ? double(it->second) / max_count : double(it->second);
            const Vec3 d = mesh.vertex(std::uint32_t(v)) - n.position;
            const double dist = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
            const double w = std::sqrt(c / (1.0 + std::pow(dist / alpha, 2.0 * order)));
            out[v] = std::max(out[v], w);
        }
        if (!normalize) out[v] = std::min(out[v], 1.0);
    }
    return out;
}

std::vector<std::uint32_t> greedy_order(const tactskin::NoduleLayout& layout, std::uint32_t start) {
    std::map<std::uint32_t, Vec3> left;
    for (const auto& n : layout.nodules) left[n.id] = n.position;
    std::vector<std::uint32_t> out{start};
    Vec3 at = left.at(start);
    left.erase(start);
    while (!left.empty()) {
        // std::map iterates ids ascending, so a strict < keeps the lower id on ties.
        auto best = left.begin();
        for (auto it = left.begin(); it != left.end(); ++it)
            if ((it->second - at).norm() < (best->second - at).norm()) best = it;
        out.push_back(best->first);
        at = best->second;
        left.erase(best);
    }
    return out;
}

std::optional<std::pair<double, double>> contact_interval(const Vec3& a, const Vec3& b, const Vec3& p, double reach) {
    const double len = (b - a).norm();
    const Vec3 u = (b - a) / len;
    const Vec3 w = a - p;
    // |w + t u|^2 = reach^2  ->  t^2 + 2 (w.u) t + |w|^2 - reach^2 = 0
    const double bq = w.dot(u);
    const double disc = bq * bq - (w.squaredNorm() - reach * reach);
    if (disc < 0) return std::nullopt;
    const double t0 = std::max(0.0, -bq - std::sqrt(disc));
    const double t1 = std::min(len, -bq + std::sqrt(disc));
    if (t0 > t1) return std::nullopt;
    return std::make_pair(t0, t1);
}

double min_spacing_ratio(const tactskin::NoduleLayout& layout) {
    double worst = std::numeric_limits<double>::infinity();
    const auto& ns = layout.nodules;
    for (std::size_t j = 0; j < ns.size(); ++j) {
        const double w = std::max(ns[j].local_weight, 0.05);
        const double r = layout.params.d_min / w;
        for (std::size_t i = 0; i < j; ++i) worst = std::min(worst, (ns[i].position - ns[j].position).norm() / r);
    }
    return worst;
}

std::size_t uncovered_probes(const tactskin::SkinShell& shell, const tactskin::NoduleLayout& layout, double d,
                             double spacing) {
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (const auto& p : shell.outer) {
        lo_x = std::min(lo_x, p.x());
        lo_y = std::min(lo_y, p.y());
        hi_x = std::max(hi_x, p.x());
        hi_y = std::max(hi_y, p.y());
    }
    std::size_t uncovered = 0;
    for (double x = lo_x; x <= hi_x; x += spacing) {
        for (double y = lo_y; y <= hi_y; y += spacing) {
            const P2 q{x, y};
            std::optional<double> z;
            for (const auto& f : shell.faces) {
                const std::array<P2, 3> t{P2{shell.outer[f[0]].x(), shell.outer[f[0]].y()},
                                          P2{shell.outer[f[1]].x(), shell.outer[f[1]].y()},
                                          P2{shell.outer[f[2]].x(), shell.outer[f[2]].y()}};
                if (inside2(q, t)) {
                    z = shell.outer[f[0]].z();
                    break;
                }
            }
            if (!z) continue;
            const Vec3 p(x, y, *z);
            bool covered = false;
            for (const auto& n : layout.nodules)
                if ((n.position - p).norm() < d) {
                    covered = true;
                    break;
                }
            if (!covered) ++uncovered;
        }
    }
    return uncovered;
}

double snr_from_samples(std::span<const double> unpressed, std::span<const double> pressed) {
    double mu_u = 0, mu_p = 0;
    for (double v : unpressed) mu_u += v;
    for (double v : pressed) mu_p += v;
    mu_u /= double(unpressed.size());
    mu_p /= double(pressed.size());
    double ss = 0;
    for (double v : unpressed) ss += (v - mu_u) * (v - mu_u);
    return std::abs(mu_u - mu_p) / std::sqrt(ss / double(unpressed.size()));
}

} // namespace oracle
