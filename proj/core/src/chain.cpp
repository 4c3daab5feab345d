#include "tactskin/chain.hpp"

#include "tactskin/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace tactskin {

namespace {

std::string mm(double meters) {
    std::ostringstream os;
    os.precision(4);
    os << meters * 1000.0 << " mm";
    return os.str();
}

struct SurfacePoint {
    Vec3 point;
    Vec3 normal;
    double distance;
};

// Closest point on triangle abc (Ericson, Real-Time Collision Detection 5.1.5),
// returned with its barycentric weights.
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, std::array<double, 3>& bary) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        bary = {1, 0, 0};
        return a;
    }
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        bary = {0, 1, 0};
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        bary = {1 - v, v, 0};
        return a + v * ab;
    }
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        bary = {0, 0, 1};
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        bary = {1 - w, 0, w};
        return a + w * ac;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        bary = {0, 1 - w, w};
        return b + w * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    bary = {1 - v - w, v, w};
    return a + ab * v + ac * w;
}

// Mid-thickness surface of a shell, queried by brute force.
class MidSurface {
public:
    explicit MidSurface(const SkinShell& shell) : faces_(shell.faces), normals_(shell.normals) {
        points_.reserve(shell.inner.size());
        for (std::size_t i = 0; i < shell.inner.size(); ++i)
            points_.push_back(shell.inner[i] + 0.5 * shell.thickness * shell.normals[i]);
    }

    SurfacePoint closest(const Vec3& p) const {
        SurfacePoint best{p, Vec3::UnitZ(), std::numeric_limits<double>::infinity()};
        for (const auto& [a, b, c] : faces_) {
            std::array<double, 3> bary{};
            const Vec3 q = closest_on_triangle(p, points_[a], points_[b], points_[c], bary);
            const double d = (q - p).norm();
            if (d < best.distance) {
                best.point = q;
                best.distance = d;
                best.normal = (bary[0] * normals_[a] + bary[1] * normals_[b] + bary[2] * normals_[c]).normalized();
            }
        }
        return best;
    }

private:
    std::vector<Face> faces_;
    std::vector<Vec3> normals_;
    std::vector<Vec3> points_;
};

// Squared distance between segments p1q1 and p2q2 (Ericson 5.1.9).
double segment_distance2(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
    const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
    const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    double s = 0.0, t = 0.0;
    constexpr double eps = 1e-18;
    if (a <= eps && e <= eps) return r.squaredNorm();
    if (a <= eps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= eps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom != 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return ((p1 + d1 * s) - (p2 + d2 * t)).squaredNorm();
}

double polyline_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        for (std::size_t j = 0; j + 1 < b.size(); ++j)
            best = std::min(best, segment_distance2(a[i], a[i + 1], b[j], b[j + 1]));
    return std::sqrt(best);
}

// Smallest distance between two legs of a polyline that do not share a vertex.
double self_clearance(std::span<const Vec3> line) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
        for (std::size_t j = i + 2; j + 1 < line.size(); ++j)
            best = std::min(best, segment_distance2(line[i], line[i + 1], line[j], line[j + 1]));
    return std::sqrt(best);
}

std::vector<Vec3> drop_collinear(const std::vector<Vec3>& pts) {
    constexpr double kTol = 1e-9;
    if (pts.size() <= 2) return pts;
    std::vector<Vec3> out{pts.front()};
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const Vec3 a = out.back();
        const Vec3 b = pts[i + 1];
        const Vec3 ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0 ? std::clamp((pts[i] - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        if ((a + t * ab - pts[i]).norm() > kTol) out.push_back(pts[i]);
    }
    out.push_back(pts.back());
    return out;
}

// Base route: chord between the mid-surface projections of two nodules,
// sampled every 2 mm and pulled back onto the mid-surface.
std::vector<Vec3> surface_path(const MidSurface& mid, const Vec3& from, const Vec3& to) {
    const Vec3 a = mid.closest(from).point;
    const Vec3 b = mid.closest(to).point;
    const double chord = (b - a).norm();
    const auto pieces = static_cast<std::size_t>(std::clamp(std::ceil(chord / 0.002), 1.0, 64.0));
    std::vector<Vec3> pts;
    pts.reserve(pieces + 1);
    pts.push_back(a);
    for (std::size_t k = 1; k < pieces; ++k) pts.push_back(mid.closest(a + (double(k) / double(pieces)) * (b - a)).point);
    pts.push_back(b);
    return drop_collinear(pts);
}

struct PathFrame {
    std::vector<double> arc;
    std::vector<Vec3> pts;

    Vec3 at(double s, Vec3* dir) const {
        std::size_t i = 0;
        while (i + 2 < pts.size() && arc[i + 1] < s) ++i;
        const double span = arc[i + 1] - arc[i];
        const double u = span > 0 ? std::clamp((s - arc[i]) / span, 0.0, 1.0) : 0.0;
        if (dir) *dir = (pts[i + 1] - pts[i]).normalized();
        return pts[i] + u * (pts[i + 1] - pts[i]);
    }
};

struct ZigZag {
    std::vector<Vec3> centres;
    std::vector<Vec3> sides;

    /// Points alternate +amp, -amp across the path; the ends stay put.
    std::vector<Vec3> with_amplitude(double amp) const {
        std::vector<Vec3> out;
        out.reserve(centres.size());
        for (std::size_t k = 0; k < centres.size(); ++k) {
            const double o = (k == 0 || k + 1 == centres.size()) ? 0.0 : ((k % 2 == 1) ? amp : -amp);
            out.push_back(centres[k] + o * sides[k]);
        }
        return out;
    }
};

// Zig-zag with `teeth` full periods (2 * teeth legs) around the base path,
// offset within the local tangent plane.
ZigZag zigzag(const MidSurface& mid, const PathFrame& base, std::size_t teeth) {
    const std::size_t legs = 2 * teeth;
    const double total = base.arc.back();
    ZigZag z;
    for (std::size_t k = 0; k <= legs; ++k) {
        Vec3 dir;
        const Vec3 p = base.at(total * double(k) / double(legs), &dir);
        Vec3 side = mid.closest(p).normal.cross(dir);
        if (side.norm() < 1e-12) side = dir.unitOrthogonal();
        z.centres.push_back(p);
        z.sides.push_back(side.normalized());
    }
    return z;
}

} // namespace

void FilamentSpec::validate() const {
    if (!(resistivity > 0.0)) throw ConfigError("filament resistivity must be positive");
    if (!(margin > 0.0)) throw ConfigError("resistance margin must be positive");
    if (!(trace_diameter > 0.0)) throw ConfigError("trace diameter must be positive");
    if (!(surface_clearance >= 0.0)) throw ConfigError("surface clearance must be nonnegative");
    if (!(min_nodule_spacing >= kMinSpacingFloor)) {
        throw ConfigError("min_nodule_spacing " + mm(min_nodule_spacing) + " is below the " + mm(kMinSpacingFloor) +
                          " floor");
    }
}

double polyline_length(std::span<const Vec3> polyline) {
    double len = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i) len += (polyline[i] - polyline[i - 1]).norm();
    return len;
}

double required_trace_length(double resistance_kohm, const FilamentSpec& spec) {
    // kΩ / (Ω/mm) = m.
    return resistance_kohm / spec.resistivity;
}

std::vector<std::uint32_t> order_chain(const NoduleLayout& layout, std::span<const std::uint32_t> ids,
                                       std::uint32_t start) {
    std::vector<std::uint32_t> remaining(ids.begin(), ids.end());
    std::sort(remaining.begin(), remaining.end());
    auto it = std::find(remaining.begin(), remaining.end(), start);
    if (it == remaining.end()) throw ConfigError("chain start " + std::to_string(start) + " is not in the layout");
    remaining.erase(it);

    std::vector<std::uint32_t> order{start};
    while (!remaining.empty()) {
        const Vec3& here = layout.by_id(order.back()).position;
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < remaining.size(); ++k) {
            const double d = (layout.by_id(remaining[k]).position - here).norm();
            if (d < best_d) { // strict: the earlier (lower) id keeps ties
                best_d = d;
                best = k;
            }
        }
        order.push_back(remaining[best]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return order;
}

std::vector<std::uint32_t> order_chain(const NoduleLayout& layout, std::uint32_t start) {
    std::vector<std::uint32_t> ids;
    for (const auto& n : layout.nodules) ids.push_back(n.id);
    return order_chain(layout, ids, start);
}

std::vector<std::uint32_t> order_chain_exhaustive(const NoduleLayout& layout, std::span<const std::uint32_t> ids,
                                                  std::uint32_t start) {
    if (ids.size() > 9) throw ConfigError("exhaustive chain ordering is limited to 9 nodules");
    std::vector<std::uint32_t> rest(ids.begin(), ids.end());
    std::sort(rest.begin(), rest.end());
    auto it = std::find(rest.begin(), rest.end(), start);
    if (it == rest.end()) throw ConfigError("chain start " + std::to_string(start) + " is not in the layout");
    rest.erase(it);

    std::vector<std::uint32_t> best;
    double best_len = std::numeric_limits<double>::infinity();
    do {
        double len = 0.0;
        Vec3 prev = layout.by_id(start).position;
        for (auto id : rest) {
            const Vec3& p = layout.by_id(id).position;
            len += (p - prev).norm();
            prev = p;
        }
        if (len < best_len) {
            best_len = len;
            best = rest;
        }
    } while (std::next_permutation(rest.begin(), rest.end()));
    best.insert(best.begin(), start);
    return best;
}

ChainDesign assign_resistances(std::span<const std::uint32_t> order, const NoduleLayout& layout,
                               const FilamentSpec& spec) {
    spec.validate();
    if (order.empty()) throw ChainError("cannot design an empty chain");
    ChainDesign d;
    d.order.assign(order.begin(), order.end());
    d.shell = layout.by_id(order.front()).shell;
    d.cumulative_resistances.push_back(0.0);
    for (std::size_t k = 1; k < order.size(); ++k) {
        const double dist = (layout.by_id(order[k]).position - layout.by_id(order[k - 1]).position).norm();
        if (dist < spec.min_nodule_spacing) {
            throw ChainError("nodules " + std::to_string(order[k - 1]) + " and " + std::to_string(order[k]) + " are " +
                             mm(dist) + " apart; minimum spacing is " + mm(spec.min_nodule_spacing));
        }
        const double r = std::max(dist * spec.resistivity, spec.margin);
        d.segment_resistances.push_back(r);
        d.cumulative_resistances.push_back(d.cumulative_resistances.back() + r);
    }
    d.total_resistance = std::accumulate(d.segment_resistances.begin(), d.segment_resistances.end(), 0.0);
    return d;
}

ChainDesign route_traces(const SkinShell& shell, ChainDesign design, const NoduleLayout& layout,
                         const FilamentSpec& spec) {
    spec.validate();
    if (!(shell.thickness > spec.trace_diameter)) {
        throw ChainError("shell thickness " + mm(shell.thickness) + " leaves no channel for a " +
                         mm(spec.trace_diameter) + " trace");
    }
    const double allowed_drift = std::max(0.5 * (shell.thickness - spec.trace_diameter) - spec.surface_clearance, 0.0);
    if (0.5 * (shell.thickness - spec.trace_diameter) < spec.surface_clearance) {
        design.diagnostics.push_back("shell thickness " + mm(shell.thickness) + " keeps traces only " +
                                     mm(0.5 * (shell.thickness - spec.trace_diameter)) + " from the surfaces");
    }
    const double leg_gap = spec.trace_diameter + spec.surface_clearance;

    const MidSurface mid(shell);
    design.trace_polylines.clear();
    for (std::size_t k = 0; k + 1 < design.order.size(); ++k) {
        const auto from = design.order[k], to = design.order[k + 1];
        const std::string name = "segment " + std::to_string(k) + " (nodules " + std::to_string(from) + " -> " +
                                 std::to_string(to) + ")";
        std::vector<Vec3> base = surface_path(mid, layout.by_id(from).position, layout.by_id(to).position);
        const double base_len = polyline_length(base);
        double target = required_trace_length(design.segment_resistances[k], spec);

        if (target <= base_len * (1.0 + 1e-9)) {
            // The path over the surface already needs at least this much wire.
            design.segment_resistances[k] = std::max(design.segment_resistances[k], base_len * spec.resistivity);
            design.trace_polylines.push_back(std::move(base));
            continue;
        }

        PathFrame frame;
        frame.pts = base;
        frame.arc.assign(base.size(), 0.0);
        for (std::size_t i = 1; i < base.size(); ++i) frame.arc[i] = frame.arc[i - 1] + (base[i] - base[i - 1]).norm();

        // Zig-zag half-width: a quarter of the segment on either side of the path.
        const double corridor = 0.25 * base_len;
        const auto max_teeth = static_cast<std::size_t>(std::max(1.0, std::floor(base_len / (2.0 * leg_gap))));
        auto inside = [&](const std::vector<Vec3>& line) {
            for (const auto& p : line)
                if (mid.closest(p).distance > allowed_drift + 1e-9) return false;
            return true;
        };

        std::optional<std::vector<Vec3>> routed;
        for (std::size_t teeth = 1; teeth <= max_teeth && !routed; ++teeth) {
            const ZigZag z = zigzag(mid, frame, teeth);
            if (polyline_length(z.with_amplitude(corridor)) < target) continue;
            double lo = 0.0, hi = corridor;
            for (int it = 0; it < 80; ++it) {
                const double m = 0.5 * (lo + hi);
                (polyline_length(z.with_amplitude(m)) < target ? lo : hi) = m;
            }
            auto line = z.with_amplitude(hi);
            if (self_clearance(line) < leg_gap || !inside(line)) continue;
            routed = std::move(line);
        }
        if (!routed) {
            throw ChainError(name + " cannot fit " + mm(target) + " of trace inside the shell corridor");
        }
        design.trace_polylines.push_back(std::move(*routed));
    }

    // Segment resistances may have grown; rebuild the running totals.
    design.cumulative_resistances.assign(1, 0.0);
    for (double r : design.segment_resistances)
        design.cumulative_resistances.push_back(design.cumulative_resistances.back() + r);
    design.total_resistance = std::accumulate(design.segment_resistances.begin(), design.segment_resistances.end(), 0.0);

    for (std::size_t i = 0; i < design.trace_polylines.size(); ++i) {
        for (std::size_t j = i + 2; j < design.trace_polylines.size(); ++j) {
            const double d = polyline_distance(design.trace_polylines[i], design.trace_polylines[j]);
            if (d < leg_gap) {
                design.diagnostics.push_back("traces of segments " + std::to_string(i) + " and " + std::to_string(j) +
                                             " come within " + mm(d));
            }
        }
    }
    return design;
}

std::vector<CalibrationBand> expected_rc_table(const ChainDesign& design) {
    std::vector<CalibrationBand> table;
    const auto& cum = design.cumulative_resistances;
    for (std::size_t k = 0; k < design.order.size(); ++k) {
        CalibrationBand band;
        band.nodule_id = design.order[k];
        band.expected_delay = cum[k];
        if (k > 0) band.lower = 0.5 * (cum[k - 1] + cum[k]);
        if (k + 1 < cum.size()) band.upper = 0.5 * (cum[k] + cum[k + 1]);
        table.push_back(band);
    }
    return table;
}

std::vector<ChainDesign> design_chains(std::span<const SkinShell> shells, const NoduleLayout& layout,
                                       const FilamentSpec& spec) {
    std::vector<ChainDesign> chains;
    for (std::uint32_t s = 0; s < shells.size(); ++s) {
        std::vector<std::uint32_t> ids;
        for (const auto& n : layout.nodules)
            if (n.shell == s) ids.push_back(n.id);
        if (ids.empty()) continue;
        const auto start = *std::min_element(ids.begin(), ids.end());
        const auto order = spec.exhaustive_order ? order_chain_exhaustive(layout, ids, start)
                                                 : order_chain(layout, ids, start);
        chains.push_back(route_traces(shells[s], assign_resistances(order, layout, spec), layout, spec));
    }
    return chains;
}

} // namespace tactskin
