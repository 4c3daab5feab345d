#include "tactskin/sampler.hpp"

#include "tactskin/checksum.hpp"
#include "tactskin/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <unordered_map>

namespace tactskin {

namespace {

// Portable [0, 1) double from the top 53 bits, so layouts do not depend on
// the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

struct CellKey {
    std::int64_t x, y, z;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& c) const noexcept {
        std::uint64_t h = std::uint64_t(c.x) * 0x9E3779B97F4A7C15ull;
        h ^= std::uint64_t(c.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
        h ^= std::uint64_t(c.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

// Walker/Vose alias table: O(1) draws of an index with the given weights.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& weights) : prob_(weights.size()), alias_(weights.size()) {
        const std::size_t n = weights.size();
        double total = 0.0;
        for (double w : weights) total += w;
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * double(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const auto s = small.back(), l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
        for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
    }

    /// `u` in [0, 1): the integer part of u * n picks a column, the fraction flips its coin.
    std::uint32_t pick(double u) const {
        const double x = u * double(prob_.size());
        const auto col = std::min(static_cast<std::size_t>(x), prob_.size() - 1);
        return x - double(col) < prob_[col] ? static_cast<std::uint32_t>(col) : alias_[col];
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

class PointHash {
public:
    explicit PointHash(double cell) : inv_(1.0 / cell) {}

    void insert(const Vec3& p) {
        points_.push_back(p);
        cells_[key(p)].push_back(static_cast<std::uint32_t>(points_.size() - 1));
    }

    /// True when some stored point lies strictly closer than r to p.
    bool any_within(const Vec3& p, double r) const {
        const double r2 = r * r;
        const auto reach = static_cast<std::int64_t>(std::ceil(r * inv_));
        const double side = 2.0 * double(reach) + 1.0;
        if (side * side * side > double(points_.size())) {
            for (const auto& q : points_)
                if ((q - p).squaredNorm() < r2) return true;
            return false;
        }
        const CellKey c = key(p);
        for (auto x = c.x - reach; x <= c.x + reach; ++x)
            for (auto y = c.y - reach; y <= c.y + reach; ++y)
                for (auto z = c.z - reach; z <= c.z + reach; ++z) {
                    auto it = cells_.find({x, y, z});
                    if (it == cells_.end()) continue;
                    for (auto i : it->second)
                        if ((points_[i] - p).squaredNorm() < r2) return true;
                }
        return false;
    }

private:
    CellKey key(const Vec3& p) const {
        return {static_cast<std::int64_t>(std::floor(p.x() * inv_)), static_cast<std::int64_t>(std::floor(p.y() * inv_)),
                static_cast<std::int64_t>(std::floor(p.z() * inv_))};
    }

    double inv_;
    std::vector<Vec3> points_;
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> cells_;
};

std::vector<Nodule> sample_one(const SkinShell& shell, const HeatMap& density_map, const SamplingParams& params,
                               std::uint32_t shell_index, std::uint32_t first_id, std::uint64_t seed) {
    if (shell.faces.empty()) throw GeometryError("cannot sample an empty shell");
    if (density_map.role() != MapRole::density) throw ConfigError("sampling needs a density map");
    if (density_map.mesh_sha256() != shell.parent_sha256) {
        throw ConfigError("density map checksum " + density_map.mesh_sha256() + " does not match shell parent mesh " +
                          shell.parent_sha256);
    }

    std::vector<double> areas;
    areas.reserve(shell.faces.size());
    double total = 0.0;
    for (const auto& [a, b, c] : shell.faces) {
        areas.push_back(0.5 * (shell.outer[b] - shell.outer[a]).cross(shell.outer[c] - shell.outer[a]).norm());
        total += areas.back();
    }
    if (!(total > 0.0)) throw GeometryError("shell outer surface has zero area");
    const AliasTable faces(areas);

    std::mt19937_64 rng(seed);
    PointHash hash(params.d_min);
    std::vector<Nodule> out;
    const std::size_t budget = kRejectionBudgetFactor * params.max_samples;
    std::size_t rejections = 0;
    while (out.size() < params.max_samples && rejections < budget) {
        const std::uint32_t f = faces.pick(uniform01(rng));
        const double r1 = std::sqrt(uniform01(rng));
        const double r2 = uniform01(rng);
        const std::array<double, 3> bary{1.0 - r1, r1 * (1.0 - r2), r1 * r2};

        const auto& [a, b, c] = shell.faces[f];
        const Face parent{shell.parent_vertices[a], shell.parent_vertices[b], shell.parent_vertices[c]};
        const double w = interpolate_weight(density_map, parent, bary);
        const double dist = local_min_distance(w, params);
        if (!std::isfinite(dist)) {
            ++rejections;
            continue;
        }
        const Vec3 p = bary[0] * shell.outer[a] + bary[1] * shell.outer[b] + bary[2] * shell.outer[c];
        if (hash.any_within(p, dist)) {
            ++rejections;
            continue;
        }
        rejections = 0;
        hash.insert(p);

        Nodule n;
        n.id = first_id + static_cast<std::uint32_t>(out.size());
        n.position = p;
        n.normal = (bary[0] * shell.normals[a] + bary[1] * shell.normals[b] + bary[2] * shell.normals[c]).normalized();
        n.local_weight = w;
        n.shell = shell_index;
        n.face = f;
        n.bary = bary;
        out.push_back(n);
    }
    return out;
}

std::uint64_t shell_seed(std::uint64_t seed, std::uint32_t shell_index) {
    return shell_index == 0 ? seed : seed ^ (0x9E3779B97F4A7C15ull * shell_index);
}

void append_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64(std::string& buf, double v) { append_u64(buf, std::bit_cast<std::uint64_t>(v)); }

} // namespace

void SamplingParams::validate() const {
    if (!(d_min > 0.0)) throw ConfigError("minimum_distribution_distance must be positive");
    if (!(fill_tolerance >= 0.0 && fill_tolerance <= 1.0)) throw ConfigError("fill_tolerance must be in [0, 1]");
    if (!(radius_factor >= 0.0 && radius_factor <= 1.0)) throw ConfigError("radius_factor must be in [0, 1]");
    if (max_samples < 1) throw ConfigError("max_samples must be at least 1");
}

double local_min_distance(double weight, const SamplingParams& params) {
    if (weight < params.fill_tolerance) return std::numeric_limits<double>::infinity();
    return params.d_min / std::max(weight, kWeightFloor);
}

const Nodule& NoduleLayout::by_id(std::uint32_t id) const {
    // Ids are dense and in order for sampled layouts; fall back to a scan.
    if (id < nodules.size() && nodules[id].id == id) return nodules[id];
    for (const auto& n : nodules)
        if (n.id == id) return n;
    throw ConfigError("unknown nodule id " + std::to_string(id));
}

std::vector<double> NoduleLayout::local_distances() const {
    std::vector<double> out;
    out.reserve(nodules.size());
    for (const auto& n : nodules) out.push_back(local_min_distance(n.local_weight, params));
    return out;
}

NoduleLayout sample_nodules(const SkinShell& shell, const HeatMap& density_map, const SamplingParams& params,
                            std::uint32_t shell_index, std::uint32_t first_id) {
    params.validate();
    NoduleLayout layout;
    layout.params = params;
    layout.nodules = sample_one(shell, density_map, params, shell_index, first_id, shell_seed(params.seed, shell_index));
    if (layout.nodules.empty()) throw GeometryError("density map empty above fill tolerance");
    return layout;
}

NoduleLayout sample_shells(std::span<const SkinShell> shells, const HeatMap& density_map, const SamplingParams& params) {
    params.validate();
    NoduleLayout layout;
    layout.params = params;
    for (std::uint32_t s = 0; s < shells.size(); ++s) {
        auto part = sample_one(shells[s], density_map, params, s, static_cast<std::uint32_t>(layout.nodules.size()),
                               shell_seed(params.seed, s));
        layout.nodules.insert(layout.nodules.end(), part.begin(), part.end());
    }
    if (layout.nodules.empty()) throw GeometryError("density map empty above fill tolerance");
    return layout;
}

NoduleLayout assign_radii(NoduleLayout layout, const SamplingParams& params) {
    if (layout.empty()) throw GeometryError("cannot assign radii to an empty layout");
    auto& nodules = layout.nodules;
    for (std::size_t i = 0; i < nodules.size(); ++i) {
        double radius = params.radius_factor * local_min_distance(nodules[i].local_weight, params);
        std::size_t nearest = i;
        double nearest_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nodules.size(); ++j) {
            if (j == i) continue;
            const double d = (nodules[i].position - nodules[j].position).norm();
            if (d < nearest_d) {
                nearest_d = d;
                nearest = j;
            }
        }
        if (nearest != i) radius = std::min(radius, 0.5 * nearest_d - kRadiusGap);
        if (!(radius > 0.0)) {
            if (nearest != i && 0.5 * nearest_d - kRadiusGap <= 0.0) {
                throw GeometryError("nodules " + std::to_string(nodules[i].id) + " and " +
                                    std::to_string(nodules[nearest].id) + " are too close for any radius");
            }
            throw GeometryError("nodule " + std::to_string(nodules[i].id) + " gets a zero radius (radius_factor " +
                                std::to_string(params.radius_factor) + ")");
        }
        nodules[i].radius = radius;
    }
    return layout;
}

std::string layout_sha256(const NoduleLayout& layout) {
    std::string buf;
    buf.reserve(layout.size() * 100 + 8);
    append_u64(buf, layout.size());
    for (const auto& n : layout.nodules) {
        append_u64(buf, n.id);
        append_u64(buf, n.shell);
        for (int k = 0; k < 3; ++k) append_f64(buf, n.position[k]);
        for (int k = 0; k < 3; ++k) append_f64(buf, n.normal[k]);
        append_f64(buf, n.radius);
        append_f64(buf, n.local_weight);
    }
    return sha256_hex(buf);
}

} // namespace tactskin
