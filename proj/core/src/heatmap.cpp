#include "tactskin/heatmap.hpp"

#include "tactskin/error.hpp"
#include "tactskin/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

namespace tactskin {

std::string_view to_string(MapRole role) { return role == MapRole::skin ? "skin" : "density"; }

MapRole map_role_from_string(std::string_view s) {
    if (s == "skin") return MapRole::skin;
    if (s == "density") return MapRole::density;
    throw ParseError("unknown heat map role '" + std::string(s) + "'");
}

std::string_view to_string(BrushShape shape) { return shape == BrushShape::sphere ? "sphere" : "box"; }

std::string_view to_string(Falloff falloff) {
    switch (falloff) {
    case Falloff::constant: return "constant";
    case Falloff::linear: return "linear";
    case Falloff::smooth: return "smooth";
    }
    return "?";
}

BrushShape brush_shape_from_string(std::string_view s) {
    if (s == "sphere") return BrushShape::sphere;
    if (s == "box") return BrushShape::box;
    throw ParseError("unknown brush shape '" + std::string(s) + "'");
}

Falloff falloff_from_string(std::string_view s) {
    if (s == "constant") return Falloff::constant;
    if (s == "linear") return Falloff::linear;
    if (s == "smooth") return Falloff::smooth;
    throw ParseError("unknown falloff '" + std::string(s) + "'");
}

HeatMap::HeatMap(std::string mesh_sha256, MapRole role, std::vector<double> weights)
    : mesh_sha256_(std::move(mesh_sha256)), role_(role), weights_(std::move(weights)) {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] >= 0.0 && weights_[i] <= 1.0)) {
            throw ConfigError("heat map weight " + std::to_string(weights_[i]) + " at vertex " + std::to_string(i) +
                              " is outside [0, 1]");
        }
    }
}

HeatMap HeatMap::uniform(const TriMesh& mesh, MapRole role, double value) {
    return HeatMap(mesh.sha256(), role, std::vector<double>(mesh.vertex_count(), value));
}

void HeatMap::require_mesh(const TriMesh& mesh) const {
    if (mesh_sha256_ != mesh.sha256() || weights_.size() != mesh.vertex_count()) {
        throw ConfigError(std::string(to_string(role_)) + " heat map checksum mismatch: map was made for mesh " +
                          mesh_sha256_.substr(0, 12) + ", got " + mesh.sha256().substr(0, 12));
    }
}

double falloff_value(Falloff falloff, double t) {
    t = std::clamp(t, 0.0, 1.0);
    switch (falloff) {
    case Falloff::constant: return 1.0;
    case Falloff::linear: return 1.0 - t;
    case Falloff::smooth: return 1.0 - t * t * (3.0 - 2.0 * t);
    }
    return 1.0;
}

double brush_distance(const BrushStroke& stroke, const Vec3& p) {
    const Vec3 d = p - stroke.center;
    if (stroke.shape == BrushShape::sphere) return d.norm() / stroke.radius;
    return (d.cwiseAbs().array() / stroke.half_extents.array()).maxCoeff();
}

HeatMap apply_brush(const TriMesh& mesh, const HeatMap& map, const BrushStroke& stroke) {
    map.require_mesh(mesh);
    if (stroke.shape == BrushShape::sphere ? !(stroke.radius > 0.0) : !(stroke.half_extents.minCoeff() > 0.0)) {
        throw ConfigError("brush extent must be positive");
    }
    std::vector<double> w = map.weights();
    if (stroke.strength != 0.0) {
        for (std::uint32_t i = 0; i < w.size(); ++i) {
            const double t = brush_distance(stroke, mesh.vertex(i));
            if (t > 1.0) continue;
            w[i] = std::clamp(w[i] + stroke.strength * falloff_value(stroke.falloff, t), 0.0, 1.0);
        }
    }
    return HeatMap(map.mesh_sha256(), map.role(), std::move(w));
}

HeatMap set_weights(const HeatMap& map, std::span<const std::pair<std::uint32_t, double>> explicit_weights) {
    std::vector<double> w = map.weights();
    for (const auto& [index, value] : explicit_weights) {
        if (index >= w.size()) {
            throw ConfigError("vertex index " + std::to_string(index) + " out of range (" + std::to_string(w.size()) +
                              " vertices)");
        }
        if (!(value >= 0.0 && value <= 1.0)) {
            throw ConfigError("weight " + std::to_string(value) + " for vertex " + std::to_string(index) +
                              " is outside [0, 1]");
        }
        w[index] = value;
    }
    return HeatMap(map.mesh_sha256(), map.role(), std::move(w));
}

double interpolate_weight(const HeatMap& map, const Face& corners, const std::array<double, 3>& bary) {
    double lo = 1.0, hi = 0.0, value = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double wk = map.weight(corners[k]);
        lo = std::min(lo, wk);
        hi = std::max(hi, wk);
        value += bary[k] * wk;
    }
    return std::clamp(value, lo, hi);
}

double weight_at_point(const TriMesh& mesh, const HeatMap& map, std::size_t face, const std::array<double, 3>& bary) {
    if (face >= mesh.face_count()) throw ConfigError("face index " + std::to_string(face) + " out of range");
    if (map.size() != mesh.vertex_count()) throw ConfigError("heat map does not match mesh vertex count");
    for (double b : bary) {
        if (!(b >= 0.0)) throw ConfigError("barycentric coordinates must be nonnegative");
    }
    if (std::abs(bary[0] + bary[1] + bary[2] - 1.0) > 1e-9) {
        throw ConfigError("barycentric coordinates must sum to 1");
    }
    return interpolate_weight(map, mesh.face(face), bary);
}

std::string to_sidecar(const HeatMap& map) {
    std::string out = "# mesh_sha256:" + map.mesh_sha256() + " role:" + std::string(to_string(map.role())) +
                      " n:" + std::to_string(map.size()) + "\n";
    char buf[64];
    for (std::size_t i = 0; i < map.size(); ++i) {
        out += std::to_string(i);
        out.push_back(' ');
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), map.weights()[i]);
        out.append(buf, end);
        out.push_back('\n');
    }
    return out;
}

HeatMap parse_sidecar(std::string_view text) {
    auto eol = text.find('\n');
    std::string_view header = text.substr(0, eol);
    if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
    if (!header.starts_with("# ")) throw ParseError("heat map sidecar: missing header line");

    std::string sha;
    std::optional<MapRole> role;
    std::optional<std::size_t> count;
    std::size_t pos = 2;
    while (pos < header.size()) {
        auto end = header.find(' ', pos);
        if (end == std::string_view::npos) end = header.size();
        auto field = header.substr(pos, end - pos);
        auto colon = field.find(':');
        if (colon != std::string_view::npos) {
            auto key = field.substr(0, colon);
            auto value = field.substr(colon + 1);
            if (key == "mesh_sha256") sha = std::string(value);
            else if (key == "role") role = map_role_from_string(value);
            else if (key == "n") {
                std::size_t n = 0;
                auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
                if (ec != std::errc{} || p != value.data() + value.size()) throw ParseError("heat map sidecar: bad n");
                count = n;
            }
        }
        pos = end + 1;
    }
    if (sha.empty() || !role || !count) throw ParseError("heat map sidecar: header needs mesh_sha256, role and n");

    std::vector<double> weights(*count, 0.0);
    std::vector<bool> seen(*count, false);
    std::size_t line_no = 1;
    std::size_t cursor = eol == std::string_view::npos ? text.size() : eol + 1;
    while (cursor < text.size()) {
        auto end = text.find('\n', cursor);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(cursor, end - cursor);
        cursor = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        auto sp = line.find(' ');
        if (sp == std::string_view::npos) {
            throw ParseError("heat map sidecar line " + std::to_string(line_no) + ": expected '<index> <weight>'");
        }
        std::size_t index = 0;
        double w = 0.0;
        auto a = std::from_chars(line.data(), line.data() + sp, index);
        auto wtok = line.substr(sp + 1);
        auto b = std::from_chars(wtok.data(), wtok.data() + wtok.size(), w);
        if (a.ec != std::errc{} || a.ptr != line.data() + sp || b.ec != std::errc{} ||
            b.ptr != wtok.data() + wtok.size()) {
            throw ParseError("heat map sidecar line " + std::to_string(line_no) + ": malformed entry");
        }
        if (index >= *count) {
            throw ParseError("heat map sidecar line " + std::to_string(line_no) + ": index out of range");
        }
        if (seen[index]) {
            throw ParseError("heat map sidecar line " + std::to_string(line_no) + ": duplicate index " +
                             std::to_string(index));
        }
        seen[index] = true;
        weights[index] = w;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw ParseError("heat map sidecar: not every vertex has a weight");
    }
    try {
        return HeatMap(std::move(sha), *role, std::move(weights));
    } catch (const ConfigError& e) {
        throw ParseError(std::string("heat map sidecar: ") + e.what());
    }
}

HeatMap load_sidecar(const std::filesystem::path& path) {
    try {
        return parse_sidecar(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_sidecar(const std::filesystem::path& path, const HeatMap& map) { write_file(path, to_sidecar(map)); }

} // namespace tactskin
