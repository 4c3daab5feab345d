#include "tactskin/export.hpp"

#include "tactskin/error.hpp"
#include "tactskin/mesh_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace tactskin {

namespace {

// Closed cylinder from a to b. The ring runs counter-clockwise seen from b,
// so all faces point outward.
void append_cylinder(std::vector<Vec3>& verts, std::vector<Face>& faces, const Vec3& a, const Vec3& b, double radius,
                     int segments) {
    const Vec3 axis = b - a;
    if (axis.norm() <= 0.0 || !(radius > 0.0)) return;
    const Vec3 u = axis.normalized();
    const Vec3 e1 = u.unitOrthogonal();
    const Vec3 e2 = u.cross(e1);
    const auto base = static_cast<std::uint32_t>(verts.size());
    const auto s = static_cast<std::uint32_t>(segments);
    for (int end = 0; end < 2; ++end) {
        const Vec3& c = end == 0 ? a : b;
        for (int i = 0; i < segments; ++i) {
            const double t = 2.0 * std::numbers::pi * double(i) / double(segments);
            verts.push_back(c + radius * (std::cos(t) * e1 + std::sin(t) * e2));
        }
    }
    verts.push_back(a);
    verts.push_back(b);
    const std::uint32_t ca = base + 2 * s, cb = base + 2 * s + 1;
    for (std::uint32_t i = 0; i < s; ++i) {
        const std::uint32_t j = (i + 1) % s;
        const std::uint32_t bi = base + i, bj = base + j, ti = base + s + i, tj = base + s + j;
        faces.push_back({bi, bj, tj});
        faces.push_back({bi, tj, ti});
        faces.push_back({cb, ti, tj});
        faces.push_back({ca, bj, bi});
    }
}

} // namespace

TriMesh merge_meshes(std::span<const TriMesh> meshes) {
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    for (const auto& m : meshes) {
        const auto off = static_cast<std::uint32_t>(verts.size());
        verts.insert(verts.end(), m.vertices().begin(), m.vertices().end());
        for (const auto& [a, b, c] : m.faces()) faces.push_back({a + off, b + off, c + off});
    }
    return TriMesh(std::move(verts), std::move(faces));
}

TriMesh nodule_cylinder(const Nodule& nodule, double depth, int segments) {
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    append_cylinder(verts, faces, nodule.position - depth * nodule.normal, nodule.position, nodule.radius, segments);
    return TriMesh(std::move(verts), std::move(faces));
}

TriMesh trace_tube(std::span<const Vec3> polyline, double diameter, int sides) {
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i)
        append_cylinder(verts, faces, polyline[i], polyline[i + 1], 0.5 * diameter, sides);
    return TriMesh(std::move(verts), std::move(faces));
}

TriMesh body_mesh(std::span<const SkinShell> shells) {
    std::vector<TriMesh> parts;
    for (const auto& s : shells) parts.push_back(s.solid);
    return merge_meshes(parts);
}

TriMesh conductive_mesh(std::span<const SkinShell> shells, const NoduleLayout& layout,
                        std::span<const ChainDesign> chains, double trace_diameter) {
    std::vector<TriMesh> parts;
    for (const auto& n : layout.nodules) {
        const double depth = n.shell < shells.size() ? shells[n.shell].thickness : 0.0;
        parts.push_back(nodule_cylinder(n, depth));
    }
    for (const auto& chain : chains)
        for (const auto& line : chain.trace_polylines) parts.push_back(trace_tube(line, trace_diameter));
    return merge_meshes(parts);
}

Characterization characterize(std::string_view manifest_json, std::string_view body_stl) {
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(manifest_json);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    Characterization c;
    try {
        c.unit = m.value("unit", std::string());
        const auto& nodules = m.at("nodules");
        c.nodules = nodules.size();
        double sum = 0.0;
        for (const auto& n : nodules) sum += n.at("radius").get<double>();
        c.average_radius_mm = c.nodules ? 1000.0 * sum / double(c.nodules) : 0.0;
        c.total_resistance_kohm = m.at("total_resistance_kohm").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest is missing fields: ") + e.what());
    }
    const TriMesh body = parse_mesh(body_stl, MeshFormat::stl).mesh;
    c.volume_cm3 = signed_volume(body) * 1e6;
    return c;
}

std::string format_characterization(const Characterization& c) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os << "Unit: " << c.unit << "\n";
    os << "Nodules: " << c.nodules << "\n";
    os.precision(2);
    os << "Volume (cm^3): " << c.volume_cm3 << "\n";
    os.precision(1);
    os << "Total R (kOhm): " << c.total_resistance_kohm << "\n";
    os.precision(2);
    os << "Radius Avg. (mm): " << c.average_radius_mm << "\n";
    return os.str();
}

} // namespace tactskin
