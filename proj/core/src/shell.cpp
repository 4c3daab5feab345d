#include "tactskin/shell.hpp"

#include "tactskin/error.hpp"

#include <unordered_map>

namespace tactskin {

SkinShell extrude(const SubMesh& sub, double thickness, double clearance, std::vector<BoundarySpline> splines) {
    if (!(thickness > 0.0)) throw GeometryError("shell thickness must be positive (got " + std::to_string(thickness) + ")");
    if (!(clearance >= 0.0)) throw GeometryError("clearance offset must be nonnegative");

    const auto parent_normals = vertex_normals(*sub.parent);
    const auto loops = boundary_loops(sub); // throws on non-manifold edges

    SkinShell shell;
    shell.parent_sha256 = sub.parent->sha256();
    shell.thickness = thickness;
    shell.clearance = clearance;
    shell.parent_vertices = sub.parent_vertices;
    shell.faces = sub.faces;
    shell.parent_faces = sub.parent_faces;
    shell.splines = std::move(splines);

    const auto n = static_cast<std::uint32_t>(sub.vertex_count());
    shell.inner.reserve(n);
    shell.outer.reserve(n);
    shell.normals.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const Vec3& nrm = parent_normals[sub.parent_vertices[i]];
        const Vec3 base = sub.positions[i] + clearance * nrm;
        shell.normals.push_back(nrm);
        shell.inner.push_back(base);
        shell.outer.push_back(base + thickness * nrm);
    }

    std::vector<Vec3> verts = shell.inner;
    verts.insert(verts.end(), shell.outer.begin(), shell.outer.end());
    std::vector<Face> faces;
    faces.reserve(sub.face_count() * 2 + 4 * loops.size());
    // Outer keeps the authored winding (facing away from the robot); inner is
    // flipped so the solid is consistently outward oriented.
    for (const auto& [a, b, c] : sub.faces) faces.push_back({a + n, b + n, c + n});
    for (const auto& [a, b, c] : sub.faces) faces.push_back({a, c, b});
    // Side walls: boundary half-edge a->b follows the face winding.
    for (const auto& loop : loops) {
        for (std::size_t k = 0; k < loop.size(); ++k) {
            const auto a = loop[k];
            const auto b = loop[(k + 1) % loop.size()];
            faces.push_back({b + n, a + n, a});
            faces.push_back({b + n, a, b});
        }
    }
    shell.solid = TriMesh(std::move(verts), std::move(faces));
    shell.volume = signed_volume(shell.solid);
    return shell;
}

std::vector<TrianglePair> detect_self_intersections(const SkinShell& shell) {
    return detect_self_intersections(shell.solid);
}

ShellBuild build_shells(std::shared_ptr<const TriMesh> mesh, const HeatMap& skin_map, const CutoutParams& params) {
    ShellBuild out;
    SubMesh cutout = extract_cutout(mesh, skin_map, params.cutoff_tolerance);
    auto components = split_components(cutout);
    if (components.size() > 1) {
        out.warnings.push_back("cutout has " + std::to_string(components.size()) +
                               " connected components; each becomes its own shell");
    }
    for (std::size_t c = 0; c < components.size(); ++c) {
        auto& part = components[c];
        for (const auto& loop : boundary_loops(part)) {
            if (loop.size() < 4) {
                out.warnings.push_back("component " + std::to_string(c) + ": boundary loop of " +
                                       std::to_string(loop.size()) + " vertices left unsmoothed");
            }
        }
        auto splines = smooth_submesh_boundary(part, params.resample_ratio);
        out.shells.push_back(extrude(part, params.thickness, params.clearance, std::move(splines)));
    }
    return out;
}

} // namespace tactskin
