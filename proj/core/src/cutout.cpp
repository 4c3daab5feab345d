#include "tactskin/cutout.hpp"

#include "tactskin/error.hpp"

#include <algorithm>
#include <map>

namespace tactskin {

SubMesh make_submesh(std::shared_ptr<const TriMesh> mesh, std::vector<std::uint32_t> parent_faces) {
    SubMesh sub;
    constexpr std::uint32_t kUnset = ~0u;
    std::vector<std::uint32_t> local(mesh->vertex_count(), kUnset);
    sub.faces.reserve(parent_faces.size());
    for (auto pf : parent_faces) {
        Face lf{};
        for (int k = 0; k < 3; ++k) {
            const auto pv = mesh->face(pf)[k];
            if (local[pv] == kUnset) {
                local[pv] = static_cast<std::uint32_t>(sub.parent_vertices.size());
                sub.parent_vertices.push_back(pv);
                sub.positions.push_back(mesh->vertex(pv));
            }
            lf[k] = local[pv];
        }
        sub.faces.push_back(lf);
    }
    sub.parent_faces = std::move(parent_faces);
    sub.parent = std::move(mesh);
    return sub;
}

SubMesh extract_cutout(std::shared_ptr<const TriMesh> mesh, const HeatMap& skin_map, double cutoff_tolerance) {
    skin_map.require_mesh(*mesh);
    std::vector<std::uint32_t> selected;
    for (std::uint32_t f = 0; f < mesh->face_count(); ++f) {
        const auto& face = mesh->face(f);
        if (skin_map.weight(face[0]) > cutoff_tolerance && skin_map.weight(face[1]) > cutoff_tolerance &&
            skin_map.weight(face[2]) > cutoff_tolerance) {
            selected.push_back(f);
        }
    }
    if (selected.empty()) throw GeometryError("cutout empty at this tolerance");
    return make_submesh(std::move(mesh), std::move(selected));
}

std::vector<SubMesh> split_components(const SubMesh& sub) {
    std::unordered_map<std::uint32_t, std::uint32_t> local_of;
    for (std::uint32_t i = 0; i < sub.parent_vertices.size(); ++i) local_of.emplace(sub.parent_vertices[i], i);

    std::vector<SubMesh> out;
    for (const auto& comp : face_components(sub.faces)) {
        std::vector<std::uint32_t> pf;
        pf.reserve(comp.size());
        for (auto lf : comp) pf.push_back(sub.parent_faces[lf]);
        SubMesh part = make_submesh(sub.parent, std::move(pf));
        // Carry over any snapped positions.
        for (std::size_t i = 0; i < part.parent_vertices.size(); ++i) {
            part.positions[i] = sub.positions[local_of.at(part.parent_vertices[i])];
        }
        out.push_back(std::move(part));
    }
    return out;
}

double loop_perimeter(const SubMesh& sub, const BoundaryLoop& loop) {
    double len = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        len += (sub.positions[loop[(i + 1) % loop.size()]] - sub.positions[loop[i]]).norm();
    }
    return len;
}

std::vector<BoundaryLoop> boundary_loops(const SubMesh& sub) {
    // Directed boundary half-edges, keyed by their tail vertex.
    std::map<std::uint32_t, std::vector<std::uint32_t>> outgoing;
    std::size_t halfedge_count = 0;
    for (const auto& [edge, incident] : edge_faces(sub.faces)) {
        if (incident.size() > 2) {
            throw GeometryError("non-manifold edge (" + std::to_string(sub.parent_vertices[edge.a]) + ", " +
                                std::to_string(sub.parent_vertices[edge.b]) + ") has " +
                                std::to_string(incident.size()) + " incident faces");
        }
        if (incident.size() != 1) continue;
        const auto& f = sub.faces[incident[0]];
        for (int k = 0; k < 3; ++k) {
            const auto u = f[k], v = f[(k + 1) % 3];
            if (EdgeKey::make(u, v) == edge) {
                outgoing[u].push_back(v);
                ++halfedge_count;
            }
        }
    }
    for (auto& [u, targets] : outgoing) std::sort(targets.begin(), targets.end());

    std::vector<BoundaryLoop> loops;
    std::size_t consumed = 0;
    while (consumed < halfedge_count) {
        auto start_it = std::find_if(outgoing.begin(), outgoing.end(), [](const auto& kv) { return !kv.second.empty(); });
        BoundaryLoop loop;
        const std::uint32_t start = start_it->first;
        std::uint32_t cur = start;
        do {
            auto& targets = outgoing[cur];
            if (targets.empty()) {
                throw GeometryError("open boundary chain at vertex " + std::to_string(sub.parent_vertices[cur]));
            }
            const auto next = targets.front();
            targets.erase(targets.begin());
            ++consumed;
            loop.push_back(cur);
            cur = next;
        } while (cur != start);
        // Rotate so the lowest local id leads; makes output independent of map order.
        std::rotate(loop.begin(), std::min_element(loop.begin(), loop.end()), loop.end());
        loops.push_back(std::move(loop));
    }

    std::vector<std::pair<double, BoundaryLoop>> keyed;
    for (auto& l : loops) keyed.emplace_back(loop_perimeter(sub, l), std::move(l));
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second.front() < y.second.front();
    });
    loops.clear();
    for (auto& [len, l] : keyed) loops.push_back(std::move(l));
    return loops;
}

} // namespace tactskin
