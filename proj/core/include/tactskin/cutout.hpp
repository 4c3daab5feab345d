#pragma once

#include "tactskin/heatmap.hpp"
#include "tactskin/mesh.hpp"

#include <memory>
#include <vector>

namespace tactskin {

/// Selected faces of a parent mesh with a compact local vertex numbering.
///
/// `positions` starts as a copy of the parent positions and is the only part
/// that changes afterwards (boundary snapping moves it). Local face k keeps
/// the corner order of parent face `parent_faces[k]`.
struct SubMesh {
    std::shared_ptr<const TriMesh> parent;
    std::vector<std::uint32_t> parent_faces;
    std::vector<std::uint32_t> parent_vertices; // local -> parent
    std::vector<Vec3> positions;                // local
    std::vector<Face> faces;                    // local indices

    std::size_t face_count() const noexcept { return faces.size(); }
    std::size_t vertex_count() const noexcept { return positions.size(); }
    TriMesh to_mesh() const { return TriMesh(positions, faces); }
};

/// A face is kept iff all three corner weights exceed `cutoff_tolerance`.
/// Throws GeometryError("cutout empty at this tolerance") when none are.
SubMesh extract_cutout(std::shared_ptr<const TriMesh> mesh, const HeatMap& skin_map, double cutoff_tolerance);

/// Restricts a parent mesh to the listed faces.
SubMesh make_submesh(std::shared_ptr<const TriMesh> mesh, std::vector<std::uint32_t> parent_faces);

/// Edge-connected components, ordered by lowest parent face.
std::vector<SubMesh> split_components(const SubMesh& sub);

/// Closed loop of local vertex ids, oriented along the face winding.
using BoundaryLoop = std::vector<std::uint32_t>;

/// Closed boundary loops sorted by descending perimeter. Throws
/// GeometryError naming the edge when an edge has three or more faces.
std::vector<BoundaryLoop> boundary_loops(const SubMesh& sub);

double loop_perimeter(const SubMesh& sub, const BoundaryLoop& loop);

} // namespace tactskin
