#pragma once

#include "tactskin/cutout.hpp"
#include "tactskin/heatmap.hpp"
#include "tactskin/spline.hpp"

#include <memory>
#include <string>
#include <vector>

namespace tactskin {

/// Solid skin shell: the (snapped) cutout as the inner surface, a copy
/// pushed out along the parent's vertex normals as the outer surface, and
/// side walls stitched along every boundary loop.
struct SkinShell {
    std::string parent_sha256;
    double thickness = 0.0;
    double clearance = 0.0;

    // Per local vertex.
    std::vector<std::uint32_t> parent_vertices;
    std::vector<Vec3> inner;
    std::vector<Vec3> outer;
    std::vector<Vec3> normals;

    // Per local face; same corner order as the parent face.
    std::vector<Face> faces;
    std::vector<std::uint32_t> parent_faces;

    std::vector<BoundarySpline> splines;

    /// Closed solid: inner vertices [0, n), outer vertices [n, 2n).
    TriMesh solid;
    double volume = 0.0;

    std::size_t surface_face_count() const noexcept { return faces.size(); }
    /// Outer surface as its own open mesh.
    TriMesh outer_mesh() const { return TriMesh(outer, faces); }
};

/// Extrudes a cutout outward by `thickness` along the parent mesh's vertex
/// normals. `clearance` first shifts the inner surface outward. Throws
/// GeometryError for thickness <= 0 or a non-manifold cutout.
SkinShell extrude(const SubMesh& sub, double thickness, double clearance = 0.0,
                  std::vector<BoundarySpline> splines = {});

struct TrianglePair {
    std::uint32_t first;
    std::uint32_t second;
    friend bool operator==(const TrianglePair&, const TrianglePair&) = default;
    friend auto operator<=>(const TrianglePair&, const TrianglePair&) = default;
};

/// Orientation-predicate triangle/triangle overlap test. Touching counts;
/// orientations within 1e-10 of the pair scale cubed are treated as zero.
bool triangles_intersect(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                         const Vec3& q0, const Vec3& q1, const Vec3& q2);

/// Intersecting pairs of triangles that share no vertex, sorted. A uniform
/// grid over triangle bounding boxes prunes candidate pairs.
std::vector<TrianglePair> detect_self_intersections(const TriMesh& mesh);
std::vector<TrianglePair> detect_self_intersections(const SkinShell& shell);

struct CutoutParams {
    double cutoff_tolerance = 0.5;
    double resample_ratio = 0.5;
    double thickness = 0.004;
    double clearance = 0.0;
};

struct ShellBuild {
    std::vector<SkinShell> shells;
    std::vector<std::string> warnings;
};

/// extract_cutout -> split_components -> smooth_boundary -> extrude, one shell
/// per connected component in component order.
ShellBuild build_shells(std::shared_ptr<const TriMesh> mesh, const HeatMap& skin_map, const CutoutParams& params);

} // namespace tactskin
