#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tactskin {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::uint32_t, 3>;

/// Faces below this area (m^2) are treated as degenerate.
inline constexpr double kDegenerateArea = 1e-12;

/// Default vertex weld tolerance in meters.
inline constexpr double kDefaultWeldTolerance = 1e-6;

/// Indexed triangle mesh of a robot link, in meters.
///
/// Immutable after construction; the checksum is computed once up front so
/// heat maps and manifests can be bound to the exact geometry they were made
/// for. Construction validates face indices but does not reject degenerate
/// faces (validate_mesh reports those; the loaders strip them).
class TriMesh {
public:
    TriMesh() = default;
    TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

    const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    const std::vector<Face>& faces() const noexcept { return faces_; }
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t face_count() const noexcept { return faces_.size(); }
    bool empty() const noexcept { return faces_.empty(); }

    const Vec3& vertex(std::uint32_t i) const { return vertices_[i]; }
    const Face& face(std::size_t f) const { return faces_[f]; }

    /// Cross product of the two face edges (length = 2 * area).
    Vec3 face_cross(std::size_t f) const;
    double face_area(std::size_t f) const { return 0.5 * face_cross(f).norm(); }
    Vec3 face_centroid(std::size_t f) const;

    /// SHA-256 over the little-endian vertex doubles and face indices.
    const std::string& sha256() const noexcept { return sha256_; }

private:
    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::string sha256_;
};

struct MeshReport {
    bool is_manifold = true;
    std::size_t boundary_edge_count = 0;
    std::size_t nonmanifold_edge_count = 0;
    std::size_t duplicate_vertex_count = 0;
    std::size_t degenerate_face_count = 0;
    std::size_t fan_triangulated_face_count = 0;
};

/// Undirected edge key with the smaller index first.
struct EdgeKey {
    std::uint32_t a;
    std::uint32_t b;

    static EdgeKey make(std::uint32_t u, std::uint32_t v) { return u < v ? EdgeKey{u, v} : EdgeKey{v, u}; }
    friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
    friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& e) const noexcept {
        return std::hash<std::uint64_t>{}((std::uint64_t(e.a) << 32) | e.b);
    }
};

/// Faces incident to every undirected edge.
using EdgeFaceMap = std::unordered_map<EdgeKey, std::vector<std::uint32_t>, EdgeKeyHash>;

EdgeFaceMap edge_faces(std::span<const Face> faces);

MeshReport validate_mesh(const TriMesh& mesh, double weld_tolerance = kDefaultWeldTolerance);

/// Area-weighted unit vertex normals. Throws GeometryError naming the first
/// vertex with no incident face.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

/// Signed volume enclosed by a closed, outward-oriented mesh.
double signed_volume(const TriMesh& mesh);
double surface_area(const TriMesh& mesh);

/// For each point, the index of the first earlier point within `tolerance`
/// (itself when none). Grid-hashed; order-dependent by construction.
std::vector<std::uint32_t> weld_representatives(std::span<const Vec3> points, double tolerance);

/// Groups faces into edge-connected components, ordered by their lowest face.
std::vector<std::vector<std::uint32_t>> face_components(std::span<const Face> faces);

} // namespace tactskin
