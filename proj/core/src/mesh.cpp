#include "tactskin/mesh.hpp"

#include "tactskin/checksum.hpp"
#include "tactskin/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

namespace tactskin {

namespace {

void append_le(std::string& out, std::uint64_t bits, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::string canonical_bytes(const std::vector<Vec3>& vertices, const std::vector<Face>& faces) {
    std::string buf;
    buf.reserve(16 + vertices.size() * 24 + faces.size() * 12);
    append_le(buf, vertices.size(), 8);
    append_le(buf, faces.size(), 8);
    for (const auto& v : vertices) {
        for (int k = 0; k < 3; ++k) append_le(buf, std::bit_cast<std::uint64_t>(v[k]), 8);
    }
    for (const auto& f : faces) {
        for (auto i : f) append_le(buf, i, 4);
    }
    return buf;
}

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

} // namespace

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    const auto n = vertices_.size();
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        for (auto i : faces_[f]) {
            if (i >= n) {
                throw GeometryError("face " + std::to_string(f) + " references vertex " + std::to_string(i) +
                                    " but the mesh has " + std::to_string(n) + " vertices");
            }
        }
    }
    sha256_ = sha256_hex(canonical_bytes(vertices_, faces_));
}

Vec3 TriMesh::face_cross(std::size_t f) const {
    const auto& [a, b, c] = faces_[f];
    return (vertices_[b] - vertices_[a]).cross(vertices_[c] - vertices_[a]);
}

Vec3 TriMesh::face_centroid(std::size_t f) const {
    const auto& [a, b, c] = faces_[f];
    return (vertices_[a] + vertices_[b] + vertices_[c]) / 3.0;
}

EdgeFaceMap edge_faces(std::span<const Face> faces) {
    EdgeFaceMap map;
    map.reserve(faces.size() * 2);
    for (std::uint32_t f = 0; f < faces.size(); ++f) {
        for (int k = 0; k < 3; ++k) {
            map[EdgeKey::make(faces[f][k], faces[f][(k + 1) % 3])].push_back(f);
        }
    }
    return map;
}

std::vector<std::uint32_t> weld_representatives(std::span<const Vec3> points, double tolerance) {
    std::vector<std::uint32_t> rep(points.size());
    if (tolerance <= 0) {
        std::iota(rep.begin(), rep.end(), 0u);
        return rep;
    }
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> grid;
    grid.reserve(points.size());
    const double inv = 1.0 / tolerance;
    const double tol2 = tolerance * tolerance;
    auto cell_of = [inv](const Vec3& p) {
        return CellKey{static_cast<std::int64_t>(std::floor(p.x() * inv)),
                       static_cast<std::int64_t>(std::floor(p.y() * inv)),
                       static_cast<std::int64_t>(std::floor(p.z() * inv))};
    };
    for (std::uint32_t i = 0; i < points.size(); ++i) {
        const CellKey c = cell_of(points[i]);
        std::uint32_t found = i;
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
                    if (it == grid.end()) continue;
                    for (auto j : it->second) {
                        if ((points[j] - points[i]).squaredNorm() <= tol2) {
                            found = std::min(found, j);
                        }
                    }
                }
            }
        }
        rep[i] = found;
        if (found == i) grid[c].push_back(i);
    }
    return rep;
}

MeshReport validate_mesh(const TriMesh& mesh, double weld_tolerance) {
    MeshReport report;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const auto& [a, b, c] = mesh.face(f);
        if (a == b || b == c || a == c || mesh.face_area(f) < kDegenerateArea) ++report.degenerate_face_count;
    }
    const auto rep = weld_representatives(mesh.vertices(), weld_tolerance);
    for (std::uint32_t i = 0; i < rep.size(); ++i) {
        if (rep[i] != i) ++report.duplicate_vertex_count;
    }
    for (const auto& [edge, incident] : edge_faces(mesh.faces())) {
        if (incident.size() == 1) {
            ++report.boundary_edge_count;
        } else if (incident.size() > 2) {
            ++report.nonmanifold_edge_count;
        }
    }
    report.is_manifold = report.nonmanifold_edge_count == 0;
    return report;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
    std::vector<Vec3> acc(mesh.vertex_count(), Vec3::Zero());
    std::vector<bool> touched(mesh.vertex_count(), false);
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        // |cross| = 2 * area, so the raw cross product is already area weighted.
        const Vec3 n = mesh.face_cross(f);
        for (auto i : mesh.face(f)) {
            acc[i] += n;
            touched[i] = true;
        }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (!touched[i]) throw GeometryError("vertex " + std::to_string(i) + " has no incident face");
        const double len = acc[i].norm();
        if (len == 0.0) throw GeometryError("vertex " + std::to_string(i) + " has a zero-length normal");
        acc[i] /= len;
    }
    return acc;
}

double signed_volume(const TriMesh& mesh) {
    double v = 0.0;
    for (const auto& [a, b, c] : mesh.faces()) {
        v += mesh.vertex(a).dot(mesh.vertex(b).cross(mesh.vertex(c)));
    }
    return v / 6.0;
}

double surface_area(const TriMesh& mesh) {
    double area = 0.0;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) area += mesh.face_area(f);
    return area;
}

std::vector<std::vector<std::uint32_t>> face_components(std::span<const Face> faces) {
    // Union-find over faces sharing an edge.
    std::vector<std::uint32_t> parent(faces.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& [edge, incident] : edge_faces(faces)) {
        for (std::size_t k = 1; k < incident.size(); ++k) {
            auto ra = find(incident[0]);
            auto rb = find(incident[k]);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
    }
    std::vector<std::vector<std::uint32_t>> out;
    std::unordered_map<std::uint32_t, std::size_t> slot;
    for (std::uint32_t f = 0; f < faces.size(); ++f) {
        auto r = find(f);
        auto [it, inserted] = slot.try_emplace(r, out.size());
        if (inserted) out.emplace_back();
        out[it->second].push_back(f);
    }
    return out;
}

} // namespace tactskin
