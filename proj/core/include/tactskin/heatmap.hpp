#pragma once

#include "tactskin/mesh.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tactskin {

enum class MapRole { skin, density };

std::string_view to_string(MapRole role);
MapRole map_role_from_string(std::string_view s);

/// Per-vertex weights in [0, 1], bound to a mesh by its checksum.
class HeatMap {
public:
    HeatMap() = default;
    HeatMap(std::string mesh_sha256, MapRole role, std::vector<double> weights);

    static HeatMap uniform(const TriMesh& mesh, MapRole role, double value);

    const std::string& mesh_sha256() const noexcept { return mesh_sha256_; }
    MapRole role() const noexcept { return role_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double weight(std::uint32_t vertex) const { return weights_[vertex]; }
    std::size_t size() const noexcept { return weights_.size(); }

    /// Throws ConfigError if the map was painted on a different mesh.
    void require_mesh(const TriMesh& mesh) const;

    friend bool operator==(const HeatMap&, const HeatMap&) = default;

private:
    std::string mesh_sha256_;
    MapRole role_ = MapRole::skin;
    std::vector<double> weights_;
};

enum class BrushShape { sphere, box };
enum class Falloff { constant, linear, smooth };

std::string_view to_string(BrushShape shape);
std::string_view to_string(Falloff falloff);
BrushShape brush_shape_from_string(std::string_view s);
Falloff falloff_from_string(std::string_view s);

struct BrushStroke {
    BrushShape shape = BrushShape::sphere;
    Vec3 center = Vec3::Zero();
    /// Sphere radius (m); ignored for boxes.
    double radius = 0.0;
    /// Box half-extents (m); ignored for spheres.
    Vec3 half_extents = Vec3::Zero();
    /// Signed: positive paints, negative erases.
    double strength = 1.0;
    Falloff falloff = Falloff::smooth;
};

/// Falloff profile over normalized distance t in [0, 1].
double falloff_value(Falloff falloff, double t);

/// Normalized distance of `p` inside the brush volume, or a value > 1 when
/// outside. Euclidean for spheres, Chebyshev over half-extents for boxes.
double brush_distance(const BrushStroke& stroke, const Vec3& p);

HeatMap apply_brush(const TriMesh& mesh, const HeatMap& map, const BrushStroke& stroke);

HeatMap set_weights(const HeatMap& map, std::span<const std::pair<std::uint32_t, double>> explicit_weights);

/// Barycentric interpolation of the three corner weights of a face.
double weight_at_point(const TriMesh& mesh, const HeatMap& map, std::size_t face, const std::array<double, 3>& bary);

/// Same interpolation given the corner vertex ids directly.
double interpolate_weight(const HeatMap& map, const Face& corners, const std::array<double, 3>& bary);

// Sidecar text format:
//   # mesh_sha256:<hex> role:<skin|density> n:<count>
//   <index> <weight>
//   ...
std::string to_sidecar(const HeatMap& map);
HeatMap parse_sidecar(std::string_view text);
HeatMap load_sidecar(const std::filesystem::path& path);
void save_sidecar(const std::filesystem::path& path, const HeatMap& map);

} // namespace tactskin
