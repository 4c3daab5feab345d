#pragma once

#include "tactskin/mesh.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace tactskin {

enum class MeshFormat { obj, stl, ply };

MeshFormat mesh_format_from_path(const std::filesystem::path& path);
std::string_view to_string(MeshFormat format);

struct LoadOptions {
    double weld_tolerance = kDefaultWeldTolerance;
    /// Uniform scale applied before welding (STL files carry no units).
    double scale = 1.0;
};

struct LoadResult {
    TriMesh mesh;
    std::size_t authored_vertex_count = 0;
    std::size_t fan_triangulated_faces = 0;
    std::size_t dropped_degenerate_faces = 0;
    std::size_t dropped_unused_vertices = 0;
};

/// Parses an in-memory mesh, welds duplicate vertices and drops faces that
/// collapse. Polygons are fan-triangulated. Throws ParseError on malformed or
/// empty input.
LoadResult parse_mesh(std::string_view data, MeshFormat format, const LoadOptions& options = {});
LoadResult load_mesh(const std::filesystem::path& path, MeshFormat format, const LoadOptions& options = {});

std::string to_obj(const TriMesh& mesh);
/// Little-endian binary STL: 80-byte header, uint32 count, 50-byte records.
std::string to_binary_stl(const TriMesh& mesh, std::string_view header = "tactskin");

void save_mesh(const std::filesystem::path& path, const TriMesh& mesh, MeshFormat format);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace tactskin
