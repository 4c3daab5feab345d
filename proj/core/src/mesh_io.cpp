#include "tactskin/mesh_io.hpp"

#include "tactskin/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace tactskin {

namespace {

struct RawMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::size_t fan_triangulated = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line_no, std::string_view what) {
    T value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid " + std::string(what) + " '" +
                         std::string(tok) + "'");
    }
    return value;
}

template <typename Fn>
void for_each_line(std::string_view data, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= data.size()) {
        std::size_t end = data.find('\n', pos);
        if (end == std::string_view::npos) end = data.size();
        std::string_view line = data.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (!fn(line, line_no)) return;
        pos = end + 1;
    }
}

void add_polygon(RawMesh& raw, const std::vector<std::uint32_t>& poly, std::size_t line_no) {
    if (poly.size() < 3) {
        throw ParseError("line " + std::to_string(line_no) + ": face with fewer than 3 vertices");
    }
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        raw.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
    if (poly.size() > 3) ++raw.fan_triangulated;
}

RawMesh parse_obj(std::string_view data) {
    RawMesh raw;
    for_each_line(data, [&](std::string_view line, std::size_t line_no) {
        auto tok = split_ws(line);
        if (tok.empty() || tok[0].starts_with('#')) return true;
        if (tok[0] == "v") {
            if (tok.size() < 4) throw ParseError("line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
            raw.vertices.emplace_back(parse_number<double>(tok[1], line_no, "coordinate"),
                                      parse_number<double>(tok[2], line_no, "coordinate"),
                                      parse_number<double>(tok[3], line_no, "coordinate"));
        } else if (tok[0] == "f") {
            std::vector<std::uint32_t> poly;
            for (std::size_t k = 1; k < tok.size(); ++k) {
                auto ref = tok[k].substr(0, tok[k].find('/'));
                auto idx = parse_number<long long>(ref, line_no, "face index");
                const auto n = static_cast<long long>(raw.vertices.size());
                long long resolved = idx > 0 ? idx - 1 : n + idx;
                if (idx == 0 || resolved < 0 || resolved >= n) {
                    throw ParseError("line " + std::to_string(line_no) + ": face index " + std::string(ref) +
                                     " out of range");
                }
                poly.push_back(static_cast<std::uint32_t>(resolved));
            }
            add_polygon(raw, poly, line_no);
        }
        // vn, vt, o, g, s, usemtl, mtllib: ignored.
        return true;
    });
    return raw;
}

RawMesh parse_stl_ascii(std::string_view data) {
    RawMesh raw;
    std::vector<Vec3> facet;
    for_each_line(data, [&](std::string_view line, std::size_t line_no) {
        auto tok = split_ws(line);
        if (tok.empty()) return true;
        if (tok[0] == "vertex") {
            if (tok.size() < 4) throw ParseError("line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
            facet.emplace_back(parse_number<double>(tok[1], line_no, "coordinate"),
                               parse_number<double>(tok[2], line_no, "coordinate"),
                               parse_number<double>(tok[3], line_no, "coordinate"));
        } else if (tok[0] == "endloop") {
            if (facet.size() < 3) throw ParseError("line " + std::to_string(line_no) + ": facet with < 3 vertices");
            std::vector<std::uint32_t> poly;
            for (const auto& p : facet) {
                poly.push_back(static_cast<std::uint32_t>(raw.vertices.size()));
                raw.vertices.push_back(p);
            }
            add_polygon(raw, poly, line_no);
            facet.clear();
        }
        return true;
    });
    return raw;
}

float read_f32(const char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::bit_cast<float>(bits);
}

std::uint32_t read_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

RawMesh parse_stl_binary(std::string_view data) {
    if (data.size() < 84) throw ParseError("binary STL shorter than its 84-byte header");
    const std::uint32_t count = read_u32(data.data() + 80);
    if (data.size() < 84 + std::size_t(count) * 50) {
        throw ParseError("binary STL declares " + std::to_string(count) + " triangles but is truncated");
    }
    RawMesh raw;
    raw.vertices.reserve(std::size_t(count) * 3);
    raw.faces.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
        const char* rec = data.data() + 84 + std::size_t(t) * 50;
        for (int v = 0; v < 3; ++v) {
            const char* p = rec + 12 + v * 12;
            raw.vertices.emplace_back(read_f32(p), read_f32(p + 4), read_f32(p + 8));
        }
        raw.faces.push_back({3 * t, 3 * t + 1, 3 * t + 2});
    }
    return raw;
}

RawMesh parse_stl(std::string_view data) {
    if (data.size() >= 84) {
        const std::uint32_t count = read_u32(data.data() + 80);
        if (84 + std::size_t(count) * 50 == data.size()) return parse_stl_binary(data);
    }
    auto first = data.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && data.substr(first).starts_with("solid")) return parse_stl_ascii(data);
    return parse_stl_binary(data);
}

RawMesh parse_ply(std::string_view data) {
    RawMesh raw;
    enum class Section { header, vertices, faces, done } section = Section::header;
    std::size_t vertex_count = 0, face_count = 0, faces_read = 0;
    std::vector<std::string> vertex_props;
    std::string current_element;
    bool saw_magic = false;
    int ix = -1, iy = -1, iz = -1;

    for_each_line(data, [&](std::string_view line, std::size_t line_no) {
        auto tok = split_ws(line);
        switch (section) {
        case Section::header:
            if (!saw_magic) {
                if (tok.empty() || tok[0] != "ply") throw ParseError("missing 'ply' magic");
                saw_magic = true;
                return true;
            }
            if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") return true;
            if (tok[0] == "format") {
                if (tok.size() < 2 || tok[1] != "ascii") throw ParseError("only ASCII PLY is supported");
            } else if (tok[0] == "element" && tok.size() >= 3) {
                current_element = std::string(tok[1]);
                auto n = parse_number<std::size_t>(tok[2], line_no, "element count");
                if (current_element == "vertex") vertex_count = n;
                if (current_element == "face") face_count = n;
            } else if (tok[0] == "property" && current_element == "vertex" && tok.size() >= 3) {
                vertex_props.emplace_back(tok.back());
            } else if (tok[0] == "end_header") {
                for (int k = 0; k < static_cast<int>(vertex_props.size()); ++k) {
                    if (vertex_props[k] == "x") ix = k;
                    if (vertex_props[k] == "y") iy = k;
                    if (vertex_props[k] == "z") iz = k;
                }
                if (ix < 0 || iy < 0 || iz < 0) throw ParseError("PLY vertex element lacks x/y/z");
                section = vertex_count > 0 ? Section::vertices : (face_count > 0 ? Section::faces : Section::done);
            }
            return true;
        case Section::vertices:
            if (tok.empty()) return true;
            if (tok.size() < vertex_props.size()) {
                throw ParseError("line " + std::to_string(line_no) + ": vertex row has too few properties");
            }
            raw.vertices.emplace_back(parse_number<double>(tok[ix], line_no, "coordinate"),
                                      parse_number<double>(tok[iy], line_no, "coordinate"),
                                      parse_number<double>(tok[iz], line_no, "coordinate"));
            if (raw.vertices.size() == vertex_count) section = face_count > 0 ? Section::faces : Section::done;
            return true;
        case Section::faces: {
            if (tok.empty()) return true;
            auto n = parse_number<std::size_t>(tok[0], line_no, "face size");
            if (tok.size() < n + 1) throw ParseError("line " + std::to_string(line_no) + ": face row truncated");
            std::vector<std::uint32_t> poly;
            for (std::size_t k = 0; k < n; ++k) {
                auto idx = parse_number<std::uint32_t>(tok[k + 1], line_no, "face index");
                if (idx >= vertex_count) {
                    throw ParseError("line " + std::to_string(line_no) + ": face index out of range");
                }
                poly.push_back(idx);
            }
            add_polygon(raw, poly, line_no);
            if (++faces_read == face_count) section = Section::done;
            return true;
        }
        case Section::done:
            return false;
        }
        return true;
    });
    if (!saw_magic) throw ParseError("missing 'ply' magic");
    if (raw.vertices.size() != vertex_count) throw ParseError("PLY ends before all vertices were read");
    if (faces_read != face_count) throw ParseError("PLY ends before all faces were read");
    return raw;
}

LoadResult weld(RawMesh raw, const LoadOptions& options) {
    LoadResult result;
    result.authored_vertex_count = raw.vertices.size();
    result.fan_triangulated_faces = raw.fan_triangulated;
    if (raw.faces.empty() || raw.vertices.empty()) throw ParseError("mesh is empty");

    for (auto& v : raw.vertices) v *= options.scale;
    const auto rep = weld_representatives(raw.vertices, options.weld_tolerance);

    std::vector<Face> faces;
    faces.reserve(raw.faces.size());
    for (const auto& f : raw.faces) {
        Face g{rep[f[0]], rep[f[1]], rep[f[2]]};
        const Vec3 cross = (raw.vertices[g[1]] - raw.vertices[g[0]]).cross(raw.vertices[g[2]] - raw.vertices[g[0]]);
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2] || 0.5 * cross.norm() < kDegenerateArea) {
            ++result.dropped_degenerate_faces;
            continue;
        }
        faces.push_back(g);
    }
    if (faces.empty()) throw ParseError("mesh is empty after dropping degenerate faces");

    // Compact to used vertices, numbered in first-use order of the representatives.
    constexpr std::uint32_t kUnset = ~0u;
    std::vector<std::uint32_t> remap(raw.vertices.size(), kUnset);
    std::vector<Vec3> vertices;
    for (std::uint32_t i = 0; i < raw.vertices.size(); ++i) {
        if (rep[i] == i) {
            remap[i] = static_cast<std::uint32_t>(vertices.size());
            vertices.push_back(raw.vertices[i]);
        }
    }
    std::vector<bool> used(vertices.size(), false);
    for (auto& f : faces) {
        for (auto& i : f) {
            i = remap[i];
            used[i] = true;
        }
    }
    if (std::find(used.begin(), used.end(), false) != used.end()) {
        std::vector<std::uint32_t> second(vertices.size(), kUnset);
        std::vector<Vec3> kept;
        for (std::uint32_t i = 0; i < vertices.size(); ++i) {
            if (used[i]) {
                second[i] = static_cast<std::uint32_t>(kept.size());
                kept.push_back(vertices[i]);
            } else {
                ++result.dropped_unused_vertices;
            }
        }
        for (auto& f : faces) {
            for (auto& i : f) i = second[i];
        }
        vertices = std::move(kept);
    }
    result.mesh = TriMesh(std::move(vertices), std::move(faces));
    return result;
}

void put_f32(std::string& out, float f) {
    auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

} // namespace

MeshFormat mesh_format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") return MeshFormat::obj;
    if (ext == ".stl") return MeshFormat::stl;
    if (ext == ".ply") return MeshFormat::ply;
    throw ParseError("unrecognized mesh extension '" + ext + "'");
}

std::string_view to_string(MeshFormat format) {
    switch (format) {
    case MeshFormat::obj: return "obj";
    case MeshFormat::stl: return "stl";
    case MeshFormat::ply: return "ply";
    }
    return "?";
}

LoadResult parse_mesh(std::string_view data, MeshFormat format, const LoadOptions& options) {
    if (data.empty()) throw ParseError("mesh file is empty");
    switch (format) {
    case MeshFormat::obj: return weld(parse_obj(data), options);
    case MeshFormat::stl: return weld(parse_stl(data), options);
    case MeshFormat::ply: return weld(parse_ply(data), options);
    }
    throw ParseError("unknown mesh format");
}

LoadResult load_mesh(const std::filesystem::path& path, MeshFormat format, const LoadOptions& options) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const std::exception& e) {
        throw ParseError(e.what());
    }
    try {
        return parse_mesh(bytes, format, options);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string to_obj(const TriMesh& mesh) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& v : mesh.vertices()) os << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : mesh.faces()) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    return os.str();
}

std::string to_binary_stl(const TriMesh& mesh, std::string_view header) {
    std::string out(80, '\0');
    std::memcpy(out.data(), header.data(), std::min<std::size_t>(header.size(), 80));
    const auto count = static_cast<std::uint32_t>(mesh.face_count());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((count >> (8 * i)) & 0xff));
    out.reserve(84 + std::size_t(count) * 50);
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        Vec3 n = mesh.face_cross(f);
        const double len = n.norm();
        if (len > 0) n /= len;
        for (int k = 0; k < 3; ++k) put_f32(out, static_cast<float>(n[k]));
        for (auto i : mesh.face(f)) {
            for (int k = 0; k < 3; ++k) put_f32(out, static_cast<float>(mesh.vertex(i)[k]));
        }
        out.push_back('\0');
        out.push_back('\0');
    }
    return out;
}

void save_mesh(const std::filesystem::path& path, const TriMesh& mesh, MeshFormat format) {
    switch (format) {
    case MeshFormat::obj: write_file(path, to_obj(mesh)); return;
    case MeshFormat::stl: write_file(path, to_binary_stl(mesh)); return;
    case MeshFormat::ply: break;
    }
    throw ParseError("writing PLY is not supported");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace tactskin
