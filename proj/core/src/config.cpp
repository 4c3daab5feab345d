#include "tactskin/config.hpp"

#include "tactskin/error.hpp"
#include "tactskin/mesh_io.hpp"

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <initializer_list>

namespace tactskin {

namespace {

void check_keys(const YAML::Node& node, std::string_view section, std::initializer_list<std::string_view> allowed) {
    if (!node.IsMap()) throw ConfigError("'" + std::string(section) + "' must be a mapping");
    std::vector<std::string> seen;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw ConfigError("duplicate key '" + key + "' in '" + std::string(section) + "'");
        }
        seen.push_back(key);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in '" + std::string(section) + "'");
        }
    }
}

template <class T>
void read(const YAML::Node& node, std::string_view key, T& out, std::string_view section) {
    const auto child = node[std::string(key)];
    if (!child) return;
    try {
        out = child.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("'" + std::string(section) + "." + std::string(key) + "' has the wrong type");
    }
}

Vec3 read_vec3(const YAML::Node& node, std::string_view what) {
    if (!node.IsSequence() || node.size() != 3) throw ConfigError("'" + std::string(what) + "' must be [x, y, z]");
    try {
        return {node[0].as<double>(), node[1].as<double>(), node[2].as<double>()};
    } catch (const YAML::Exception&) {
        throw ConfigError("'" + std::string(what) + "' must contain numbers");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

BrushStroke brush_from_yaml(const YAML::Node& n, std::string_view section) {
    check_keys(n, section, {"shape", "center", "radius", "half_extents", "strength", "falloff"});
    BrushStroke b;
    std::string shape = "sphere", falloff = "smooth";
    read(n, "shape", shape, section);
    read(n, "falloff", falloff, section);
    try {
        b.shape = brush_shape_from_string(shape);
        b.falloff = falloff_from_string(falloff);
    } catch (const Error& e) {
        throw ConfigError(std::string(section) + ": " + e.what());
    }
    if (n["center"]) b.center = read_vec3(n["center"], std::string(section) + ".center");
    if (n["half_extents"]) b.half_extents = read_vec3(n["half_extents"], std::string(section) + ".half_extents");
    read(n, "radius", b.radius, section);
    read(n, "strength", b.strength, section);
    return b;
}

MapSource map_from_yaml(const YAML::Node& n, std::string_view section, const std::filesystem::path& base) {
    MapSource m;
    if (!n) return m;
    check_keys(n, section, {"uniform", "sidecar", "base", "brushes"});
    const int kinds = (n["uniform"] ? 1 : 0) + (n["sidecar"] ? 1 : 0) + (n["brushes"] ? 1 : 0);
    if (kinds > 1) throw ConfigError("'" + std::string(section) + "' must use exactly one of uniform, sidecar, brushes");
    if (n["sidecar"]) {
        m.kind = MapSource::Kind::sidecar;
        std::string p;
        read(n, "sidecar", p, section);
        m.sidecar = resolve(base, p);
    } else if (n["brushes"]) {
        m.kind = MapSource::Kind::brushes;
        m.base = 0.0;
        read(n, "base", m.base, section);
        const auto list = n["brushes"];
        if (!list.IsSequence()) throw ConfigError("'" + std::string(section) + ".brushes' must be a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            m.strokes.push_back(brush_from_yaml(list[i], std::string(section) + ".brushes[" + std::to_string(i) + "]"));
        }
    } else {
        m.kind = MapSource::Kind::uniform;
        read(n, "uniform", m.base, section);
    }
    return m;
}

} // namespace

void PipelineConfig::validate() const {
    if (mesh_path.empty()) throw ConfigError("mesh.path is required");
    if (!(scale > 0.0)) throw ConfigError("mesh.scale must be positive");
    if (!(weld_tolerance >= 0.0)) throw ConfigError("mesh.weld_tolerance must be nonnegative");
    for (const auto* m : {&skin_map, &density_map}) {
        if (!(m->base >= 0.0 && m->base <= 1.0)) throw ConfigError("map base value must be in [0, 1]");
    }
    if (!(cutout.cutoff_tolerance >= 0.0 && cutout.cutoff_tolerance < 1.0)) {
        throw ConfigError("cutoff_tolerance must be in [0, 1)");
    }
    if (!(cutout.resample_ratio > 0.0 && cutout.resample_ratio <= 1.0)) throw ConfigError("resample_ratio must be in (0, 1]");
    if (!(cutout.thickness > 0.0)) throw ConfigError("thickness must be positive");
    if (!(cutout.clearance >= 0.0)) throw ConfigError("clearance must be nonnegative");
    sampling.validate();
    if (heuristic.filter_order < 1) throw ConfigError("heuristic.filter_order must be at least 1");
    if (!(optimized_fill_tolerance >= 0.0 && optimized_fill_tolerance <= 1.0)) {
        throw ConfigError("heuristic.fill_tolerance must be in [0, 1]");
    }
    if (rounds < 1) throw ConfigError("heuristic.rounds must be at least 1");
    if (rounds > 1 && contact.log) throw ConfigError("heuristic.rounds > 1 needs a sweep contact source");
    if (contact.log && contact.sweep) throw ConfigError("contact: give either log or sweep, not both");
    if (contact.sweep) contact.sweep->validate();
    filament.validate();
}

PipelineConfig parse_config(std::string_view yaml, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("config must be a mapping");
    check_keys(root, "config", {"name", "seed", "mesh", "skin_map", "density_map", "cutout", "sampling", "heuristic",
                                "filament", "contact", "output", "allow_broken"});

    PipelineConfig c;
    read(root, "name", c.name, "config");
    read(root, "seed", c.sampling.seed, "config");
    read(root, "allow_broken", c.allow_broken, "config");

    if (const auto m = root["mesh"]) {
        check_keys(m, "mesh", {"path", "scale", "weld_tolerance"});
        std::string p;
        read(m, "path", p, "mesh");
        if (!p.empty()) c.mesh_path = resolve(base_dir, p);
        read(m, "scale", c.scale, "mesh");
        read(m, "weld_tolerance", c.weld_tolerance, "mesh");
    }
    c.skin_map = map_from_yaml(root["skin_map"], "skin_map", base_dir);
    c.density_map = map_from_yaml(root["density_map"], "density_map", base_dir);

    if (const auto n = root["cutout"]) {
        check_keys(n, "cutout", {"cutoff_tolerance", "resample_ratio", "thickness", "clearance"});
        read(n, "cutoff_tolerance", c.cutout.cutoff_tolerance, "cutout");
        read(n, "resample_ratio", c.cutout.resample_ratio, "cutout");
        read(n, "thickness", c.cutout.thickness, "cutout");
        read(n, "clearance", c.cutout.clearance, "cutout");
    }
    if (const auto n = root["sampling"]) {
        check_keys(n, "sampling", {"minimum_distribution_distance", "fill_tolerance", "radius_factor", "max_samples"});
        read(n, "minimum_distribution_distance", c.sampling.d_min, "sampling");
        read(n, "fill_tolerance", c.sampling.fill_tolerance, "sampling");
        read(n, "radius_factor", c.sampling.radius_factor, "sampling");
        read(n, "max_samples", c.sampling.max_samples, "sampling");
    }
    if (const auto n = root["heuristic"]) {
        check_keys(n, "heuristic", {"alpha", "filter_order", "normalize_counts", "fill_tolerance", "rounds", "onsets"});
        if (n["alpha"] && !(n["alpha"].IsScalar() && n["alpha"].as<std::string>() == "auto")) {
            read(n, "alpha", c.heuristic.alpha, "heuristic");
            if (!(c.heuristic.alpha > 0.0)) throw ConfigError("heuristic.alpha must be positive or 'auto'");
        }
        read(n, "filter_order", c.heuristic.filter_order, "heuristic");
        read(n, "normalize_counts", c.heuristic.normalize_counts, "heuristic");
        read(n, "fill_tolerance", c.optimized_fill_tolerance, "heuristic");
        read(n, "rounds", c.rounds, "heuristic");
        read(n, "onsets", c.contact.onsets, "heuristic");
    }
    if (const auto n = root["filament"]) {
        check_keys(n, "filament", {"resistivity", "min_nodule_spacing", "margin", "trace_diameter", "surface_clearance",
                                   "exhaustive_order"});
        read(n, "resistivity", c.filament.resistivity, "filament");
        read(n, "min_nodule_spacing", c.filament.min_nodule_spacing, "filament");
        read(n, "margin", c.filament.margin, "filament");
        read(n, "trace_diameter", c.filament.trace_diameter, "filament");
        read(n, "surface_clearance", c.filament.surface_clearance, "filament");
        read(n, "exhaustive_order", c.filament.exhaustive_order, "filament");
    }
    if (const auto n = root["contact"]) {
        check_keys(n, "contact", {"log", "sweep"});
        if (n["log"]) {
            std::string p;
            read(n, "log", p, "contact");
            c.contact.log = resolve(base_dir, p);
        }
        if (const auto s = n["sweep"]) {
            check_keys(s, "contact.sweep", {"collider_radius", "step", "waypoints"});
            SweepTrajectory t;
            read(s, "collider_radius", t.collider_radius, "contact.sweep");
            read(s, "step", t.step, "contact.sweep");
            const auto wp = s["waypoints"];
            if (!wp || !wp.IsSequence()) throw ConfigError("'contact.sweep.waypoints' must be a list of [x, y, z]");
            for (std::size_t i = 0; i < wp.size(); ++i) t.waypoints.push_back(read_vec3(wp[i], "contact.sweep.waypoints"));
            c.contact.sweep = std::move(t);
        }
    }
    if (const auto n = root["output"]) {
        check_keys(n, "output", {"directory"});
        std::string p;
        read(n, "directory", p, "output");
        if (!p.empty()) c.output_dir = resolve(base_dir, p);
    } else {
        c.output_dir = resolve(base_dir, "out");
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path.parent_path());
}

HeatMap realize_map(const MapSource& source, const TriMesh& mesh, MapRole role) {
    switch (source.kind) {
    case MapSource::Kind::uniform: return HeatMap::uniform(mesh, role, source.base);
    case MapSource::Kind::sidecar: {
        HeatMap m = load_sidecar(source.sidecar);
        m.require_mesh(mesh);
        if (m.role() != role) {
            throw ConfigError("sidecar " + source.sidecar.string() + " holds a " + std::string(to_string(m.role())) +
                              " map, expected " + std::string(to_string(role)));
        }
        return m;
    }
    case MapSource::Kind::brushes: {
        HeatMap m = HeatMap::uniform(mesh, role, source.base);
        for (const auto& s : source.strokes) m = apply_brush(mesh, m, s);
        return m;
    }
    }
    throw ConfigError("unknown map source");
}

BrushStroke brush_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("brush stroke is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("brush stroke must be a JSON object");
    BrushStroke b;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "shape") {
                b.shape = brush_shape_from_string(value.get<std::string>());
            } else if (key == "falloff") {
                b.falloff = falloff_from_string(value.get<std::string>());
            } else if (key == "center" || key == "half_extents") {
                const auto v = value.get<std::vector<double>>();
                if (v.size() != 3) throw ConfigError("'" + key + "' must be [x, y, z]");
                (key == "center" ? b.center : b.half_extents) = Vec3(v[0], v[1], v[2]);
            } else if (key == "radius") {
                b.radius = value.get<double>();
            } else if (key == "strength") {
                b.strength = value.get<double>();
            } else if (key != "role") {
                throw ConfigError("unknown brush key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("brush stroke has a field of the wrong type: ") + e.what());
    }
    return b;
}

} // namespace tactskin
