#include "tactskin/pipeline.hpp"

#include "tactskin/checksum.hpp"
#include "tactskin/export.hpp"
#include "tactskin/mesh_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>

#ifndef TACTSKIN_VERSION
#define TACTSKIN_VERSION "0.0.0"
#endif

namespace tactskin {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kStlHeaderBody = "tactskin body";
constexpr std::string_view kStlHeaderConductive = "tactskin conductive";

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("manifest vector must have 3 entries");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(); }

Json params_json(const PipelineConfig& c, const std::optional<ContactSource>& contact) {
    Json p;
    p["cutout"] = {{"cutoff_tolerance", c.cutout.cutoff_tolerance},
                   {"resample_ratio", c.cutout.resample_ratio},
                   {"thickness", c.cutout.thickness},
                   {"clearance", c.cutout.clearance}};
    p["sampling"] = {{"minimum_distribution_distance", c.sampling.d_min},
                     {"fill_tolerance", c.sampling.fill_tolerance},
                     {"radius_factor", c.sampling.radius_factor},
                     {"max_samples", c.sampling.max_samples},
                     {"seed", c.sampling.seed}};
    Json h;
    h["alpha"] = c.heuristic.alpha > 0.0 ? Json(c.heuristic.alpha) : Json("auto");
    h["filter_order"] = c.heuristic.filter_order;
    h["normalize_counts"] = c.heuristic.normalize_counts;
    h["fill_tolerance"] = c.optimized_fill_tolerance;
    h["rounds"] = c.rounds;
    p["heuristic"] = std::move(h);
    p["filament"] = {{"resistivity_ohm_per_mm", c.filament.resistivity},
                     {"min_nodule_spacing", c.filament.min_nodule_spacing},
                     {"margin_kohm", c.filament.margin},
                     {"trace_diameter", c.filament.trace_diameter},
                     {"surface_clearance", c.filament.surface_clearance},
                     {"exhaustive_order", c.filament.exhaustive_order}};
    Json src;
    if (!contact) {
        src["kind"] = "none";
    } else if (contact->log_text) {
        src["kind"] = "log";
        src["sha256"] = sha256_hex(*contact->log_text);
        src["onsets"] = contact->onsets;
    } else {
        src["kind"] = "sweep";
        src["collider_radius"] = contact->sweep->collider_radius;
        src["step"] = contact->sweep->step;
        Json wp = Json::array();
        for (const auto& w : contact->sweep->waypoints) wp.push_back(vec_json(w));
        src["waypoints"] = std::move(wp);
        src["onsets"] = contact->onsets;
    }
    p["contact"] = std::move(src);
    return p;
}

Json optimization_json(const RoundResult& r) {
    Json rounds = Json::array();
    for (const auto& rep : r.reports) {
        Json j;
        j["alpha"] = rep.alpha;
        j["nodules_before"] = rep.nodules_before;
        j["nodules_after"] = rep.nodules_after;
        j["contacted_nodules"] = rep.contacted_nodules;
        j["near_contact_before"] = rep.near_contact_before;
        j["near_contact_after"] = rep.near_contact_after;
        j["warnings"] = rep.warnings;
        rounds.push_back(std::move(j));
    }
    Json out;
    out["rounds"] = std::move(rounds);
    out["density_map_sha256"] = sha256_hex(to_sidecar(r.density_map));
    return out;
}

std::string manifest_json(const PipelineConfig& c, const TriMesh& mesh, const ArtifactSet& a,
                          const std::optional<ContactSource>& contact) {
    Json m;
    m["format"] = "tactskin-manifest/1";
    m["unit"] = c.name;
    m["tool_version"] = tool_version();
    m["mesh_sha256"] = mesh.sha256();
    m["layout_sha256"] = layout_sha256(a.layout);
    m["parameters"] = params_json(c, contact);

    Json shells = Json::array();
    for (std::size_t s = 0; s < a.shells.size(); ++s) {
        shells.push_back({{"index", s},
                          {"faces", a.shell_status[s].faces},
                          {"volume_cm3", a.shell_status[s].volume * 1e6},
                          {"watertight", a.shell_status[s].watertight},
                          {"self_intersections", a.shell_status[s].self_intersections}});
    }
    m["shells"] = std::move(shells);

    std::map<std::uint32_t, double> cumulative;
    for (const auto& ch : a.chains)
        for (std::size_t k = 0; k < ch.order.size(); ++k) cumulative[ch.order[k]] = ch.cumulative_resistances[k];

    Json nodules = Json::array();
    for (const auto& n : a.layout.nodules) {
        Json j;
        j["id"] = n.id;
        j["shell"] = n.shell;
        j["position"] = vec_json(n.position);
        j["normal"] = vec_json(n.normal);
        j["radius"] = n.radius;
        j["local_weight"] = n.local_weight;
        j["cumulative_resistance_kohm"] = cumulative.contains(n.id) ? Json(cumulative[n.id]) : Json();
        nodules.push_back(std::move(j));
    }
    m["nodules"] = std::move(nodules);

    Json chains = Json::array();
    double total = 0.0;
    for (const auto& ch : a.chains) {
        Json j;
        j["shell"] = ch.shell;
        j["order"] = ch.order;
        j["segment_resistances_kohm"] = ch.segment_resistances;
        j["cumulative_resistances_kohm"] = ch.cumulative_resistances;
        j["total_resistance_kohm"] = ch.total_resistance;
        Json cal = Json::array();
        for (const auto& b : expected_rc_table(ch)) {
            cal.push_back({{"nodule", b.nodule_id},
                           {"expected_delay", b.expected_delay},
                           {"lower", finite_or_null(b.lower)},
                           {"upper", finite_or_null(b.upper)}});
        }
        j["calibration"] = std::move(cal);
        Json traces = Json::array();
        for (const auto& line : ch.trace_polylines) {
            Json pts = Json::array();
            for (const auto& p : line) pts.push_back(vec_json(p));
            traces.push_back(std::move(pts));
        }
        j["traces"] = std::move(traces);
        chains.push_back(std::move(j));
        total += ch.total_resistance;
    }
    m["chains"] = std::move(chains);
    m["total_resistance_kohm"] = total;
    if (a.optimization) m["optimization"] = optimization_json(*a.optimization);
    return m.dump(2) + "\n";
}

std::string report_json(const PipelineConfig& c, const ArtifactSet& a) {
    Json r;
    r["unit"] = c.name;
    Json shells = Json::array();
    for (std::size_t s = 0; s < a.shell_status.size(); ++s) {
        const auto& st = a.shell_status[s];
        shells.push_back({{"index", s},
                          {"faces", st.faces},
                          {"volume_cm3", st.volume * 1e6},
                          {"watertight", st.watertight},
                          {"self_intersections", st.self_intersections}});
    }
    r["shells"] = std::move(shells);
    r["nodules_initial"] = a.initial_layout.size();
    r["nodules"] = a.layout.size();
    double total = 0.0;
    for (const auto& ch : a.chains) total += ch.total_resistance;
    r["total_resistance_kohm"] = total;
    if (a.optimization) r["optimization"] = optimization_json(*a.optimization);
    r["warnings"] = a.warnings;
    return r.dump(2) + "\n";
}

void build_shell_stage(const PipelineInputs& inputs, const PipelineConfig& config, ArtifactSet& a) {
    in_stage("skin-cutout", [&] {
        inputs.skin_map.require_mesh(*inputs.mesh);
        ShellBuild build = build_shells(inputs.mesh, inputs.skin_map, config.cutout);
        a.warnings.insert(a.warnings.end(), build.warnings.begin(), build.warnings.end());
        for (std::size_t s = 0; s < build.shells.size(); ++s) {
            const auto& shell = build.shells[s];
            ShellStatus st;
            st.faces = shell.solid.face_count();
            st.volume = shell.volume;
            const MeshReport rep = validate_mesh(shell.solid);
            st.watertight = rep.is_manifold && rep.boundary_edge_count == 0;
            const auto hits = detect_self_intersections(shell);
            st.self_intersections = hits.size();
            if (!hits.empty()) {
                const std::string what = "shell " + std::to_string(s) + " intersects itself at " +
                                         std::to_string(hits.size()) + " triangle pairs (first: faces " +
                                         std::to_string(hits.front().first) + " and " +
                                         std::to_string(hits.front().second) + ")";
                if (!config.allow_broken) throw GeometryError(what + "; reduce the thickness or pass --allow-broken");
                a.warnings.push_back(what);
            }
            a.shell_status.push_back(st);
        }
        a.shells = std::move(build.shells);
        return 0;
    });
}

void finish(const PipelineInputs& inputs, const PipelineConfig& config, const std::optional<ContactSource>& contact,
            ArtifactSet& a) {
    in_stage("rc-chain-designer", [&] {
        a.chains = design_chains(a.shells, a.layout, config.filament);
        for (const auto& ch : a.chains)
            for (const auto& d : ch.diagnostics) a.warnings.push_back("chain " + std::to_string(ch.shell) + ": " + d);
        return 0;
    });
    in_stage("export", [&] {
        a.body_stl = to_binary_stl(body_mesh(a.shells), kStlHeaderBody);
        a.conductive_stl =
            to_binary_stl(conductive_mesh(a.shells, a.layout, a.chains, config.filament.trace_diameter), kStlHeaderConductive);
        if (a.optimization) a.optimized_sidecar = to_sidecar(a.optimization->density_map);
        a.manifest_json = manifest_json(config, *inputs.mesh, a, contact);
        a.report_json = report_json(config, a);
        return 0;
    });
}

void optimize_stage(const PipelineInputs& inputs, const PipelineConfig& config, const ContactSource& source,
                    ArtifactSet& a) {
    in_stage("contact-optimizer", [&] {
        RoundParams rp;
        rp.heuristic = config.heuristic;
        rp.sampling = config.sampling;
        rp.sampling.fill_tolerance = config.optimized_fill_tolerance;
        rp.rounds = config.rounds;
        RoundResult r = optimize_round(*inputs.mesh, a.shells, a.layout, source, rp);
        for (const auto& rep : r.reports) a.warnings.insert(a.warnings.end(), rep.warnings.begin(), rep.warnings.end());
        a.layout = r.layout;
        a.optimization = std::move(r);
        return 0;
    });
}

} // namespace

std::string tool_version() { return TACTSKIN_VERSION; }

PipelineInputs load_inputs(const PipelineConfig& config) {
    PipelineInputs in;
    in_stage("mesh-core", [&] {
        LoadOptions opts;
        opts.scale = config.scale;
        opts.weld_tolerance = config.weld_tolerance;
        in.mesh = std::make_shared<const TriMesh>(
            load_mesh(config.mesh_path, mesh_format_from_path(config.mesh_path), opts).mesh);
        return 0;
    });
    in_stage("heatmap", [&] {
        in.skin_map = realize_map(config.skin_map, *in.mesh, MapRole::skin);
        in.density_map = realize_map(config.density_map, *in.mesh, MapRole::density);
        return 0;
    });
    return in;
}

std::optional<ContactSource> config_contact_source(const PipelineConfig& config) {
    if (config.contact.empty()) return std::nullopt;
    ContactSource src;
    src.onsets = config.contact.onsets;
    if (config.contact.log) {
        src.log_text = in_stage("contact-optimizer", [&] { return read_file(*config.contact.log); });
    } else {
        src.sweep = config.contact.sweep;
    }
    return src;
}

ArtifactSet run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config, const RunOverrides& overrides) {
    in_stage("config", [&] {
        config.validate();
        return 0;
    });
    ArtifactSet a;
    build_shell_stage(inputs, config, a);
    in_stage("nodule-sampler", [&] {
        inputs.density_map.require_mesh(*inputs.mesh);
        a.layout = assign_radii(sample_shells(a.shells, inputs.density_map, config.sampling), config.sampling);
        return 0;
    });
    a.initial_layout = a.layout;

    const auto contact = overrides.contact ? overrides.contact : config_contact_source(config);
    if (contact) optimize_stage(inputs, config, *contact, a);
    finish(inputs, config, contact, a);
    return a;
}

ArtifactSet run_pipeline(const PipelineConfig& config, const RunOverrides& overrides) {
    return run_pipeline(load_inputs(config), config, overrides);
}

ArtifactSet optimize_from_manifest(const PipelineInputs& inputs, const PipelineConfig& config,
                                   std::string_view manifest_text, const ContactSource& source) {
    NoduleLayout layout;
    in_stage("manifest", [&] {
        nlohmann::json m;
        try {
            m = nlohmann::json::parse(manifest_text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
        }
        try {
            const auto mesh_sha = m.at("mesh_sha256").get<std::string>();
            if (mesh_sha != inputs.mesh->sha256()) {
                throw ConfigError("mesh checksum mismatch: manifest has " + mesh_sha + ", input mesh is " +
                                  inputs.mesh->sha256());
            }
            layout.params = config.sampling;
            for (const auto& j : m.at("nodules")) {
                Nodule n;
                n.id = j.at("id").get<std::uint32_t>();
                n.shell = j.at("shell").get<std::uint32_t>();
                n.position = vec_from_json(j.at("position"));
                n.normal = vec_from_json(j.at("normal"));
                n.radius = j.at("radius").get<double>();
                n.local_weight = j.at("local_weight").get<double>();
                layout.nodules.push_back(n);
            }
            const auto layout_sha = m.at("layout_sha256").get<std::string>();
            if (layout_sha != layout_sha256(layout)) {
                throw ConfigError("layout checksum mismatch: the manifest's nodule list was edited");
            }
            // Alpha defaults come from the generating layout's own fill rule.
            const auto& sampling = m.at("parameters").at("sampling");
            layout.params.d_min = sampling.at("minimum_distribution_distance").get<double>();
            layout.params.fill_tolerance = sampling.at("fill_tolerance").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("manifest is missing fields: ") + e.what());
        }
        return 0;
    });

    ArtifactSet a;
    build_shell_stage(inputs, config, a);
    a.layout = layout;
    a.initial_layout = layout;
    optimize_stage(inputs, config, source, a);
    finish(inputs, config, source, a);
    return a;
}

void write_artifacts(const ArtifactSet& a, const std::filesystem::path& dir) {
    in_stage("export", [&] {
        write_file(dir / "body.stl", a.body_stl);
        write_file(dir / "conductive.stl", a.conductive_stl);
        write_file(dir / "manifest.json", a.manifest_json);
        write_file(dir / "report.json", a.report_json);
        if (a.optimized_sidecar) write_file(dir / "density_optimized.txt", *a.optimized_sidecar);
        return 0;
    });
}

} // namespace tactskin
