#include "tactskin/service.hpp"

#include "tactskin/checksum.hpp"
#include "tactskin/error.hpp"
#include "tactskin/mesh_io.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <map>
#include <optional>
#include <thread>

namespace tactskin {

namespace {

using Json = nlohmann::ordered_json;

struct Session {
    std::mutex mu;
    PipelineConfig config;
    PipelineInputs inputs;
    std::optional<ArtifactSet> artifacts;
};

struct HttpError {
    int status;
    std::string message;
};

int status_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::parse:
    case ErrorKind::config: return 400;
    case ErrorKind::geometry:
    case ErrorKind::chain:
    case ErrorKind::analysis: return 422;
    }
    return 500;
}

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, Json{{"error", message}});
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(std::string("'") + what + "' must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json parse_body(const httplib::Request& req) {
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        throw HttpError{400, std::string("body is not valid JSON: ") + e.what()};
    }
}

MapRole role_from_path(const std::string& s) {
    try {
        return map_role_from_string(s);
    } catch (const Error&) {
        throw HttpError{404, "unknown heat map role '" + s + "'"};
    }
}

HeatMap& session_map(Session& s, MapRole role) {
    return role == MapRole::skin ? s.inputs.skin_map : s.inputs.density_map;
}

Json preview_json(const ArtifactSet& a) {
    Json j;
    Json shells = Json::array();
    for (std::size_t s = 0; s < a.shells.size(); ++s) {
        const auto& st = a.shell_status[s];
        Json splines = Json::array();
        for (const auto& sp : a.shells[s].splines) {
            Json pts = Json::array();
            for (const auto& p : sp.resampled) pts.push_back(vec_json(p));
            splines.push_back(std::move(pts));
        }
        shells.push_back({{"index", s},
                          {"faces", st.faces},
                          {"volume_cm3", st.volume * 1e6},
                          {"watertight", st.watertight},
                          {"self_intersections", st.self_intersections},
                          {"boundary_splines", std::move(splines)}});
    }
    j["shells"] = std::move(shells);
    Json nodules = Json::array();
    for (const auto& n : a.layout.nodules) {
        nodules.push_back(
            {{"id", n.id}, {"shell", n.shell}, {"position", vec_json(n.position)}, {"normal", vec_json(n.normal)}, {"radius", n.radius}});
    }
    j["nodules"] = std::move(nodules);
    j["warnings"] = a.warnings;
    j["manifest_sha256"] = sha256_hex(a.manifest_json);
    return j;
}

} // namespace

struct Service::Impl {
    ServiceOptions options;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    std::mutex sessions_mu;
    std::map<std::string, std::shared_ptr<Session>> sessions;
    std::atomic<std::uint64_t> next_id{1};

    std::shared_ptr<Session> find(const std::string& id) {
        std::lock_guard lock(sessions_mu);
        auto it = sessions.find(id);
        if (it == sessions.end()) throw HttpError{404, "unknown session '" + id + "'"};
        return it->second;
    }

    std::string add(PipelineConfig config, PipelineInputs inputs) {
        auto s = std::make_shared<Session>();
        s->config = std::move(config);
        s->inputs = std::move(inputs);
        const std::string id = "s" + std::to_string(next_id++);
        std::lock_guard lock(sessions_mu);
        sessions.emplace(id, std::move(s));
        return id;
    }

    std::filesystem::path inside_root(const std::filesystem::path& p) const {
        const auto root = std::filesystem::weakly_canonical(options.asset_root);
        const auto full = std::filesystem::weakly_canonical(p.is_absolute() ? p : options.asset_root / p);
        const auto rel = full.lexically_relative(root);
        if (rel.empty() || *rel.begin() == "..") throw HttpError{400, "path '" + p.string() + "' is outside the asset root"};
        return full;
    }

    // Runs `body` with the session lock held, mapping errors to statuses.
    template <class F>
    void with_session(const httplib::Request& req, httplib::Response& res, F&& body) {
        try {
            auto s = find(req.matches[1].str());
            std::unique_lock lock(s->mu, std::try_to_lock);
            if (!lock.owns_lock()) throw HttpError{409, "session is busy with another request"};
            body(*s);
        } catch (const HttpError& e) {
            send_error(res, e.status, e.message);
        } catch (const Error& e) {
            send_error(res, status_for(e), e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, 400, std::string("malformed payload: ") + e.what());
        }
    }

    void create(const httplib::Request& req, httplib::Response& res) {
        try {
            const auto body = parse_body(req);
            if (!body.is_object() || !body.contains("config")) throw HttpError{400, "body needs a 'config' string"};
            PipelineConfig config;
            PipelineInputs inputs;
            const std::string yaml = body.at("config").get<std::string>();
            if (body.contains("mesh")) {
                // Inline mesh: the config must not carry its own mesh section.
                const auto& m = body.at("mesh");
                const auto format = mesh_format_from_path("x." + m.at("format").get<std::string>());
                config = parse_config(yaml + "\nmesh: {path: inline." + std::string(to_string(format)) + "}\n",
                                      options.asset_root);
                LoadOptions lo;
                lo.weld_tolerance = config.weld_tolerance;
                lo.scale = m.value("scale", 1.0);
                inputs.mesh = std::make_shared<const TriMesh>(parse_mesh(m.at("data").get<std::string>(), format, lo).mesh);
                inputs.skin_map = realize_map(config.skin_map, *inputs.mesh, MapRole::skin);
                inputs.density_map = realize_map(config.density_map, *inputs.mesh, MapRole::density);
            } else {
                config = parse_config(yaml, options.asset_root);
                config.mesh_path = inside_root(config.mesh_path);
                if (config.skin_map.kind == MapSource::Kind::sidecar) config.skin_map.sidecar = inside_root(config.skin_map.sidecar);
                if (config.density_map.kind == MapSource::Kind::sidecar) {
                    config.density_map.sidecar = inside_root(config.density_map.sidecar);
                }
                inputs = load_inputs(config);
            }
            if (config.contact.log) config.contact.log = inside_root(*config.contact.log);
            const auto sha = inputs.mesh->sha256();
            const auto id = add(std::move(config), std::move(inputs));
            send_json(res, 201, Json{{"session", id}, {"mesh_sha256", sha}});
        } catch (const HttpError& e) {
            send_error(res, e.status, e.message);
        } catch (const Error& e) {
            send_error(res, status_for(e), e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, 400, std::string("malformed payload: ") + e.what());
        }
    }

    void routes() {
        server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, Json{{"status", "ok"}, {"version", tool_version()}});
        });
        server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });

        server.Get(R"(/v1/sessions/([^/]+)/mesh)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                const TriMesh& m = *s.inputs.mesh;
                Json verts = Json::array(), faces = Json::array();
                for (const auto& v : m.vertices()) verts.push_back(vec_json(v));
                for (const auto& f : m.faces()) faces.push_back(Json::array({f[0], f[1], f[2]}));
                send_json(res, 200, Json{{"sha256", m.sha256()}, {"vertices", std::move(verts)}, {"faces", std::move(faces)}});
            });
        });

        server.Get(R"(/v1/sessions/([^/]+)/heatmap/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                const MapRole role = role_from_path(req.matches[2].str());
                res.status = 200;
                res.set_content(to_sidecar(session_map(s, role)), "text/plain");
            });
        });

        server.Put(R"(/v1/sessions/([^/]+)/heatmap/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                const MapRole role = role_from_path(req.matches[2].str());
                HeatMap m = parse_sidecar(req.body);
                m.require_mesh(*s.inputs.mesh);
                if (m.role() != role) throw HttpError{400, "payload is a " + std::string(to_string(m.role())) + " map"};
                session_map(s, role) = std::move(m);
                res.status = 200;
                res.set_content(to_sidecar(session_map(s, role)), "text/plain");
            });
        });

        server.Post(R"(/v1/sessions/([^/]+)/brush)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                const auto body = parse_body(req);
                if (!body.is_object()) throw HttpError{400, "brush stroke must be a JSON object"};
                const MapRole role = map_role_from_string(body.value("role", std::string("skin")));
                const BrushStroke stroke = brush_from_json(req.body);
                HeatMap& m = session_map(s, role);
                m = apply_brush(*s.inputs.mesh, m, stroke);
                res.status = 200;
                res.set_content(to_sidecar(m), "text/plain");
            });
        });

        server.Post(R"(/v1/sessions/([^/]+)/generate)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                ArtifactSet a = run_pipeline(s.inputs, s.config);
                send_json(res, 200, preview_json(a));
                s.artifacts = std::move(a);
            });
        });

        server.Post(R"(/v1/sessions/([^/]+)/optimize)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                if (!s.artifacts) throw HttpError{409, "generate a layout before optimizing"};
                const auto body = parse_body(req);
                if (!body.is_object()) throw HttpError{400, "optimize body must be a JSON object"};
                ContactSource src;
                src.onsets = body.value("onsets", false);
                if (body.contains("log")) src.log_text = body.at("log").get<std::string>();
                if (body.contains("sweep")) {
                    const auto& j = body.at("sweep");
                    SweepTrajectory t;
                    t.collider_radius = j.value("collider_radius", t.collider_radius);
                    t.step = j.value("step", t.step);
                    for (const auto& w : j.at("waypoints")) t.waypoints.push_back(vec_from(w, "waypoints"));
                    src.sweep = std::move(t);
                }
                ArtifactSet a = optimize_from_manifest(s.inputs, s.config, s.artifacts->manifest_json, src);
                Json out = preview_json(a);
                Json rounds = Json::array();
                for (const auto& r : a.optimization->reports) {
                    rounds.push_back({{"alpha", r.alpha},
                                      {"nodules_before", r.nodules_before},
                                      {"nodules_after", r.nodules_after},
                                      {"contacted_nodules", r.contacted_nodules},
                                      {"near_contact_before", r.near_contact_before},
                                      {"near_contact_after", r.near_contact_after},
                                      {"warnings", r.warnings}});
                }
                out["rounds"] = std::move(rounds);
                s.inputs.density_map = a.optimization->density_map;
                s.artifacts = std::move(a);
                send_json(res, 200, out);
            });
        });

        server.Get(R"(/v1/sessions/([^/]+)/manifest)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                if (!s.artifacts) throw HttpError{404, "no manifest yet; POST generate first"};
                res.status = 200;
                res.set_content(s.artifacts->manifest_json, "application/json");
            });
        });

        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            } catch (...) {
                send_error(res, 500, "internal error");
            }
        });
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
    impl_->routes();
}

Service::~Service() { stop(); }

int Service::start() {
    if (impl_->options.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
    } else {
        impl_->port = impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
    }
    if (impl_->port <= 0) throw ConfigError("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void Service::run() {
    if (!impl_->server.listen(impl_->options.host, impl_->options.port)) {
        throw ConfigError("cannot listen on " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int Service::port() const noexcept { return impl_->port; }

std::string Service::create_session(PipelineConfig config, PipelineInputs inputs) {
    return impl_->add(std::move(config), std::move(inputs));
}

std::unique_lock<std::mutex> Service::hold_session(const std::string& id) {
    try {
        return std::unique_lock(impl_->find(id)->mu);
    } catch (const HttpError& e) {
        throw ConfigError(e.message);
    }
}

} // namespace tactskin
