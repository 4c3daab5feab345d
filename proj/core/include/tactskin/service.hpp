#pragma once

#include "tactskin/config.hpp"
#include "tactskin/pipeline.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

namespace tactskin {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    /// 0 picks a free port.
    int port = 0;
    /// Mesh, sidecar and log paths in session configs resolve under this
    /// directory and may not leave it.
    std::filesystem::path asset_root = ".";
};

/// Local HTTP backend for the painter UI, versioned under /v1.
///
///   POST /v1/sessions                          {"config": yaml, "mesh": {"format", "data"}?}
///   GET  /v1/sessions/{id}/mesh
///   GET  /v1/sessions/{id}/heatmap/{skin|density}
///   PUT  /v1/sessions/{id}/heatmap/{skin|density}   sidecar text
///   POST /v1/sessions/{id}/brush               BrushStroke JSON plus "role"
///   POST /v1/sessions/{id}/generate
///   POST /v1/sessions/{id}/optimize            {"log": text} or {"sweep": {...}}
///   GET  /v1/sessions/{id}/manifest
///
/// Requests on one session never run concurrently: a request that finds the
/// session busy gets 409. Unknown sessions are 404, bad payloads 400 and
/// geometry or chain failures 422.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();
    int port() const noexcept;

    /// Registers a session without going through HTTP.
    std::string create_session(PipelineConfig config, PipelineInputs inputs);

    /// Holds a session exactly as an in-flight request does, so callers can
    /// observe the 409 path deterministically.
    std::unique_lock<std::mutex> hold_session(const std::string& id);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace tactskin
