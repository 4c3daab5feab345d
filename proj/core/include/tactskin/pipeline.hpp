#pragma once

#include "tactskin/chain.hpp"
#include "tactskin/config.hpp"
#include "tactskin/contact.hpp"
#include "tactskin/error.hpp"
#include "tactskin/sampler.hpp"
#include "tactskin/shell.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tactskin {

/// An error tagged with the pipeline stage it came from. Keeps the kind of
/// the underlying error so exit codes still follow the cause.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Everything the pipeline reads, already in memory.
struct PipelineInputs {
    std::shared_ptr<const TriMesh> mesh;
    HeatMap skin_map;
    HeatMap density_map;
};

/// Loads the mesh and realizes both maps.
PipelineInputs load_inputs(const PipelineConfig& config);

struct ShellStatus {
    std::size_t faces = 0;
    double volume = 0.0;
    bool watertight = false;
    std::size_t self_intersections = 0;
};

struct ArtifactSet {
    std::vector<SkinShell> shells;
    std::vector<ShellStatus> shell_status;
    NoduleLayout initial_layout;
    NoduleLayout layout;
    std::vector<ChainDesign> chains;
    std::optional<RoundResult> optimization;
    std::vector<std::string> warnings;

    std::string body_stl;
    std::string conductive_stl;
    std::string manifest_json;
    std::string report_json;
    std::optional<std::string> optimized_sidecar;
};

/// Overrides the contact source of the config (used by the optimize verb
/// and the HTTP service).
struct RunOverrides {
    std::optional<ContactSource> contact;
};

/// cutout -> shells -> sampling -> (optimization) -> chains -> export.
/// Any stage error is rethrown as StageError naming the stage. A shell that
/// intersects itself aborts the run unless allow_broken is set.
ArtifactSet run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config, const RunOverrides& overrides = {});
ArtifactSet run_pipeline(const PipelineConfig& config, const RunOverrides& overrides = {});

/// Re-runs generation from `config`, checks that the mesh and layout match
/// the checksums recorded in `manifest_json`, then optimizes with `source`.
ArtifactSet optimize_from_manifest(const PipelineInputs& inputs, const PipelineConfig& config,
                                   std::string_view manifest_json, const ContactSource& source);

/// Contact source described by the config, if any.
std::optional<ContactSource> config_contact_source(const PipelineConfig& config);

/// body.stl, conductive.stl, manifest.json, report.json and, when present,
/// density_optimized.txt.
void write_artifacts(const ArtifactSet& artifacts, const std::filesystem::path& dir);

std::string tool_version();

} // namespace tactskin
