#pragma once

#include "tactskin/chain.hpp"
#include "tactskin/contact.hpp"
#include "tactskin/heatmap.hpp"
#include "tactskin/sampler.hpp"
#include "tactskin/shell.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tactskin {

/// Where a heat map comes from: a constant, a sidecar file, or brush strokes
/// folded onto a constant base.
struct MapSource {
    enum class Kind { uniform, sidecar, brushes };
    Kind kind = Kind::uniform;
    double base = 1.0;
    std::filesystem::path sidecar;
    std::vector<BrushStroke> strokes;
};

struct ContactConfig {
    std::optional<std::filesystem::path> log;
    std::optional<SweepTrajectory> sweep;
    bool onsets = false;

    bool empty() const noexcept { return !log && !sweep; }
};

struct PipelineConfig {
    std::string name = "skin_unit";
    std::filesystem::path mesh_path;
    double scale = 1.0;
    double weld_tolerance = kDefaultWeldTolerance;

    MapSource skin_map;
    MapSource density_map;

    CutoutParams cutout;
    SamplingParams sampling;

    /// alpha <= 0 selects twice the mean local minimum distance.
    HeuristicParams heuristic;
    double optimized_fill_tolerance = kOptimizedFillTolerance;
    int rounds = 1;

    FilamentSpec filament;
    ContactConfig contact;

    std::filesystem::path output_dir = "out";
    bool allow_broken = false;

    /// Throws ConfigError on any out-of-range value.
    void validate() const;
};

/// Parses a YAML configuration. Relative paths resolve against `base_dir`.
PipelineConfig parse_config(std::string_view yaml, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Builds the map a source describes on `mesh`.
HeatMap realize_map(const MapSource& source, const TriMesh& mesh, MapRole role);

/// Parses a brush stroke from the JSON object used on the wire and in YAML
/// (keys: shape, center, radius, half_extents, strength, falloff).
BrushStroke brush_from_json(std::string_view json);

} // namespace tactskin
