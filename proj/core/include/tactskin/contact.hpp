#pragma once

#include "tactskin/heatmap.hpp"
#include "tactskin/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tactskin {

struct ContactEvent {
    double timestamp = 0.0;
    std::uint32_t nodule_id = 0;
    bool contact = false;
    friend bool operator==(const ContactEvent&, const ContactEvent&) = default;
};

/// Contact counts per nodule; every layout id has an entry.
struct ContactHistogram {
    std::map<std::uint32_t, std::uint64_t> counts;

    std::uint64_t max_count() const;
    std::uint64_t total() const;
};

struct HeuristicParams {
    /// Cutoff distance (m).
    double alpha = 0.0;
    int filter_order = 2;
    bool normalize_counts = true;

    void validate() const;
};

/// Fill tolerance used when re-sampling an optimized density map.
inline constexpr double kOptimizedFillTolerance = 0.15;

struct SweepTrajectory {
    double collider_radius = 0.01;
    std::vector<Vec3> waypoints;
    /// Path resolution (m); the collider moves at unit speed.
    double step = 0.001;

    void validate() const;
};

/// Empty histogram covering every nodule of the layout.
ContactHistogram empty_histogram(const NoduleLayout& layout);

/// Counts contact=1 records per nodule, or rising edges when `onsets` is set.
/// Throws ConfigError on unknown ids or decreasing timestamps.
ContactHistogram histogram_from_events(std::span<const ContactEvent> events, const NoduleLayout& layout,
                                       bool onsets = false);

// Contact log text format:
//   # layout_sha256:<hex>
//   <timestamp> <nodule_id> <0|1>
//   ...
// The header is optional; when present it must match the layout.
std::vector<ContactEvent> parse_contact_log(std::string_view text, const NoduleLayout& layout);
std::string to_contact_log(std::span<const ContactEvent> events, const NoduleLayout& layout);
ContactHistogram ingest_contact_log(std::string_view text, const NoduleLayout& layout, bool onsets = false);
ContactHistogram load_contact_log(const std::filesystem::path& path, const NoduleLayout& layout, bool onsets = false);

/// Moves a sphere along the waypoints in increments of `step` (arc length
/// k * step, timestamp k * step). At each step every nodule within
/// collider_radius + nodule radius of the centre emits contact=1; a nodule
/// that was in contact on the previous step and is not any more emits a
/// single contact=0 record.
std::vector<ContactEvent> simulate_contacts(const NoduleLayout& layout, const SweepTrajectory& traj);

/// sqrt(count / (1 + |distance / alpha|^(2 n)))
double butterworth_weight(double distance, double normalized_count, const HeuristicParams& params);

struct OptimizedMap {
    HeatMap map;
    std::vector<std::string> warnings;
};

/// v_i = max_j butterworth_weight(|v_i - n_j|, c_j) over nodules with
/// nonzero counts, starting from zero. Counts are divided by the largest
/// count unless normalize_counts is off, in which case raw counts are used
/// and results are clamped at 1.
OptimizedMap optimize_heatmap(const TriMesh& mesh, const NoduleLayout& layout, const ContactHistogram& hist,
                              const HeuristicParams& params);

/// Twice the mean local minimum distance of the layout.
double default_alpha(const NoduleLayout& layout);

/// One contact source for an optimization round.
struct ContactSource {
    std::optional<std::string> log_text;
    std::optional<SweepTrajectory> sweep;
    bool onsets = false;
};

struct RoundParams {
    HeuristicParams heuristic;
    /// Alpha <= 0 in `heuristic` means "use default_alpha of the input layout".
    SamplingParams sampling;
    int rounds = 1;
};

struct RoundReport {
    std::size_t nodules_before = 0;
    std::size_t nodules_after = 0;
    std::size_t contacted_nodules = 0;
    /// Nodules of each layout within alpha of a contacted input nodule.
    std::size_t near_contact_before = 0;
    std::size_t near_contact_after = 0;
    double alpha = 0.0;
    std::vector<std::string> warnings;
};

struct RoundResult {
    HeatMap density_map;
    NoduleLayout layout;
    ContactHistogram histogram;
    std::vector<RoundReport> reports;
};

/// histogram -> optimize_heatmap -> sample_shells on the new map (with radii).
/// More than one round requires a sweep source, which is re-simulated on each
/// new layout.
RoundResult optimize_round(const TriMesh& mesh, std::span<const SkinShell> shells, const NoduleLayout& layout,
                           const ContactSource& source, const RoundParams& params);

} // namespace tactskin
