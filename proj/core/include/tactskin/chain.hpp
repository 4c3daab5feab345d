#pragma once

#include "tactskin/sampler.hpp"
#include "tactskin/shell.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace tactskin {

/// Nodules closer than this cannot be told apart in print (m).
inline constexpr double kMinSpacingFloor = 0.009;

struct FilamentSpec {
    /// Conductive filament resistance per length (Ω/mm).
    double resistivity = 256.0;
    /// Minimum distance between consecutive chain nodules (m); never below 9 mm.
    double min_nodule_spacing = 0.060;
    /// Minimum cumulative-resistance step between consecutive nodules (kΩ).
    double margin = 20.0;
    double trace_diameter = 0.0015;
    /// Minimum distance kept between a trace and the shell surfaces (m).
    double surface_clearance = 0.0005;
    bool exhaustive_order = false;

    void validate() const;
};

struct ChainDesign {
    std::uint32_t shell = 0;
    std::vector<std::uint32_t> order;
    /// kΩ per consecutive pair (size order.size() - 1).
    std::vector<double> segment_resistances;
    /// kΩ at each chain position from the feed end; the first nodule is the base at 0.
    std::vector<double> cumulative_resistances;
    std::vector<std::vector<Vec3>> trace_polylines;
    double total_resistance = 0.0;
    /// Non-fatal routing findings (crossings, clearance).
    std::vector<std::string> diagnostics;
};

/// Greedy nearest neighbour from `start`; ties go to the lower id.
std::vector<std::uint32_t> order_chain(const NoduleLayout& layout, std::uint32_t start);
std::vector<std::uint32_t> order_chain(const NoduleLayout& layout, std::span<const std::uint32_t> ids,
                                       std::uint32_t start);

/// Shortest open path from `start` over all permutations. At most 9 nodules.
std::vector<std::uint32_t> order_chain_exhaustive(const NoduleLayout& layout, std::span<const std::uint32_t> ids,
                                                  std::uint32_t start);

/// Segment resistance = max(distance * resistivity, margin). Throws
/// ChainError naming the pair when consecutive nodules sit closer than the
/// minimum spacing.
ChainDesign assign_resistances(std::span<const std::uint32_t> order, const NoduleLayout& layout,
                               const FilamentSpec& spec);

/// Length of wire (m) a segment resistance calls for.
double required_trace_length(double resistance_kohm, const FilamentSpec& spec);

/// Routes every segment at mid-thickness of the shell and zig-zags it in the
/// local tangent plane until length * resistivity matches the segment
/// resistance within 0.5%. When the surface path alone is already longer,
/// the segment resistance is raised to match and the cumulative values
/// follow. Throws ChainError when the shell is too thin for the trace or a
/// segment cannot be made long enough.
ChainDesign route_traces(const SkinShell& shell, ChainDesign design, const NoduleLayout& layout,
                         const FilamentSpec& spec);

double polyline_length(std::span<const Vec3> polyline);

struct CalibrationBand {
    std::uint32_t nodule_id = 0;
    /// Delay in units of R * C_touch with unit touch capacitance (kΩ).
    double expected_delay = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

/// Expected delay per nodule with decision thresholds halfway between
/// neighbouring cumulative resistances.
std::vector<CalibrationBand> expected_rc_table(const ChainDesign& design);

/// Orders, sizes and routes one chain per shell. Shell s starts at its
/// lowest nodule id.
std::vector<ChainDesign> design_chains(std::span<const SkinShell> shells, const NoduleLayout& layout,
                                       const FilamentSpec& spec);

} // namespace tactskin
