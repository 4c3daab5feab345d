#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tactskin {

/// Raw capacitive readings of one nodule (unitless RC counts).
struct CaptureTrace {
    std::uint32_t nodule_id = 0;
    double rate_hz = 0.0;
    std::vector<std::pair<double, double>> samples; // (seconds, value)
};

// Trace file format:
//   # nodule:<id> rate_hz:<r>
//   <timestamp> <value>
CaptureTrace parse_trace(std::string_view text);
CaptureTrace load_trace(const std::filesystem::path& path);
std::string to_trace_text(const CaptureTrace& trace);

/// Untouched / touched / released phase lengths (s) and the guard trimmed on
/// both sides of each internal phase boundary.
struct TouchProtocol {
    double unpressed = 3.0;
    double pressed = 3.0;
    double released = 3.0;
    double guard = 0.25;

    double duration() const noexcept { return unpressed + pressed + released; }
};

struct PhaseStats {
    double mu_unpressed = 0.0;
    double mu_pressed = 0.0;
    /// Population standard deviation of the untouched samples.
    double sigma_unpressed = 0.0;
};

/// Phase times are measured from the first sample. Untouched statistics pool
/// the first and last phase. Throws AnalysisError when the trace is shorter
/// than the protocol or a phase is empty after trimming.
PhaseStats segment_trace(const CaptureTrace& trace, const TouchProtocol& protocol = {});

/// |mu_U - mu_P| / sigma_U. With sigma_U = 0 the result is +infinity if the
/// means differ and 0 if they agree.
double snr(double mu_unpressed, double mu_pressed, double sigma_unpressed);
double snr(const PhaseStats& stats);

enum class SnrClass { fail, minimum, robust };
std::string_view to_string(SnrClass c);

inline constexpr double kMinimumSnr = 7.0;
inline constexpr double kRobustSnr = 15.0;

/// fail < 7 <= minimum < 15 <= robust
SnrClass classify_snr(double value);

struct SnrReport {
    std::vector<std::uint32_t> nodule_ids;
    /// matrix[j][i]: target j pressed against reference i untouched; the
    /// diagonal is NaN and never enters the minimum.
    std::vector<std::vector<double>> matrix;
    double min_snr = 0.0;
    SnrClass classification = SnrClass::fail;
};

/// Entry (target j, reference i != j) = |mu_U,i - mu_P,j| / sigma_U,i.
/// Throws AnalysisError for fewer than two nodules.
SnrReport pairwise_min_snr(std::span<const PhaseStats> stats, std::span<const std::uint32_t> nodule_ids = {});

/// Summary over repeated trials, written "mean ± half-range".
struct TrialAggregate {
    std::vector<double> trials;
    double mean = 0.0;
    double half_range = 0.0;
    double stddev = 0.0;
};

TrialAggregate aggregate_trials(std::span<const double> trial_minima);

/// Whether `agg` rounds to a printed "mean ± half-range" pair at `decimals`
/// places. Used to flag summary rows that do not follow from their trials.
bool matches_printed(const TrialAggregate& agg, double printed_mean, double printed_half_range, int decimals);

/// "8.7 ± 0.5"
std::string format_aggregate(const TrialAggregate& agg, int decimals = 1);

std::string report_json(const SnrReport& report);
std::string trials_json(std::span<const SnrReport> trials, const TrialAggregate& agg);
/// Plain-text table: one column per trial, then the aggregate.
std::string trials_table(std::string_view unit, std::span<const SnrReport> trials, const TrialAggregate& agg);

} // namespace tactskin
