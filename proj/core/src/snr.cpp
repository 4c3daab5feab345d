#include "tactskin/snr.hpp"

#include "tactskin/error.hpp"
#include "tactskin/mesh_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tactskin {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
bool parse_field(std::string_view tok, T& out) {
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc{} && res.ptr == tok.data() + tok.size();
}

std::string shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double round_to(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale;
}

std::string fixed(double v, int decimals) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(decimals);
    os << v;
    return os.str();
}

} // namespace

CaptureTrace parse_trace(std::string_view text) {
    CaptureTrace trace;
    bool header = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream fields{std::string(line.substr(1))};
            std::string field;
            while (fields >> field) {
                const auto colon = field.find(':');
                if (colon == std::string::npos) continue;
                const std::string_view key = std::string_view(field).substr(0, colon);
                const std::string_view value = std::string_view(field).substr(colon + 1);
                bool ok = true;
                if (key == "nodule") {
                    ok = parse_field(value, trace.nodule_id);
                    header = header || ok;
                } else if (key == "rate_hz") {
                    ok = parse_field(value, trace.rate_hz);
                }
                if (!ok) throw ParseError("trace line " + std::to_string(line_no) + ": bad header field '" + field + "'");
            }
            continue;
        }
        const auto space = line.find_first_of(" \t");
        double t = 0.0, v = 0.0;
        if (space == std::string_view::npos || !parse_field(line.substr(0, space), t) ||
            !parse_field(trim(line.substr(space)), v)) {
            throw ParseError("trace line " + std::to_string(line_no) + ": expected '<timestamp> <value>'");
        }
        if (!trace.samples.empty() && t <= trace.samples.back().first) {
            throw ParseError("trace line " + std::to_string(line_no) + ": timestamps must strictly increase");
        }
        trace.samples.emplace_back(t, v);
    }
    if (!header) throw ParseError("trace is missing its '# nodule:<id> rate_hz:<r>' header");
    return trace;
}

CaptureTrace load_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

std::string to_trace_text(const CaptureTrace& trace) {
    std::string out = "# nodule:" + std::to_string(trace.nodule_id) + " rate_hz:" + shortest(trace.rate_hz) + "\n";
    for (const auto& [t, v] : trace.samples) out += shortest(t) + " " + shortest(v) + "\n";
    return out;
}

PhaseStats segment_trace(const CaptureTrace& trace, const TouchProtocol& protocol) {
    if (trace.samples.empty()) throw AnalysisError("trace for nodule " + std::to_string(trace.nodule_id) + " is empty");
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
        if (!(trace.samples[i].first > trace.samples[i - 1].first)) {
            throw AnalysisError("trace timestamps must strictly increase");
        }
    }
    const double t0 = trace.samples.front().first;
    const double span = trace.samples.back().first - t0;
    // The last sample of a complete capture lands one period before the end.
    const double period = trace.rate_hz > 0.0 ? 1.0 / trace.rate_hz : 0.0;
    if (span + period < protocol.duration() - 1e-9) {
        throw AnalysisError("trace for nodule " + std::to_string(trace.nodule_id) + " covers " + fixed(span + period, 3) +
                            " s; the protocol needs " + fixed(protocol.duration(), 3) + " s");
    }

    const double b1 = protocol.unpressed;
    const double b2 = protocol.unpressed + protocol.pressed;
    const double g = protocol.guard;
    std::vector<double> up, pr;
    for (const auto& [t, v] : trace.samples) {
        const double r = t - t0;
        if (r >= protocol.duration()) break;
        if (r < b1 - g || r >= b2 + g) {
            up.push_back(v);
        } else if (r >= b1 + g && r < b2 - g) {
            pr.push_back(v);
        }
    }
    if (up.empty() || pr.empty()) {
        throw AnalysisError("trace for nodule " + std::to_string(trace.nodule_id) + " has an empty phase after trimming");
    }

    PhaseStats s;
    s.mu_unpressed = std::accumulate(up.begin(), up.end(), 0.0) / double(up.size());
    s.mu_pressed = std::accumulate(pr.begin(), pr.end(), 0.0) / double(pr.size());
    double ss = 0.0;
    for (double v : up) ss += (v - s.mu_unpressed) * (v - s.mu_unpressed);
    s.sigma_unpressed = std::sqrt(ss / double(up.size()));
    return s;
}

double snr(double mu_unpressed, double mu_pressed, double sigma_unpressed) {
    const double diff = std::abs(mu_unpressed - mu_pressed);
    if (sigma_unpressed == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / sigma_unpressed;
}

double snr(const PhaseStats& stats) { return snr(stats.mu_unpressed, stats.mu_pressed, stats.sigma_unpressed); }

std::string_view to_string(SnrClass c) {
    switch (c) {
    case SnrClass::fail: return "fail";
    case SnrClass::minimum: return "minimum";
    case SnrClass::robust: return "robust";
    }
    return "fail";
}

SnrClass classify_snr(double value) {
    if (value >= kRobustSnr) return SnrClass::robust;
    if (value >= kMinimumSnr) return SnrClass::minimum;
    return SnrClass::fail;
}

SnrReport pairwise_min_snr(std::span<const PhaseStats> stats, std::span<const std::uint32_t> nodule_ids) {
    const auto n = stats.size();
    if (n < 2) throw AnalysisError("pairwise SNR needs at least 2 nodules");
    if (!nodule_ids.empty() && nodule_ids.size() != n) throw AnalysisError("one nodule id per trace is required");

    SnrReport r;
    if (nodule_ids.empty()) {
        for (std::uint32_t i = 0; i < n; ++i) r.nodule_ids.push_back(i);
    } else {
        r.nodule_ids.assign(nodule_ids.begin(), nodule_ids.end());
    }
    r.matrix.assign(n, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
    r.min_snr = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            const double v = snr(stats[i].mu_unpressed, stats[j].mu_pressed, stats[i].sigma_unpressed);
            r.matrix[j][i] = v;
            r.min_snr = std::min(r.min_snr, v);
        }
    }
    r.classification = classify_snr(r.min_snr);
    return r;
}

TrialAggregate aggregate_trials(std::span<const double> trial_minima) {
    if (trial_minima.empty()) throw AnalysisError("no trials to aggregate");
    TrialAggregate a;
    a.trials.assign(trial_minima.begin(), trial_minima.end());
    const double n = double(a.trials.size());
    a.mean = std::accumulate(a.trials.begin(), a.trials.end(), 0.0) / n;
    const auto [lo, hi] = std::minmax_element(a.trials.begin(), a.trials.end());
    a.half_range = 0.5 * (*hi - *lo);
    double ss = 0.0;
    for (double v : a.trials) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / n);
    return a;
}

bool matches_printed(const TrialAggregate& agg, double printed_mean, double printed_half_range, int decimals) {
    const double tol = 0.5 * std::pow(10.0, -decimals) * 1e-6;
    return std::abs(round_to(agg.mean, decimals) - printed_mean) <= tol &&
           std::abs(round_to(agg.half_range, decimals) - printed_half_range) <= tol;
}

std::string format_aggregate(const TrialAggregate& agg, int decimals) {
    return fixed(agg.mean, decimals) + " ± " + fixed(agg.half_range, decimals);
}

namespace {

nlohmann::ordered_json report_to_json(const SnrReport& report) {
    nlohmann::ordered_json j;
    j["nodules"] = report.nodule_ids;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.matrix) {
        nlohmann::ordered_json cells = nlohmann::ordered_json::array();
        for (double v : row) cells.push_back(std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json());
        rows.push_back(std::move(cells));
    }
    j["matrix"] = std::move(rows);
    j["min_snr"] = std::isfinite(report.min_snr) ? nlohmann::ordered_json(report.min_snr) : nlohmann::ordered_json();
    j["classification"] = std::string(to_string(report.classification));
    return j;
}

} // namespace

std::string report_json(const SnrReport& report) { return report_to_json(report).dump(2) + "\n"; }

std::string trials_json(std::span<const SnrReport> trials, const TrialAggregate& agg) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& t : trials) arr.push_back(report_to_json(t));
    j["trials"] = std::move(arr);
    j["mean"] = agg.mean;
    j["half_range"] = agg.half_range;
    j["stddev"] = agg.stddev;
    j["classification"] = std::string(to_string(classify_snr(agg.mean)));
    return j.dump(2) + "\n";
}

std::string trials_table(std::string_view unit, std::span<const SnrReport> trials, const TrialAggregate& agg) {
    std::ostringstream os;
    os << "Unit";
    for (std::size_t k = 0; k < trials.size(); ++k) os << " | Trial " << (k + 1);
    os << " | Mean ± half-range | Std\n";
    os << unit;
    for (const auto& t : trials) os << " | " << (std::isfinite(t.min_snr) ? fixed(t.min_snr, 1) : std::string("inf"));
    os << " | " << format_aggregate(agg) << " | " << fixed(agg.stddev, 2) << "\n";
    return os.str();
}

} // namespace tactskin
