#include "tactskin/contact.hpp"

#include "tactskin/error.hpp"
#include "tactskin/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace tactskin {

namespace {

constexpr std::string_view kLogHeader = "# layout_sha256:";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
bool parse_token(std::string_view& rest, T& out) {
    rest = trim(rest);
    const auto end = rest.find_first_of(" \t");
    const std::string_view tok = rest.substr(0, end);
    if (tok.empty()) return false;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) return false;
    rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
    return true;
}

} // namespace

std::uint64_t ContactHistogram::max_count() const {
    std::uint64_t m = 0;
    for (const auto& [id, c] : counts) m = std::max(m, c);
    return m;
}

std::uint64_t ContactHistogram::total() const {
    std::uint64_t t = 0;
    for (const auto& [id, c] : counts) t += c;
    return t;
}

void HeuristicParams::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("heuristic alpha must be positive");
    if (filter_order < 1) throw ConfigError("heuristic filter_order must be at least 1");
}

void SweepTrajectory::validate() const {
    if (waypoints.size() < 2) throw ConfigError("sweep trajectory needs at least 2 waypoints");
    if (!(step > 0.0)) throw ConfigError("sweep step must be positive");
    if (!(collider_radius >= 0.0)) throw ConfigError("sweep collider radius must be nonnegative");
}

ContactHistogram empty_histogram(const NoduleLayout& layout) {
    ContactHistogram h;
    for (const auto& n : layout.nodules) h.counts[n.id] = 0;
    return h;
}

ContactHistogram histogram_from_events(std::span<const ContactEvent> events, const NoduleLayout& layout, bool onsets) {
    ContactHistogram h = empty_histogram(layout);
    std::map<std::uint32_t, bool> previous;
    for (const auto& e : events) {
        auto it = h.counts.find(e.nodule_id);
        if (it == h.counts.end()) throw ConfigError("contact for unknown nodule id " + std::to_string(e.nodule_id));
        bool& was = previous[e.nodule_id];
        if (e.contact && (!onsets || !was)) ++it->second;
        was = e.contact;
    }
    return h;
}

std::vector<ContactEvent> parse_contact_log(std::string_view text, const NoduleLayout& layout) {
    std::set<std::uint32_t> ids;
    for (const auto& n : layout.nodules) ids.insert(n.id);

    std::vector<ContactEvent> events;
    std::size_t line_no = 0;
    double last_t = -std::numeric_limits<double>::infinity();
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line.starts_with(kLogHeader)) {
                const auto sha = trim(line.substr(kLogHeader.size()));
                const auto expected = layout_sha256(layout);
                if (sha != expected) {
                    throw ConfigError("contact log was recorded for layout " + std::string(sha) + ", not " + expected);
                }
            }
            continue;
        }
        ContactEvent e;
        int flag = -1;
        std::string_view rest = line;
        if (!parse_token(rest, e.timestamp) || !parse_token(rest, e.nodule_id) || !parse_token(rest, flag) ||
            !trim(rest).empty() || (flag != 0 && flag != 1) || !std::isfinite(e.timestamp)) {
            throw ParseError("contact log line " + std::to_string(line_no) + ": expected '<timestamp> <nodule_id> <0|1>'");
        }
        if (!ids.contains(e.nodule_id)) {
            throw ConfigError("contact log line " + std::to_string(line_no) + ": unknown nodule id " +
                              std::to_string(e.nodule_id));
        }
        if (e.timestamp < last_t) {
            throw ParseError("contact log line " + std::to_string(line_no) + ": timestamp goes backwards");
        }
        last_t = e.timestamp;
        e.contact = flag == 1;
        events.push_back(e);
    }
    return events;
}

std::string to_contact_log(std::span<const ContactEvent> events, const NoduleLayout& layout) {
    std::string out(kLogHeader);
    out += layout_sha256(layout);
    out += '\n';
    for (const auto& e : events) {
        out += format_double(e.timestamp);
        out += ' ';
        out += std::to_string(e.nodule_id);
        out += e.contact ? " 1\n" : " 0\n";
    }
    return out;
}

ContactHistogram ingest_contact_log(std::string_view text, const NoduleLayout& layout, bool onsets) {
    const auto events = parse_contact_log(text, layout);
    return histogram_from_events(events, layout, onsets);
}

ContactHistogram load_contact_log(const std::filesystem::path& path, const NoduleLayout& layout, bool onsets) {
    return ingest_contact_log(read_file(path), layout, onsets);
}

std::vector<ContactEvent> simulate_contacts(const NoduleLayout& layout, const SweepTrajectory& traj) {
    traj.validate();
    const auto& wp = traj.waypoints;
    std::vector<double> arc(wp.size(), 0.0);
    for (std::size_t i = 1; i < wp.size(); ++i) arc[i] = arc[i - 1] + (wp[i] - wp[i - 1]).norm();
    const double length = arc.back();
    const auto steps = static_cast<std::size_t>(std::floor(length / traj.step + 1e-9));

    std::vector<ContactEvent> events;
    std::vector<char> in_contact(layout.size(), 0);
    std::size_t seg = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double s = std::min(double(k) * traj.step, length);
        while (seg + 2 < wp.size() && arc[seg + 1] < s) ++seg;
        const double span = arc[seg + 1] - arc[seg];
        const double u = span > 0.0 ? std::clamp((s - arc[seg]) / span, 0.0, 1.0) : 0.0;
        const Vec3 centre = wp[seg] + u * (wp[seg + 1] - wp[seg]);
        const double t = double(k) * traj.step;
        for (std::size_t j = 0; j < layout.size(); ++j) {
            const auto& n = layout.nodules[j];
            const bool touching = (centre - n.position).norm() <= traj.collider_radius + n.radius;
            if (touching) {
                events.push_back({t, n.id, true});
            } else if (in_contact[j]) {
                events.push_back({t, n.id, false});
            }
            in_contact[j] = touching;
        }
    }
    return events;
}

double butterworth_weight(double distance, double normalized_count, const HeuristicParams& params) {
    const double ratio = std::abs(distance / params.alpha);
    return std::sqrt(normalized_count / (1.0 + std::pow(ratio, 2.0 * params.filter_order)));
}

OptimizedMap optimize_heatmap(const TriMesh& mesh, const NoduleLayout& layout, const ContactHistogram& hist,
                              const HeuristicParams& params) {
    params.validate();
    OptimizedMap out;
    std::vector<double> weights(mesh.vertex_count(), 0.0);
    const auto max_count = hist.max_count();
    if (max_count == 0) {
        out.warnings.push_back("no contacts recorded; optimized density map is all zero");
        out.map = HeatMap(mesh.sha256(), MapRole::density, std::move(weights));
        return out;
    }

    struct Source {
        Vec3 position;
        double count;
    };
    std::vector<Source> sources;
    for (const auto& [id, c] : hist.counts) {
        if (c == 0) continue;
        const double scaled = params.normalize_counts ? double(c) / double(max_count) : double(c);
        sources.push_back({layout.by_id(id).position, scaled});
    }

    for (std::size_t i = 0; i < weights.size(); ++i) {
        double best = 0.0;
        for (const auto& s : sources) best = std::max(best, butterworth_weight((mesh.vertex(i) - s.position).norm(), s.count, params));
        weights[i] = std::min(best, 1.0);
    }
    out.map = HeatMap(mesh.sha256(), MapRole::density, std::move(weights));
    return out;
}

double default_alpha(const NoduleLayout& layout) {
    if (layout.empty()) throw ConfigError("default alpha needs a nonempty layout");
    double sum = 0.0;
    for (double d : layout.local_distances()) sum += d;
    return 2.0 * sum / double(layout.size());
}

namespace {

std::size_t count_near(const NoduleLayout& layout, const std::vector<Vec3>& contacted, double alpha) {
    std::size_t n = 0;
    for (const auto& nod : layout.nodules) {
        for (const auto& c : contacted) {
            if ((nod.position - c).norm() <= alpha) {
                ++n;
                break;
            }
        }
    }
    return n;
}

} // namespace

RoundResult optimize_round(const TriMesh& mesh, std::span<const SkinShell> shells, const NoduleLayout& layout,
                           const ContactSource& source, const RoundParams& params) {
    if (source.log_text.has_value() == source.sweep.has_value()) {
        throw ConfigError("an optimization round needs exactly one contact source (log or sweep)");
    }
    if (params.rounds < 1) throw ConfigError("optimization rounds must be at least 1");
    if (params.rounds > 1 && source.log_text) {
        throw ConfigError("more than one optimization round needs a sweep trajectory; a recorded log only covers the first layout");
    }

    RoundResult result;
    result.layout = layout;
    for (int round = 0; round < params.rounds; ++round) {
        const NoduleLayout& current = result.layout;
        ContactHistogram hist;
        if (source.log_text) {
            hist = ingest_contact_log(*source.log_text, current, source.onsets);
        } else {
            const auto events = simulate_contacts(current, *source.sweep);
            hist = histogram_from_events(events, current, source.onsets);
        }

        HeuristicParams heuristic = params.heuristic;
        if (!(heuristic.alpha > 0.0)) heuristic.alpha = default_alpha(current);

        RoundReport report;
        report.alpha = heuristic.alpha;
        report.nodules_before = current.size();
        std::vector<Vec3> contacted;
        for (const auto& [id, c] : hist.counts)
            if (c > 0) contacted.push_back(current.by_id(id).position);
        report.contacted_nodules = contacted.size();
        report.near_contact_before = count_near(current, contacted, heuristic.alpha);

        OptimizedMap opt = optimize_heatmap(mesh, current, hist, heuristic);
        report.warnings = opt.warnings;
        NoduleLayout next = assign_radii(sample_shells(shells, opt.map, params.sampling), params.sampling);
        report.nodules_after = next.size();
        report.near_contact_after = count_near(next, contacted, heuristic.alpha);

        result.density_map = std::move(opt.map);
        result.histogram = std::move(hist);
        result.layout = std::move(next);
        result.reports.push_back(std::move(report));
    }
    return result;
}

} // namespace tactskin
