// Acceptance run: one PASS/FAIL line per primary criterion. Tolerances are
// fixed here and nowhere else.

#include "tactskin/chain.hpp"
#include "tactskin/contact.hpp"
#include "tactskin/cutout.hpp"
#include "tactskin/mesh_io.hpp"
#include "tactskin/pipeline.hpp"
#include "tactskin/primitives.hpp"
#include "tactskin/sampler.hpp"
#include "tactskin/service.hpp"
#include "tactskin/shell.hpp"
#include "tactskin/snr.hpp"
#include "tactskin/spline.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace tactskin;

namespace {

namespace tol {
constexpr double kernel = 1e-12;
constexpr double heatmap = 1e-12;
constexpr double knot = 1e-9;
constexpr double tangent_rel = 1e-6;
constexpr double volume_rel = 1e-6;
constexpr double trace_rel = 0.005;
// Steps are recovered by subtracting running sums, which can lose an ulp.
constexpr double sum_rounding_kohm = 1e-9;
constexpr double probe_spacing = 0.01;
constexpr double runtime_c1_s = 10.0;
constexpr double runtime_c3_s = 30.0;
constexpr double band_lo_kohm = 100.0;
constexpr double band_hi_kohm = 600.0;
} // namespace tol

// Collects failed checks for one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        failed_ += !ok;
    }
    void note(const std::string& s) { notes_.push_back(s); }
    bool ok() const { return failed_ == 0; }
    std::string summary() const {
        std::ostringstream os;
        os << (total_ - failed_) << "/" << total_ << " checks";
        for (const auto& n : notes_) os << "; " << n;
        for (const auto& f : failures_) os << "\n    failed: " << f;
        return os.str();
    }

private:
    std::size_t total_ = 0, failed_ = 0;
    std::vector<std::string> failures_, notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::filesystem::path golden() { return testutil::fixture_dir() / "golden"; }

SkinShell flat_shell(double size_x, double size_y, int nx, int ny, double thickness,
                     std::shared_ptr<const TriMesh>* keep = nullptr) {
    auto m = testutil::share(primitives::grid_plate(size_x, size_y, nx, ny));
    if (keep) *keep = m;
    CutoutParams c;
    c.thickness = thickness;
    return build_shells(m, HeatMap::uniform(*m, MapRole::skin, 1.0), c).shells.at(0);
}

// 1. Kernel exactness and heat map brute force.
Check criterion1() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    for (int n = 1; n <= 8; ++n) {
        for (double alpha : {0.01, 0.05, 0.2, 1.0}) {
            HeuristicParams h;
            h.alpha = alpha;
            h.filter_order = n;
            const double w = butterworth_weight(alpha, 1.0, h);
            c.expect(std::abs(w - 1.0 / std::sqrt(2.0)) <= tol::kernel, "kernel at d=alpha, n=" + std::to_string(n));
        }
    }
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> count(0, 12), nodules(5, 60);
    std::uniform_real_distribution<double> alpha(0.02, 0.3);
    std::uniform_int_distribution<int> order(1, 4);
    const std::vector<TriMesh> meshes{primitives::icosphere(0.3, 4), primitives::grid_plate(1.0, 0.8, 60, 50),
                                      primitives::cylinder_patch(0.08, 2.5, 0.4, 60, 40)};
    std::size_t max_vertices = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const TriMesh& m = meshes[trial % meshes.size()];
        max_vertices = std::max(max_vertices, m.vertex_count());
        Vec3 lo = m.vertex(0), hi = m.vertex(0);
        for (const auto& v : m.vertices()) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y()), uz(lo.z(), hi.z());
        std::vector<Vec3> pts;
        const int k = nodules(rng);
        for (int i = 0; i < k; ++i) pts.emplace_back(ux(rng), uy(rng), uz(rng));
        const auto layout = testutil::layout_at(pts);
        auto hist = empty_histogram(layout);
        for (auto& [id, n] : hist.counts) n = std::uint64_t(count(rng));
        hist.counts[0] = std::max<std::uint64_t>(hist.counts[0], 1);
        HeuristicParams h;
        h.alpha = alpha(rng);
        h.filter_order = order(rng);
        h.normalize_counts = trial % 4 != 3;
        const auto got = optimize_heatmap(m, layout, hist, h);
        const auto ref = oracle::heatmap(m, layout, hist, h.alpha, h.filter_order, h.normalize_counts);
        double worst = 0.0;
        for (std::size_t v = 0; v < ref.size(); ++v) worst = std::max(worst, std::abs(got.map.weight(std::uint32_t(v)) - ref[v]));
        c.expect(worst <= tol::heatmap, "heat map trial " + std::to_string(trial) + " max error " + fmt(worst));
    }
    c.expect(max_vertices <= 5000, "mesh size bound");
    const double secs = seconds_since(t0);
    c.expect(secs < tol::runtime_c1_s, "runtime " + fmt(secs) + " s");
    c.note("runtime " + fmt(secs) + " s");
    return c;
}

// Trace whose unpressed phase alternates mu_u +- 1 (population sigma 1) and
// whose pressed phase is constant.
CaptureTrace square_trace(std::uint32_t id, double mu_u, double mu_p) {
    CaptureTrace t;
    t.nodule_id = id;
    t.rate_hz = 100.0;
    for (int i = 0; i < 900; ++i) {
        const double time = i / 100.0;
        const bool pressed = time >= 3.0 && time < 6.0;
        t.samples.emplace_back(time, pressed ? mu_p : mu_u + (i % 2 ? 1.0 : -1.0));
    }
    return t;
}

// 2. SNR arithmetic, classification and trial aggregation.
Check criterion2() {
    Check c;
    c.expect(snr(100, 170, 10) == 7.0, "snr(100,170,10) == 7 exactly");
    const std::vector<PhaseStats> two{{100, 170, 10}, {100, 240, 10}};
    const auto r = pairwise_min_snr(two);
    c.expect(r.min_snr == 7.0, "two-nodule minimum is 7");
    c.expect(r.classification == SnrClass::minimum && to_string(r.classification) == "minimum", "class minimum");

    std::vector<double> minima;
    for (double target : {8.0, 9.0, 9.0}) {
        std::vector<PhaseStats> stats;
        stats.push_back(segment_trace(square_trace(0, 100.0, 100.0 + target)));
        stats.push_back(segment_trace(square_trace(1, 100.0, 100.0 + 2.5 * target)));
        stats.push_back(segment_trace(square_trace(2, 100.0, 100.0 - 3.0 * target)));
        const auto rep = pairwise_min_snr(stats);
        c.expect(std::abs(rep.min_snr - target) <= 1e-9, "trial minimum " + fmt(rep.min_snr) + " vs " + fmt(target));
        minima.push_back(rep.min_snr);
    }
    const auto agg = aggregate_trials(minima);
    c.expect(std::abs(agg.mean - 26.0 / 3.0) <= 1e-9, "aggregate mean");
    c.expect(std::abs(agg.half_range - 0.5) <= 1e-9, "aggregate half range");
    c.expect(format_aggregate(agg) == "8.7 ± 0.5", "printed as 8.7 ± 0.5, got " + format_aggregate(agg));
    c.expect(matches_printed(agg, 8.7, 0.5, 1), "matches printed row");
    return c;
}

// 3. Dart throwing on a flat 1 m square.
Check criterion3() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    std::shared_ptr<const TriMesh> mesh;
    const SkinShell shell = flat_shell(1.0, 1.0, 20, 20, 0.004, &mesh);
    const HeatMap density = HeatMap::uniform(*mesh, MapRole::density, 1.0);
    SamplingParams s;
    s.d_min = 0.3;
    s.max_samples = 100000;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        s.seed = seed;
        s.d_min = 0.3;
        const auto layout = sample_nodules(shell, density, s);
        c.expect(oracle::min_spacing_ratio(layout) >= 1.0, "spacing rule, seed " + std::to_string(seed));
        const auto uncovered = oracle::uncovered_probes(shell, layout, s.d_min, tol::probe_spacing);
        c.expect(uncovered == 0, "uncovered probes " + std::to_string(uncovered) + ", seed " + std::to_string(seed));
        const auto again = sample_nodules(shell, density, s);
        c.expect(layout_sha256(again) == layout_sha256(layout), "determinism, seed " + std::to_string(seed));
        s.d_min = 0.6;
        const auto coarse = sample_nodules(shell, density, s);
        c.expect(coarse.size() <= layout.size(), "doubling d_min raised the count from " + std::to_string(layout.size()) +
                                                     " to " + std::to_string(coarse.size()) + ", seed " +
                                                     std::to_string(seed));
    }
    const double secs = seconds_since(t0);
    c.expect(secs < tol::runtime_c3_s, "runtime " + fmt(secs) + " s");
    c.note("runtime " + fmt(secs) + " s");
    return c;
}

// 4. Cutout, spline and extrusion.
Check criterion4() {
    Check c;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto plate = testutil::share(primitives::grid_plate(1, 1, 12, 12));
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> w(plate->vertex_count());
        for (auto& x : w) x = u(rng);
        const HeatMap map(plate->sha256(), MapRole::skin, w);
        std::set<std::uint32_t> prev;
        bool first = true, monotone = true;
        for (double t = 0.0; t < 1.0; t += 0.05) {
            std::set<std::uint32_t> faces;
            try {
                const auto sub = extract_cutout(plate, map, t);
                faces.insert(sub.parent_faces.begin(), sub.parent_faces.end());
            } catch (const GeometryError&) {
            }
            if (!first) monotone = monotone && std::includes(prev.begin(), prev.end(), faces.begin(), faces.end());
            prev = std::move(faces);
            first = false;
        }
        c.expect(monotone, "cutoff monotonicity, map " + std::to_string(trial));
    }

    std::uniform_real_distribution<double> j(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec3> pts;
        const int n = 5 + trial % 10;
        for (int i = 0; i < n; ++i) {
            const double a = 2 * std::numbers::pi * i / n;
            pts.emplace_back(0.1 * std::cos(a) + 0.02 * j(rng), 0.1 * std::sin(a) + 0.02 * j(rng), 0.01 * j(rng));
        }
        const CatmullRomLoop curve(pts);
        const auto& k = curve.knots();
        double knot_err = 0.0, tan_err = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            knot_err = std::max(knot_err, (curve.eval(i, k[i]) - pts[i]).norm());
            const std::size_t prev = (i + pts.size() - 1) % pts.size();
            const Vec3 left = curve.derivative(prev, k[prev + 1]);
            const Vec3 right = curve.derivative(i, k[i]);
            tan_err = std::max(tan_err, (left - right).norm() / right.norm());
        }
        c.expect(knot_err <= tol::knot, "knot interpolation " + fmt(knot_err));
        c.expect(tan_err <= tol::tangent_rel, "tangent agreement " + fmt(tan_err));
    }

    for (double t : {0.001, 0.004, 0.01}) {
        const auto m = testutil::share(primitives::grid_plate(0.5, 0.3, 10, 6));
        const auto sub = extract_cutout(m, HeatMap::uniform(*m, MapRole::skin, 1.0), 0.5);
        const SkinShell s = extrude(sub, t);
        const double area = surface_area(TriMesh(s.inner, s.faces));
        c.expect(std::abs(s.volume - area * t) <= tol::volume_rel * area * t,
                 "extrusion volume " + fmt(s.volume) + " vs " + fmt(area * t));
    }

    const auto groove = testutil::share(primitives::v_groove(0.02, 0.03, 4, 3, std::numbers::pi / 3));
    const auto sub = extract_cutout(groove, HeatMap::uniform(*groove, MapRole::skin, 1.0), 0.5);
    const SkinShell thick = extrude(sub, 0.012);
    const SkinShell thin = extrude(sub, 0.0012);
    c.expect(thick.solid.face_count() <= 2000, "oracle face bound");
    const auto hits = detect_self_intersections(thick);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (const auto& h : hits) pairs.emplace_back(h.first, h.second);
    c.expect(!hits.empty(), "thick V-groove flagged");
    c.expect(pairs == oracle::all_pairs_intersections(thick.solid), "thick V-groove matches all-pairs oracle");
    c.expect(detect_self_intersections(thin).empty(), "thin V-groove clear");
    c.expect(oracle::all_pairs_intersections(thin.solid).empty(), "thin V-groove clear under oracle");
    c.note(std::to_string(hits.size()) + " pairs on the thick groove");
    return c;
}

NoduleLayout layout_on_top(const std::vector<Vec3>& xy, double top) {
    NoduleLayout l;
    for (std::size_t i = 0; i < xy.size(); ++i) {
        Nodule n;
        n.id = std::uint32_t(i);
        n.position = Vec3(xy[i].x(), xy[i].y(), top);
        n.normal = Vec3(0, 0, 1);
        n.local_weight = 1.0;
        n.radius = 0.004;
        l.nodules.push_back(n);
    }
    return l;
}

// 5. Chain design.
Check criterion5() {
    Check c;
    const double t = 0.004;
    const std::vector<SkinShell> shells{flat_shell(0.3, 0.2, 30, 20, t)};
    FilamentSpec spec;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0.01, 0.29), uy(0.01, 0.19);
    std::uniform_int_distribution<int> count(4, 6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Vec3> pts;
        const int k = count(rng);
        while (int(pts.size()) < k) {
            const Vec3 p(ux(rng), uy(rng), 0);
            bool far = true;
            for (const auto& q : pts) far = far && (p - q).norm() >= spec.min_nodule_spacing;
            if (far) pts.push_back(p);
        }
        const auto layout = layout_on_top(pts, t);
        try {
            const auto chains = design_chains(shells, layout, spec);
            const auto& ch = chains.at(0);
            double shortfall = 0.0;
            for (std::size_t i = 1; i < ch.cumulative_resistances.size(); ++i) {
                const double step = ch.cumulative_resistances[i] - ch.cumulative_resistances[i - 1];
                shortfall = std::max(shortfall, spec.margin - step);
            }
            c.expect(shortfall <= tol::sum_rounding_kohm,
                     "cumulative step short of margin by " + fmt(shortfall) + " kOhm, trial " + std::to_string(trial));
            double worst = 0.0;
            for (std::size_t i = 0; i < ch.trace_polylines.size(); ++i) {
                const double r = polyline_length(ch.trace_polylines[i]) * spec.resistivity;
                worst = std::max(worst, std::abs(r - ch.segment_resistances[i]) / ch.segment_resistances[i]);
            }
            c.expect(worst <= tol::trace_rel, "routed length error " + fmt(worst) + ", trial " + std::to_string(trial));
        } catch (const Error& e) {
            c.expect(false, "trial " + std::to_string(trial) + ": " + e.what());
        }
    }

    FilamentSpec tight;
    tight.min_nodule_spacing = 0.009;
    const auto close = layout_on_top({Vec3(0.1, 0.1, 0), Vec3(0.108, 0.1, 0)}, t);
    bool chain_error = false;
    try {
        design_chains(shells, close, tight);
    } catch (const ChainError&) {
        chain_error = true;
    }
    c.expect(chain_error, "8 mm spacing is a chain error");
    tight.min_nodule_spacing = 0.008;
    bool floor_error = false;
    try {
        tight.validate();
    } catch (const ConfigError&) {
        floor_error = true;
    }
    c.expect(floor_error, "spacing below 9 mm is rejected");

    // Six nodules around a 300 x 200 mm link cover, 100 mm apart.
    const auto six = layout_on_top({Vec3(0.05, 0.05, 0), Vec3(0.15, 0.05, 0), Vec3(0.25, 0.05, 0), Vec3(0.05, 0.15, 0),
                                    Vec3(0.15, 0.15, 0), Vec3(0.25, 0.15, 0)},
                                   t);
    const double total = design_chains(shells, six, spec).at(0).total_resistance;
    c.expect(total >= tol::band_lo_kohm && total <= tol::band_hi_kohm, "six-nodule total " + fmt(total) + " kOhm");
    c.note("six-nodule total " + fmt(total) + " kOhm");
    return c;
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string("\"") + TACTSKIN_CLI + "\" " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 6. End-to-end determinism across runs, CLI and HTTP.
Check criterion6() {
    Check c;
    const auto config = load_config(golden() / "config.yaml");
    const auto a = run_pipeline(config);
    const auto b = run_pipeline(config);
    c.expect(a.manifest_json == b.manifest_json, "two in-process runs");

    const auto dir = testutil::scratch_dir("acceptance_cli");
    const int code = run_cli("generate -c \"" + (golden() / "config.yaml").string() + "\" --out \"" + (dir / "out").string() + "\"");
    c.expect(code == 0, "CLI exit code " + std::to_string(code));
    std::string cli_manifest;
    try {
        cli_manifest = read_file(dir / "out" / "manifest.json");
    } catch (const Error&) {
    }
    c.expect(cli_manifest == a.manifest_json, "CLI manifest equals in-process manifest");

    ServiceOptions o;
    o.asset_root = golden();
    Service service(o);
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);
    const nlohmann::json body{{"config", read_file(golden() / "config.yaml")}};
    std::string http_manifest;
    if (const auto r = client.Post("/v1/sessions", body.dump(), "application/json"); r && r->status == 201) {
        const auto id = nlohmann::json::parse(r->body).at("session").get<std::string>();
        const auto g = client.Post("/v1/sessions/" + id + "/generate", "{}", "application/json");
        c.expect(g && g->status == 200, "HTTP generate");
        if (const auto m = client.Get("/v1/sessions/" + id + "/manifest"); m && m->status == 200) http_manifest = m->body;
    }
    service.stop();
    c.expect(http_manifest == a.manifest_json, "HTTP manifest equals in-process manifest");
    c.expect(http_manifest == cli_manifest, "HTTP manifest equals CLI manifest");

    auto mesh = load_mesh(golden() / "plate.obj", MeshFormat::obj).mesh;
    auto verts = mesh.vertices();
    verts[17].z() += 1e-4;
    const auto mdir = testutil::scratch_dir("acceptance_mutated");
    std::filesystem::copy_file(golden() / "config.yaml", mdir / "config.yaml");
    save_mesh(mdir / "plate.obj", TriMesh(verts, mesh.faces()), MeshFormat::obj);
    const auto mutated = load_config(mdir / "config.yaml");
    ContactSource src;
    src.log_text = "";
    bool mismatch = false;
    try {
        optimize_from_manifest(load_inputs(mutated), mutated, a.manifest_json, src);
    } catch (const Error& e) {
        mismatch = e.kind() == ErrorKind::config && std::string(e.what()).find("checksum mismatch") != std::string::npos;
    }
    c.expect(mismatch, "mutated mesh reports a checksum mismatch");
    return c;
}

// 7. One optimization round with contacts in one patch.
Check criterion7() {
    Check c;
    const double d_min = 0.02;
    const double pre_weight = 0.5;
    // alpha = 2 * d_min / pre_weight = 0.08; faces must be smaller than
    // 3 alpha minus the radius where the kernel drops to 0.15.
    std::shared_ptr<const TriMesh> mesh;
    const SkinShell shell = flat_shell(1.0, 1.0, 60, 60, 0.004, &mesh);
    const std::vector<SkinShell> shells{shell};
    const HeatMap pre = HeatMap::uniform(*mesh, MapRole::density, pre_weight);
    const Vec3 patch_center(0.3, 0.4, 0.004);
    const double patch_radius = 0.06;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SamplingParams s;
        s.d_min = d_min;
        s.seed = seed;
        s.max_samples = 100000;
        const auto layout = assign_radii(sample_shells(shells, pre, s), s);
        std::ostringstream log;
        std::vector<Vec3> touched;
        double time = 0.0;
        for (const auto& n : layout.nodules) {
            if ((n.position - patch_center).norm() > patch_radius) continue;
            touched.push_back(n.position);
            for (int k = 0; k < 5; ++k) log << (time += 0.01) << " " << n.id << " 1\n";
        }
        c.expect(!touched.empty(), "patch has contacted nodules, seed " + std::to_string(seed));
        ContactSource src;
        src.log_text = log.str();
        RoundParams p;
        p.sampling = s;
        p.sampling.fill_tolerance = kOptimizedFillTolerance;
        p.heuristic.alpha = 0.0;
        const auto r = optimize_round(*mesh, shells, layout, src, p);
        const auto& rep = r.reports.at(0);
        const double alpha = rep.alpha;
        const double face_diag = std::sqrt(2.0) / 60.0;
        c.expect(face_diag < 3.0 * alpha - alpha * std::pow(1.0 / (0.15 * 0.15) - 1.0, 0.25), "grid fine enough for alpha");
        std::size_t far = 0;
        for (const auto& n : r.layout.nodules) {
            double best = 1e300;
            for (const auto& q : touched) best = std::min(best, (n.position - q).norm());
            far += best > 3.0 * alpha;
        }
        c.expect(far == 0, std::to_string(far) + " nodules beyond 3 alpha, seed " + std::to_string(seed));
        c.expect(rep.near_contact_after >= rep.near_contact_before,
                 "density near patch " + std::to_string(rep.near_contact_after) + " < " +
                     std::to_string(rep.near_contact_before) + ", seed " + std::to_string(seed));
        if (seed == 0) {
            c.note("alpha " + fmt(alpha) + ", near patch " + std::to_string(rep.near_contact_before) + " -> " +
                   std::to_string(rep.near_contact_after) + ", total " + std::to_string(rep.nodules_before) + " -> " +
                   std::to_string(rep.nodules_after));
        }
    }
    return c;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
        {"kernel exactness and heat map brute force", criterion1},
        {"SNR arithmetic and trial aggregation", criterion2},
        {"sampling correctness", criterion3},
        {"cutout, smoothing and extrusion", criterion4},
        {"chain design", criterion5},
        {"end-to-end determinism", criterion6},
        {"optimization round", criterion7},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        std::cout << (c.ok() ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first
                  << ", " << fmt(seconds_since(t0)) << " s): " << c.summary() << std::endl;
        failed += !c.ok();
    }
    return failed == 0 ? 0 : 1;
}
