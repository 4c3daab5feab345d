// tactskin: command line front end for the skin design pipeline.

#include "tactskin/export.hpp"
#include "tactskin/mesh_io.hpp"
#include "tactskin/pipeline.hpp"
#include "tactskin/service.hpp"
#include "tactskin/snr.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>
#include <sstream>

#include <pthread.h>

namespace {

using namespace tactskin;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGeometry = 3;
constexpr int kExitChain = 4;
constexpr int kExitOther = 1;

int exit_code(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::parse:
    case ErrorKind::config:
    case ErrorKind::analysis: return kExitConfig;
    case ErrorKind::geometry: return kExitGeometry;
    case ErrorKind::chain: return kExitChain;
    }
    return kExitOther;
}

// Command line values that override the config file when given.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> scale;
    std::optional<std::string> out;
    std::optional<double> cutoff_tolerance;
    std::optional<double> thickness;
    std::optional<double> d_min;
    std::optional<double> fill_tolerance;
    std::optional<double> radius_factor;
    std::optional<std::size_t> max_samples;
    bool allow_broken = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Sampling seed");
        cmd->add_option("--scale", scale, "Mesh unit scale to meters (e.g. 0.001 for mm STL)");
        cmd->add_option("--out", out, "Output directory");
        cmd->add_option("--cutoff-tolerance", cutoff_tolerance, "Skin map cutoff");
        cmd->add_option("--thickness", thickness, "Shell thickness (m)");
        cmd->add_option("--minimum-distribution-distance", d_min, "d_min (m)");
        cmd->add_option("--fill-tolerance", fill_tolerance, "Density below this is left empty");
        cmd->add_option("--radius-factor", radius_factor, "Nodule radius as a fraction of local spacing");
        cmd->add_option("--max-samples", max_samples, "Sample cap; the rejection budget is 30x this");
        cmd->add_flag("--allow-broken", allow_broken, "Keep self-intersecting shells");
    }

    void apply(PipelineConfig& c) const {
        if (seed) c.sampling.seed = *seed;
        if (scale) c.scale = *scale;
        if (out) c.output_dir = *out;
        if (cutoff_tolerance) c.cutout.cutoff_tolerance = *cutoff_tolerance;
        if (thickness) c.cutout.thickness = *thickness;
        if (d_min) c.sampling.d_min = *d_min;
        if (fill_tolerance) c.sampling.fill_tolerance = *fill_tolerance;
        if (radius_factor) c.sampling.radius_factor = *radius_factor;
        if (max_samples) c.sampling.max_samples = *max_samples;
        if (allow_broken) c.allow_broken = true;
        c.validate();
    }
};

void print_summary(const ArtifactSet& a, const std::filesystem::path& dir) {
    std::cout << "shells: " << a.shells.size() << "\n";
    std::cout << "nodules: " << a.layout.size() << "\n";
    double total = 0.0;
    for (const auto& c : a.chains) total += c.total_resistance;
    std::cout << "total resistance (kOhm): " << total << "\n";
    for (const auto& w : a.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "artifacts: " << dir.string() << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tactile skin design toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version());

    std::string config_path;
    Overrides gen_over;
    auto* generate = app.add_subcommand("generate", "Run cutout, sampling, chain design and export");
    generate->add_option("-c,--config", config_path, "YAML configuration")->required()->check(CLI::ExistingFile);
    gen_over.add_to(generate);

    Overrides opt_over;
    std::string manifest_path, log_path;
    bool onsets = false;
    auto* optimize = app.add_subcommand("optimize", "Re-sample from contact data against an existing manifest");
    optimize->add_option("-c,--config", config_path, "YAML configuration")->required()->check(CLI::ExistingFile);
    optimize->add_option("-m,--manifest", manifest_path, "Manifest of the layout to optimize")
        ->required()
        ->check(CLI::ExistingFile);
    optimize->add_option("--log", log_path, "Contact log (overrides the config contact source)")->check(CLI::ExistingFile);
    optimize->add_flag("--onsets", onsets, "Count contact onsets instead of in-contact samples");
    opt_over.add_to(optimize);

    std::string body_path;
    auto* characterize = app.add_subcommand("characterize", "Print nodule count, volume, total R and mean radius");
    characterize->add_option("-m,--manifest", manifest_path, "Manifest from generate")->required()->check(CLI::ExistingFile);
    characterize->add_option("-b,--body", body_path, "Body STL")->required()->check(CLI::ExistingFile);

    std::vector<std::string> trials;
    std::string unit = "unit";
    TouchProtocol protocol;
    bool as_json = false;
    auto* snr_cmd = app.add_subcommand("snr", "Pairwise minimum SNR from touch captures");
    snr_cmd->add_option("-t,--trial", trials, "Comma separated trace files of one trial (repeatable)")->required();
    snr_cmd->add_option("--unit", unit, "Unit name for the table");
    snr_cmd->add_option("--unpressed", protocol.unpressed, "Untouched phase length (s)");
    snr_cmd->add_option("--pressed", protocol.pressed, "Touched phase length (s)");
    snr_cmd->add_option("--released", protocol.released, "Released phase length (s)");
    snr_cmd->add_option("--guard", protocol.guard, "Seconds trimmed at each phase boundary");
    snr_cmd->add_flag("--json", as_json, "Print the result as JSON");

    ServiceOptions service_opts;
    auto* serve = app.add_subcommand("serve", "Run the local HTTP service for the painter UI");
    serve->add_option("--host", service_opts.host, "Bind address");
    serve->add_option("-p,--port", service_opts.port, "Port, 0 picks a free one")->check(CLI::Range(0, 65535));
    serve->add_option("--root", service_opts.asset_root, "Asset root for session paths")->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*generate) {
            PipelineConfig config = load_config(config_path);
            gen_over.apply(config);
            const ArtifactSet a = run_pipeline(config);
            write_artifacts(a, config.output_dir);
            print_summary(a, config.output_dir);
        } else if (*optimize) {
            PipelineConfig config = load_config(config_path);
            opt_over.apply(config);
            ContactSource source;
            if (!log_path.empty()) {
                source.log_text = read_file(log_path);
                source.onsets = onsets;
            } else if (auto s = config_contact_source(config)) {
                source = *s;
                if (onsets) source.onsets = true;
            } else {
                throw ConfigError("no contact source: pass --log or set contact in the config");
            }
            const PipelineInputs inputs = load_inputs(config);
            const ArtifactSet a = optimize_from_manifest(inputs, config, read_file(manifest_path), source);
            write_artifacts(a, config.output_dir);
            print_summary(a, config.output_dir);
        } else if (*characterize) {
            const auto c = tactskin::characterize(read_file(manifest_path), read_file(body_path));
            std::cout << format_characterization(c);
        } else if (*snr_cmd) {
            std::vector<SnrReport> reports;
            std::vector<double> minima;
            for (const auto& trial : trials) {
                std::vector<PhaseStats> stats;
                std::vector<std::uint32_t> ids;
                for (const auto& path : split_list(trial)) {
                    const CaptureTrace t = load_trace(path);
                    stats.push_back(segment_trace(t, protocol));
                    ids.push_back(t.nodule_id);
                }
                reports.push_back(pairwise_min_snr(stats, ids));
                minima.push_back(reports.back().min_snr);
            }
            const TrialAggregate agg = aggregate_trials(minima);
            if (as_json) {
                std::cout << trials_json(reports, agg);
            } else {
                std::cout << trials_table(unit, reports, agg);
            }
        } else if (*serve) {
            // Block the stop signals before the server threads start so only
            // sigwait sees them.
            sigset_t stop_signals;
            sigemptyset(&stop_signals);
            sigaddset(&stop_signals, SIGINT);
            sigaddset(&stop_signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
            Service service(service_opts);
            const int port = service.start();
            std::cout << "listening on http://" << service_opts.host << ":" << port << "/v1" << std::endl;
            int sig = 0;
            sigwait(&stop_signals, &sig);
            service.stop();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOk;
}
