// gareg: rigid point-cloud registration via a two-stage genetic algorithm,
// with an ICP/least-squares ground-truth tool and a synthetic benchmark.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gareg/errors.hpp"
#include "gareg/genetic.hpp"
#include "gareg/icp.hpp"
#include "gareg/io.hpp"
#include "gareg/report.hpp"
#include "gareg/synth.hpp"

namespace {

using namespace gareg;

struct GaCliOptions {
    std::uint64_t seed = 0;
    std::string fitness = "mean";
    std::optional<double> overlap_threshold;
    std::size_t downsample = 2000;
    int coarse_gens = 250;
    int fine_gens = 250;
    int threads = 1;
};

void add_ga_options(CLI::App* cmd, GaCliOptions& opts) {
    cmd->add_option("--fitness", opts.fitness, "fitness aggregate: mean|median (default mean)")
        ->check(CLI::IsMember({"mean", "median"}));
    cmd->add_option("--overlap-threshold", opts.overlap_threshold,
                    "overlap distance threshold in mm (default: 2x median target NN spacing)");
    cmd->add_option("--downsample", opts.downsample,
                    "points per cloud used by the optimizer (default 2000)");
    cmd->add_option("--coarse-gens", opts.coarse_gens, "coarse GA generations (default 250)");
    cmd->add_option("--fine-gens", opts.fine_gens, "fine GA generations (default 250)");
    cmd->add_option("--threads", opts.threads, "worker threads for fitness evaluation");
}

RegisterOptions to_register_options(const GaCliOptions& cli) {
    RegisterOptions opts;
    opts.ga.seed = cli.seed;
    opts.ga.coarse_generations = cli.coarse_gens;
    opts.ga.fine_generations = cli.fine_gens;
    opts.fitness_kind =
        cli.fitness == "median" ? FitnessKind::MedianDistance : FitnessKind::MeanDistance;
    opts.overlap_threshold = cli.overlap_threshold;
    opts.downsample_target = cli.downsample;
    opts.threads = cli.threads;
    return opts;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty())
        std::cout << text;
    else
        atomic_write(path, text);
}

SurfaceShape shape_from_name(const std::string& name) {
    if (name == "wavy") return SurfaceShape::WavySheet;
    if (name == "sphere") return SurfaceShape::SpherePatch;
    if (name == "box") return SurfaceShape::Box;
    throw DegenerateConfigurationError("unknown shape: " + name);
}

struct SynthCliOptions {
    std::uint64_t seed = 0;
    std::string shape = "sphere";
    int points = 6000;
    double extent = 200.0;
    double overlap = 0.5;
    std::optional<double> noise;
    std::vector<double> rot;
    std::vector<double> trans;
};

void add_synth_options(CLI::App* cmd, SynthCliOptions& opts) {
    cmd->add_option("--shape", opts.shape, "surface shape: sphere|wavy|box (default sphere)")
        ->check(CLI::IsMember({"sphere", "wavy", "box"}));
    cmd->add_option("--points", opts.points, "surface sample count before windowing");
    cmd->add_option("--extent", opts.extent, "surface extent in mm");
    cmd->add_option("--overlap", opts.overlap, "shared fraction of each view, (0,1]");
    cmd->add_option("--noise", opts.noise,
                    "noise sigma in mm (default 0.2% of the surface diagonal)");
    cmd->add_option("--rot", opts.rot, "ground-truth rotation alpha beta psi in degrees")
        ->expected(3);
    cmd->add_option("--trans", opts.trans, "ground-truth translation x y z in mm")->expected(3);
}

PairSpec to_pair_spec(const SynthCliOptions& cli) {
    PairSpec spec = default_pair_spec(cli.seed);
    spec.surface.shape = shape_from_name(cli.shape);
    spec.surface.point_count = cli.points;
    spec.surface.extent = cli.extent;
    spec.overlap_fraction = cli.overlap;
    const double diag = bounding_box(generate_surface(spec.surface)).diagonal();
    spec.noise_sigma = cli.noise ? *cli.noise : 0.002 * diag;
    if (!cli.rot.empty()) spec.motion.rotation = {cli.rot[0], cli.rot[1], cli.rot[2]};
    if (!cli.trans.empty()) spec.motion.translation = {cli.trans[0], cli.trans[1], cli.trans[2]};
    if (cli.shape != "sphere" && cli.trans.empty())
        spec.motion.translation = Point3{0.16, 0.01, -0.25} * diag;
    return spec;
}

int cmd_register(const std::string& source_path, const std::string& target_path,
                 const GaCliOptions& ga_cli, const std::vector<double>& known_rotation,
                 const std::string& out_path, bool csv, const std::string& aligned_path,
                 const std::string& trace_path) {
    const PointCloud source = load_cloud(source_path, format_for_path(source_path));
    const PointCloud target = load_cloud(target_path, format_for_path(target_path));

    const SearchMode mode =
        known_rotation.empty()
            ? SearchMode::full()
            : SearchMode::reduced({known_rotation[0], known_rotation[1], known_rotation[2]});
    const RegistrationResult result =
        register_clouds(source, target, mode, to_register_options(ga_cli));

    RunManifest manifest;
    manifest.source_path = source_path;
    manifest.target_path = target_path;
    manifest.source_hash = file_hash_hex(source_path);
    manifest.target_hash = file_hash_hex(target_path);
    manifest.tool_version = kToolVersion;

    const RegistrationRecord record = make_record(result, manifest);
    const std::string text = serialize_record(record);
    if (!out_path.empty()) atomic_write(out_path, text);
    if (csv)
        std::cout << record_csv_row(record);
    else if (out_path.empty())
        std::cout << text;

    if (!aligned_path.empty())
        save_cloud(apply_motion(result.motion, source), aligned_path,
                   format_for_path(aligned_path));
    if (!trace_path.empty()) atomic_write(trace_path, trace_csv(result));
    return 0;
}

int cmd_ground_truth(const std::string& source_path, const std::string& target_path,
                     const std::string& pairs_path, const IcpConfig& config,
                     const std::string& out_path) {
    const PointCloud source = load_cloud(source_path, format_for_path(source_path));
    const PointCloud target = load_cloud(target_path, format_for_path(target_path));
    const std::vector<CorrespondencePair> pairs = load_correspondences(pairs_path);

    const RigidMotion fitted = fit_rigid(pairs);
    const IcpResult refined = icp_refine(source, target, fitted, config);

    std::ostringstream out;
    char buf[128];
    out << "gareg_ground_truth_v1\n";
    out << "pairs: " << pairs.size() << '\n';
    out << "fit:\n";
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", fitted.rotation.alpha,
                  fitted.rotation.beta, fitted.rotation.psi);
    out << "  rotation_deg: " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", fitted.translation.x,
                  fitted.translation.y, fitted.translation.z);
    out << "  translation_mm: " << buf << '\n';
    out << "refined:\n";
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", refined.motion.rotation.alpha,
                  refined.motion.rotation.beta, refined.motion.rotation.psi);
    out << "  rotation_deg: " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", refined.motion.translation.x,
                  refined.motion.translation.y, refined.motion.translation.z);
    out << "  translation_mm: " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", refined.rms);
    out << "  rms_mm: " << buf << '\n';
    out << "  iterations: " << refined.iterations << '\n';
    emit(out.str(), out_path);
    return 0;
}

int cmd_bench(const SynthCliOptions& synth_cli, const GaCliOptions& ga_cli, int repeats,
              const std::string& modes_name, const std::string& csv_path,
              const std::string& summary_path) {
    const PairSpec spec = to_pair_spec(synth_cli);

    std::vector<SearchMode> modes;
    if (modes_name == "full" || modes_name == "both") modes.push_back(SearchMode::full());
    if (modes_name == "reduced" || modes_name == "both")
        modes.push_back(SearchMode::reduced(spec.motion.rotation));

    RegisterOptions options = to_register_options(ga_cli);
    options.ga.seed = synth_cli.seed;

    const std::vector<TrialOutcome> trials = run_trials(spec, modes, options, repeats);
    emit(trials_csv(trials), csv_path);
    emit(format_summary_table(summarize_trials(trials)), summary_path);
    return 0;
}

int cmd_synth(const SynthCliOptions& synth_cli, const std::string& prefix,
              const std::string& format_name) {
    const PairSpec spec = to_pair_spec(synth_cli);
    const SyntheticPair pair = make_pair(spec);
    const CloudFormat format =
        format_name == "ply" ? CloudFormat::PlyAscii : CloudFormat::Xyz;
    const std::string ext = format_name == "ply" ? ".ply" : ".xyz";

    save_cloud(pair.source, prefix + "_source" + ext, format);
    save_cloud(pair.target, prefix + "_target" + ext, format);
    atomic_write(prefix + "_truth.txt", serialize_motion(pair.ground_truth));
    std::cout << "wrote " << prefix << "_source" << ext << " (" << pair.source.size()
              << " points), " << prefix << "_target" << ext << " (" << pair.target.size()
              << " points), " << prefix << "_truth.txt\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rigid point-cloud registration with a coarse+fine genetic algorithm"};
    app.set_version_flag("--version", std::string("gareg ") + gareg::kToolVersion);
    app.require_subcommand(1);

    // register
    auto* reg = app.add_subcommand("register", "align a source cloud onto a target cloud");
    std::string reg_source, reg_target, reg_out, reg_aligned, reg_trace;
    std::vector<double> reg_known;
    bool reg_csv = false;
    GaCliOptions reg_ga;
    reg->add_option("source", reg_source, "source cloud (.xyz or .ply)")->required();
    reg->add_option("target", reg_target, "target cloud (.xyz or .ply)")->required();
    reg->add_option("--known-rotation", reg_known,
                    "a-priori rotation alpha beta psi in degrees (reduced mode)")
        ->expected(3);
    reg->add_option("--seed", reg_ga.seed, "random seed (default 0)");
    add_ga_options(reg, reg_ga);
    reg->add_option("--out", reg_out, "write the result record to this file");
    reg->add_flag("--csv", reg_csv, "print a result-table CSV row instead of the record");
    reg->add_option("--save-aligned", reg_aligned, "write the transformed source cloud here");
    reg->add_option("--trace", reg_trace, "write the per-generation fitness trace CSV here");

    // ground-truth
    auto* gt = app.add_subcommand("ground-truth",
                                  "fit a motion from marked correspondences and refine with ICP");
    std::string gt_source, gt_target, gt_pairs, gt_out;
    gareg::IcpConfig gt_config;
    std::optional<double> gt_cutoff;
    gt->add_option("source", gt_source, "source cloud")->required();
    gt->add_option("target", gt_target, "target cloud")->required();
    gt->add_option("correspondences", gt_pairs,
                   "text file: one `sx sy sz tx ty tz` pair per line")
        ->required();
    gt->add_option("--max-iters", gt_config.max_iterations, "ICP iteration cap (default 50)");
    gt->add_option("--epsilon", gt_config.convergence_epsilon,
                   "ICP convergence threshold in mm (default 1e-4)");
    gt->add_option("--cutoff", gt_cutoff, "drop correspondences beyond this distance in mm");
    gt->add_option("--out", gt_out, "write the report to this file");

    // bench
    auto* bench = app.add_subcommand("bench", "run seeded synthetic registration trials");
    SynthCliOptions bench_synth;
    GaCliOptions bench_ga;
    int bench_repeats = 10;
    std::string bench_modes = "both", bench_csv_out, bench_summary_out;
    bench->add_option("--seed", bench_synth.seed, "benchmark seed")->required();
    bench->add_option("--repeats", bench_repeats, "pairs per mode (default 10)");
    add_synth_options(bench, bench_synth);
    bench->add_option("--modes", bench_modes, "full|reduced|both (default both)")
        ->check(CLI::IsMember({"full", "reduced", "both"}));
    add_ga_options(bench, bench_ga);
    bench->add_option("--csv-out", bench_csv_out, "write per-trial CSV here (default stdout)");
    bench->add_option("--summary-out", bench_summary_out,
                      "write the summary table here (default stdout)");

    // synth
    auto* synth = app.add_subcommand("synth", "emit a synthetic pair with known ground truth");
    SynthCliOptions synth_cli;
    std::string synth_prefix, synth_format = "xyz";
    synth->add_option("--seed", synth_cli.seed, "generation seed (default 0)");
    add_synth_options(synth, synth_cli);
    synth->add_option("--out-prefix", synth_prefix, "output path prefix")->required();
    synth->add_option("--format", synth_format, "xyz|ply (default xyz)")
        ->check(CLI::IsMember({"xyz", "ply"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "gareg: error code=2: " << e.what() << '\n';
        return 2;
    }

    try {
        if (reg->parsed())
            return cmd_register(reg_source, reg_target, reg_ga, reg_known, reg_out, reg_csv,
                                reg_aligned, reg_trace);
        if (gt->parsed()) {
            gt_config.correspondence_cutoff = gt_cutoff;
            return cmd_ground_truth(gt_source, gt_target, gt_pairs, gt_config, gt_out);
        }
        if (bench->parsed())
            return cmd_bench(bench_synth, bench_ga, bench_repeats, bench_modes, bench_csv_out,
                             bench_summary_out);
        if (synth->parsed()) return cmd_synth(synth_cli, synth_prefix, synth_format);
        std::cerr << "gareg: error code=2: no subcommand\n";
        return 2;
    } catch (const gareg::Error& e) {
        std::cerr << "gareg: error code=" << static_cast<int>(e.code()) << ": " << e.what()
                  << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "gareg: error code=6: " << e.what() << '\n';
        return 6;
    }
}
