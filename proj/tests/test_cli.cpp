#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "gareg/io.hpp"
#include "gareg/report.hpp"
#include "gareg/synth.hpp"

using namespace gareg;

namespace {

std::string cli_path() {
    const char* env = std::getenv("GAREG_CLI");
    REQUIRE_MESSAGE(env != nullptr, "GAREG_CLI must point at the gareg binary");
    return env;
}

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    const std::string out_path = "cli_stdout.tmp";
    const std::string err_path = "cli_stderr.tmp";
    const std::string command =
        cli_path() + " " + args + " > " + out_path + " 2> " + err_path;
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}

// Small, fast GA settings shared by the registration runs below.
const std::string kFastGa =
    " --downsample 250 --coarse-gens 12 --fine-gens 12";

void write_tiny_pair(const std::string& prefix) {
    PairSpec spec = default_pair_spec(77);
    spec.surface.point_count = 500;
    const SyntheticPair pair = make_pair(spec);
    save_cloud(pair.source, prefix + "_source.xyz", CloudFormat::Xyz);
    save_cloud(pair.target, prefix + "_target.xyz", CloudFormat::Xyz);
}

}  // namespace

TEST_CASE("no subcommand and bad flags exit with the usage code") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("register").exit_code == 2);           // missing positionals
    CHECK(run_cli("frobnicate in.xyz").exit_code == 2);  // unknown subcommand
    CHECK(run_cli("bench").exit_code == 2);              // --seed is required
}

TEST_CASE("--version prints the tool version") {
    const RunResult r = run_cli("--version");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find(kToolVersion) != std::string::npos);
}

TEST_CASE("missing and malformed inputs map to the documented exit codes") {
    const RunResult missing = run_cli("register no_such.xyz no_such2.xyz");
    CHECK(missing.exit_code == 3);
    CHECK(missing.err.find("no_such.xyz") != std::string::npos);

    {
        std::ofstream bad("bad_cloud.xyz");
        bad << "1 2 3\n4 broken 6\n";
    }
    {
        std::ofstream ok("ok_cloud.xyz");
        ok << "0 0 0\n1 0 0\n0 1 0\n";
    }
    const RunResult malformed = run_cli("register bad_cloud.xyz ok_cloud.xyz");
    CHECK(malformed.exit_code == 4);
    CHECK(malformed.err.find("bad_cloud.xyz:2") != std::string::npos);

    {
        std::ofstream nan_file("nan_cloud.xyz");
        nan_file << "0 0 nan\n";
    }
    CHECK(run_cli("register nan_cloud.xyz ok_cloud.xyz").exit_code == 4);

    // Degenerate geometry: registration needs non-empty clouds.
    {
        std::ofstream empty("empty_cloud.xyz");
        empty << "# nothing\n";
    }
    CHECK(run_cli("register empty_cloud.xyz ok_cloud.xyz" + kFastGa).exit_code == 5);

    for (const char* f : {"bad_cloud.xyz", "ok_cloud.xyz", "nan_cloud.xyz", "empty_cloud.xyz"})
        std::remove(f);
}

TEST_CASE("synth emits a loadable pair with a parseable truth file") {
    const RunResult r = run_cli("synth --seed 3 --points 400 --out-prefix cli_synth");
    CHECK(r.exit_code == 0);
    const PointCloud source = load_cloud("cli_synth_source.xyz", CloudFormat::Xyz);
    const PointCloud target = load_cloud("cli_synth_target.xyz", CloudFormat::Xyz);
    CHECK_FALSE(source.empty());
    CHECK_FALSE(target.empty());
    const RigidMotion truth = parse_motion(read_file("cli_synth_truth.txt"));
    CHECK(truth.rotation.beta == 57.0);
    for (const char* f : {"cli_synth_source.xyz", "cli_synth_target.xyz", "cli_synth_truth.txt"})
        std::remove(f);
}

TEST_CASE("register: determinism, reduced-mode echo, outputs" * doctest::timeout(300)) {
    write_tiny_pair("cli_pair");

    const std::string base = "register cli_pair_source.xyz cli_pair_target.xyz --seed 7" +
                             kFastGa + " --known-rotation 0 57 3";
    const RunResult run1 = run_cli(base + " --out cli_result1.txt --trace cli_trace.csv");
    CHECK(run1.exit_code == 0);
    const RunResult run2 = run_cli(base + " --out cli_result2.txt --threads 2");
    CHECK(run2.exit_code == 0);

    const std::string rec1 = read_file("cli_result1.txt");
    const std::string rec2 = read_file("cli_result2.txt");
    CHECK(deterministic_payload(rec1) == deterministic_payload(rec2));

    const RegistrationRecord record = parse_record(rec1);
    CHECK(record.reduced_mode);
    CHECK(record.known_rotation == EulerAngles{0, 57, 3});
    CHECK(record.seed == 7);
    CHECK(record.manifest.source_path == "cli_pair_source.xyz");
    CHECK(record.manifest.tool_version == kToolVersion);

    const std::string trace = read_file("cli_trace.csv");
    CHECK(trace.rfind("stage,generation,best_fitness_mm\n", 0) == 0);
    CHECK(trace.find("coarse,12,") != std::string::npos);

    // CSV row mode.
    const RunResult csv = run_cli(base + " --csv");
    CHECK(csv.exit_code == 0);
    CHECK(csv.out.rfind("reduced,", 0) == 0);

    // Aligned cloud export loads back with the source's size.
    const RunResult aligned =
        run_cli(base + " --save-aligned cli_aligned.ply --out cli_result3.txt");
    CHECK(aligned.exit_code == 0);
    const PointCloud aligned_cloud = load_cloud("cli_aligned.ply", CloudFormat::PlyAscii);
    const PointCloud source = load_cloud("cli_pair_source.xyz", CloudFormat::Xyz);
    CHECK(aligned_cloud.size() == source.size());

    for (const char* f : {"cli_pair_source.xyz", "cli_pair_target.xyz", "cli_result1.txt",
                          "cli_result2.txt", "cli_result3.txt", "cli_trace.csv",
                          "cli_aligned.ply"})
        std::remove(f);
}

TEST_CASE("ground-truth: identity marks give identity motion and zero RMS") {
    {
        std::ofstream cloud("gt_cloud.xyz");
        cloud << "0 0 0\n10 0 0\n0 10 0\n0 0 10\n5 5 5\n";
    }
    {
        std::ofstream pairs("gt_pairs.txt");
        pairs << "# identity landmarks\n";
        pairs << "0 0 0   0 0 0\n10 0 0  10 0 0\n0 10 0  0 10 0\n0 0 10  0 0 10\n";
    }
    const RunResult r = run_cli("ground-truth gt_cloud.xyz gt_cloud.xyz gt_pairs.txt");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("pairs: 4") != std::string::npos);
    CHECK(r.out.find("rotation_deg: 0 0 0") != std::string::npos);
    const auto rms_pos = r.out.find("rms_mm: ");
    REQUIRE(rms_pos != std::string::npos);
    CHECK(std::stod(r.out.substr(rms_pos + 8)) < 1e-9);

    // Too few pairs is a degenerate-input failure.
    {
        std::ofstream pairs("gt_pairs.txt");
        pairs << "0 0 0 0 0 0\n10 0 0 10 0 0\n";
    }
    CHECK(run_cli("ground-truth gt_cloud.xyz gt_cloud.xyz gt_pairs.txt").exit_code == 5);

    std::remove("gt_cloud.xyz");
    std::remove("gt_pairs.txt");
}

TEST_CASE("bench: repeats=1 gives one row per mode plus a two-row summary" *
          doctest::timeout(300)) {
    const RunResult r = run_cli(
        "bench --seed 11 --repeats 1 --points 400" + kFastGa +
        " --csv-out cli_bench.csv --summary-out cli_bench_summary.txt");
    CHECK(r.exit_code == 0);

    const auto trials = parse_trials_csv(read_file("cli_bench.csv"));
    REQUIRE(trials.size() == 2);
    CHECK_FALSE(trials[0].reduced_mode);
    CHECK(trials[1].reduced_mode);

    const std::string summary = read_file("cli_bench_summary.txt");
    CHECK(summary.find("full") != std::string::npos);
    CHECK(summary.find("reduced") != std::string::npos);
    CHECK(summary.find("known") != std::string::npos);

    std::remove("cli_bench.csv");
    std::remove("cli_bench_summary.txt");
}
