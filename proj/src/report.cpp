#include "gareg/report.hpp"

#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "gareg/errors.hpp"

namespace gareg {

const char* const kToolVersion = "0.1.0";

namespace {

constexpr const char* kMagic = "gareg_result_v1";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_triple(double a, double b, double c) {
    return fmt(a) + " " + fmt(b) + " " + fmt(c);
}

}  // namespace

RegistrationRecord make_record(const RegistrationResult& result, const RunManifest& manifest) {
    RegistrationRecord record;
    record.reduced_mode = result.reduced_mode;
    record.known_rotation = result.known_rotation;
    record.seed = result.options.ga.seed;
    record.motion = result.motion;
    record.fitness_kind = result.options.fitness_kind;
    record.score_mm = result.fitness.score;
    record.overlap_percent = result.fitness.overlap_percent;
    record.overlap_threshold_mm = result.overlap_threshold_mm;
    record.generations_coarse = result.generations_coarse;
    record.generations_fine = result.generations_fine;
    record.downsample = result.options.downsample_target;
    record.threads = result.options.threads;
    record.ga = result.options.ga;
    record.manifest = manifest;
    record.wall_time_seconds = result.wall_time_seconds;
    return record;
}

std::string serialize_record(const RegistrationRecord& record) {
    std::ostringstream out;
    out << kMagic << '\n';
    out << "mode: " << (record.reduced_mode ? "reduced" : "full") << '\n';
    if (record.reduced_mode)
        out << "known_rotation_deg: "
            << fmt_triple(record.known_rotation.alpha, record.known_rotation.beta,
                          record.known_rotation.psi)
            << '\n';
    out << "seed: " << record.seed << '\n';
    out << "motion:\n";
    out << "  translation_mm: "
        << fmt_triple(record.motion.translation.x, record.motion.translation.y,
                      record.motion.translation.z)
        << '\n';
    out << "  rotation_deg: "
        << fmt_triple(record.motion.rotation.alpha, record.motion.rotation.beta,
                      record.motion.rotation.psi)
        << '\n';
    out << "fitness:\n";
    out << "  kind: " << (record.fitness_kind == FitnessKind::MeanDistance ? "mean" : "median")
        << '\n';
    out << "  score_mm: " << fmt(record.score_mm) << '\n';
    out << "  overlap_percent: " << fmt(record.overlap_percent) << '\n';
    out << "  overlap_threshold_mm: " << fmt(record.overlap_threshold_mm) << '\n';
    out << "generations:\n";
    out << "  coarse: " << record.generations_coarse << '\n';
    out << "  fine: " << record.generations_fine << '\n';
    out << "  total: " << record.generations_coarse + record.generations_fine << '\n';
    out << "config:\n";
    out << "  downsample: " << record.downsample << '\n';
    out << "  coarse_population: " << record.ga.coarse_population << '\n';
    out << "  coarse_generations: " << record.ga.coarse_generations << '\n';
    out << "  fine_population: " << record.ga.fine_population << '\n';
    out << "  fine_generations: " << record.ga.fine_generations << '\n';
    out << "  coarse_mutation_prob: " << fmt(record.ga.coarse_mutation_prob) << '\n';
    out << "  fine_mutation_prob_initial: " << fmt(record.ga.fine_mutation_prob_initial) << '\n';
    out << "  schedule_period: " << record.ga.schedule_period << '\n';
    out << "  schedule_prob_increment: " << fmt(record.ga.schedule_prob_increment) << '\n';
    out << "  schedule_step_decay: " << fmt(record.ga.schedule_step_decay) << '\n';
    out << "  elite_count: " << record.ga.elite_count << '\n';
    out << "  fine_crossover_offspring: " << record.ga.fine_crossover_offspring << '\n';
    out << "  fine_mutation_only_offspring: " << record.ga.fine_mutation_only_offspring << '\n';
    out << "  stagnation_window: " << record.ga.stagnation_window << '\n';
    out << "  stagnation_epsilon: " << fmt(record.ga.stagnation_epsilon) << '\n';
    if (!record.manifest.empty()) {
        out << "inputs:\n";
        out << "  source: " << record.manifest.source_path << '\n';
        out << "  source_fnv64: " << record.manifest.source_hash << '\n';
        out << "  target: " << record.manifest.target_path << '\n';
        out << "  target_fnv64: " << record.manifest.target_hash << '\n';
        out << "  tool_version: " << record.manifest.tool_version << '\n';
    }
    // Execution details sit outside the deterministic payload: wall time
    // varies run to run and the thread count must not affect results.
    out << "runtime:\n";
    out << "  threads: " << record.threads << '\n';
    out << "  wall_time_s: " << fmt(record.wall_time_seconds) << '\n';
    return out.str();
}

namespace {

struct RecordReader {
    // section -> key -> value; top-level keys live under the "" section.
    std::unordered_map<std::string, std::unordered_map<std::string, std::string>> values;

    const std::string* find(const std::string& section, const std::string& key) const {
        const auto sec = values.find(section);
        if (sec == values.end()) return nullptr;
        const auto it = sec->second.find(key);
        return it == sec->second.end() ? nullptr : &it->second;
    }
    std::string require(const std::string& section, const std::string& key) const {
        const std::string* v = find(section, key);
        if (!v)
            throw ParseError("result record: missing '" +
                             (section.empty() ? key : section + "." + key) + "'");
        return *v;
    }
};

RecordReader read_sections(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw ParseError("result record: bad or missing magic line");

    RecordReader reader;
    std::string section;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const bool indented = line.size() >= 2 && line[0] == ' ' && line[1] == ' ';
        std::string body = indented ? line.substr(2) : line;
        const auto colon = body.find(':');
        if (colon == std::string::npos)
            throw ParseError("result record line " + std::to_string(line_no) + ": expected ':'");
        std::string key = body.substr(0, colon);
        std::string value = body.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.erase(0, 1);
        if (!indented && value.empty()) {
            section = key;
        } else {
            reader.values[indented ? section : ""][key] = value;
        }
    }
    return reader;
}

void parse_triple(const std::string& value, double& a, double& b, double& c,
                  const std::string& what) {
    std::istringstream ss(value);
    if (!(ss >> a >> b >> c)) throw ParseError("result record: malformed triple in " + what);
}

double to_double(const std::string& value, const std::string& what) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw ParseError("result record: bad number in " + what);
    }
}

int to_int(const std::string& value, const std::string& what) {
    try {
        return std::stoi(value);
    } catch (const std::exception&) {
        throw ParseError("result record: bad integer in " + what);
    }
}

}  // namespace

RegistrationRecord parse_record(const std::string& text) {
    const RecordReader reader = read_sections(text);
    RegistrationRecord record;

    const std::string mode = reader.require("", "mode");
    if (mode != "full" && mode != "reduced")
        throw ParseError("result record: mode must be full or reduced");
    record.reduced_mode = mode == "reduced";
    if (record.reduced_mode)
        parse_triple(reader.require("", "known_rotation_deg"), record.known_rotation.alpha,
                     record.known_rotation.beta, record.known_rotation.psi, "known_rotation_deg");
    try {
        record.seed = std::stoull(reader.require("", "seed"));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("result record: bad seed");
    }

    parse_triple(reader.require("motion", "translation_mm"), record.motion.translation.x,
                 record.motion.translation.y, record.motion.translation.z, "translation_mm");
    parse_triple(reader.require("motion", "rotation_deg"), record.motion.rotation.alpha,
                 record.motion.rotation.beta, record.motion.rotation.psi, "rotation_deg");

    const std::string kind = reader.require("fitness", "kind");
    if (kind != "mean" && kind != "median")
        throw ParseError("result record: fitness kind must be mean or median");
    record.fitness_kind = kind == "mean" ? FitnessKind::MeanDistance : FitnessKind::MedianDistance;
    record.score_mm = to_double(reader.require("fitness", "score_mm"), "score_mm");
    record.overlap_percent =
        to_double(reader.require("fitness", "overlap_percent"), "overlap_percent");
    record.overlap_threshold_mm =
        to_double(reader.require("fitness", "overlap_threshold_mm"), "overlap_threshold_mm");

    record.generations_coarse = to_int(reader.require("generations", "coarse"), "generations");
    record.generations_fine = to_int(reader.require("generations", "fine"), "generations");

    record.downsample =
        static_cast<std::size_t>(to_int(reader.require("config", "downsample"), "downsample"));
    record.ga.coarse_population = to_int(reader.require("config", "coarse_population"), "config");
    record.ga.coarse_generations =
        to_int(reader.require("config", "coarse_generations"), "config");
    record.ga.fine_population = to_int(reader.require("config", "fine_population"), "config");
    record.ga.fine_generations = to_int(reader.require("config", "fine_generations"), "config");
    record.ga.coarse_mutation_prob =
        to_double(reader.require("config", "coarse_mutation_prob"), "config");
    record.ga.fine_mutation_prob_initial =
        to_double(reader.require("config", "fine_mutation_prob_initial"), "config");
    record.ga.schedule_period = to_int(reader.require("config", "schedule_period"), "config");
    record.ga.schedule_prob_increment =
        to_double(reader.require("config", "schedule_prob_increment"), "config");
    record.ga.schedule_step_decay =
        to_double(reader.require("config", "schedule_step_decay"), "config");
    record.ga.elite_count = to_int(reader.require("config", "elite_count"), "config");
    record.ga.fine_crossover_offspring =
        to_int(reader.require("config", "fine_crossover_offspring"), "config");
    record.ga.fine_mutation_only_offspring =
        to_int(reader.require("config", "fine_mutation_only_offspring"), "config");
    record.ga.stagnation_window = to_int(reader.require("config", "stagnation_window"), "config");
    record.ga.stagnation_epsilon =
        to_double(reader.require("config", "stagnation_epsilon"), "config");
    record.ga.seed = record.seed;

    if (reader.find("inputs", "source")) {
        record.manifest.source_path = reader.require("inputs", "source");
        record.manifest.source_hash = reader.require("inputs", "source_fnv64");
        record.manifest.target_path = reader.require("inputs", "target");
        record.manifest.target_hash = reader.require("inputs", "target_fnv64");
        record.manifest.tool_version = reader.require("inputs", "tool_version");
    }

    record.threads = to_int(reader.require("runtime", "threads"), "threads");
    record.wall_time_seconds =
        to_double(reader.require("runtime", "wall_time_s"), "wall_time_s");
    return record;
}

std::string deterministic_payload(const std::string& record_text) {
    std::istringstream in(record_text);
    std::ostringstream out;
    std::string line;
    bool in_timing = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != ' ') in_timing = line == "runtime:";
        if (!in_timing) out << line << '\n';
    }
    return out.str();
}

std::string serialize_motion(const RigidMotion& motion) {
    std::ostringstream out;
    out << "gareg_motion_v1\n";
    out << "rotation_deg: "
        << fmt_triple(motion.rotation.alpha, motion.rotation.beta, motion.rotation.psi) << '\n';
    out << "translation_mm: "
        << fmt_triple(motion.translation.x, motion.translation.y, motion.translation.z) << '\n';
    return out.str();
}

RigidMotion parse_motion(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "gareg_motion_v1")
        throw ParseError("motion file: bad or missing magic line");
    RigidMotion motion;
    bool have_rot = false, have_trans = false;
    while (std::getline(in, line)) {
        if (line.rfind("rotation_deg:", 0) == 0) {
            parse_triple(line.substr(13), motion.rotation.alpha, motion.rotation.beta,
                         motion.rotation.psi, "rotation_deg");
            have_rot = true;
        } else if (line.rfind("translation_mm:", 0) == 0) {
            parse_triple(line.substr(15), motion.translation.x, motion.translation.y,
                         motion.translation.z, "translation_mm");
            have_trans = true;
        }
    }
    if (!have_rot || !have_trans) throw ParseError("motion file: missing rotation or translation");
    return motion;
}

std::string record_csv_row(const RegistrationRecord& record) {
    std::ostringstream out;
    out << (record.reduced_mode ? "reduced" : "full") << ',' << fmt(record.motion.translation.x)
        << ',' << fmt(record.motion.translation.y) << ',' << fmt(record.motion.translation.z)
        << ',' << fmt(record.motion.rotation.alpha) << ',' << fmt(record.motion.rotation.beta)
        << ',' << fmt(record.motion.rotation.psi) << ',' << fmt(record.overlap_percent) << '\n';
    return out.str();
}

std::string trace_csv(const RegistrationResult& result) {
    std::ostringstream out;
    out << "stage,generation,best_fitness_mm\n";
    for (const TraceEntry& entry : result.coarse_trace.entries)
        out << "coarse," << entry.generation << ',' << fmt(entry.best_fitness) << '\n';
    for (const TraceEntry& entry : result.fine_trace.entries)
        out << "fine," << entry.generation << ',' << fmt(entry.best_fitness) << '\n';
    return out.str();
}

}  // namespace gareg
