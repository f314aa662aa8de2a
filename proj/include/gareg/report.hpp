#pragma once

#include <string>

#include "gareg/genetic.hpp"

namespace gareg {

struct RunManifest {
    std::string source_path;
    std::string target_path;
    std::string source_hash;  // fnv64 of the input bytes
    std::string target_hash;
    std::string tool_version;

    bool empty() const { return source_path.empty() && target_path.empty(); }
    bool operator==(const RunManifest&) const = default;
};

// The serializable subset of a registration run. Everything here except
// the timing field is a pure function of (inputs, config, seed); two runs
// with an equal manifest produce an equal deterministic payload.
struct RegistrationRecord {
    bool reduced_mode = false;
    EulerAngles known_rotation;
    std::uint64_t seed = 0;
    RigidMotion motion;
    FitnessKind fitness_kind = FitnessKind::MeanDistance;
    double score_mm = 0.0;
    double overlap_percent = 0.0;
    double overlap_threshold_mm = 0.0;
    int generations_coarse = 0;
    int generations_fine = 0;
    std::size_t downsample = 2000;
    int threads = 1;
    GaConfig ga;
    RunManifest manifest;
    double wall_time_seconds = 0.0;

    bool operator==(const RegistrationRecord&) const = default;
};

RegistrationRecord make_record(const RegistrationResult& result, const RunManifest& manifest);

// Key/value text document; doubles printed with 17 significant digits so
// parse(serialize(r)) == r exactly.
std::string serialize_record(const RegistrationRecord& record);
RegistrationRecord parse_record(const std::string& text);

// The record with its runtime section (threads, wall time) removed: the
// byte-comparable part.
std::string deterministic_payload(const std::string& record_text);

// Small standalone motion document, used for synthetic ground-truth files.
std::string serialize_motion(const RigidMotion& motion);
RigidMotion parse_motion(const std::string& text);

// One CSV row shaped like the per-view result tables:
// mode,x,y,z,alpha,beta,psi,overlap_percent
std::string record_csv_row(const RegistrationRecord& record);

// stage,generation,best_fitness_mm rows for both GA stages.
std::string trace_csv(const RegistrationResult& result);

extern const char* const kToolVersion;

}  // namespace gareg
