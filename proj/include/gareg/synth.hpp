#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gareg/genetic.hpp"
#include "gareg/geometry.hpp"

namespace gareg {

enum class SurfaceShape {
    WavySheet,    // z = 0.1*extent*sin(2*pi*x/extent)*cos(2*pi*y/extent)
    SpherePatch,  // hemisphere cap of radius extent/2, centered at the origin
    Box,          // three faces of an axis-aligned box with edge extent
};

std::string surface_shape_name(SurfaceShape shape);

struct SurfaceSpec {
    SurfaceShape shape = SurfaceShape::SpherePatch;
    double extent = 200.0;  // mm
    int point_count = 6000;
    std::uint64_t seed = 0;
};

struct PairSpec {
    SurfaceSpec surface;
    RigidMotion motion;  // ground truth, applied to the second view
    double overlap_fraction = 0.5;  // shared fraction of each view, in (0, 1]
    double noise_sigma = 0.0;       // mm, isotropic Gaussian per retained point
    std::uint64_t seed = 0;
};

struct SyntheticPair {
    PointCloud source;
    PointCloud target;
    RigidMotion ground_truth;
};

PointCloud generate_surface(const SurfaceSpec& spec);

// Two overlapping views of one surface. Views are periodic windows over
// the surface's primary parameter (interleaved sectors on the sphere's
// azimuth) sized so the shared region is overlap_fraction of each view;
// each view gets an independent noise stream, and the ground-truth motion
// is applied to the second view.
SyntheticPair make_pair(const PairSpec& spec);

// The default benchmark pair: sphere patch at desk scale, rotation
// (0, 57, 3) degrees, translation ~30% of the surface bounding-box
// diagonal, 50% overlap, noise sigma 0.2% of the diagonal.
PairSpec default_pair_spec(std::uint64_t seed);

struct TrialOutcome {
    bool reduced_mode = false;
    std::uint64_t seed = 0;  // GA seed used for this trial
    Point3 translation_error_mm;      // per-axis absolute error
    double translation_error_norm = 0.0;
    EulerAngles rotation_error_deg;   // per-axis circular absolute error
    double rotation_error_geodesic_deg = 0.0;
    double fitness_mm = 0.0;
    int generations_used = 0;
    double wall_time_seconds = 0.0;
};

// Registers `repeats` freshly generated pairs in every requested mode.
// Pair i uses spec seeds offset by i; trial (i, mode m) runs the GA with
// seed options.ga.seed + i*modes.size() + m, so every trial owns its
// stream.
std::vector<TrialOutcome> run_trials(const PairSpec& spec, const std::vector<SearchMode>& modes,
                                     const RegisterOptions& options, int repeats);

TrialOutcome score_against_truth(const RegistrationResult& result, const RigidMotion& truth,
                                 std::uint64_t trial_seed);

struct ModeSummary {
    std::string mode;
    int trials = 0;
    double mean_tx_err = 0.0;
    double mean_ty_err = 0.0;
    double mean_tz_err = 0.0;
    std::optional<double> mean_rot_err_deg;  // absent for reduced mode ("known")
    double median_generations = 0.0;
    double median_seconds = 0.0;
};

// Aggregates recomputable from the trial CSV: per-axis mean absolute
// deviation and (lower) median generations / wall time per mode.
std::vector<ModeSummary> summarize_trials(const std::vector<TrialOutcome>& trials);

std::string trials_csv(const std::vector<TrialOutcome>& trials);
std::vector<TrialOutcome> parse_trials_csv(const std::string& text);
std::string format_summary_table(const std::vector<ModeSummary>& summaries);

}  // namespace gareg
