#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gareg/fitness.hpp"
#include "gareg/geometry.hpp"
#include "gareg/kdtree.hpp"
#include "gareg/rng.hpp"

namespace gareg {

// Candidate rigid motion. Gene order is fixed throughout the optimizer:
// tx, ty, tz, alpha, beta, psi.
struct Chromosome {
    double tx = 0.0, ty = 0.0, tz = 0.0;         // mm
    double alpha = 0.0, beta = 0.0, psi = 0.0;   // degrees, normalized to [-180, 180)
    std::optional<double> fitness;               // mm; empty until evaluated

    static constexpr int kGeneCount = 6;

    double gene(int i) const;
    void set_gene(int i, double value);
    std::array<double, kGeneCount> genes() const { return {tx, ty, tz, alpha, beta, psi}; }

    RigidMotion motion() const { return {{alpha, beta, psi}, {tx, ty, tz}}; }
    EulerAngles angles() const { return {alpha, beta, psi}; }
};

// Full 6-DOF search, or translation-only with the rotation fixed to a
// known value for every individual in every generation.
class SearchMode {
public:
    static SearchMode full() { return SearchMode(false, {}); }
    static SearchMode reduced(const EulerAngles& known) {
        return SearchMode(true, known.normalized());
    }

    bool is_reduced() const { return reduced_; }
    const EulerAngles& known_rotation() const { return known_; }
    int free_gene_count() const { return reduced_ ? 3 : Chromosome::kGeneCount; }

private:
    SearchMode(bool reduced, const EulerAngles& known) : reduced_(reduced), known_(known) {}
    bool reduced_;
    EulerAngles known_;
};

struct GaConfig {
    int coarse_population = 100;
    int coarse_generations = 250;
    int fine_population = 50;
    int fine_generations = 250;
    double coarse_mutation_prob = 0.16;
    double fine_mutation_prob_initial = 0.20;
    int schedule_period = 25;
    double schedule_prob_increment = 0.05;
    double schedule_step_decay = 0.8;
    int elite_count = 2;
    int fine_crossover_offspring = 44;
    int fine_mutation_only_offspring = 4;
    int stagnation_window = 40;
    double stagnation_epsilon = 1e-3;  // mm
    std::uint64_t seed = 0;

    void validate() const;  // throws DegenerateConfigurationError
    bool operator==(const GaConfig&) const = default;
};

struct Population {
    std::vector<Chromosome> individuals;  // kept sorted by fitness ascending after each generation
    int generation = 0;

    std::size_t size() const { return individuals.size(); }
};

struct TraceEntry {
    int generation = 0;  // 0 is the evaluated initial population
    double best_fitness = 0.0;
    Chromosome best;
    // Offspring composition of the generation (zeros for generation 0).
    int elite_count = 0;
    int crossover_offspring = 0;
    int mutation_only_offspring = 0;
};

struct FitnessTrace {
    std::vector<TraceEntry> entries;

    // Evolved generations recorded (excludes the initial population).
    int generations_used() const {
        return entries.empty() ? 0 : static_cast<int>(entries.size()) - 1;
    }
    double best_at(int generation) const { return entries.at(generation).best_fitness; }
};

// Per-gene mutation magnitudes: one step for translation genes, one for
// angle genes. The fine stage scales both by the schedule.
struct MutationSteps {
    double translation_mm = 0.0;
    double angle_deg = 10.0;
};

// Clamp region for translation genes: after mutation the moved source
// centroid must stay inside `box` (the target bounding box dilated by 50%
// per side).
struct GeneBounds {
    Aabb box;
    Point3 source_centroid;
};

// Everything a GA stage needs about the prepared problem instance.
struct GaContext {
    const PointCloud* source = nullptr;    // prepared (downsampled) source
    const KdTree* target_index = nullptr;  // over the prepared target
    FitnessKind fitness_kind = FitnessKind::MeanDistance;
    MutationSteps coarse_steps;        // fixed for the whole coarse stage
    MutationSteps fine_initial_steps;  // schedule scale 1.0; decays from here
    GeneBounds bounds;
    int threads = 1;

    const PointCloud& target() const { return target_index->cloud(); }
};

GaContext make_context(const PointCloud& source, const KdTree& target_index, FitnessKind kind,
                       int threads = 1);

struct MutationSchedulePoint {
    double probability = 0.0;
    double step_scale = 1.0;
};

// Fine-stage schedule: probability rises by schedule_prob_increment and the
// step scale decays by schedule_step_decay once per schedule_period
// generations (generation counted from 0).
MutationSchedulePoint mutation_schedule(int generation, const GaConfig& config);

// Anchor-based initialization: the source point nearest the source centroid
// is matched with a random target point per individual; in full mode each
// individual starts rotated about exactly one random axis.
Population init_coarse_population(const GaContext& ctx, const SearchMode& mode,
                                  const GaConfig& config, Rng& rng);

// Two-point crossover over the free gene vector (5 interior cut positions
// for 6 genes, 2 for the reduced 3-gene vector); the segment between the
// cuts is swapped.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& parent_a, const Chromosome& parent_b,
                                            const SearchMode& mode, Rng& rng);

// Each free gene independently gains +/- u, u uniform in (0, step], with
// probability per_gene_prob. Angles are re-normalized, translation genes
// are clamped to the bounds region. Fixed genes never change.
Chromosome mutate(const Chromosome& c, double per_gene_prob, const MutationSteps& steps,
                  const SearchMode& mode, const GeneBounds& bounds, Rng& rng);

// Evaluate every individual without a fitness value. Distinct gene vectors
// are evaluated once; elites keep their carried value. Parallel evaluation
// never changes results (pure function per individual, deterministic
// scatter).
void evaluate_population(Population& pop, const GaContext& ctx);

std::pair<Population, FitnessTrace> coarse_ga(const GaContext& ctx, const SearchMode& mode,
                                              const GaConfig& config, Rng& rng);

std::pair<Chromosome, FitnessTrace> fine_ga(const Population& initial, const GaContext& ctx,
                                            const SearchMode& mode, const GaConfig& config,
                                            Rng& rng);

struct RegisterOptions {
    GaConfig ga;
    std::size_t downsample_target = 2000;
    FitnessKind fitness_kind = FitnessKind::MeanDistance;
    std::optional<double> overlap_threshold;  // mm; derived from the target when unset
    int threads = 1;
};

struct RegistrationResult {
    RigidMotion motion;
    FitnessReport fitness;          // evaluated on the full-resolution clouds
    double overlap_threshold_mm = 0.0;
    int generations_coarse = 0;
    int generations_fine = 0;
    double wall_time_seconds = 0.0;
    bool reduced_mode = false;
    EulerAngles known_rotation;     // meaningful when reduced_mode
    RegisterOptions options;        // effective configuration echo
    FitnessTrace coarse_trace;
    FitnessTrace fine_trace;

    int generations_used() const { return generations_coarse + generations_fine; }
};

// The full pipeline: downsample both clouds, index the target, coarse GA
// then fine GA, final fitness on the full-resolution clouds.
RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                   const SearchMode& mode, const RegisterOptions& options);

}  // namespace gareg
