#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "gareg/genetic.hpp"
#include "gareg/report.hpp"
#include "gareg/synth.hpp"
#include "oracles.hpp"

using namespace gareg;
using namespace gareg::testing;

namespace {

// Small configuration that keeps unit runs quick while preserving the
// stage ratios where they matter.
GaConfig small_config() {
    GaConfig config;
    config.coarse_population = 30;
    config.coarse_generations = 25;
    config.fine_population = 16;
    config.fine_generations = 30;
    config.elite_count = 2;
    config.fine_crossover_offspring = 12;
    config.fine_mutation_only_offspring = 2;
    config.stagnation_window = 10;
    config.stagnation_epsilon = 1e-6;
    return config;
}

GeneBounds loose_bounds() {
    GeneBounds bounds;
    bounds.box = {{-1e6, -1e6, -1e6}, {1e6, 1e6, 1e6}};
    bounds.source_centroid = {0, 0, 0};
    return bounds;
}

Chromosome make_chromosome(std::array<double, 6> genes) {
    Chromosome c;
    for (int i = 0; i < 6; ++i) c.set_gene(i, genes[i]);
    return c;
}

bool same_genes(const Chromosome& a, const Chromosome& b) {
    for (int i = 0; i < 6; ++i)
        if (a.gene(i) != b.gene(i)) return false;
    return true;
}

}  // namespace

TEST_CASE("default configuration carries the stock two-stage settings") {
    const GaConfig config;
    CHECK(config.coarse_population == 100);
    CHECK(config.coarse_generations == 250);
    CHECK(config.fine_population == 50);
    CHECK(config.fine_generations == 250);
    CHECK(config.coarse_mutation_prob == 0.16);
    CHECK(config.fine_mutation_prob_initial == 0.20);
    CHECK(config.schedule_period == 25);
    CHECK(config.schedule_prob_increment == 0.05);
    CHECK(config.schedule_step_decay == 0.8);
    CHECK(config.elite_count == 2);
    CHECK(config.fine_crossover_offspring == 44);
    CHECK(config.fine_mutation_only_offspring == 4);
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("mutation_schedule matches its closed form") {
    const GaConfig config;  // stock defaults
    struct Expect {
        int generation;
        double prob;
        double scale;
    };
    const Expect table[] = {
        {0, 0.20, 1.0},   {24, 0.20, 1.0},  {25, 0.25, 0.8},
        {49, 0.25, 0.8},  {50, 0.30, 0.64}, {249, 0.65, std::pow(0.8, 9)},
    };
    for (const Expect& e : table) {
        const MutationSchedulePoint point = mutation_schedule(e.generation, config);
        CHECK(point.probability == doctest::Approx(e.prob).epsilon(1e-12));
        CHECK(point.step_scale == doctest::Approx(e.scale).epsilon(1e-12));
    }
    CHECK(mutation_schedule(249, config).step_scale == doctest::Approx(0.1342).epsilon(1e-3));

    // Probability saturates at 1.
    GaConfig fast = config;
    fast.schedule_prob_increment = 0.5;
    CHECK(mutation_schedule(100, fast).probability == 1.0);
}

TEST_CASE("crossover: identical parents produce identical children") {
    Rng rng(5);
    const Chromosome parent = make_chromosome({1, 2, 3, 40, 50, 60});
    for (int i = 0; i < 50; ++i) {
        const auto [a, b] = crossover(parent, parent, SearchMode::full(), rng);
        CHECK(same_genes(a, parent));
        CHECK(same_genes(b, parent));
        CHECK_FALSE(a.fitness.has_value());
    }
}

TEST_CASE("crossover swaps one contiguous interior segment") {
    Rng rng(7);
    const Chromosome pa = make_chromosome({1, 2, 3, 4, 5, 6});
    const Chromosome pb = make_chromosome({10, 20, 30, 40, 50, 60});
    std::set<std::pair<int, int>> seen_cuts;
    for (int i = 0; i < 1000; ++i) {
        const auto [ca, cb] = crossover(pa, pb, SearchMode::full(), rng);
        // Positional closure: every child gene comes from a parent at the
        // same position, and the two children mirror each other.
        int first_swapped = -1, last_swapped = -1;
        for (int g = 0; g < 6; ++g) {
            const bool from_b = ca.gene(g) == pb.gene(g);
            const bool from_a = ca.gene(g) == pa.gene(g);
            CHECK((from_a || from_b));
            CHECK(cb.gene(g) == (from_b ? pa.gene(g) : pb.gene(g)));
            if (from_b) {
                if (first_swapped < 0) first_swapped = g;
                last_swapped = g;
            }
        }
        // Two distinct interior cuts always swap a non-empty segment that
        // touches neither end of the chromosome.
        REQUIRE(first_swapped >= 1);
        REQUIRE(last_swapped <= 4);
        for (int g = first_swapped; g <= last_swapped; ++g) CHECK(ca.gene(g) == pb.gene(g));
        seen_cuts.insert({first_swapped, last_swapped + 1});
    }
    // All C(5,2) = 10 cut pairs occur across 1000 draws.
    CHECK(seen_cuts.size() == 10);
    CHECK(seen_cuts.count({1, 5}) == 1);  // the [A1, B2..B5, A6] case
}

TEST_CASE("crossover in reduced mode swaps only the middle translation gene") {
    Rng rng(9);
    const SearchMode mode = SearchMode::reduced({10, 20, 30});
    Chromosome pa = make_chromosome({1, 2, 3, 10, 20, 30});
    Chromosome pb = make_chromosome({7, 8, 9, 10, 20, 30});
    for (int i = 0; i < 20; ++i) {
        const auto [ca, cb] = crossover(pa, pb, mode, rng);
        CHECK(ca.tx == pa.tx);
        CHECK(ca.ty == pb.ty);
        CHECK(ca.tz == pa.tz);
        CHECK(cb.ty == pa.ty);
        CHECK(ca.alpha == 10.0);
        CHECK(ca.beta == 20.0);
        CHECK(ca.psi == 30.0);
    }
}

TEST_CASE("mutate: zero probability leaves the chromosome untouched") {
    Rng rng(11);
    Chromosome c = make_chromosome({1, 2, 3, 4, 5, 6});
    c.fitness = 3.25;
    const Chromosome out =
        mutate(c, 0.0, {10.0, 10.0}, SearchMode::full(), loose_bounds(), rng);
    CHECK(same_genes(out, c));
    CHECK(out.fitness == 3.25);
}

TEST_CASE("mutate: probability one changes every free gene within the step bound") {
    Rng rng(13);
    const MutationSteps steps{2.0, 3.0};
    const Chromosome c = make_chromosome({0, 0, 0, 0, 0, 0});
    for (int i = 0; i < 200; ++i) {
        const Chromosome out = mutate(c, 1.0, steps, SearchMode::full(), loose_bounds(), rng);
        for (int g = 0; g < 3; ++g) {
            const double delta = std::abs(out.gene(g) - c.gene(g));
            CHECK(delta > 0.0);
            CHECK(delta <= steps.translation_mm);
        }
        for (int g = 3; g < 6; ++g) {
            const double delta = std::abs(normalize_angle_deg(out.gene(g) - c.gene(g)));
            CHECK(delta > 0.0);
            CHECK(delta <= steps.angle_deg);
            CHECK(out.gene(g) >= -180.0);
            CHECK(out.gene(g) < 180.0);
        }
        CHECK_FALSE(out.fitness.has_value());
    }
}

TEST_CASE("mutate: reduced mode never touches the angle genes") {
    Rng rng(17);
    const SearchMode mode = SearchMode::reduced({1, 57, 3});
    Chromosome c = make_chromosome({5, 5, 5, 1, 57, 3});
    for (int i = 0; i < 100; ++i) {
        c = mutate(c, 1.0, {4.0, 4.0}, mode, loose_bounds(), rng);
        CHECK(c.alpha == 1.0);
        CHECK(c.beta == 57.0);
        CHECK(c.psi == 3.0);
    }
}

TEST_CASE("mutate: empirical per-gene firing frequency tracks the probability") {
    Rng rng(19);
    const double prob = 0.16;
    const int trials = 100000;
    int fired = 0;
    const Chromosome c = make_chromosome({0, 0, 0, 0, 0, 0});
    for (int i = 0; i < trials; ++i) {
        const Chromosome out =
            mutate(c, prob, {1.0, 1.0}, SearchMode::reduced({0, 0, 0}), loose_bounds(), rng);
        if (out.tx != 0.0) ++fired;  // watch a single gene
    }
    const double freq = static_cast<double>(fired) / trials;
    CHECK(std::abs(freq - prob) < 0.01 * prob);
}

TEST_CASE("mutate: translation genes are clamped to the bounds region") {
    Rng rng(23);
    GeneBounds bounds;
    bounds.box = {{-1, -1, -1}, {1, 1, 1}};
    bounds.source_centroid = {0, 0, 0};
    Chromosome c = make_chromosome({0.9, -0.9, 0, 0, 0, 0});
    for (int i = 0; i < 300; ++i) {
        const Chromosome out =
            mutate(c, 1.0, {5.0, 5.0}, SearchMode::reduced({0, 0, 0}), bounds, rng);
        CHECK(out.tx <= 1.0);
        CHECK(out.tx >= -1.0);
        CHECK(out.ty <= 1.0);
        CHECK(out.ty >= -1.0);
        CHECK(out.tz <= 1.0);
        CHECK(out.tz >= -1.0);
    }
}

TEST_CASE("init_coarse_population: reduced single-match example") {
    PointCloud source, target;
    source.points = {{0, 0, 0}};
    target.points = {{5, 0, 0}};
    const KdTree index(target);
    const GaContext ctx = make_context(source, index, FitnessKind::MeanDistance);
    GaConfig config = small_config();
    Rng rng(1);
    const Population pop =
        init_coarse_population(ctx, SearchMode::reduced({0, 0, 0}), config, rng);
    REQUIRE(pop.size() == 30);
    for (const Chromosome& c : pop.individuals) {
        CHECK(c.tx == 5.0);
        CHECK(c.ty == 0.0);
        CHECK(c.tz == 0.0);
        CHECK(c.alpha == 0.0);
        CHECK(c.beta == 0.0);
        CHECK(c.psi == 0.0);
    }
}

TEST_CASE("init_coarse_population: full mode rotates about exactly one axis") {
    Rng cloud_rng(31);
    const PointCloud source = random_cloud(100, cloud_rng);
    const PointCloud target = random_cloud(100, cloud_rng);
    const KdTree index(target);
    const GaContext ctx = make_context(source, index, FitnessKind::MeanDistance);
    GaConfig config = small_config();
    config.coarse_population = 200;
    Rng rng(2);
    const Population pop = init_coarse_population(ctx, SearchMode::full(), config, rng);
    int nonzero_axis_seen[3] = {0, 0, 0};
    for (const Chromosome& c : pop.individuals) {
        int zero_angles = 0;
        for (int g = 3; g < 6; ++g) {
            if (c.gene(g) == 0.0)
                ++zero_angles;
            else
                ++nonzero_axis_seen[g - 3];
        }
        CHECK(zero_angles >= 2);
    }
    // Every axis gets picked somewhere across 200 individuals.
    CHECK(nonzero_axis_seen[0] > 0);
    CHECK(nonzero_axis_seen[1] > 0);
    CHECK(nonzero_axis_seen[2] > 0);
}

TEST_CASE("init_coarse_population is deterministic under the seed") {
    Rng cloud_rng(37);
    const PointCloud source = random_cloud(80, cloud_rng);
    const PointCloud target = random_cloud(90, cloud_rng);
    const KdTree index(target);
    const GaContext ctx = make_context(source, index, FitnessKind::MeanDistance);
    const GaConfig config = small_config();
    Rng rng_a(77), rng_b(77);
    const Population a = init_coarse_population(ctx, SearchMode::full(), config, rng_a);
    const Population b = init_coarse_population(ctx, SearchMode::full(), config, rng_b);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(same_genes(a.individuals[i], b.individuals[i]));
}

TEST_CASE("coarse_ga: monotone best fitness, constant size, deterministic") {
    Rng cloud_rng(41);
    const PointCloud source = random_cloud(150, cloud_rng, 0, 50);
    const RigidMotion truth{{0, 30, 0}, {10, -5, 20}};
    const PointCloud target = apply_motion(truth, source);
    const KdTree index(target);
    const GaContext ctx = make_context(source, index, FitnessKind::MeanDistance);
    const GaConfig config = small_config();

    Rng rng_a(5), rng_b(5);
    const auto [pop_a, trace_a] = coarse_ga(ctx, SearchMode::full(), config, rng_a);
    const auto [pop_b, trace_b] = coarse_ga(ctx, SearchMode::full(), config, rng_b);

    REQUIRE(pop_a.size() == 30);
    REQUIRE(trace_a.entries.size() == 26);  // initial + 25 generations
    for (std::size_t g = 1; g < trace_a.entries.size(); ++g)
        CHECK(trace_a.entries[g].best_fitness <= trace_a.entries[g - 1].best_fitness);

    // Final population sorted ascending by fitness.
    for (std::size_t i = 1; i < pop_a.size(); ++i)
        CHECK(*pop_a.individuals[i - 1].fitness <= *pop_a.individuals[i].fitness);

    // Bitwise determinism.
    for (std::size_t i = 0; i < pop_a.size(); ++i) {
        CHECK(same_genes(pop_a.individuals[i], pop_b.individuals[i]));
        CHECK(*pop_a.individuals[i].fitness == *pop_b.individuals[i].fitness);
    }
}

TEST_CASE("fine_ga: inherits, improves or retains the best, records composition") {
    Rng cloud_rng(43);
    const PointCloud source = random_cloud(150, cloud_rng, 0, 50);
    const RigidMotion truth{{0, 0, 0}, {8, 3, -6}};
    const PointCloud target = apply_motion(truth, source);
    const KdTree index(target);
    const GaContext ctx = make_context(source, index, FitnessKind::MeanDistance);
    const GaConfig config = small_config();
    const SearchMode mode = SearchMode::reduced({0, 0, 0});

    Rng rng(9);
    auto [coarse_pop, coarse_trace] = coarse_ga(ctx, mode, config, rng);
    const double inherited_best = *coarse_pop.individuals.front().fitness;
    auto [best, fine_trace] = fine_ga(coarse_pop, ctx, mode, config, rng);

    CHECK(*best.fitness <= inherited_best);
    CHECK(fine_trace.generations_used() <= config.fine_generations);
    for (std::size_t g = 1; g < fine_trace.entries.size(); ++g) {
        const TraceEntry& entry = fine_trace.entries[g];
        CHECK(entry.best_fitness <= fine_trace.entries[g - 1].best_fitness);
        CHECK(entry.elite_count == 2);
        CHECK(entry.crossover_offspring == 12);
        CHECK(entry.mutation_only_offspring == 2);
    }
}

TEST_CASE("fine_ga stops early on stagnation") {
    // Source == target with the exact motion already present: fitness 0
    // immediately, so improvement stalls and the window triggers.
    Rng cloud_rng(47);
    const PointCloud source = random_cloud(100, cloud_rng, 0, 40);
    const KdTree index(source);
    const GaContext ctx = make_context(source, index, FitnessKind::MeanDistance);
    GaConfig config = small_config();
    config.stagnation_window = 5;
    config.stagnation_epsilon = 1e-9;
    const SearchMode mode = SearchMode::reduced({0, 0, 0});

    Rng rng(3);
    auto [coarse_pop, coarse_trace] = coarse_ga(ctx, mode, config, rng);
    auto [best, fine_trace] = fine_ga(coarse_pop, ctx, mode, config, rng);
    CHECK(fine_trace.generations_used() == 5);
    CHECK(*best.fitness == 0.0);
}

TEST_CASE("reduced mode freezes the rotation genes everywhere") {
    Rng cloud_rng(53);
    const PointCloud source = random_cloud(120, cloud_rng, 0, 50);
    const RigidMotion truth{{5, 57, -3}, {10, 0, -10}};
    const PointCloud target = apply_motion(truth, source);
    const KdTree index(target);
    const GaContext ctx = make_context(source, index, FitnessKind::MeanDistance);
    const GaConfig config = small_config();
    const SearchMode mode = SearchMode::reduced(truth.rotation);

    Rng rng(13);
    auto [pop, trace] = coarse_ga(ctx, mode, config, rng);
    for (const Chromosome& c : pop.individuals) {
        CHECK(c.alpha == truth.rotation.alpha);
        CHECK(c.beta == truth.rotation.beta);
        CHECK(c.psi == truth.rotation.psi);
    }
    for (const TraceEntry& entry : trace.entries) {
        CHECK(entry.best.alpha == truth.rotation.alpha);
        CHECK(entry.best.beta == truth.rotation.beta);
        CHECK(entry.best.psi == truth.rotation.psi);
    }
}

TEST_CASE("register_clouds: self-registration recovers near-identity translation") {
    const PairSpec spec = [] {
        PairSpec s = default_pair_spec(900);
        s.surface.point_count = 700;
        s.overlap_fraction = 1.0;
        s.noise_sigma = 0.0;
        s.motion = RigidMotion{};
        return s;
    }();
    const SyntheticPair pair = make_pair(spec);

    RegisterOptions options;
    options.ga = small_config();
    options.downsample_target = 350;
    const RegistrationResult result =
        register_clouds(pair.source, pair.source, SearchMode::reduced({0, 0, 0}), options);

    const double diag = bounding_box(pair.source).diagonal();
    CHECK(result.motion.translation.norm() < 0.01 * diag);
    CHECK(result.generations_coarse == small_config().coarse_generations);
}

TEST_CASE("register_clouds: deterministic payload across runs and thread counts") {
    Rng cloud_rng(59);
    const PointCloud source = random_cloud(300, cloud_rng, 0, 80);
    const RigidMotion truth{{0, 20, 0}, {15, -10, 5}};
    const PointCloud target = apply_motion(truth, source);

    RegisterOptions options;
    options.ga = small_config();
    options.ga.seed = 1234;
    options.downsample_target = 200;

    RegisterOptions threaded = options;
    threaded.threads = 3;

    const SearchMode mode = SearchMode::full();
    const RegistrationResult a = register_clouds(source, target, mode, options);
    const RegistrationResult b = register_clouds(source, target, mode, options);
    const RegistrationResult c = register_clouds(source, target, mode, threaded);

    CHECK(a.motion.translation == b.motion.translation);
    CHECK(a.motion.rotation == b.motion.rotation);
    CHECK(a.fitness.score == b.fitness.score);
    CHECK(a.motion.translation == c.motion.translation);
    CHECK(a.motion.rotation == c.motion.rotation);
    CHECK(a.fitness.score == c.fitness.score);

    const std::string payload_a = deterministic_payload(serialize_record(make_record(a, {})));
    const std::string payload_b = deterministic_payload(serialize_record(make_record(b, {})));
    const std::string payload_c = deterministic_payload(serialize_record(make_record(c, {})));
    CHECK(payload_a == payload_b);
    CHECK(payload_a == payload_c);
}

TEST_CASE("GaConfig validation rejects inconsistent settings") {
    GaConfig config;
    config.fine_crossover_offspring = 43;  // breaks 2 + 44 + 4 == 50
    CHECK_THROWS_AS(config.validate(), DegenerateConfigurationError);

    GaConfig negative;
    negative.coarse_mutation_prob = -0.1;
    CHECK_THROWS_AS(negative.validate(), DegenerateConfigurationError);

    GaConfig zero_pop;
    zero_pop.coarse_population = 0;
    CHECK_THROWS_AS(zero_pop.validate(), DegenerateConfigurationError);

    CHECK_NOTHROW(GaConfig{}.validate());
}
