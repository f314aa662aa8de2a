#include "gareg/genetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>
#include <unordered_map>

#include "gareg/errors.hpp"

namespace gareg {

double Chromosome::gene(int i) const {
    switch (i) {
        case 0: return tx;
        case 1: return ty;
        case 2: return tz;
        case 3: return alpha;
        case 4: return beta;
        case 5: return psi;
        default: throw InternalError("Chromosome::gene: index out of range");
    }
}

void Chromosome::set_gene(int i, double value) {
    switch (i) {
        case 0: tx = value; break;
        case 1: ty = value; break;
        case 2: tz = value; break;
        case 3: alpha = value; break;
        case 4: beta = value; break;
        case 5: psi = value; break;
        default: throw InternalError("Chromosome::set_gene: index out of range");
    }
}

void GaConfig::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw DegenerateConfigurationError(std::string("GaConfig: ") + what);
    };
    check(coarse_population >= 1, "coarse_population must be >= 1");
    check(coarse_generations >= 1, "coarse_generations must be >= 1");
    check(fine_population >= 1, "fine_population must be >= 1");
    check(fine_generations >= 1, "fine_generations must be >= 1");
    check(elite_count >= 1, "elite_count must be >= 1");
    check(elite_count <= fine_population, "elite_count must not exceed fine_population");
    check(elite_count <= coarse_population, "elite_count must not exceed coarse_population");
    check(coarse_population >= fine_population,
          "coarse_population must be >= fine_population (fine inherits the coarse population)");
    check(coarse_mutation_prob >= 0.0 && coarse_mutation_prob <= 1.0,
          "coarse_mutation_prob must be in [0,1]");
    check(fine_mutation_prob_initial >= 0.0 && fine_mutation_prob_initial <= 1.0,
          "fine_mutation_prob_initial must be in [0,1]");
    check(schedule_prob_increment >= 0.0 && schedule_prob_increment <= 1.0,
          "schedule_prob_increment must be in [0,1]");
    check(schedule_step_decay > 0.0 && schedule_step_decay <= 1.0,
          "schedule_step_decay must be in (0,1]");
    check(schedule_period >= 1, "schedule_period must be >= 1");
    check(fine_crossover_offspring >= 0, "fine_crossover_offspring must be >= 0");
    check(fine_mutation_only_offspring >= 0, "fine_mutation_only_offspring must be >= 0");
    check(elite_count + fine_crossover_offspring + fine_mutation_only_offspring == fine_population,
          "elite_count + fine_crossover_offspring + fine_mutation_only_offspring must equal "
          "fine_population");
    check(stagnation_window >= 1, "stagnation_window must be >= 1");
    check(stagnation_epsilon >= 0.0, "stagnation_epsilon must be >= 0");
}

GaContext make_context(const PointCloud& source, const KdTree& target_index, FitnessKind kind,
                       int threads) {
    if (source.empty()) throw EmptyCloudError("make_context: empty source");
    GaContext ctx;
    ctx.source = &source;
    ctx.target_index = &target_index;
    ctx.fitness_kind = kind;
    ctx.threads = std::max(1, threads);

    const Aabb target_box = bounding_box(target_index.cloud());
    ctx.coarse_steps.translation_mm = 0.10 * target_box.diagonal();
    ctx.coarse_steps.angle_deg = 10.0;
    if (ctx.coarse_steps.translation_mm <= 0.0) ctx.coarse_steps.translation_mm = 1.0;
    // The fine stage starts from smaller steps than the coarse one; at the
    // coarse step size refinement offspring almost never beat a converged
    // elite, which both wastes the stage and trips the stagnation stop in
    // its very first window.
    ctx.fine_initial_steps.translation_mm = 0.3 * ctx.coarse_steps.translation_mm;
    ctx.fine_initial_steps.angle_deg = 0.3 * ctx.coarse_steps.angle_deg;
    ctx.bounds.box = target_box.dilated(0.5);
    ctx.bounds.source_centroid = centroid(source);
    return ctx;
}

MutationSchedulePoint mutation_schedule(int generation, const GaConfig& config) {
    if (generation < 0) throw DegenerateConfigurationError("mutation_schedule: generation < 0");
    const int k = generation / config.schedule_period;
    MutationSchedulePoint point;
    point.probability =
        std::min(1.0, config.fine_mutation_prob_initial + config.schedule_prob_increment * k);
    point.step_scale = std::pow(config.schedule_step_decay, k);
    return point;
}

Population init_coarse_population(const GaContext& ctx, const SearchMode& mode,
                                  const GaConfig& config, Rng& rng) {
    const PointCloud& source = *ctx.source;
    const PointCloud& target = ctx.target();
    if (source.empty() || target.empty())
        throw EmptyCloudError("init_coarse_population: empty cloud");

    // Anchor: the source point closest to the source center of mass
    // (smallest index on ties).
    const Point3 center = centroid(source);
    std::size_t anchor_index = 0;
    double anchor_d2 = squared_distance(source.points[0], center);
    for (std::size_t i = 1; i < source.size(); ++i) {
        const double d2 = squared_distance(source.points[i], center);
        if (d2 < anchor_d2) {
            anchor_d2 = d2;
            anchor_index = i;
        }
    }
    const Point3 anchor = source.points[anchor_index];

    Population pop;
    pop.generation = 0;
    pop.individuals.reserve(config.coarse_population);
    for (int i = 0; i < config.coarse_population; ++i) {
        Chromosome c;
        const Point3 match = target.points[rng.uniform_index(target.size())];
        if (mode.is_reduced()) {
            const EulerAngles& known = mode.known_rotation();
            c.alpha = known.alpha;
            c.beta = known.beta;
            c.psi = known.psi;
        } else {
            // Every initial solution is rotated about exactly one axis.
            const int axis = static_cast<int>(rng.uniform_index(3));
            const double angle = rng.uniform(-180.0, 180.0);
            c.set_gene(3 + axis, normalize_angle_deg(angle));
        }
        // Translation maps the anchor exactly onto the matched target point.
        const Point3 rotated_anchor = euler_to_matrix(c.angles()).apply(anchor);
        const Point3 t = match - rotated_anchor;
        c.tx = t.x;
        c.ty = t.y;
        c.tz = t.z;
        pop.individuals.push_back(c);
    }
    return pop;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& parent_a, const Chromosome& parent_b,
                                            const SearchMode& mode, Rng& rng) {
    const int free_genes = mode.free_gene_count();
    const int interior = free_genes - 1;  // cut positions 1..free_genes-1

    int cut_a, cut_b;
    if (interior <= 1) {
        cut_a = 1;
        cut_b = free_genes - 1;
    } else {
        cut_a = 1 + static_cast<int>(rng.uniform_index(interior));
        cut_b = 1 + static_cast<int>(rng.uniform_index(interior - 1));
        if (cut_b >= cut_a) ++cut_b;
        if (cut_a > cut_b) std::swap(cut_a, cut_b);
    }

    Chromosome child_a = parent_a;
    Chromosome child_b = parent_b;
    child_a.fitness.reset();
    child_b.fitness.reset();
    for (int g = cut_a; g < cut_b; ++g) {
        child_a.set_gene(g, parent_b.gene(g));
        child_b.set_gene(g, parent_a.gene(g));
    }
    return {child_a, child_b};
}

Chromosome mutate(const Chromosome& c, double per_gene_prob, const MutationSteps& steps,
                  const SearchMode& mode, const GeneBounds& bounds, Rng& rng) {
    if (!(steps.translation_mm > 0.0) || !(steps.angle_deg > 0.0))
        throw DegenerateConfigurationError("mutate: step sizes must be > 0");

    const int free_genes = mode.free_gene_count();

    // Draw all decisions first, in gene order, so the random stream layout
    // does not depend on which genes fire.
    std::array<bool, Chromosome::kGeneCount> fired{};
    std::array<double, Chromosome::kGeneCount> delta{};
    bool any = false;
    for (int g = 0; g < free_genes; ++g) {
        if (rng.uniform01() >= per_gene_prob) continue;
        const double step = g < 3 ? steps.translation_mm : steps.angle_deg;
        const double magnitude = (1.0 - rng.uniform01()) * step;  // (0, step]
        const double sign = rng.coin_flip() ? 1.0 : -1.0;
        fired[g] = true;
        delta[g] = sign * magnitude;
        any = true;
    }
    if (!any) return c;

    Chromosome out = c;
    out.fitness.reset();
    for (int g = 3; g < free_genes; ++g) {
        if (fired[g]) out.set_gene(g, normalize_angle_deg(out.gene(g) + delta[g]));
    }
    // Clamp mutated translation genes so the moved source centroid stays
    // inside the bounds box under the (possibly just mutated) rotation.
    const Point3 moved = euler_to_matrix(out.angles()).apply(bounds.source_centroid);
    const Point3 lo = bounds.box.min - moved;
    const Point3 hi = bounds.box.max - moved;
    if (fired[0]) out.tx = std::clamp(out.tx + delta[0], lo.x, hi.x);
    if (fired[1]) out.ty = std::clamp(out.ty + delta[1], lo.y, hi.y);
    if (fired[2]) out.tz = std::clamp(out.tz + delta[2], lo.z, hi.z);
    return out;
}

namespace {

struct GeneKey {
    std::array<std::uint64_t, Chromosome::kGeneCount> bits;
    bool operator==(const GeneKey&) const = default;
};

GeneKey key_of(const Chromosome& c) {
    GeneKey key;
    const auto genes = c.genes();
    static_assert(sizeof(genes) == sizeof(key.bits));
    std::memcpy(key.bits.data(), genes.data(), sizeof(key.bits));
    return key;
}

struct GeneKeyHash {
    std::size_t operator()(const GeneKey& key) const {
        std::uint64_t h = 0x9E3779B97F4A7C15ull;
        for (std::uint64_t b : key.bits) h = mix_seed(h ^ b);
        return static_cast<std::size_t>(h);
    }
};

void sort_by_fitness(Population& pop) {
    std::stable_sort(pop.individuals.begin(), pop.individuals.end(),
                     [](const Chromosome& a, const Chromosome& b) { return *a.fitness < *b.fitness; });
}

// Rank selection over a population sorted best-first: rank r gets weight
// n - r, so the best individual is n times likelier than the worst.
std::size_t rank_select(std::size_t n, Rng& rng) {
    const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
    const double target = rng.uniform01() * total;
    double cumulative = 0.0;
    for (std::size_t rank = 0; rank < n; ++rank) {
        cumulative += static_cast<double>(n - rank);
        if (cumulative >= target) return rank;
    }
    return n - 1;
}

void record(FitnessTrace& trace, int generation, const Population& pop, int elites, int crossed,
            int mutated_only) {
    TraceEntry entry;
    entry.generation = generation;
    entry.best = pop.individuals.front();
    entry.best_fitness = *entry.best.fitness;
    entry.elite_count = elites;
    entry.crossover_offspring = crossed;
    entry.mutation_only_offspring = mutated_only;
    trace.entries.push_back(entry);
}

}  // namespace

void evaluate_population(Population& pop, const GaContext& ctx) {
    // Collect one evaluation job per distinct unevaluated gene vector.
    std::unordered_map<GeneKey, std::size_t, GeneKeyHash> job_of_key;
    std::vector<RigidMotion> jobs;
    std::vector<std::size_t> job_of_individual(pop.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < pop.size(); ++i) {
        Chromosome& c = pop.individuals[i];
        if (c.fitness) continue;
        const GeneKey key = key_of(c);
        auto [it, inserted] = job_of_key.try_emplace(key, jobs.size());
        if (inserted) jobs.push_back(c.motion());
        job_of_individual[i] = it->second;
    }
    if (jobs.empty()) return;

    std::vector<double> scores(jobs.size());
    auto run_range = [&](std::size_t begin, std::size_t end) {
        std::vector<double> scratch;
        scratch.reserve(ctx.source->size());
        for (std::size_t j = begin; j < end; ++j) {
            scores[j] = evaluate_score(jobs[j], *ctx.source, *ctx.target_index, ctx.fitness_kind,
                                       scratch);
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(std::max(1, ctx.threads), jobs.size());
    if (workers <= 1) {
        run_range(0, jobs.size());
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = jobs.size() * w / workers;
            const std::size_t end = jobs.size() * (w + 1) / workers;
            threads.emplace_back(run_range, begin, end);
        }
        for (auto& t : threads) t.join();
    }

    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (job_of_individual[i] != static_cast<std::size_t>(-1))
            pop.individuals[i].fitness = scores[job_of_individual[i]];
    }
}

std::pair<Population, FitnessTrace> coarse_ga(const GaContext& ctx, const SearchMode& mode,
                                              const GaConfig& config, Rng& rng) {
    config.validate();
    Population pop = init_coarse_population(ctx, mode, config, rng);
    evaluate_population(pop, ctx);
    sort_by_fitness(pop);

    FitnessTrace trace;
    record(trace, 0, pop, 0, 0, 0);

    const std::size_t pop_size = static_cast<std::size_t>(config.coarse_population);
    const std::size_t elites = static_cast<std::size_t>(config.elite_count);
    for (int g = 1; g <= config.coarse_generations; ++g) {
        Population next;
        next.generation = g;
        next.individuals.reserve(pop_size);
        for (std::size_t e = 0; e < elites; ++e) next.individuals.push_back(pop.individuals[e]);
        while (next.individuals.size() < pop_size) {
            const std::size_t pa = rank_select(pop.size(), rng);
            const std::size_t pb = rank_select(pop.size(), rng);
            auto [child_a, child_b] =
                crossover(pop.individuals[pa], pop.individuals[pb], mode, rng);
            child_a = mutate(child_a, config.coarse_mutation_prob, ctx.coarse_steps, mode,
                             ctx.bounds, rng);
            child_b = mutate(child_b, config.coarse_mutation_prob, ctx.coarse_steps, mode,
                             ctx.bounds, rng);
            next.individuals.push_back(child_a);
            if (next.individuals.size() < pop_size) next.individuals.push_back(child_b);
        }
        evaluate_population(next, ctx);
        sort_by_fitness(next);
        pop = std::move(next);
        record(trace, g, pop, static_cast<int>(elites),
               static_cast<int>(pop_size - elites), 0);
    }
    return {std::move(pop), std::move(trace)};
}

std::pair<Chromosome, FitnessTrace> fine_ga(const Population& initial, const GaContext& ctx,
                                            const SearchMode& mode, const GaConfig& config,
                                            Rng& rng) {
    config.validate();
    if (initial.individuals.empty()) throw EmptyPopulationError("fine_ga: empty initial population");

    Population pop;
    pop.generation = 0;
    pop.individuals = initial.individuals;
    evaluate_population(pop, ctx);
    sort_by_fitness(pop);
    if (pop.individuals.size() > static_cast<std::size_t>(config.fine_population))
        pop.individuals.resize(config.fine_population);

    FitnessTrace trace;
    record(trace, 0, pop, 0, 0, 0);
    Chromosome best_ever = pop.individuals.front();

    const std::size_t elites = static_cast<std::size_t>(config.elite_count);
    for (int g = 1; g <= config.fine_generations; ++g) {
        const MutationSchedulePoint sched = mutation_schedule(g - 1, config);
        MutationSteps steps = ctx.fine_initial_steps;
        steps.translation_mm *= sched.step_scale;
        steps.angle_deg *= sched.step_scale;

        Population next;
        next.generation = g;
        next.individuals.reserve(config.fine_population);
        for (std::size_t e = 0; e < elites && e < pop.size(); ++e)
            next.individuals.push_back(pop.individuals[e]);

        int crossed = 0;
        while (crossed < config.fine_crossover_offspring) {
            const std::size_t pa = rank_select(pop.size(), rng);
            const std::size_t pb = rank_select(pop.size(), rng);
            auto [child_a, child_b] =
                crossover(pop.individuals[pa], pop.individuals[pb], mode, rng);
            child_a = mutate(child_a, sched.probability, steps, mode, ctx.bounds, rng);
            next.individuals.push_back(child_a);
            ++crossed;
            if (crossed < config.fine_crossover_offspring) {
                child_b = mutate(child_b, sched.probability, steps, mode, ctx.bounds, rng);
                next.individuals.push_back(child_b);
                ++crossed;
            }
        }
        for (int m = 0; m < config.fine_mutation_only_offspring; ++m) {
            // Drawn uniformly from the current population excluding elites.
            const std::size_t span = pop.size() - std::min(elites, pop.size() - 1);
            const std::size_t idx =
                std::min(elites, pop.size() - 1) + static_cast<std::size_t>(rng.uniform_index(span));
            next.individuals.push_back(
                mutate(pop.individuals[idx], sched.probability, steps, mode, ctx.bounds, rng));
        }

        evaluate_population(next, ctx);
        sort_by_fitness(next);
        pop = std::move(next);
        record(trace, g, pop, static_cast<int>(elites), config.fine_crossover_offspring,
               config.fine_mutation_only_offspring);
        if (*pop.individuals.front().fitness < *best_ever.fitness)
            best_ever = pop.individuals.front();

        // Stop once the best fitness has improved less than
        // stagnation_epsilon over the last stagnation_window generations.
        if (g >= config.stagnation_window &&
            trace.best_at(g - config.stagnation_window) - trace.best_at(g) <
                config.stagnation_epsilon)
            break;
    }
    return {best_ever, std::move(trace)};
}

RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                   const SearchMode& mode, const RegisterOptions& options) {
    if (source.empty() || target.empty()) throw EmptyCloudError("register: empty input cloud");
    options.ga.validate();
    if (options.downsample_target < 1)
        throw DegenerateConfigurationError("register: downsample target must be >= 1");

    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = options.ga.seed;

    const PointCloud source_ds = downsample(source, options.downsample_target, derive_seed(seed, 1));
    const PointCloud target_ds = downsample(target, options.downsample_target, derive_seed(seed, 2));
    const KdTree index(target_ds);
    const GaContext ctx = make_context(source_ds, index, options.fitness_kind, options.threads);

    Rng rng(derive_seed(seed, 3));
    auto [coarse_pop, coarse_trace] = coarse_ga(ctx, mode, options.ga, rng);
    auto [best, fine_trace] = fine_ga(coarse_pop, ctx, mode, options.ga, rng);

    RegistrationResult result;
    result.motion = best.motion();
    result.generations_coarse = coarse_trace.generations_used();
    result.generations_fine = fine_trace.generations_used();
    result.reduced_mode = mode.is_reduced();
    result.known_rotation = mode.known_rotation();
    result.options = options;
    result.coarse_trace = std::move(coarse_trace);
    result.fine_trace = std::move(fine_trace);

    // Final report on the full-resolution clouds.
    const KdTree full_index(target);
    result.overlap_threshold_mm =
        options.overlap_threshold ? *options.overlap_threshold
                                  : overlap_threshold_default(full_index);
    result.fitness = evaluate_motion(result.motion, source, full_index, options.fitness_kind,
                                     result.overlap_threshold_mm);

    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace gareg
