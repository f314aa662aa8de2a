#include "gareg/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gareg/errors.hpp"
#include "gareg/rng.hpp"

namespace gareg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// The surface parameter domain is split into this many strips; a seeded
// shuffle deals them out as source-only / shared / target-only.
constexpr int kWindowStrips = 24;

struct ParamPoint {
    double u;  // primary window parameter in [0, 1)
    Point3 p;
};

Point3 shape_point(SurfaceShape shape, double extent, double u, double v) {
    switch (shape) {
        case SurfaceShape::WavySheet: {
            const double x = u * extent;
            const double y = v * extent;
            const double z = 0.1 * extent * std::sin(2.0 * kPi * u) * std::cos(2.0 * kPi * v);
            return {x, y, z};
        }
        case SurfaceShape::SpherePatch: {
            // u is the azimuth fraction; v maps to a height that is uniform
            // in area over the hemisphere.
            const double r = 0.5 * extent;
            const double phi = 2.0 * kPi * u;
            const double z = r * v;
            const double rho = std::sqrt(std::max(0.0, r * r - z * z));
            return {rho * std::cos(phi), rho * std::sin(phi), z};
        }
        case SurfaceShape::Box: {
            // Three faces sharing the y axis as the window parameter:
            // the top (z = extent) and the two faces at x = 0 and x = extent.
            const double y = u * extent;
            const int face = std::min(2, static_cast<int>(v * 3.0));
            const double local = (v * 3.0 - face) * extent;
            if (face == 0) return {local, y, extent};
            if (face == 1) return {0.0, y, local};
            return {extent, y, local};
        }
    }
    throw InternalError("shape_point: unknown shape");
}

std::vector<ParamPoint> sample_surface(const SurfaceSpec& spec) {
    if (spec.point_count < 100)
        throw DegenerateConfigurationError("SurfaceSpec: point_count must be >= 100");
    if (!(spec.extent > 0.0)) throw DegenerateConfigurationError("SurfaceSpec: extent must be > 0");

    Rng rng(spec.seed);
    std::vector<ParamPoint> samples;
    samples.reserve(spec.point_count);
    for (int i = 0; i < spec.point_count; ++i) {
        const double u = rng.uniform01();
        const double v = rng.uniform01();
        samples.push_back({u, shape_point(spec.shape, spec.extent, u, v)});
    }
    return samples;
}

Point3 gauss3(Rng& rng, double sigma) {
    const double gx = rng.gaussian();
    const double gy = rng.gaussian();
    const double gz = rng.gaussian();
    return {sigma * gx, sigma * gy, sigma * gz};
}

double circular_abs_diff_deg(double a, double b) {
    return std::abs(normalize_angle_deg(a - b));
}

double lower_median_of(std::vector<double> values) {
    const std::size_t k = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + k, values.end());
    return values[k];
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string surface_shape_name(SurfaceShape shape) {
    switch (shape) {
        case SurfaceShape::WavySheet: return "wavy-sheet";
        case SurfaceShape::SpherePatch: return "sphere-patch";
        case SurfaceShape::Box: return "box";
    }
    return "unknown";
}

PointCloud generate_surface(const SurfaceSpec& spec) {
    PointCloud cloud;
    cloud.source_id = surface_shape_name(spec.shape);
    for (const ParamPoint& s : sample_surface(spec)) cloud.points.push_back(s.p);
    return cloud;
}

SyntheticPair make_pair(const PairSpec& spec) {
    if (!(spec.overlap_fraction > 0.0) || spec.overlap_fraction > 1.0)
        throw DegenerateConfigurationError("PairSpec: overlap_fraction must be in (0, 1]");
    if (spec.noise_sigma < 0.0)
        throw DegenerateConfigurationError("PairSpec: noise_sigma must be >= 0");

    const std::vector<ParamPoint> samples = sample_surface(spec.surface);

    // Strip-interleaved windows. Each view is a union of parameter strips:
    // both views keep the shared strips, and each keeps its own exclusive
    // ones, dealt by a seeded shuffle. Views are equal-sized with the
    // shared part overlap_fraction of each. Scattering the exclusive
    // strips keeps them flanked by the other view's surface, so the
    // mean-of-all-points fitness stays centered on the true motion; one
    // straight cut (or a periodic comb) would instead move its optimum
    // toward the uncovered side.
    const double view_strips = kWindowStrips / (2.0 - spec.overlap_fraction);
    const int exclusive =
        static_cast<int>(std::lround(view_strips * (1.0 - spec.overlap_fraction)));
    enum class Role : std::uint8_t { SourceOnly, Shared, TargetOnly };
    std::array<Role, kWindowStrips> role;
    role.fill(Role::Shared);
    {
        std::array<int, kWindowStrips> order;
        for (int i = 0; i < kWindowStrips; ++i) order[i] = i;
        Rng strip_rng(derive_seed(spec.seed, 13));
        for (int i = kWindowStrips - 1; i > 0; --i) {
            const int j = static_cast<int>(strip_rng.uniform_index(i + 1));
            std::swap(order[i], order[j]);
        }
        for (int i = 0; i < exclusive; ++i) role[order[i]] = Role::SourceOnly;
        for (int i = exclusive; i < 2 * exclusive; ++i) role[order[i]] = Role::TargetOnly;
    }

    Rng source_noise(derive_seed(spec.seed, 11));
    Rng target_noise(derive_seed(spec.seed, 12));

    PointCloud source;
    source.source_id = surface_shape_name(spec.surface.shape) + ":view0";
    PointCloud second_view;
    second_view.source_id = surface_shape_name(spec.surface.shape) + ":view1";
    for (const ParamPoint& s : samples) {
        const int strip = std::min(kWindowStrips - 1, static_cast<int>(s.u * kWindowStrips));
        if (role[strip] != Role::TargetOnly)
            source.points.push_back(s.p + gauss3(source_noise, spec.noise_sigma));
        if (role[strip] != Role::SourceOnly)
            second_view.points.push_back(s.p + gauss3(target_noise, spec.noise_sigma));
    }
    if (source.empty() || second_view.empty())
        throw DegenerateCloudError("make_pair: a view ended up empty; increase point_count");

    SyntheticPair pair;
    pair.source = std::move(source);
    pair.target = apply_motion(spec.motion, second_view);
    pair.target.source_id = second_view.source_id;
    pair.ground_truth = spec.motion;
    return pair;
}

PairSpec default_pair_spec(std::uint64_t seed) {
    // The wavy sheet has no rotational self-symmetry, so a wrong rotation
    // cannot be laundered into a good fit; the sphere patch, by contrast,
    // is axisymmetric and forgives large azimuth errors.
    PairSpec spec;
    spec.surface.shape = SurfaceShape::WavySheet;
    spec.surface.extent = 200.0;
    spec.surface.point_count = 6000;
    spec.surface.seed = derive_seed(seed, 21);
    spec.seed = derive_seed(seed, 22);
    spec.overlap_fraction = 0.5;

    const double diag = bounding_box(generate_surface(spec.surface)).diagonal();
    spec.noise_sigma = 0.002 * diag;
    spec.motion.rotation = {0.0, 57.0, 3.0};
    // Direction echoes the dominant-axis regime; norm is ~30% of the
    // surface diagonal.
    spec.motion.translation = Point3{0.16, 0.01, -0.25} * diag;
    return spec;
}

TrialOutcome score_against_truth(const RegistrationResult& result, const RigidMotion& truth,
                                 std::uint64_t trial_seed) {
    TrialOutcome outcome;
    outcome.reduced_mode = result.reduced_mode;
    outcome.seed = trial_seed;

    const Point3 dt = result.motion.translation - truth.translation;
    outcome.translation_error_mm = {std::abs(dt.x), std::abs(dt.y), std::abs(dt.z)};
    outcome.translation_error_norm = dt.norm();

    outcome.rotation_error_deg = {
        circular_abs_diff_deg(result.motion.rotation.alpha, truth.rotation.alpha),
        circular_abs_diff_deg(result.motion.rotation.beta, truth.rotation.beta),
        circular_abs_diff_deg(result.motion.rotation.psi, truth.rotation.psi)};
    const Mat3 relative =
        truth.rotation_matrix().transposed() * result.motion.rotation_matrix();
    const double cos_angle = std::clamp(0.5 * (relative.trace() - 1.0), -1.0, 1.0);
    outcome.rotation_error_geodesic_deg = std::acos(cos_angle) * 180.0 / kPi;

    outcome.fitness_mm = result.fitness.score;
    outcome.generations_used = result.generations_used();
    outcome.wall_time_seconds = result.wall_time_seconds;
    return outcome;
}

std::vector<TrialOutcome> run_trials(const PairSpec& spec, const std::vector<SearchMode>& modes,
                                     const RegisterOptions& options, int repeats) {
    if (repeats < 1) throw DegenerateConfigurationError("run_trials: repeats must be >= 1");
    if (modes.empty()) throw DegenerateConfigurationError("run_trials: no modes requested");

    std::vector<TrialOutcome> outcomes;
    outcomes.reserve(static_cast<std::size_t>(repeats) * modes.size());
    for (int rep = 0; rep < repeats; ++rep) {
        PairSpec pair_spec = spec;
        pair_spec.seed = spec.seed + static_cast<std::uint64_t>(rep);
        pair_spec.surface.seed = spec.surface.seed + static_cast<std::uint64_t>(rep);
        const SyntheticPair pair = make_pair(pair_spec);

        for (std::size_t m = 0; m < modes.size(); ++m) {
            RegisterOptions trial_options = options;
            trial_options.ga.seed =
                options.ga.seed + static_cast<std::uint64_t>(rep) * modes.size() + m;
            const RegistrationResult result =
                register_clouds(pair.source, pair.target, modes[m], trial_options);
            outcomes.push_back(
                score_against_truth(result, pair.ground_truth, trial_options.ga.seed));
        }
    }
    return outcomes;
}

std::vector<ModeSummary> summarize_trials(const std::vector<TrialOutcome>& trials) {
    std::vector<ModeSummary> summaries;
    for (bool reduced : {false, true}) {
        ModeSummary summary;
        summary.mode = reduced ? "reduced" : "full";
        std::vector<double> generations, seconds;
        double rot_sum = 0.0;
        for (const TrialOutcome& t : trials) {
            if (t.reduced_mode != reduced) continue;
            ++summary.trials;
            summary.mean_tx_err += t.translation_error_mm.x;
            summary.mean_ty_err += t.translation_error_mm.y;
            summary.mean_tz_err += t.translation_error_mm.z;
            rot_sum += t.rotation_error_geodesic_deg;
            generations.push_back(static_cast<double>(t.generations_used));
            seconds.push_back(t.wall_time_seconds);
        }
        if (summary.trials == 0) continue;
        const double n = summary.trials;
        summary.mean_tx_err /= n;
        summary.mean_ty_err /= n;
        summary.mean_tz_err /= n;
        if (!reduced) summary.mean_rot_err_deg = rot_sum / n;
        summary.median_generations = lower_median_of(generations);
        summary.median_seconds = lower_median_of(seconds);
        summaries.push_back(summary);
    }
    return summaries;
}

std::string trials_csv(const std::vector<TrialOutcome>& trials) {
    std::ostringstream out;
    out << "mode,seed,tx_err,ty_err,tz_err,t_err_norm,rot_err_deg,fitness,generations,seconds\n";
    for (const TrialOutcome& t : trials) {
        out << (t.reduced_mode ? "reduced" : "full") << ',' << t.seed << ','
            << fmt(t.translation_error_mm.x) << ',' << fmt(t.translation_error_mm.y) << ','
            << fmt(t.translation_error_mm.z) << ',' << fmt(t.translation_error_norm) << ','
            << fmt(t.rotation_error_geodesic_deg) << ',' << fmt(t.fitness_mm) << ','
            << t.generations_used << ',' << fmt(t.wall_time_seconds) << '\n';
    }
    return out.str();
}

std::vector<TrialOutcome> parse_trials_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("trial CSV: missing header");

    std::vector<TrialOutcome> trials;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        auto next = [&]() {
            if (!std::getline(row, field, ','))
                throw ParseError("trial CSV line " + std::to_string(line_no) + ": short row");
            return field;
        };
        TrialOutcome t;
        const std::string mode = next();
        if (mode != "full" && mode != "reduced")
            throw ParseError("trial CSV line " + std::to_string(line_no) + ": bad mode");
        t.reduced_mode = mode == "reduced";
        t.seed = std::stoull(next());
        t.translation_error_mm.x = std::stod(next());
        t.translation_error_mm.y = std::stod(next());
        t.translation_error_mm.z = std::stod(next());
        t.translation_error_norm = std::stod(next());
        t.rotation_error_geodesic_deg = std::stod(next());
        t.fitness_mm = std::stod(next());
        t.generations_used = std::stoi(next());
        t.wall_time_seconds = std::stod(next());
        trials.push_back(t);
    }
    return trials;
}

std::string format_summary_table(const std::vector<ModeSummary>& summaries) {
    std::ostringstream out;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-8s %5s %9s %9s %9s %9s %12s %10s\n", "mode", "n", "x/mm",
                  "y/mm", "z/mm", "rot/deg", "median_gens", "median_s");
    out << buf;
    for (const ModeSummary& s : summaries) {
        std::string rot = s.mean_rot_err_deg
                              ? [&] {
                                    char r[32];
                                    std::snprintf(r, sizeof(r), "%9.3f", *s.mean_rot_err_deg);
                                    return std::string(r);
                                }()
                              : std::string("    known");
        std::snprintf(buf, sizeof(buf), "%-8s %5d %9.3f %9.3f %9.3f %s %12.1f %10.2f\n",
                      s.mode.c_str(), s.trials, s.mean_tx_err, s.mean_ty_err, s.mean_tz_err,
                      rot.c_str(), s.median_generations, s.median_seconds);
        out << buf;
    }
    return out.str();
}

}  // namespace gareg
