#include "cylharm/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cylharm/oracles.hpp"
#include "cylharm/serialize.hpp"

namespace cylharm {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    maybe(j, "schema_version", cfg.schema_version);
    if (cfg.schema_version != 1)
        throw std::runtime_error("unsupported schema_version (expected 1)");
    cfg.name = j.at("name").get<std::string>();
    maybe(j, "description", cfg.description);
    maybe(j, "seed", cfg.seed);
    cfg.space = space_from_json(j.at("space"));
    cfg.twist = isometry_from_json(j.at("twist"), cfg.space);

    const json& g = j.at("grid");
    cfg.n_psi = g.at("n_psi").get<int>();
    cfg.n_t = g.at("n_t").get<int>();
    cfg.solver.exhaustion_schedule =
        g.at("schedule").get<std::vector<double>>();

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        maybe(s, "max_sweeps", cfg.solver.max_sweeps);
        maybe(s, "tol_move", cfg.solver.tol_move);
        maybe(s, "tol_energy", cfg.solver.tol_energy);
        maybe(s, "barycenter_tol", cfg.solver.barycenter_tol);
        maybe(s, "compare_window", cfg.solver.compare_window);
        maybe(s, "compare_tol", cfg.solver.compare_tol);
        maybe(s, "energy_every", cfg.solver.energy_every);
    }
    if (j.contains("prototype")) {
        const json& p = j.at("prototype");
        maybe(p, "exponent", cfg.prototype_exponent);
        maybe(p, "two_start_amplitude", cfg.two_start_amplitude);
    }
    if (j.contains("boundary")) {
        const json& b = j.at("boundary");
        maybe(b, "type", cfg.boundary.type);
        maybe(b, "amplitude", cfg.boundary.amplitude);
        maybe(b, "modes", cfg.boundary.modes);
        if (b.contains("fourier")) {
            for (const json& m : b.at("fourier")) {
                BoundarySpec::Mode mode;
                maybe(m, "axis", mode.axis);
                maybe(m, "k", mode.k);
                maybe(m, "amp", mode.amp);
                maybe(m, "phase", mode.phase);
                cfg.boundary.fourier.push_back(mode);
            }
        }
        if (cfg.boundary.type != "none" && cfg.boundary.type != "fourier" &&
            cfg.boundary.type != "random_smooth")
            throw std::runtime_error("unknown boundary type '" +
                                     cfg.boundary.type + "'");
    }
    if (j.contains("checks")) {
        const json& c = j.at("checks");
        maybe(c, "trusted_lo", cfg.checks.trusted_lo);
        maybe(c, "trusted_hi", cfg.checks.trusted_hi);
        maybe(c, "cfit_variation", cfg.checks.cfit_variation);
        maybe(c, "sublog_epsilon", cfg.checks.sublog_epsilon);
        maybe(c, "sublog_ratio", cfg.checks.sublog_ratio);
        maybe(c, "trend_slack", cfg.checks.trend_slack);
        maybe(c, "tail_fraction_tol", cfg.checks.tail_fraction_tol);
    }
    maybe(j, "output", cfg.output_dir);

    validate_options(cfg.solver);
    if (cfg.n_psi < 3 || cfg.n_t < 2)
        throw std::runtime_error("grid too small");
    cfg.checks.tol_move = cfg.solver.tol_move;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config '" + path + "': " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const std::exception& e) {
        throw std::runtime_error("config '" + path + "': " + e.what());
    }
}

namespace {

// smooth zero-mean 2 pi periodic field sum_k a_k cos(k psi + phi_k) / k
struct SmoothField {
    std::vector<double> a, phi;
    double operator()(double psi) const {
        double v = 0.0;
        for (size_t k = 0; k < a.size(); ++k)
            v += a[k] * std::cos((k + 1) * psi + phi[k]) / (k + 1);
        return v;
    }
};

SmoothField draw_field(double amp, int modes, Rng& rng) {
    std::uniform_real_distribution<double> ua(-amp, amp);
    std::uniform_real_distribution<double> up(0.0, 2.0 * M_PI);
    SmoothField f;
    for (int k = 0; k < modes; ++k) {
        f.a.push_back(ua(rng));
        f.phi.push_back(up(rng));
    }
    return f;
}

void perturb_loop_smooth(const ModelSpace& space, const Isometry& twist,
                         std::vector<Point>& loop, double amp, int modes,
                         Rng& rng) {
    const int np = static_cast<int>(loop.size());
    auto psi = [&](int j) { return 2.0 * M_PI * j / np; };
    if (std::holds_alternative<Euclidean>(space.v)) {
        int dim = std::get<Euclidean>(space.v).dim;
        std::vector<SmoothField> f;
        for (int d = 0; d < dim; ++d) f.push_back(draw_field(amp, modes, rng));
        for (int j = 0; j < np; ++j) {
            auto x = std::get<EucPoint>(loop[j].v).x;
            for (int d = 0; d < dim; ++d) x[d] += f[d](psi(j));
            loop[j] = euc_point(std::move(x));
        }
    } else if (std::holds_alternative<Hyperbolic>(space.v)) {
        SmoothField f1 = draw_field(amp, modes, rng);
        SmoothField f2 = draw_field(amp, modes, rng);
        for (int j = 0; j < np; ++j) {
            const auto& h = std::get<HypPoint>(loop[j].v);
            loop[j] = hyp_point(h.x + f1(psi(j)) * h.y,
                                h.y * std::exp(f2(psi(j))));
        }
    } else if (std::holds_alternative<Tree>(space.v)) {
        if (std::holds_alternative<TreeTranslation>(twist.v)) {
            const TreeShape& shape = std::get<Tree>(space.v).shape;
            SmoothField f = draw_field(amp, modes, rng);
            for (int j = 0; j < np; ++j) {
                double c = tree_line_coordinate(shape,
                                                std::get<TreePoint>(loop[j].v));
                loop[j] =
                    Point{tree_point_at_line_coordinate(shape, c + f(psi(j)))};
            }
        } else {
            // no smooth 1-parameter structure off the line; jitter nodewise
            for (int j = 0; j < np; ++j)
                loop[j] = sample_near(space, loop[j], amp, rng);
        }
    } else {
        const auto& ps = std::get<Product>(space.v);
        const auto& pt = std::get<ProdIso>(twist.v);
        std::vector<Point> left(np), right(np);
        for (int j = 0; j < np; ++j) {
            const auto& pp = std::get<ProductPoint>(loop[j].v);
            left[j] = pp.parts[0];
            right[j] = pp.parts[1];
        }
        double f = amp / std::sqrt(2.0);
        perturb_loop_smooth(ps.factors[0], pt.parts[0], left, f, modes, rng);
        perturb_loop_smooth(ps.factors[1], pt.parts[1], right, f, modes, rng);
        for (int j = 0; j < np; ++j)
            loop[j] = product_point(left[j], right[j]);
    }
}

}  // namespace

std::vector<Point> build_boundary(const ExperimentConfig& cfg) {
    GammaFamily fam = make_gamma_family(cfg.space, cfg.twist);
    std::vector<Point> loop = sample_gamma(fam, 0.0, cfg.n_psi);
    if (cfg.boundary.type == "none") return loop;
    if (cfg.boundary.type == "fourier") {
        const auto* euc = std::get_if<Euclidean>(&cfg.space.v);
        if (!euc)
            throw std::runtime_error(
                "fourier boundary modes need a Euclidean target");
        for (int j = 0; j < cfg.n_psi; ++j) {
            auto x = std::get<EucPoint>(loop[j].v).x;
            double psi = 2.0 * M_PI * j / cfg.n_psi;
            for (const auto& m : cfg.boundary.fourier) {
                if (m.axis < 0 || m.axis >= euc->dim)
                    throw std::runtime_error("fourier mode axis out of range");
                x[m.axis] += m.amp * std::cos(m.k * psi + m.phase);
            }
            loop[j] = euc_point(std::move(x));
        }
        return loop;
    }
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 2);
    perturb_loop_smooth(cfg.space, cfg.twist, loop, cfg.boundary.amplitude,
                        cfg.boundary.modes, rng);
    return loop;
}

ExperimentResult run_main(const ExperimentConfig& cfg) {
    ExperimentResult r;
    r.config = cfg;
    r.profile = displacement_profile(cfg.space, cfg.twist);
    r.delta = r.profile.delta;
    r.e_rho = cylharm::e_rho(cfg.space, cfg.twist);

    std::vector<Point> boundary = build_boundary(cfg);
    double h_t = cfg.solver.exhaustion_schedule.back() / cfg.n_t;
    SolveOptions opts = cfg.solver;
    opts.seed = cfg.seed;
    r.main_run = solve_punctured(cfg.space, cfg.twist, boundary, h_t, opts,
                                 cfg.prototype_exponent, 0.0);

    const EquivariantGridMap& final_map = r.main_run.final_solve.map;
    CheckThresholds th = cfg.checks;
    th.tol_move = cfg.solver.tol_move;

    r.outcomes.push_back(check_log_growth(r.main_run, r.e_rho, th));
    r.outcomes.push_back(check_modified_monotone(final_map, r.e_rho));
    r.outcomes.push_back(check_lower_bound(final_map, r.e_rho));
    r.outcomes.push_back(check_density_decay(final_map, r.e_rho, th));
    r.outcomes.push_back(check_sublog_growth(
        final_map, default_sublog_base(final_map, r.profile, th), th));
    r.outcomes.push_back(check_F_shape(final_map, r.e_rho, th));

    CheckOutcome conv;
    conv.name = "solver_converged";
    conv.statistic = r.main_run.final_solve.harmonicity_residual;
    conv.tolerance = cfg.solver.tol_move;
    conv.passed = !r.main_run.flagged_partial;
    conv.fitted_constants["sweeps"] = r.main_run.final_solve.sweeps_used;
    conv.fitted_constants["final_energy"] = r.main_run.final_solve.final_energy;
    conv.notes = "all stages converged and the exhaustion met its target";
    r.outcomes.push_back(conv);

    CheckOutcome ex;
    ex.name = "exhaustion_cauchy";
    ex.statistic = r.main_run.diag.sup_jump.empty()
                       ? 0.0
                       : r.main_run.diag.sup_jump.back();
    ex.tolerance = cfg.solver.compare_tol;
    ex.passed = r.main_run.diag.jumps_decreasing && r.main_run.diag.cauchy_met;
    ex.fitted_constants["window_C"] = r.main_run.diag.window_C;
    for (size_t k = 0; k < r.main_run.diag.sup_jump.size(); ++k)
        ex.fitted_constants["jump_" + std::to_string(k)] =
            r.main_run.diag.sup_jump[k];
    ex.notes =
        "consecutive exhaustion stages approach each other on the comparison "
        "window; stage energies near the boundary stay within a bounded "
        "excess of the prototype's";
    r.outcomes.push_back(ex);

    r.ok = all_good(r.outcomes);
    return r;
}

void run_probes(ExperimentResult& r) {
    const ExperimentConfig& cfg = r.config;
    CheckThresholds th = cfg.checks;
    th.tol_move = cfg.solver.tol_move;

    std::vector<Point> boundary = build_boundary(cfg);
    double h_t = cfg.solver.exhaustion_schedule.back() / cfg.n_t;
    SolveOptions opts = cfg.solver;
    opts.seed = cfg.seed + 1;
    r.two_start =
        two_start_uniqueness(cfg.space, cfg.twist, boundary, h_t, opts,
                             cfg.prototype_exponent, cfg.two_start_amplitude);
    r.probes_done = true;

    CheckOutcome uniq;
    uniq.name = "uniqueness_two_start";
    uniq.statistic = r.two_start.max_over_window;
    uniq.tolerance = 5.0 * cfg.solver.tol_move;
    double d2_tol = 25.0 * cfg.solver.tol_move * cfg.solver.tol_move;
    uniq.passed = r.two_start.max_over_window <= uniq.tolerance &&
                  r.two_start.d2_spread <= d2_tol;
    uniq.fitted_constants["d2_max"] = r.two_start.d2_max;
    uniq.fitted_constants["d2_spread"] = r.two_start.d2_spread;
    uniq.notes =
        "independent starts converge to the same map; distance spread at "
        "solver noise scale";
    r.outcomes.push_back(uniq);

    const EquivariantGridMap& u0 = r.two_start.run0.final_solve.map;
    const EquivariantGridMap& u1 = r.two_start.run1.final_solve.map;
    r.outcomes.push_back(
        check_interpolation(u0, u1, {0.25, 0.5, 0.75}, true, th));
    r.outcomes.push_back(
        check_subharmonic_distance(r.main_run.final_solve.map, u0, th));

    // negative controls: these must fail or the checks prove nothing
    const EquivariantGridMap& final_map = r.main_run.final_solve.map;
    EquivariantGridMap proto =
        prototype_map(cfg.space, cfg.twist, final_map.grid, boundary,
                      cfg.prototype_exponent);
    CheckOutcome ctl;
    ctl.name = "control_prototype_harmonicity";
    ctl.is_control = true;
    ctl.statistic = harmonicity_residual(proto, cfg.solver.barycenter_tol);
    ctl.tolerance = cfg.solver.tol_move;
    ctl.passed = ctl.statistic <= ctl.tolerance;
    ctl.notes = "the prototype competitor is not harmonic";
    r.outcomes.push_back(ctl);

    EquivariantGridMap bumped = final_map;
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 77);
    auto [ilo, ihi] = trusted_range(bumped.grid, th.trusted_lo, th.trusted_hi);
    int mid = (ilo + ihi) / 2;
    double bump = 0.5 * (1.0 + std::sqrt(std::max(r.e_rho, 0.0)));
    for (int i = mid; i < std::min(mid + 2, bumped.grid.n_t); ++i)
        for (int j = 0; j < bumped.grid.n_psi; ++j)
            bumped.at(i, j) = sample_near_compatible(
                cfg.space, cfg.twist, bumped.at(i, j), bump, rng);
    CheckOutcome fctl = check_F_shape(bumped, r.e_rho, th);
    fctl.name = "control_perturbed_F_shape";
    fctl.is_control = true;
    fctl.notes = "hand-damaged map must not pass the F-shape check";
    r.outcomes.push_back(fctl);

    r.ok = all_good(r.outcomes);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult r = run_main(cfg);
    run_probes(r);
    return r;
}

void write_artifacts(const ExperimentResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_map(r.main_run.final_solve.map, dir + "/map.txt");

    std::ofstream energy(dir + "/energy.csv", std::ios::binary);
    write_energy_csv(energy, energy_report(r.main_run.final_solve.map, r.e_rho));

    std::ofstream conv(dir + "/convergence.csv", std::ios::binary);
    conv << "sweep,energy,max_move,harmonicity_residual\n";
    for (const SweepRecord& rec : r.main_run.final_solve.convergence_curve)
        conv << rec.sweep << "," << format_double(rec.energy) << ","
             << format_double(rec.max_move) << ","
             << format_double(rec.residual) << "\n";

    std::ofstream checks(dir + "/checks.csv", std::ios::binary);
    write_checks_csv(checks, r.outcomes);

    std::ofstream report(dir + "/report.txt", std::ios::binary);
    report << "experiment: " << r.config.name << "\n";
    if (!r.config.description.empty())
        report << "description: " << r.config.description << "\n";
    report << "space: " << describe(r.config.space) << "\n";
    report << "translation length: " << format_double(r.delta)
           << (r.profile.semisimple ? " (attained)" : " (not attained)")
           << "\n";
    report << "optimal angular energy: " << format_double(r.e_rho) << "\n";
    for (size_t k = 0; k < r.main_run.stages.size(); ++k) {
        const SolveResult& s = r.main_run.stages[k];
        report << "stage T=" << format_double(r.main_run.diag.T_values[k])
               << ": sweeps " << s.sweeps_used << ", energy "
               << format_double(s.final_energy) << ", residual "
               << format_double(s.harmonicity_residual)
               << (s.converged ? "" : " (not converged)") << "\n";
    }
    report << "\n";
    write_report(report, r.config.name, r.outcomes);
}

int run_configs(const std::vector<std::string>& paths,
                const std::string& out_override,
                std::optional<uint64_t> seed_override, int jobs) {
    std::vector<ExperimentConfig> cfgs;
    try {
        for (const std::string& p : paths) cfgs.push_back(load_config(p));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    for (ExperimentConfig& c : cfgs) {
        if (seed_override) {
            c.seed = *seed_override;
            c.solver.seed = *seed_override;
        }
        if (!out_override.empty())
            c.output_dir = out_override + "/" + c.name;
        else if (c.output_dir.empty())
            c.output_dir = "out/" + c.name;
    }

    std::mutex mu;
    bool any_error = false, any_fail = false;
    size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            size_t idx;
            {
                std::lock_guard<std::mutex> lk(mu);
                if (next >= cfgs.size()) return;
                idx = next++;
            }
            const ExperimentConfig& cfg = cfgs[idx];
            try {
                ExperimentResult r = run_experiment(cfg);
                write_artifacts(r, cfg.output_dir);
                std::lock_guard<std::mutex> lk(mu);
                if (!r.ok) any_fail = true;
                std::cout << (r.ok ? "[ OK ] " : "[FAIL] ") << cfg.name
                          << " -> " << cfg.output_dir << "\n";
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(mu);
                any_error = true;
                std::cout << "[ERR ] " << cfg.name << ": " << e.what() << "\n";
            }
        }
    };
    int n = std::max(1, std::min<int>(jobs, static_cast<int>(cfgs.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (any_error) return 1;
    if (any_fail) return 2;
    return 0;
}

int check_only(const std::string& map_path, const std::string& config_path) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        EquivariantGridMap m = load_map(map_path);
        CheckThresholds th = cfg.checks;
        th.tol_move = cfg.solver.tol_move;
        DisplacementProfile prof = displacement_profile(m.space, m.twist);
        double er = cylharm::e_rho(m.space, m.twist);
        std::vector<CheckOutcome> outcomes;
        outcomes.push_back(check_log_growth_map(m, er, th));
        outcomes.push_back(check_modified_monotone(m, er));
        outcomes.push_back(check_lower_bound(m, er));
        outcomes.push_back(check_density_decay(m, er, th));
        outcomes.push_back(
            check_sublog_growth(m, default_sublog_base(m, prof, th), th));
        outcomes.push_back(check_F_shape(m, er, th));
        write_report(std::cout, "check-only: " + map_path, outcomes);
        return all_good(outcomes) ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cylharm
