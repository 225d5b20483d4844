#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cylharm/construct.hpp"
#include "cylharm/energy.hpp"
#include "cylharm/experiment.hpp"
#include "cylharm/oracles.hpp"
#include "cylharm/serialize.hpp"
#include "cylharm/solver.hpp"

namespace {

std::pair<cylharm::ModelSpace, cylharm::Isometry> load_spec(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    cylharm::ModelSpace space = cylharm::space_from_json(j.at("space"));
    cylharm::Isometry twist =
        cylharm::isometry_from_json(j.at("twist"), space);
    return {std::move(space), std::move(twist)};
}

}  // namespace

int main(int argc, char** argv) {
    using namespace cylharm;
    CLI::App app{
        "equivariant harmonic maps from the punctured disk into model "
        "nonpositively curved targets"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run experiment configs");
    std::vector<std::string> configs;
    std::string out_dir;
    uint64_t seed = 0;
    int jobs = 1;
    run->add_option("configs", configs, "experiment config files")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--output", out_dir, "output directory override");
    auto* seed_opt = run->add_option("--seed", seed, "seed override");
    run->add_option("--jobs", jobs, "worker pool size (default 1)");

    auto* chk = app.add_subcommand("check", "re-verify a stored map");
    std::string map_path, cfg_path;
    chk->add_option("map", map_path, "map file")
        ->required()
        ->check(CLI::ExistingFile);
    chk->add_option("--config", cfg_path, "config supplying thresholds")
        ->required()
        ->check(CLI::ExistingFile);

    auto* orc =
        app.add_subcommand("oracle", "independent reference computations");
    orc->require_subcommand(1);

    auto* fls = orc->add_subcommand(
        "flat-solve", "exact discrete solve for a flat translation twist");
    double delta = 2.0 * M_PI;
    int fs_nt = 64, fs_np = 64;
    double fs_T = 12.0;
    fls->add_option("--delta", delta, "translation distance");
    fls->add_option("--n-t", fs_nt, "t steps");
    fls->add_option("--n-psi", fs_np, "psi steps");
    fls->add_option("--depth", fs_T, "cylinder depth T");

    auto* dmn = orc->add_subcommand(
        "delta-min", "translation length by displacement minimization");
    std::string spec_path;
    int starts = 24, iters = 4000;
    uint64_t oseed = 1;
    dmn->add_option("--spec", spec_path, "json file with space and twist")
        ->required()
        ->check(CLI::ExistingFile);
    dmn->add_option("--starts", starts, "random starts");
    dmn->add_option("--iters", iters, "descent iterations per start");
    dmn->add_option("--seed", oseed, "rng seed");

    auto* lpb = orc->add_subcommand(
        "loop-bound", "smallest loop-energy margin over random twisted loops");
    std::string lb_spec;
    int lb_np = 16, trials = 1000;
    double spread = 2.0;
    uint64_t lseed = 1;
    lpb->add_option("--spec", lb_spec, "json file with space and twist")
        ->required()
        ->check(CLI::ExistingFile);
    lpb->add_option("--n-psi", lb_np, "nodes per loop");
    lpb->add_option("--trials", trials, "number of random loops");
    lpb->add_option("--spread", spread, "sampling spread");
    lpb->add_option("--seed", lseed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::optional<uint64_t> s;
            if (seed_opt->count()) s = seed;
            return run_configs(configs, out_dir, s, jobs);
        }
        if (chk->parsed()) return check_only(map_path, cfg_path);
        if (fls->parsed()) {
            ModelSpace space = make_euclidean(1);
            Isometry twist = euclidean_translation({delta});
            CylinderGrid grid = make_grid(fs_T, fs_nt, fs_np);
            GammaFamily fam = make_gamma_family(space, twist);
            std::vector<Point> loop = sample_gamma(fam, 0.0, fs_np);
            EquivariantGridMap m =
                flat_oracle_solve(space, twist, grid, loop, loop);
            double e = discrete_energy(m, 0.0, grid.T);
            std::cout << "energy " << format_double(e) << "\n";
            std::cout << "slope " << format_double(e / grid.T) << "\n";
            std::cout << "residual "
                      << format_double(harmonicity_residual(m)) << "\n";
            return 0;
        }
        if (dmn->parsed()) {
            auto [space, twist] = load_spec(spec_path);
            Rng rng(oseed);
            double v = delta_min_oracle(space, twist, starts, iters, rng);
            std::cout << "delta_min " << format_double(v) << "\n";
            return 0;
        }
        if (lpb->parsed()) {
            auto [space, twist] = load_spec(lb_spec);
            Rng rng(lseed);
            double d = translation_length(space, twist);
            double margin =
                loop_bound_margin(space, twist, lb_np, trials, spread, rng);
            std::cout << "bound " << format_double(d * d / (2.0 * M_PI))
                      << "\n";
            std::cout << "min_margin " << format_double(margin) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
