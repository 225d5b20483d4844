#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylharm/solver.hpp"
#include "cylharm/verify.hpp"

namespace cylharm {

struct BoundarySpec {
    std::string type = "none";  // none | fourier | random_smooth
    double amplitude = 0.0;     // random_smooth strength
    int modes = 3;              // random_smooth mode count
    struct Mode {
        int axis = 0;
        int k = 1;
        double amp = 0.0;
        double phase = 0.0;
    };
    std::vector<Mode> fourier;  // explicit modes, Euclidean targets only
};

struct ExperimentConfig {
    int schema_version = 1;
    std::string name;
    std::string description;
    uint64_t seed = 1;
    ModelSpace space;
    Isometry twist;
    int n_psi = 24;
    int n_t = 40;  // at the deepest schedule entry
    SolveOptions solver;
    double prototype_exponent = 1.0 / 3.0;
    double two_start_amplitude = 0.25;
    BoundarySpec boundary;
    CheckThresholds checks;
    std::string output_dir;  // empty -> out/<name>
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// outer boundary loop at r = 1: gamma_0 plus the configured perturbation
std::vector<Point> build_boundary(const ExperimentConfig& cfg);

struct ExperimentResult {
    ExperimentConfig config;
    double e_rho = 0.0;
    double delta = 0.0;
    DisplacementProfile profile;
    PuncturedResult main_run;
    TwoStartResult two_start;
    bool probes_done = false;
    std::vector<CheckOutcome> outcomes;
    bool ok = false;
};

// exhaustion solve plus the single-map checks
ExperimentResult run_main(const ExperimentConfig& cfg);
// two-start probe, pair checks and negative controls
void run_probes(ExperimentResult& r);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// map.txt, energy.csv, convergence.csv, checks.csv, report.txt
void write_artifacts(const ExperimentResult& r, const std::string& dir);

// 0 all good, 2 check failure, 1 config or numeric error
int run_configs(const std::vector<std::string>& paths,
                const std::string& out_override,
                std::optional<uint64_t> seed_override, int jobs);
int check_only(const std::string& map_path, const std::string& config_path);

}  // namespace cylharm
