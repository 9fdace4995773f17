#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driftsim/bounds.hpp"
#include "driftsim/fermion.hpp"
#include "driftsim/numerics.hpp"
#include "driftsim/schedule.hpp"

namespace driftsim {

/// Experiment description parsed from key = value config text. Defaults match
/// the documented schema in the README; unset strings stay empty.
struct ExperimentConfig {
    // Hamiltonian source
    std::string hamiltonian = "hubbard";  // hubbard | fcidump | pauli-json
    std::size_t hubbard_sites = 2;
    double hubbard_t = 1.0;
    double hubbard_u = 4.0;
    std::string fcidump_path;
    std::string pauli_json_path;

    // Protocol
    std::string protocol = "qdrift";  // trotter1|trotter2|suzuki|qdrift|physdrift|random_permutation|sparsto
    std::size_t order = 4;            // suzuki
    std::string scheme = "abs";       // physdrift: abs | mean
    std::vector<double> t_grid = {1.0};
    std::vector<std::size_t> steps_grid = {100};
    std::size_t target_entries = 0;  // nonzero: match exponential_count instead of steps
    bool protection = false;
    bool protection_discrete = false;  // phases from {0, pi} instead of [0, 2pi)
    std::size_t permutations = 0;  // nonzero: unitary mean over block permutations

    // Trials
    std::size_t trials = 20;
    std::uint64_t base_seed = 1;

    // Noise
    NoiseConfig noise;

    // Outputs
    std::string out_dir = "out";
    std::vector<std::string> metrics = {"spectral_error"};
    std::vector<std::string> observables;  // energy | particle_number | per_orbital
    std::string checkpoints = "sample_step_end";
    std::string initial_state = "hf";  // hf | explicit bit text
    bool plots = false;
    std::size_t dense_limit = kDenseLimit;
    std::size_t histogram_draws = 100000;
    double epsilon = 0.01;  // target error for the bounds tables
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

/// Hamiltonian in every representation a study needs. grouped is populated
/// only for fermionic sources (hubbard, fcidump).
struct ModelBundle {
    std::string name;
    PauliHamiltonian h;
    GroupedHamiltonian grouped;
    bool has_groups = false;
    std::size_t n_electrons = 0;
};

ModelBundle load_model(const ExperimentConfig& cfg);

/// Compile or sample one sequence per the config's protocol. steps carries N
/// for deterministic protocols and the sample/draw count for randomized ones;
/// when cfg.target_entries is nonzero the randomized protocols match it.
GateSequence build_sequence(const ExperimentConfig& cfg, const ModelBundle& model, double t, std::size_t steps,
                            std::uint64_t seed);

struct ResultRow {
    std::string protocol;
    std::uint64_t seed = 0;
    double t = 0.0;
    std::size_t steps = 0;
    std::size_t exponential_count = 0;
    std::size_t cnot_count = 0;
    // quiet NaN marks a metric that was not requested / not applicable
    double spectral_error = 0.0;
    double mixing_bound = 0.0;
    std::vector<std::pair<std::string, double>> observables;
};

/// One row per (trial, t, N) grid point, deterministically ordered.
std::vector<ResultRow> run(const ExperimentConfig& cfg);

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);

struct HistogramRow {
    std::size_t index = 0;
    std::string label;
    std::uint64_t count = 0;
    double expected = 0.0;  // draws * p_j
};

/// Draw counts for a randomized protocol plus the theoretical expectation.
std::vector<HistogramRow> histogram(const ExperimentConfig& cfg);

void write_histogram_csv(const std::vector<HistogramRow>& rows, std::ostream& out);

struct BoundRow {
    std::string protocol;
    double t = 0.0;
    double steps = 0.0;
    double measured = 0.0;  // 2||U - E[V]|| where an analytic mean exists
    double bound = 0.0;
    std::string bound_kind;  // inequality | up_to_constant
    bool within = false;
};

/// Measured channel error vs the closed-form bound per grid point.
std::vector<BoundRow> compare_bounds(const ExperimentConfig& cfg);

void write_bounds_csv(const std::vector<BoundRow>& rows, std::ostream& out);

/// Minimal log-scale line chart of error-vs-steps series, one polyline per
/// protocol label.
struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};
std::string render_line_plot_svg(const std::vector<PlotSeries>& series, const std::string& x_label,
                                 const std::string& y_label, bool log_x = true, bool log_y = true);

/// CLI entry point: subcommands compile, simulate, sweep, histogram, bounds,
/// qasm-export; flags --config, --seed, --out, --dense-limit.
int run_cli(int argc, const char* const* argv);

}  // namespace driftsim
