#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "driftsim/fermion.hpp"
#include "driftsim/gadget.hpp"
#include "driftsim/pauli.hpp"
#include "driftsim/schedule.hpp"

namespace driftsim {

/// Dense Hermitian matrix of the Hamiltonian (optionally plus offset*I).
Eigen::MatrixXcd dense_hamiltonian(const PauliHamiltonian& h, bool include_offset = true,
                                   std::size_t dense_limit = kDenseLimit);

/// exp(-i*H*t) via Hermitian eigendecomposition; includes the offset phase.
Eigen::MatrixXcd exact_unitary(const PauliHamiltonian& h, double t, std::size_t dense_limit = kDenseLimit);

/// Ordered product of per-entry exponentials, each applied analytically as
/// cos(angle)*I - i*sin(angle)*P.
Eigen::MatrixXcd sequence_unitary(const GateSequence& seq, std::size_t dense_limit = kDenseLimit);

/// Largest singular value of (u - v).
double spectral_error(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v);

/// Global-phase-aligned variant: ||u - e^{i*phi}*v|| with phi = arg tr(v^dag u).
/// Used for all acceptance comparisons (gadget synthesis discards a phase).
double spectral_error_aligned(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v);

/// Probability-weighted unitary ensemble rho -> sum_i p_i U_i rho U_i^dag.
struct MixedUnitaryChannel {
    std::vector<std::pair<double, Eigen::MatrixXcd>> components;

    void validate(double tolerance = 1e-12) const;  // p_i >= 0, sum 1
    Eigen::MatrixXcd mean() const;                  // sum p_i U_i (not unitary in general)
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
};

/// Single-step mixtures for the protocols with analytic channel structure.
MixedUnitaryChannel qdrift_step_channel(const PauliHamiltonian& h, double t, std::size_t samples,
                                        std::size_t dense_limit = kDenseLimit);
MixedUnitaryChannel physdrift_step_channel(const GroupedHamiltonian& grouped, double t, std::size_t draws,
                                           WeightScheme scheme, std::size_t dense_limit = kDenseLimit);
MixedUnitaryChannel random_permutation_step_channel(const PauliHamiltonian& h, double t, std::size_t steps,
                                                    std::size_t dense_limit = kDenseLimit);

/// Analytic mean of the N-step mixed process: (sum_j p_j V_j)^N.
Eigen::MatrixXcd channel_mean_unitary(const MixedUnitaryChannel& step, std::size_t steps);

/// Monte-Carlo mean over repeats of sampled sequence unitaries; sample(seed)
/// must return a fresh GateSequence for the derived seed it is given.
Eigen::MatrixXcd monte_carlo_mean_unitary(const std::function<GateSequence(std::uint64_t)>& sample,
                                          std::size_t repeats, std::uint64_t base_seed,
                                          std::size_t dense_limit = kDenseLimit);

/// Lemma-style diamond-distance upper bound 2*||u - mean_v||.
double mixing_bound(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& mean_v);

/// Computational basis state from its bit text, qubit 0 = leftmost bit.
Eigen::VectorXcd basis_state(std::string_view bits);

struct NoiseConfig {
    double depol_p = 0.0;     // per-exponential Pauli injection probability
    double shot_alpha = 0.0;  // expectation attenuation rate per exponential
    std::uint64_t seed = 0;
};

/// Noiseless gate-by-gate statevector run of a lowered circuit.
Eigen::VectorXcd run_statevector(const PrimitiveCircuit& circuit, const Eigen::VectorXcd& initial);

/// Apply sequence entries analytically to a state (no gate lowering).
Eigen::VectorXcd apply_sequence(const GateSequence& seq, const Eigen::VectorXcd& initial);

/// Noisy variant: after each exponential, with probability depol_p one Pauli
/// drawn uniformly from {X,Y,Z} hits one uniformly drawn qubit of the entry's
/// support. Depth is counted in exponentials, matching the shot model. Random
/// draws are consumed for every entry regardless of injection, so trajectories
/// with different depol_p share randomness under a common seed.
Eigen::VectorXcd apply_sequence(const GateSequence& seq, const Eigen::VectorXcd& initial, const NoiseConfig& noise);

/// <psi|O|psi> + offset; throws if the imaginary residue exceeds 1e-10.
double expectation(const Eigen::VectorXcd& state, const PauliHamiltonian& observable);

enum class CheckpointKind : std::uint8_t { EveryEntry, TrotterStepEnd, SampleStepEnd, GroupEnd };

struct ObservableRow {
    std::size_t checkpoint = 0;  // 0 is the initial state
    double time_proxy = 0.0;     // t * k / total checkpoints
    std::vector<double> values;
};

struct ObservableSeries {
    std::vector<std::string> names;
    std::vector<ObservableRow> rows;
};

/// Expectations of the named observables at each checkpoint of the requested
/// kind (markers must exist for marker-based kinds), plus the initial row.
/// A nonzero noise.depol_p injects faults between entries exactly as the
/// noisy apply_sequence does.
ObservableSeries track_observables(const GateSequence& seq, const Eigen::VectorXcd& initial,
                                   const std::vector<std::pair<std::string, PauliHamiltonian>>& observables,
                                   CheckpointKind kind, const NoiseConfig& noise = {});

/// Shot-noise model: measured values attenuate by exp(-alpha * depth).
std::vector<double> shot_attenuate(const std::vector<double>& values, std::size_t exponential_count,
                                   const NoiseConfig& noise);

/// Shots needed to resolve epsilon against the attenuation at this depth:
/// ceil(1 / (epsilon^2 * exp(-2*alpha*depth))).
std::uint64_t shots_required(double epsilon, std::size_t exponential_count, const NoiseConfig& noise);

}  // namespace driftsim
