#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftsim/fermion.hpp"
#include "driftsim/pauli.hpp"

namespace driftsim {

enum class MarkerKind : std::uint8_t { TrotterStepEnd, SampleStepEnd, GroupEnd };

std::string marker_kind_name(MarkerKind k);
MarkerKind marker_kind_from_name(const std::string& name);

struct Marker {
    std::size_t index;  // number of entries emitted when the marker fires
    MarkerKind kind;
};

struct SequenceEntry {
    PauliString string;
    double angle = 0.0;  // entry realizes exp(-i * angle * string)
};

/// Ordered exponential schedule produced by a compilation protocol. Entries
/// apply to the state first-to-last; markers delimit steps / samples / groups.
struct GateSequence {
    std::size_t n_qubits = 0;
    std::string protocol;
    std::uint64_t seed = 0;
    double t = 0.0;  // total simulated evolution time
    std::vector<SequenceEntry> entries;
    std::vector<Marker> markers;
    std::map<std::string, std::string> params;  // provenance parameters

    nlohmann::json to_json() const;
    static GateSequence from_json(const nlohmann::json& j);
};

/// Term order used by every protocol: descending |coeff|, ties broken
/// lexicographically by string text. Returns indices into h.terms.
std::vector<std::size_t> canonical_order(const PauliHamiltonian& h);

GateSequence compile_trotter1(const PauliHamiltonian& h, double t, std::size_t steps);
GateSequence compile_trotter2(const PauliHamiltonian& h, double t, std::size_t steps);

/// Higher-order product formula by the standard recursion; order = 2k must be
/// even. order 2 is identical to compile_trotter2. Entry count N*L*2*5^(k-1).
GateSequence compile_suzuki(const PauliHamiltonian& h, double t, std::size_t steps, std::size_t order);

struct SamplingDistribution {
    std::vector<double> weights;  // probabilities, sum to 1
    std::string scheme_tag;       // qdrift_abs | phys_abs | phys_mean | importance
};

SamplingDistribution qdrift_distribution(const PauliHamiltonian& h);

enum class WeightScheme : std::uint8_t { Abs, Mean };

SamplingDistribution physdrift_distribution(const GroupedHamiltonian& grouped, WeightScheme scheme);

/// Cost-aware distribution q(j) proportional to |h_j| / C_j; a drop-in
/// replacement for the qdrift distribution with matching angle rescaling.
SamplingDistribution importance_distribution(const PauliHamiltonian& h, const std::vector<double>& per_term_cost);

/// N i.i.d. term draws with probability |h_j|/lambda, each entry angle
/// sign(h_j)*lambda*t/N; one sample_step_end marker per entry.
GateSequence sample_qdrift(const PauliHamiltonian& h, double t, std::size_t samples, std::uint64_t seed);

/// qdrift sampling under a custom distribution; entry angles
/// sign(h_j)*(|h_j|/q_j)*t/N keep the first-order mean unbiased.
GateSequence sample_qdrift(const PauliHamiltonian& h, double t, std::size_t samples, std::uint64_t seed,
                           const SamplingDistribution& distribution);

/// N i.i.d. group draws; every Pauli term of the drawn group is emitted, each
/// with angle sign(h_i)*(|h_i|/W_j)*Lambda_s*t/N where W_j is the group's
/// scheme weight and Lambda_s their sum; group_end marker after each draw.
GateSequence sample_physdrift(const GroupedHamiltonian& grouped, double t, std::size_t draws, WeightScheme scheme,
                              std::uint64_t seed);

/// Replays the same draw stream until the entry count reaches target_entries,
/// then emits with angles normalized by the realized draw count. Used for
/// depth-matched protocol comparisons.
GateSequence sample_physdrift_to_depth(const GroupedHamiltonian& grouped, double t, std::size_t target_entries,
                                       WeightScheme scheme, std::uint64_t seed);

/// Per step a fair coin picks forward or reversed canonical order; angles
/// h_k*t/N. The coin sequence is recorded in provenance params.
GateSequence sample_random_permutation(const PauliHamiltonian& h, double t, std::size_t steps, std::uint64_t seed);

/// Stochastic sparsification: per step, a fresh random permutation of the
/// terms is traversed forward then reversed; each visit keeps term i with
/// probability keep_i (default |h_i|/lambda_max, clipped to (0,1]); kept
/// entries use angle h_i*(t/2)/(N*keep_i) so the two passes together give an
/// unbiased step generator.
GateSequence sample_sparsto(const PauliHamiltonian& h, double t, std::size_t steps, std::uint64_t seed,
                            const std::vector<double>* keep_probabilities = nullptr);

/// Wrap each trotter step S as P^dag * S * P with P = exp(i*phi*Z...Z) and a
/// fresh phi per step, realized as one all-Z entry with angle -phi before and
/// +phi after the step. Requires trotter_step_end markers (deterministic
/// protocols only). discrete_phase draws phi from {0, pi} instead of [0, 2pi).
GateSequence apply_symmetric_protection(const GateSequence& seq, std::uint64_t seed, bool discrete_phase = false);

}  // namespace driftsim
