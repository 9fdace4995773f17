#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftsim/pauli.hpp"

namespace driftsim {

/// Second-quantized Hamiltonian over spin orbitals:
///   H = sum_pq h_pq a+_p a_q + 1/2 sum_pqrs h_pqrs a+_p a+_q a_r a_s + core.
/// two_body uses physicist index ordering; spin orbitals are interleaved
/// (orbital 0 up, 0 down, 1 up, 1 down, ...).
struct SecondQuantizedHamiltonian {
    std::size_t n_orbitals = 0;  // spin-orbital count = qubit count after mapping
    double core_constant = 0.0;
    Eigen::MatrixXd one_body;    // n x n, symmetric
    std::vector<double> two_body;  // flattened n^4

    std::size_t n_electrons = 0;  // from input metadata; 0 when unknown
    int ms2 = 0;

    double two(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const;
    double& two(std::size_t p, std::size_t q, std::size_t r, std::size_t s);

    /// Checks one_body symmetry and tensor index ranges.
    void validate(double tolerance = 1e-10) const;
};

/// Parse an FCIDUMP stream: header "&FCI NORB=...,NELEC=...,MS2=..." then
/// "value i j k l" lines (1-based, chemist notation). Spatial integrals are
/// expanded to interleaved spin orbitals and converted to physicist ordering.
SecondQuantizedHamiltonian load_fcidump(std::istream& in);
SecondQuantizedHamiltonian load_fcidump_file(const std::string& path);

/// Open-chain spinful Hubbard model: hopping -t_hop between nearest-neighbor
/// same-spin orbitals, on-site interaction u n_up n_down. Half filling is
/// recorded in n_electrons.
SecondQuantizedHamiltonian build_hubbard(std::size_t sites, double t_hop, double u);

/// Jordan-Wigner image. Identity components fold into the scalar offset;
/// an imaginary coefficient residue above 1e-10 (symmetry-violating input)
/// throws.
PauliHamiltonian jordan_wigner(const SecondQuantizedHamiltonian& h);

enum class TermClass : std::uint8_t {
    NumberCounting,
    Excitation,
    Coulomb,
    CorrelatedExcitation,
    Scatter,
};

std::string class_name(TermClass c);

/// Particle-number-conserving bundle of mutually commuting Pauli terms.
struct PhysicalGroup {
    TermClass class_tag = TermClass::NumberCounting;
    /// Molecular orbital indices for the flattened classes; the spin orbital
    /// creation/annihilation split for scatter processes.
    std::vector<std::size_t> orbital_indices;
    std::vector<PauliTerm> terms;
    double abs_weight = 0.0;   // sum_i |h_i|
    double mean_weight = 0.0;  // sum_i h_i (signed)
};

struct GroupedHamiltonian {
    std::size_t n_qubits = 0;
    double offset = 0.0;
    std::vector<PhysicalGroup> groups;
};

/// Partition the Hamiltonian into groups keyed by (class, orbital indices).
/// Scatter terms key on their creation/annihilation pair split so distinct
/// processes over the same four spin orbitals stay separate; all other
/// classes flatten together first, so cancellations between generators
/// (exchange h_pqpq against Coulomb h_pqqp, conditioned-hop identity halves
/// against bare hops) are realized, then rebucket by string shape per
/// molecular orbital. Summing group term lists recovers jordan_wigner(h),
/// offsets aside, and the grouped one-norm matches the flat Hamiltonian's up
/// to scatter-process overlap.
GroupedHamiltonian classify_groups(const SecondQuantizedHamiltonian& h);

struct ParticleNumberOperator {
    PauliHamiltonian pauli_form;  // sum_p (I - Z_p)/2 over the subset
    /// One number operator per molecular orbital (its up/down qubit pair);
    /// populated only for the full-register operator on an even register.
    std::vector<PauliHamiltonian> per_orbital;
};

ParticleNumberOperator particle_number(std::size_t n_qubits);
ParticleNumberOperator particle_number(std::size_t n_qubits, const std::vector<std::size_t>& orbital_subset);

}  // namespace driftsim
