#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "driftsim/pauli.hpp"
#include "driftsim/schedule.hpp"

namespace driftsim {

enum class GateKind : std::uint8_t { H, S, Sdg, CX, Rz };

struct Gate {
    GateKind kind;
    std::uint32_t target = 0;
    std::uint32_t control = 0;      // CX only
    double theta = 0.0;             // Rz only
    std::int64_t source_entry = -1; // originating GateSequence entry, -1 if none
};

struct PrimitiveCircuit {
    std::size_t n_qubits = 0;
    std::vector<Gate> gates;
    std::size_t exponential_count = 0;  // number of source exponentials
};

/// Lower exp(-i*angle*P) to primitives: basis-in layer (H for X, Sdg+H for Y),
/// CNOT parity ladder onto the last active qubit, Rz(2*angle), mirrored ladder
/// and basis-out. Throws on the all-identity string.
PrimitiveCircuit synthesize_gadget(const PauliString& string, double angle);

/// Concatenation of per-entry gadgets in entry order; source_entry links kept.
PrimitiveCircuit synthesize_sequence(const GateSequence& seq);

struct GateTally {
    std::size_t cnot_count = 0;
    std::size_t rz_count = 0;
    std::size_t single_qubit_clifford_count = 0;  // H, S, Sdg
    std::size_t exponential_count = 0;
    std::size_t depth = 0;  // greedy ASAP layering on qubit disjointness
};

GateTally tally(const PrimitiveCircuit& circuit);

/// OpenQASM 2.0 text; gate spellings h, s, sdg, cx, rz.
std::string to_openqasm(const PrimitiveCircuit& circuit);

}  // namespace driftsim
