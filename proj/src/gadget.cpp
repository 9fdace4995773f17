#include "driftsim/gadget.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace driftsim {

namespace {

void push(PrimitiveCircuit& circuit, GateKind kind, std::size_t target, std::size_t control, double theta,
          std::int64_t source) {
    Gate gate;
    gate.kind = kind;
    gate.target = static_cast<std::uint32_t>(target);
    gate.control = static_cast<std::uint32_t>(control);
    gate.theta = theta;
    gate.source_entry = source;
    circuit.gates.push_back(gate);
}

// exp(-i angle P) on the non-identity support of P:
//   basis-in, CNOT ladder onto the last active qubit, Rz(2 angle), mirror.
// X conjugates to Z by H; Y by (S H)+ in, (S H) out.
void append_gadget(PrimitiveCircuit& circuit, const PauliString& string, double angle, std::int64_t source) {
    std::vector<std::size_t> active;
    for (std::size_t q = 0; q < string.num_qubits(); ++q)
        if (string.letter(q) != Pauli::I) active.push_back(q);
    if (active.empty()) throw std::invalid_argument("synthesize_gadget: identity string has no gadget");

    for (std::size_t q : active) {
        switch (string.letter(q)) {
            case Pauli::X: push(circuit, GateKind::H, q, 0, 0.0, source); break;
            case Pauli::Y:
                push(circuit, GateKind::Sdg, q, 0, 0.0, source);
                push(circuit, GateKind::H, q, 0, 0.0, source);
                break;
            default: break;
        }
    }
    for (std::size_t i = 0; i + 1 < active.size(); ++i)
        push(circuit, GateKind::CX, active[i + 1], active[i], 0.0, source);
    push(circuit, GateKind::Rz, active.back(), 0, 2.0 * angle, source);
    for (std::size_t i = active.size() - 1; i-- > 0;)
        push(circuit, GateKind::CX, active[i + 1], active[i], 0.0, source);
    for (auto it = active.rbegin(); it != active.rend(); ++it) {
        switch (string.letter(*it)) {
            case Pauli::X: push(circuit, GateKind::H, *it, 0, 0.0, source); break;
            case Pauli::Y:
                push(circuit, GateKind::H, *it, 0, 0.0, source);
                push(circuit, GateKind::S, *it, 0, 0.0, source);
                break;
            default: break;
        }
    }
    ++circuit.exponential_count;
}

}  // namespace

PrimitiveCircuit synthesize_gadget(const PauliString& string, double angle) {
    PrimitiveCircuit circuit;
    circuit.n_qubits = string.num_qubits();
    append_gadget(circuit, string, angle, -1);
    return circuit;
}

PrimitiveCircuit synthesize_sequence(const GateSequence& seq) {
    PrimitiveCircuit circuit;
    circuit.n_qubits = seq.n_qubits;
    for (std::size_t i = 0; i < seq.entries.size(); ++i)
        append_gadget(circuit, seq.entries[i].string, seq.entries[i].angle, static_cast<std::int64_t>(i));
    return circuit;
}

GateTally tally(const PrimitiveCircuit& circuit) {
    GateTally counts;
    counts.exponential_count = circuit.exponential_count;
    std::vector<std::size_t> layer(circuit.n_qubits, 0);
    for (const auto& gate : circuit.gates) {
        switch (gate.kind) {
            case GateKind::CX: ++counts.cnot_count; break;
            case GateKind::Rz: ++counts.rz_count; break;
            default: ++counts.single_qubit_clifford_count; break;
        }
        if (gate.kind == GateKind::CX) {
            std::size_t depth = std::max(layer[gate.control], layer[gate.target]) + 1;
            layer[gate.control] = depth;
            layer[gate.target] = depth;
        } else {
            layer[gate.target] += 1;
        }
    }
    counts.depth = layer.empty() ? 0 : *std::max_element(layer.begin(), layer.end());
    return counts;
}

std::string to_openqasm(const PrimitiveCircuit& circuit) {
    std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" + std::to_string(circuit.n_qubits) + "];\n";
    char buffer[96];
    for (const auto& gate : circuit.gates) {
        unsigned t = gate.target, c = gate.control;
        switch (gate.kind) {
            case GateKind::H: std::snprintf(buffer, sizeof buffer, "h q[%u];\n", t); break;
            case GateKind::S: std::snprintf(buffer, sizeof buffer, "s q[%u];\n", t); break;
            case GateKind::Sdg: std::snprintf(buffer, sizeof buffer, "sdg q[%u];\n", t); break;
            case GateKind::CX: std::snprintf(buffer, sizeof buffer, "cx q[%u],q[%u];\n", c, t); break;
            case GateKind::Rz: std::snprintf(buffer, sizeof buffer, "rz(%.17g) q[%u];\n", gate.theta, t); break;
        }
        out += buffer;
    }
    return out;
}

}  // namespace driftsim
