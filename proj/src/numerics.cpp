#include "driftsim/numerics.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "driftsim/rng.hpp"

namespace driftsim {

namespace {

using Complex = std::complex<double>;

// Index-space view of a Pauli string: qubit q maps to bit (n-1-q) of the
// basis-state index, so qubit 0 is the most significant bit.
struct IndexMasks {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    unsigned y_count = 0;
};

IndexMasks index_masks(const PauliString& p) {
    IndexMasks m;
    std::size_t n = p.num_qubits();
    for (std::size_t q = 0; q < n; ++q) {
        std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
        switch (p.letter(q)) {
            case Pauli::I: break;
            case Pauli::X: m.x |= bit; break;
            case Pauli::Y:
                m.x |= bit;
                m.z |= bit;
                ++m.y_count;
                break;
            case Pauli::Z: m.z |= bit; break;
        }
    }
    return m;
}

constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

// P |i> = phase(i) |i ^ x>, with phase(i) = i^y * (-1)^popcount(i & z).
inline Complex pauli_phase(const IndexMasks& m, std::uint64_t i) {
    unsigned k = (m.y_count + 2u * (std::popcount(i & m.z) & 1u)) & 3u;
    return kIPow[k];
}

void check_dims(std::size_t n_qubits, std::size_t dense_limit, const char* who) {
    if (n_qubits == 0) throw std::invalid_argument(std::string(who) + ": zero qubits");
    if (n_qubits > dense_limit)
        throw std::invalid_argument(std::string(who) + ": " + std::to_string(n_qubits) +
                                    " qubits exceeds dense limit " + std::to_string(dense_limit));
}

}  // namespace

Eigen::MatrixXcd dense_hamiltonian(const PauliHamiltonian& h, bool include_offset, std::size_t dense_limit) {
    check_dims(h.n_qubits, dense_limit, "dense_hamiltonian");
    std::size_t dim = std::size_t{1} << h.n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& term : h.terms) {
        if (term.string.num_qubits() != h.n_qubits)
            throw std::invalid_argument("dense_hamiltonian: term qubit count mismatch");
        IndexMasks masks = index_masks(term.string);
        for (std::uint64_t i = 0; i < dim; ++i) m(i ^ masks.x, i) += term.coeff * pauli_phase(masks, i);
    }
    if (include_offset)
        for (std::uint64_t i = 0; i < dim; ++i) m(i, i) += h.offset;
    return m;
}

Eigen::MatrixXcd exact_unitary(const PauliHamiltonian& h, double t, std::size_t dense_limit) {
    Eigen::MatrixXcd m = dense_hamiltonian(h, true, dense_limit);
    double residue = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (residue > 1e-9) throw std::runtime_error("exact_unitary: non-Hermitian assembly residue");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) throw std::runtime_error("exact_unitary: eigensolver failed");
    Eigen::VectorXcd phases(solver.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex(0.0, -solver.eigenvalues()(i) * t));
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

Eigen::MatrixXcd sequence_unitary(const GateSequence& seq, std::size_t dense_limit) {
    check_dims(seq.n_qubits, dense_limit, "sequence_unitary");
    std::size_t dim = std::size_t{1} << seq.n_qubits;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd applied(dim, dim);
    for (const auto& entry : seq.entries) {
        IndexMasks masks = index_masks(entry.string);
        for (std::uint64_t c = 0; c < dim; ++c)
            for (std::uint64_t i = 0; i < dim; ++i) applied(i ^ masks.x, c) = pauli_phase(masks, i) * u(i, c);
        u = std::cos(entry.angle) * u - Complex(0.0, 1.0) * std::sin(entry.angle) * applied;
    }
    return u;
}

double spectral_norm(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m.adjoint() * m, Eigen::EigenvaluesOnly);
    double top = solver.eigenvalues().maxCoeff();
    return std::sqrt(std::max(top, 0.0));
}

double spectral_error(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols()) throw std::invalid_argument("spectral_error: shape mismatch");
    return spectral_norm(u - v);
}

double spectral_error_aligned(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols())
        throw std::invalid_argument("spectral_error_aligned: shape mismatch");
    Complex overlap = (v.adjoint() * u).trace();
    if (std::abs(overlap) < 1e-14) return spectral_norm(u - v);
    Complex phase = overlap / std::abs(overlap);
    return spectral_norm(u - phase * v);
}

void MixedUnitaryChannel::validate(double tolerance) const {
    if (components.empty()) throw std::invalid_argument("MixedUnitaryChannel: empty");
    double total = 0.0;
    Eigen::Index dim = components.front().second.rows();
    for (const auto& [p, unitary] : components) {
        if (p < -tolerance) throw std::invalid_argument("MixedUnitaryChannel: negative probability");
        if (unitary.rows() != dim || unitary.cols() != dim)
            throw std::invalid_argument("MixedUnitaryChannel: dimension mismatch");
        total += p;
    }
    if (std::abs(total - 1.0) > std::max(tolerance, 1e-9))
        throw std::invalid_argument("MixedUnitaryChannel: probabilities sum to " + std::to_string(total));
}

Eigen::MatrixXcd MixedUnitaryChannel::mean() const {
    validate();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(components.front().second.rows(), components.front().second.cols());
    for (const auto& [p, unitary] : components) acc += p * unitary;
    return acc;
}

Eigen::MatrixXcd MixedUnitaryChannel::apply(const Eigen::MatrixXcd& rho) const {
    validate();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (const auto& [p, unitary] : components) acc += p * (unitary * rho * unitary.adjoint());
    return acc;
}

namespace {

// exp(-i angle P) assembled directly from the masks: cos(angle) I - i sin(angle) P.
Eigen::MatrixXcd exponential_entry(const PauliString& string, double angle, std::size_t dim) {
    IndexMasks masks = index_masks(string);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    double c = std::cos(angle), s = std::sin(angle);
    for (std::uint64_t i = 0; i < dim; ++i) {
        m(i, i) += c;
        m(i ^ masks.x, i) -= Complex(0.0, s) * pauli_phase(masks, i);
    }
    return m;
}

}  // namespace

MixedUnitaryChannel qdrift_step_channel(const PauliHamiltonian& h, double t, std::size_t samples,
                                        std::size_t dense_limit) {
    check_dims(h.n_qubits, dense_limit, "qdrift_step_channel");
    if (samples == 0) throw std::invalid_argument("qdrift_step_channel: samples must be >= 1");
    std::size_t dim = std::size_t{1} << h.n_qubits;
    SamplingDistribution dist = qdrift_distribution(h);
    auto order = canonical_order(h);
    double lambda = h.lambda();
    double dt = t / static_cast<double>(samples);
    MixedUnitaryChannel channel;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (dist.weights[i] <= 0.0) continue;
        const PauliTerm& term = h.terms[order[i]];
        double angle = (term.coeff < 0.0 ? -1.0 : 1.0) * lambda * dt;
        channel.components.push_back({dist.weights[i], exponential_entry(term.string, angle, dim)});
    }
    return channel;
}

MixedUnitaryChannel physdrift_step_channel(const GroupedHamiltonian& grouped, double t, std::size_t draws,
                                           WeightScheme scheme, std::size_t dense_limit) {
    check_dims(grouped.n_qubits, dense_limit, "physdrift_step_channel");
    if (draws == 0) throw std::invalid_argument("physdrift_step_channel: draws must be >= 1");
    std::size_t dim = std::size_t{1} << grouped.n_qubits;
    SamplingDistribution dist = physdrift_distribution(grouped, scheme);
    double lambda_s = 0.0;
    std::vector<double> weights;
    for (const auto& group : grouped.groups) {
        double w = scheme == WeightScheme::Abs ? group.abs_weight : std::abs(group.mean_weight);
        weights.push_back(w);
        lambda_s += w;
    }
    double dt = t / static_cast<double>(draws);
    MixedUnitaryChannel channel;
    for (std::size_t j = 0; j < grouped.groups.size(); ++j) {
        if (dist.weights[j] <= 0.0) continue;
        Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
        for (const auto& term : grouped.groups[j].terms) {
            double magnitude = std::abs(term.coeff) / weights[j];
            double angle = (term.coeff < 0.0 ? -1.0 : 1.0) * magnitude * lambda_s * dt;
            u = exponential_entry(term.string, angle, dim) * u;
        }
        channel.components.push_back({dist.weights[j], std::move(u)});
    }
    return channel;
}

MixedUnitaryChannel random_permutation_step_channel(const PauliHamiltonian& h, double t, std::size_t steps,
                                                    std::size_t dense_limit) {
    check_dims(h.n_qubits, dense_limit, "random_permutation_step_channel");
    if (steps == 0) throw std::invalid_argument("random_permutation_step_channel: steps must be >= 1");
    std::size_t dim = std::size_t{1} << h.n_qubits;
    auto order = canonical_order(h);
    double dt = t / static_cast<double>(steps);
    Eigen::MatrixXcd forward = Eigen::MatrixXcd::Identity(dim, dim);
    for (std::size_t k : order) forward = exponential_entry(h.terms[k].string, h.terms[k].coeff * dt, dim) * forward;
    Eigen::MatrixXcd reversed = Eigen::MatrixXcd::Identity(dim, dim);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        reversed = exponential_entry(h.terms[*it].string, h.terms[*it].coeff * dt, dim) * reversed;
    MixedUnitaryChannel channel;
    channel.components.push_back({0.5, std::move(forward)});
    channel.components.push_back({0.5, std::move(reversed)});
    return channel;
}

Eigen::MatrixXcd channel_mean_unitary(const MixedUnitaryChannel& step, std::size_t steps) {
    if (steps == 0) throw std::invalid_argument("channel_mean_unitary: steps must be >= 1");
    Eigen::MatrixXcd base = step.mean();
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(base.rows(), base.cols());
    std::size_t e = steps;
    while (e > 0) {
        if (e & 1) result = base * result;
        base = base * base;
        e >>= 1;
    }
    return result;
}

Eigen::MatrixXcd monte_carlo_mean_unitary(const std::function<GateSequence(std::uint64_t)>& sample_fn,
                                          std::size_t repeats, std::uint64_t base_seed, std::size_t dense_limit) {
    if (repeats == 0) throw std::invalid_argument("monte_carlo_mean_unitary: repeats must be >= 1");
    Eigen::MatrixXcd acc;
    for (std::size_t r = 0; r < repeats; ++r) {
        Eigen::MatrixXcd u = sequence_unitary(sample_fn(derive_seed(base_seed, r)), dense_limit);
        if (r == 0)
            acc = u;
        else
            acc += u;
    }
    return acc / static_cast<double>(repeats);
}

double mixing_bound(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& mean_v) {
    return 2.0 * spectral_error(u, mean_v);
}

Eigen::VectorXcd basis_state(std::string_view bits) {
    if (bits.empty()) throw std::invalid_argument("basis_state: empty bit string");
    std::size_t n = bits.size();
    if (n > kDenseLimit) throw std::invalid_argument("basis_state: too many qubits");
    std::uint64_t index = 0;
    for (std::size_t q = 0; q < n; ++q) {
        char c = bits[q];
        if (c != '0' && c != '1') throw std::invalid_argument("basis_state: bits must be 0 or 1");
        if (c == '1') index |= std::uint64_t{1} << (n - 1 - q);
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(std::size_t{1} << n);
    v(index) = 1.0;
    return v;
}

namespace {

void apply_h(Eigen::VectorXcd& v, std::size_t n, std::size_t q) {
    std::uint64_t mask = std::uint64_t{1} << (n - 1 - q);
    const double inv_sqrt2 = 0.70710678118654752440;
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(v.size()); ++i) {
        if (i & mask) continue;
        Complex a = v(i), b = v(i | mask);
        v(i) = inv_sqrt2 * (a + b);
        v(i | mask) = inv_sqrt2 * (a - b);
    }
}

void apply_phase_on_one(Eigen::VectorXcd& v, std::size_t n, std::size_t q, Complex factor) {
    std::uint64_t mask = std::uint64_t{1} << (n - 1 - q);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(v.size()); ++i)
        if (i & mask) v(i) *= factor;
}

void apply_rz(Eigen::VectorXcd& v, std::size_t n, std::size_t q, double theta) {
    std::uint64_t mask = std::uint64_t{1} << (n - 1 - q);
    Complex on0 = std::exp(Complex(0.0, -theta / 2.0)), on1 = std::exp(Complex(0.0, theta / 2.0));
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(v.size()); ++i) v(i) *= (i & mask) ? on1 : on0;
}

void apply_cx(Eigen::VectorXcd& v, std::size_t n, std::size_t control, std::size_t target) {
    std::uint64_t cm = std::uint64_t{1} << (n - 1 - control);
    std::uint64_t tm = std::uint64_t{1} << (n - 1 - target);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(v.size()); ++i)
        if ((i & cm) && !(i & tm)) std::swap(v(i), v(i | tm));
}

void apply_single_pauli(Eigen::VectorXcd& v, std::size_t n, std::size_t q, Pauli p) {
    std::uint64_t mask = std::uint64_t{1} << (n - 1 - q);
    switch (p) {
        case Pauli::X:
            for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(v.size()); ++i)
                if (!(i & mask)) std::swap(v(i), v(i | mask));
            break;
        case Pauli::Y:
            for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(v.size()); ++i)
                if (!(i & mask)) {
                    Complex a = v(i), b = v(i | mask);
                    v(i) = Complex(0.0, -1.0) * b;
                    v(i | mask) = Complex(0.0, 1.0) * a;
                }
            break;
        case Pauli::Z: apply_phase_on_one(v, n, q, Complex(-1.0, 0.0)); break;
        case Pauli::I: break;
    }
}

}  // namespace

Eigen::VectorXcd run_statevector(const PrimitiveCircuit& circuit, const Eigen::VectorXcd& initial) {
    std::size_t n = circuit.n_qubits;
    check_dims(n, kDenseLimit, "run_statevector");
    if (initial.size() != static_cast<Eigen::Index>(std::size_t{1} << n))
        throw std::invalid_argument("run_statevector: initial state dimension mismatch");
    Eigen::VectorXcd state = initial;
    for (const auto& gate : circuit.gates) {
        switch (gate.kind) {
            case GateKind::H: apply_h(state, n, gate.target); break;
            case GateKind::S: apply_phase_on_one(state, n, gate.target, Complex(0.0, 1.0)); break;
            case GateKind::Sdg: apply_phase_on_one(state, n, gate.target, Complex(0.0, -1.0)); break;
            case GateKind::Rz: apply_rz(state, n, gate.target, gate.theta); break;
            case GateKind::CX: apply_cx(state, n, gate.control, gate.target); break;
        }
    }
    return state;
}

namespace {

void apply_entry(Eigen::VectorXcd& state, Eigen::VectorXcd& scratch, const SequenceEntry& entry) {
    IndexMasks masks = index_masks(entry.string);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(state.size()); ++i)
        scratch(i ^ masks.x) = pauli_phase(masks, i) * state(i);
    double c = std::cos(entry.angle), s = std::sin(entry.angle);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(state.size()); ++i)
        state(i) = c * state(i) - Complex(0.0, s) * scratch(i);
}

// One depolarizing fault opportunity per exponential. Three draws are
// consumed whether or not the fault fires, so trajectories at different
// depol_p share randomness under a common seed and differ only where the
// threshold test flips.
struct FaultInjector {
    std::mt19937_64 gen;
    double p = 0.0;

    FaultInjector(std::uint64_t seed, double depol_p) : gen(seed), p(depol_p) {}

    void after(Eigen::VectorXcd& state, std::size_t n, const PauliString& string) {
        double fire = uniform01(gen);
        double qubit_draw = uniform01(gen);
        double pauli_draw = uniform01(gen);
        if (fire >= p) return;
        std::vector<std::size_t> support;
        for (std::size_t q = 0; q < n; ++q)
            if (string.letter(q) != Pauli::I) support.push_back(q);
        if (support.empty()) return;
        auto pick = static_cast<std::size_t>(qubit_draw * static_cast<double>(support.size()));
        std::size_t acted = support[std::min(pick, support.size() - 1)];
        Pauli fault = pauli_draw < 1.0 / 3.0 ? Pauli::X : (pauli_draw < 2.0 / 3.0 ? Pauli::Y : Pauli::Z);
        apply_single_pauli(state, n, acted, fault);
    }
};

}  // namespace

Eigen::VectorXcd apply_sequence(const GateSequence& seq, const Eigen::VectorXcd& initial) {
    return apply_sequence(seq, initial, NoiseConfig{});
}

Eigen::VectorXcd apply_sequence(const GateSequence& seq, const Eigen::VectorXcd& initial, const NoiseConfig& noise) {
    std::size_t n = seq.n_qubits;
    check_dims(n, kDenseLimit, "apply_sequence");
    if (initial.size() != static_cast<Eigen::Index>(std::size_t{1} << n))
        throw std::invalid_argument("apply_sequence: initial state dimension mismatch");
    if (noise.depol_p < 0.0 || noise.depol_p > 1.0)
        throw std::invalid_argument("apply_sequence: depol_p out of [0,1]");
    Eigen::VectorXcd state = initial;
    Eigen::VectorXcd scratch(state.size());
    if (noise.depol_p == 0.0) {
        for (const auto& entry : seq.entries) apply_entry(state, scratch, entry);
        return state;
    }
    FaultInjector faults(noise.seed, noise.depol_p);
    for (const auto& entry : seq.entries) {
        apply_entry(state, scratch, entry);
        faults.after(state, n, entry.string);
    }
    return state;
}

double expectation(const Eigen::VectorXcd& state, const PauliHamiltonian& observable) {
    if (state.size() != static_cast<Eigen::Index>(std::size_t{1} << observable.n_qubits))
        throw std::invalid_argument("expectation: state dimension mismatch");
    Complex total = observable.offset;
    for (const auto& term : observable.terms) {
        IndexMasks masks = index_masks(term.string);
        Complex e = 0.0;
        for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(state.size()); ++i)
            e += std::conj(state(i ^ masks.x)) * pauli_phase(masks, i) * state(i);
        total += term.coeff * e;
    }
    if (std::abs(total.imag()) > 1e-10)
        throw std::runtime_error("expectation: imaginary residue " + std::to_string(total.imag()));
    return total.real();
}

ObservableSeries track_observables(const GateSequence& seq, const Eigen::VectorXcd& initial,
                                   const std::vector<std::pair<std::string, PauliHamiltonian>>& observables,
                                   CheckpointKind kind, const NoiseConfig& noise) {
    std::size_t n = seq.n_qubits;
    check_dims(n, kDenseLimit, "track_observables");
    if (initial.size() != static_cast<Eigen::Index>(std::size_t{1} << n))
        throw std::invalid_argument("track_observables: initial state dimension mismatch");
    if (noise.depol_p < 0.0 || noise.depol_p > 1.0)
        throw std::invalid_argument("track_observables: depol_p out of [0,1]");

    std::vector<std::size_t> checkpoints;
    if (kind == CheckpointKind::EveryEntry) {
        for (std::size_t i = 1; i <= seq.entries.size(); ++i) checkpoints.push_back(i);
    } else {
        MarkerKind want = kind == CheckpointKind::TrotterStepEnd ? MarkerKind::TrotterStepEnd
                          : kind == CheckpointKind::SampleStepEnd ? MarkerKind::SampleStepEnd
                                                                  : MarkerKind::GroupEnd;
        for (const auto& m : seq.markers)
            if (m.kind == want) checkpoints.push_back(m.index);
        if (checkpoints.empty())
            throw std::invalid_argument("track_observables: sequence has no markers of the requested kind");
    }

    ObservableSeries series;
    for (const auto& [name, obs] : observables) series.names.push_back(name);

    Eigen::VectorXcd state = initial;
    auto record = [&](std::size_t row_index, double time_proxy) {
        ObservableRow row;
        row.checkpoint = row_index;
        row.time_proxy = time_proxy;
        for (const auto& [name, obs] : observables) row.values.push_back(expectation(state, obs));
        series.rows.push_back(std::move(row));
    };

    double total = static_cast<double>(checkpoints.size());
    record(0, 0.0);
    std::size_t entry = 0;
    Eigen::VectorXcd scratch(state.size());
    FaultInjector faults(noise.seed, noise.depol_p);
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        for (; entry < checkpoints[c]; ++entry) {
            apply_entry(state, scratch, seq.entries[entry]);
            if (noise.depol_p > 0.0) faults.after(state, n, seq.entries[entry].string);
        }
        record(c + 1, seq.t * static_cast<double>(c + 1) / total);
    }
    return series;
}

std::vector<double> shot_attenuate(const std::vector<double>& values, std::size_t exponential_count,
                                   const NoiseConfig& noise) {
    double factor = std::exp(-noise.shot_alpha * static_cast<double>(exponential_count));
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(v * factor);
    return out;
}

std::uint64_t shots_required(double epsilon, std::size_t exponential_count, const NoiseConfig& noise) {
    if (epsilon <= 0.0) throw std::invalid_argument("shots_required: epsilon must be positive");
    double attenuation = std::exp(-noise.shot_alpha * static_cast<double>(exponential_count));
    double shots = 1.0 / (epsilon * epsilon * attenuation * attenuation);
    if (!(shots < 9.0e18)) throw std::overflow_error("shots_required: attenuation too strong");
    return static_cast<std::uint64_t>(std::ceil(shots));
}

}  // namespace driftsim
