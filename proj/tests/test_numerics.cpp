#include <doctest.h>

#include <cmath>
#include <random>

#include "driftsim/numerics.hpp"
#include "oracle.hpp"

using namespace driftsim;

namespace {

using oracle::Matrix;
using Vector = Eigen::VectorXcd;
const std::complex<double> kI(0.0, 1.0);

PauliHamiltonian random_ham(std::mt19937_64& gen, std::size_t n, std::size_t terms) {
    static const char letters[] = "IXYZ";
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    PauliHamiltonian h;
    h.n_qubits = n;
    h.offset = coeff(gen);
    while (h.terms.size() < terms) {
        std::string text;
        for (std::size_t q = 0; q < n; ++q) text += letters[gen() % 4];
        if (text.find_first_not_of('I') == std::string::npos) continue;
        h.terms.push_back({PauliString(text), coeff(gen)});
    }
    h.normalize(0.0);
    return h;
}

Matrix oracle_dense(const PauliHamiltonian& h, bool include_offset) {
    std::size_t dim = std::size_t{1} << h.n_qubits;
    Matrix m = (include_offset ? h.offset : 0.0) * Matrix::Identity(dim, dim);
    for (const auto& term : h.terms) m += term.coeff * oracle::pauli_dense(term.string.str());
    return m;
}

Matrix oracle_sequence(const GateSequence& seq) {
    std::size_t dim = std::size_t{1} << seq.n_qubits;
    Matrix u = Matrix::Identity(dim, dim);
    for (const auto& e : seq.entries) u = oracle::expm(-kI * e.angle * oracle::pauli_dense(e.string.str())) * u;
    return u;
}

Vector random_state(std::mt19937_64& gen, std::size_t dim) { return oracle::random_state(dim, gen); }

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("dense assembly matches the tensor-product sums") {
    std::mt19937_64 gen(51);
    for (int trial = 0; trial < 20; ++trial) {
        PauliHamiltonian h = random_ham(gen, 1 + gen() % 4, 5);
        CHECK((dense_hamiltonian(h, true) - oracle_dense(h, true)).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((dense_hamiltonian(h, false) - oracle_dense(h, false)).cwiseAbs().maxCoeff() < 1e-13);
    }
    PauliHamiltonian h = random_ham(gen, 3, 4);
    CHECK_THROWS_AS(dense_hamiltonian(h, true, 2), std::invalid_argument);
}

TEST_CASE("exact propagator matches the series exponential") {
    std::mt19937_64 gen(53);
    for (double t : {0.3, 1.0, 2.7}) {
        PauliHamiltonian h = random_ham(gen, 3, 6);
        Matrix got = exact_unitary(h, t);
        Matrix want = oracle::expm(-kI * t * oracle_dense(h, true));
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-11);
        CHECK((got * got.adjoint() - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
    }

    // The scalar offset enters as a pure phase.
    PauliHamiltonian scalar;
    scalar.n_qubits = 1;
    scalar.offset = 0.8;
    Matrix u = exact_unitary(scalar, 2.0);
    CHECK((u - std::exp(-kI * 1.6) * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("entry products match exponential products") {
    std::mt19937_64 gen(57);
    PauliHamiltonian h = random_ham(gen, 3, 5);
    for (const GateSequence& seq :
         {compile_trotter2(h.without_offset(), 0.9, 3), sample_qdrift(h.without_offset(), 0.9, 40, 5)}) {
        CHECK((sequence_unitary(seq) - oracle_sequence(seq)).cwiseAbs().maxCoeff() < 1e-12);
    }

    // Single entry: cos(a) I - i sin(a) P.
    GateSequence one;
    one.n_qubits = 1;
    one.entries = {{PauliString("Y"), 0.6}};
    Matrix want = std::cos(0.6) * Matrix::Identity(2, 2) - kI * std::sin(0.6) * oracle::pauli_dense("Y");
    CHECK((sequence_unitary(one) - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("spectral error agrees with singular values") {
    std::mt19937_64 gen(59);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix a = oracle::random_unitary(8, gen), b = oracle::random_unitary(8, gen);
        CHECK(spectral_error(a, b) == doctest::Approx(oracle::spectral_norm(a - b)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(spectral_error(Matrix::Identity(2, 2), Matrix::Identity(4, 4)), std::invalid_argument);
}

TEST_CASE("phase alignment removes a global phase exactly") {
    std::mt19937_64 gen(61);
    Matrix u = oracle::random_unitary(8, gen);
    CHECK(spectral_error_aligned(u, std::exp(kI * 1.234) * u) < 1e-13);

    // diag(1, e^{it}) against the identity: best phase splits the arc.
    double t = 1.0;
    Matrix v(2, 2);
    v << 1.0, 0.0, 0.0, std::exp(kI * t);
    CHECK(spectral_error_aligned(v, Matrix::Identity(2, 2)) == doctest::Approx(2.0 * std::sin(t / 4.0)).epsilon(1e-12));
    CHECK(spectral_error(v, Matrix::Identity(2, 2)) == doctest::Approx(2.0 * std::sin(t / 2.0)).epsilon(1e-12));
}

TEST_CASE("mixed unitary channels validate and average") {
    std::mt19937_64 gen(67);
    Matrix u1 = oracle::random_unitary(4, gen), u2 = oracle::random_unitary(4, gen);
    MixedUnitaryChannel channel;
    channel.components = {{0.25, u1}, {0.75, u2}};
    CHECK_NOTHROW(channel.validate());
    CHECK((channel.mean() - (0.25 * u1 + 0.75 * u2)).cwiseAbs().maxCoeff() < 1e-14);

    Vector psi = random_state(gen, 4);
    Matrix rho = psi * psi.adjoint();
    Matrix out = channel.apply(rho);
    CHECK(std::abs(out.trace().real() - 1.0) < 1e-12);
    CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out - (0.25 * u1 * rho * u1.adjoint() + 0.75 * u2 * rho * u2.adjoint())).cwiseAbs().maxCoeff() < 1e-13);

    MixedUnitaryChannel bad;
    bad.components = {{0.5, u1}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // probabilities sum to 0.5
    bad.components = {{-0.1, u1}, {1.1, u2}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.components = {{0.5, u1}, {0.5, Matrix::Identity(2, 2)}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    MixedUnitaryChannel empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("qdrift step channel has the analytic mean") {
    PauliHamiltonian h = jordan_wigner(build_hubbard(2, 1.0, 4.0));
    double lambda = h.lambda();
    double t = 0.8;
    std::size_t samples = 20;
    MixedUnitaryChannel step = qdrift_step_channel(h, t, samples);
    CHECK(step.components.size() == h.terms.size());
    CHECK_NOTHROW(step.validate());
    for (const auto& [p, v] : step.components)
        CHECK((v * v.adjoint() - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);

    // sum_j p_j exp(-i sign_j lambda dt P_j) = cos(lambda dt) I - i sin(lambda dt) H / lambda
    double theta = lambda * t / static_cast<double>(samples);
    Matrix want = std::cos(theta) * Matrix::Identity(16, 16) -
                  kI * std::sin(theta) / lambda * dense_hamiltonian(h.without_offset(), false);
    CHECK((step.mean() - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("group step channel components evolve whole groups") {
    GroupedHamiltonian g = classify_groups(build_hubbard(2, 1.0, 4.0));
    double t = 0.6;
    std::size_t draws = 10;
    MixedUnitaryChannel step = physdrift_step_channel(g, t, draws, WeightScheme::Abs);
    REQUIRE(step.components.size() == g.groups.size());
    CHECK_NOTHROW(step.validate());

    double lambda_s = 8.0, dt = t / static_cast<double>(draws);
    for (std::size_t j = 0; j < g.groups.size(); ++j) {
        const auto& group = g.groups[j];
        PauliHamiltonian scaled;
        scaled.n_qubits = g.n_qubits;
        for (const auto& term : group.terms) {
            double magnitude = std::abs(term.coeff) / group.abs_weight;
            scaled.terms.push_back({term.string, (term.coeff < 0 ? -1.0 : 1.0) * magnitude * lambda_s});
        }
        Matrix want = oracle::expm(-kI * dt * oracle_dense(scaled, false));
        CHECK((step.components[j].second - want).cwiseAbs().maxCoeff() < 1e-11);
    }

    // First-order unbiasedness: mean = I - i dt H + O(dt^2).
    double small = 1e-3;
    MixedUnitaryChannel tiny = physdrift_step_channel(g, small, 1, WeightScheme::Abs);
    Matrix first = Matrix::Identity(16, 16) - kI * small * dense_hamiltonian(jordan_wigner(build_hubbard(2, 1.0, 4.0)).without_offset(), false);
    CHECK((tiny.mean() - first).cwiseAbs().maxCoeff() < 0.5 * 8.0 * 8.0 * small * small);
}

TEST_CASE("direction-coin channel averages the two orderings") {
    PauliHamiltonian h = jordan_wigner(build_hubbard(2, 1.0, 4.0)).without_offset();
    MixedUnitaryChannel step = random_permutation_step_channel(h, 1.0, 4);
    REQUIRE(step.components.size() == 2);
    CHECK(step.components[0].first == doctest::Approx(0.5));
    CHECK(step.components[1].first == doctest::Approx(0.5));

    GateSequence fwd = compile_trotter1(h, 0.25, 1);
    Matrix forward = sequence_unitary(fwd);
    CHECK((step.components[0].second - forward).cwiseAbs().maxCoeff() < 1e-12);
    // Reversed component is the transpose ordering of the same exponentials.
    GateSequence rev = fwd;
    std::reverse(rev.entries.begin(), rev.entries.end());
    CHECK((step.components[1].second - sequence_unitary(rev)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mean powers compose step means") {
    std::mt19937_64 gen(71);
    MixedUnitaryChannel step;
    step.components = {{0.5, oracle::random_unitary(4, gen)}, {0.5, oracle::random_unitary(4, gen)}};
    Matrix m = step.mean();
    CHECK((channel_mean_unitary(step, 1) - m).cwiseAbs().maxCoeff() < 1e-14);
    Matrix m5 = m * m * m * m * m;
    CHECK((channel_mean_unitary(step, 5) - m5).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(channel_mean_unitary(step, 0), std::invalid_argument);
}

TEST_CASE("sampled means converge to the analytic channel mean") {
    PauliHamiltonian h;
    h.n_qubits = 1;
    h.terms = {{PauliString("X"), 0.6}, {PauliString("Z"), -0.4}};
    double t = 0.5;
    Matrix analytic = qdrift_step_channel(h, t, 1).mean();
    auto sample = [&](std::uint64_t seed) { return sample_qdrift(h, t, 1, seed); };
    Matrix mc = monte_carlo_mean_unitary(sample, 4000, 77);
    CHECK((mc - analytic).cwiseAbs().maxCoeff() < 0.05);
    // Deterministic under the same base seed.
    CHECK((mc - monte_carlo_mean_unitary(sample, 4000, 77)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mixing bound is twice the mean distance") {
    std::mt19937_64 gen(73);
    Matrix u = oracle::random_unitary(4, gen), m = 0.9 * oracle::random_unitary(4, gen);
    CHECK(mixing_bound(u, m) == doctest::Approx(2.0 * spectral_error(u, m)).epsilon(1e-13));
}

TEST_CASE("mixing lemma holds on random ensembles") {
    std::mt19937_64 gen(79);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        Matrix u = oracle::random_unitary(2, gen);
        double p = unit(gen);
        MixedUnitaryChannel channel;
        channel.components = {{p, oracle::random_unitary(2, gen)}, {1.0 - p, oracle::random_unitary(2, gen)}};
        double bound = mixing_bound(u, channel.mean());
        for (int s = 0; s < 5; ++s) {
            Vector psi = random_state(gen, 2);
            Matrix rho = psi * psi.adjoint();
            double dist = oracle::trace_distance(channel.apply(rho), u * rho * u.adjoint());
            CHECK(dist <= bound + 1e-9);
        }
    }
}

TEST_CASE("basis states put qubit 0 on the top bit") {
    Vector v = basis_state("10");
    REQUIRE(v.size() == 4);
    CHECK(std::abs(v(2) - 1.0) < 1e-15);
    CHECK(v.cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(std::abs(basis_state("0")(0) - 1.0) < 1e-15);
    CHECK_THROWS_AS(basis_state(""), std::invalid_argument);
    CHECK_THROWS_AS(basis_state("012"), std::invalid_argument);
}

TEST_CASE("statevector run matches the dense circuit when noiseless") {
    std::mt19937_64 gen(83);
    PauliHamiltonian h = random_ham(gen, 3, 4).without_offset();
    GateSequence seq = compile_trotter1(h, 0.7, 2);
    PrimitiveCircuit circuit = synthesize_sequence(seq);

    Vector initial = random_state(gen, 8);
    Vector got = run_statevector(circuit, initial);
    Vector want = sequence_unitary(seq) * initial;
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(run_statevector(circuit, random_state(gen, 4)), std::invalid_argument);
}

TEST_CASE("certain injection flips exactly one pauli per exponential") {
    // Single-entry sequence: exp(-i 0.3 XI) on 2 qubits.
    GateSequence seq;
    seq.n_qubits = 2;
    seq.t = 0.3;
    seq.entries = {{PauliString("XI"), 0.3}};

    std::mt19937_64 gen(89);
    Vector initial = random_state(gen, 4);
    Vector ideal = apply_sequence(seq, initial);
    NoiseConfig certain;
    certain.depol_p = 1.0;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        certain.seed = seed;
        Vector noisy = apply_sequence(seq, initial, certain);
        CHECK(noisy.norm() == doctest::Approx(1.0).epsilon(1e-13));
        // The fault acts on the entry's support, qubit 0 only.
        double best = 1e9;
        for (const char* p : {"XI", "YI", "ZI"}) {
            Vector candidate = oracle::pauli_dense(p) * ideal;
            best = std::min(best, (noisy - candidate).cwiseAbs().maxCoeff());
        }
        CHECK(best < 1e-13);
    }

    // Reproducible under the same seed.
    certain.seed = 5;
    Vector once = apply_sequence(seq, initial, certain);
    Vector again = apply_sequence(seq, initial, certain);
    CHECK((once - again).cwiseAbs().maxCoeff() == 0.0);

    NoiseConfig bad;
    bad.depol_p = 1.5;
    CHECK_THROWS_AS(apply_sequence(seq, initial, bad), std::invalid_argument);
}

TEST_CASE("trajectories at different depol strengths share their draw stream") {
    std::mt19937_64 gen(91);
    PauliHamiltonian h = random_ham(gen, 3, 4).without_offset();
    GateSequence seq = compile_trotter1(h, 0.8, 40);
    Vector initial = random_state(gen, 8);

    // With a shared seed the injection sets are nested across strengths, so
    // a run at strength zero reproduces the noiseless state bit for bit.
    NoiseConfig off;
    off.seed = 17;
    CHECK((apply_sequence(seq, initial, off) - apply_sequence(seq, initial)).cwiseAbs().maxCoeff() == 0.0);

    // A fault that fires at threshold p also fires at every larger p; the
    // weaker run that never fires stays on the ideal trajectory.
    NoiseConfig weak = off, strong = off;
    weak.depol_p = 1e-9;
    strong.depol_p = 0.2;
    CHECK((apply_sequence(seq, initial, weak) - apply_sequence(seq, initial)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((apply_sequence(seq, initial, strong) - apply_sequence(seq, initial)).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("analytic sequence application equals the sequence unitary") {
    std::mt19937_64 gen(97);
    PauliHamiltonian h = random_ham(gen, 3, 5).without_offset();
    GateSequence seq = sample_qdrift(h, 1.0, 30, 3);
    Vector initial = random_state(gen, 8);
    CHECK((apply_sequence(seq, initial) - sequence_unitary(seq) * initial).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(apply_sequence(seq, random_state(gen, 4)), std::invalid_argument);
}

TEST_CASE("expectations match dense quadratic forms") {
    std::mt19937_64 gen(101);
    for (int trial = 0; trial < 10; ++trial) {
        PauliHamiltonian h = random_ham(gen, 3, 5);
        Vector psi = random_state(gen, 8);
        double want = (psi.adjoint() * oracle_dense(h, true) * psi)(0, 0).real();
        CHECK(expectation(psi, h) == doctest::Approx(want).epsilon(1e-11));
    }
    PauliHamiltonian h = random_ham(gen, 2, 3);
    CHECK_THROWS_AS(expectation(random_state(gen, 8), h), std::invalid_argument);
}

TEST_CASE("observable tracking: checkpoints, grids, conservation") {
    PauliHamiltonian h = jordan_wigner(build_hubbard(2, 1.0, 4.0));
    GateSequence seq = compile_trotter1(h.without_offset(), 1.0, 4);
    ParticleNumberOperator number = particle_number(4);
    std::vector<std::pair<std::string, PauliHamiltonian>> obs = {{"energy", h}, {"particle_number", number.pauli_form}};

    Vector initial = basis_state("1110");
    ObservableSeries steps = track_observables(seq, initial, obs, CheckpointKind::TrotterStepEnd);
    REQUIRE(steps.rows.size() == 5);
    CHECK(steps.names == std::vector<std::string>{"energy", "particle_number"});
    CHECK(steps.rows[0].checkpoint == 0);
    CHECK(steps.rows[0].time_proxy == doctest::Approx(0.0));
    CHECK(steps.rows[4].time_proxy == doctest::Approx(1.0));
    CHECK(steps.rows[2].time_proxy == doctest::Approx(0.5));
    CHECK(steps.rows[0].values[1] == doctest::Approx(3.0));

    // Each full step conserves particle number: the flip pairs commute and
    // sum to number-conserving hopping.
    for (const auto& row : steps.rows) CHECK(row.values[1] == doctest::Approx(3.0).epsilon(1e-12));

    // Mid-step checkpoints expose the transient violation of a lone flip pair.
    ObservableSeries fine = track_observables(seq, initial, obs, CheckpointKind::EveryEntry);
    REQUIRE(fine.rows.size() == seq.entries.size() + 1);
    double worst = 0.0;
    for (const auto& row : fine.rows) worst = std::max(worst, std::abs(row.values[1] - 3.0));
    CHECK(worst > 1e-3);

    // Group draws conserve particle number at group boundaries.
    GateSequence phys = sample_physdrift(classify_groups(build_hubbard(2, 1.0, 4.0)), 1.0, 50, WeightScheme::Abs, 7);
    ObservableSeries groups = track_observables(phys, basis_state("1100"), obs, CheckpointKind::GroupEnd);
    REQUIRE(groups.rows.size() == 51);
    for (const auto& row : groups.rows) CHECK(row.values[1] == doctest::Approx(2.0).epsilon(1e-12));

    // Marker kind absent from the sequence.
    CHECK_THROWS_AS(track_observables(phys, basis_state("1100"), obs, CheckpointKind::TrotterStepEnd),
                    std::invalid_argument);
}

TEST_CASE("shot attenuation and the shot budget") {
    NoiseConfig noise;
    noise.shot_alpha = 0.001;
    std::vector<double> attenuated = shot_attenuate({2.0, -1.0}, 1000, noise);
    CHECK(attenuated[0] == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-13));
    CHECK(attenuated[1] == doctest::Approx(-std::exp(-1.0)).epsilon(1e-13));
    CHECK(shot_attenuate({2.0}, 1000, NoiseConfig{})[0] == doctest::Approx(2.0));

    CHECK(shots_required(0.01, 1000, noise) == 73891);
    CHECK(shots_required(0.01, 0, noise) == 10000);
    CHECK(shots_required(0.01, 0, NoiseConfig{}) == 10000);
    CHECK_THROWS_AS(shots_required(0.0, 10, noise), std::invalid_argument);
    NoiseConfig strong;
    strong.shot_alpha = 1.0;
    CHECK_THROWS_AS(shots_required(0.01, 50, strong), std::overflow_error);
}

}  // TEST_SUITE
