#include <doctest.h>

#include <random>
#include <sstream>

#include "driftsim/pauli.hpp"
#include "oracle.hpp"

using namespace driftsim;

namespace {

PauliString random_string(std::mt19937_64& gen, std::size_t n) {
    static const char letters[] = "IXYZ";
    std::string text;
    for (std::size_t q = 0; q < n; ++q) text += letters[gen() % 4];
    return PauliString(text);
}

}  // namespace

TEST_SUITE("pauli") {

TEST_CASE("parse and text round-trip") {
    PauliString p("IXYZ");
    CHECK(p.num_qubits() == 4);
    CHECK(p.letter(0) == Pauli::I);
    CHECK(p.letter(1) == Pauli::X);
    CHECK(p.letter(2) == Pauli::Y);
    CHECK(p.letter(3) == Pauli::Z);
    CHECK(p.str() == "IXYZ");
    CHECK(p.weight() == 3);
    CHECK_FALSE(p.is_identity());
    CHECK(PauliString::identity(3).is_identity());
    CHECK(PauliString::identity(3).str() == "III");
}

TEST_CASE("parse rejects bad input") {
    CHECK_THROWS_AS(PauliString(""), std::invalid_argument);
    CHECK_THROWS_AS(PauliString("IXQZ"), std::invalid_argument);
    try {
        PauliString("IXQZ");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("position 2") != std::string::npos);
    }
    CHECK_THROWS_AS(PauliString("ixyz"), std::invalid_argument);
}

TEST_CASE("set_letter and equality") {
    PauliString p = PauliString::identity(3);
    p.set_letter(1, Pauli::Y);
    CHECK(p.str() == "IYI");
    p.set_letter(1, Pauli::I);
    CHECK(p == PauliString::identity(3));
    CHECK(PauliString("XX") != PauliString("XY"));
    CHECK_THROWS_AS(p.set_letter(3, Pauli::X), std::out_of_range);
}

TEST_CASE("ordering is lexicographic on text") {
    CHECK(PauliString("IX") < PauliString("XI"));
    CHECK(PauliString("XX") < PauliString("XY"));
    CHECK(PauliString("XY") < PauliString("XZ"));
    CHECK(PauliString("IZ") < PauliString("ZI"));
    CHECK_FALSE(PauliString("ZZ") < PauliString("ZZ"));
}

TEST_CASE("single-qubit products match dense arithmetic") {
    const std::string letters = "IXYZ";
    for (char a : letters)
        for (char b : letters) {
            PauliProduct prod = multiply(PauliString(std::string(1, a)), PauliString(std::string(1, b)));
            oracle::Matrix lhs = prod.phase * oracle::pauli_dense(prod.string.str());
            oracle::Matrix rhs = oracle::pauli_dense(std::string(1, a)) * oracle::pauli_dense(std::string(1, b));
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-15);
        }
}

TEST_CASE("known product: XZ * ZX = +YY") {
    PauliProduct prod = multiply(PauliString("XZ"), PauliString("ZX"));
    CHECK(prod.string.str() == "YY");
    CHECK(prod.phase.real() == doctest::Approx(1.0));
    CHECK(prod.phase.imag() == doctest::Approx(0.0));
}

TEST_CASE("random products match dense arithmetic") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + gen() % 4;
        PauliString a = random_string(gen, n), b = random_string(gen, n);
        PauliProduct prod = multiply(a, b);
        oracle::Matrix lhs = prod.phase * oracle::pauli_dense(prod.string.str());
        oracle::Matrix rhs = oracle::pauli_dense(a.str()) * oracle::pauli_dense(b.str());
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("multiply requires matching qubit counts") {
    CHECK_THROWS_AS(multiply(PauliString("XX"), PauliString("X")), std::invalid_argument);
}

TEST_CASE("commutation matches the dense commutator") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + gen() % 4;
        PauliString a = random_string(gen, n), b = random_string(gen, n);
        oracle::Matrix da = oracle::pauli_dense(a.str()), db = oracle::pauli_dense(b.str());
        bool dense_commutes = (da * db - db * da).cwiseAbs().maxCoeff() < 1e-12;
        CHECK(a.commutes_with(b) == dense_commutes);
    }
    CHECK(PauliString("XX").commutes_with(PauliString("ZZ")));
    CHECK_FALSE(PauliString("XI").commutes_with(PauliString("ZI")));
    CHECK_THROWS_AS(PauliString("XZX").commutes_with(PauliString("ZZZZ")), std::invalid_argument);
}

TEST_CASE("dense form puts qubit 0 on the most significant index bit") {
    oracle::Matrix zi = to_dense(PauliString("ZI"));
    CHECK(zi(0, 0).real() == doctest::Approx(1.0));
    CHECK(zi(1, 1).real() == doctest::Approx(1.0));
    CHECK(zi(2, 2).real() == doctest::Approx(-1.0));
    CHECK(zi(3, 3).real() == doctest::Approx(-1.0));

    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 1 + gen() % 5;
        PauliString p = random_string(gen, n);
        CHECK((to_dense(p) - oracle::pauli_dense(p.str())).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("dense form respects the qubit limit") {
    CHECK_THROWS_AS(to_dense(PauliString("XX"), 1), std::invalid_argument);
}

TEST_CASE("normalize merges, folds identities, drops zeros") {
    PauliHamiltonian h;
    h.n_qubits = 2;
    h.terms = {{PauliString("XX"), 0.25},
               {PauliString("XX"), 0.5},
               {PauliString("II"), 1.5},
               {PauliString("YY"), 0.0},
               {PauliString("ZZ"), 0.3},
               {PauliString("ZZ"), -0.3}};
    h.normalize();
    REQUIRE(h.terms.size() == 1);
    CHECK(h.terms[0].string.str() == "XX");
    CHECK(h.terms[0].coeff == doctest::Approx(0.75));
    CHECK(h.offset == doctest::Approx(1.5));
}

TEST_CASE("normalize drop tolerance") {
    PauliHamiltonian h;
    h.n_qubits = 1;
    h.terms = {{PauliString("X"), 1e-15}, {PauliString("Z"), 0.5}};
    h.normalize(1e-12);
    REQUIRE(h.terms.size() == 1);
    CHECK(h.terms[0].string.str() == "Z");
}

TEST_CASE("normalize rejects malformed content") {
    PauliHamiltonian mixed;
    mixed.n_qubits = 2;
    mixed.terms = {{PauliString("XX"), 1.0}, {PauliString("X"), 1.0}};
    CHECK_THROWS_AS(mixed.normalize(), std::invalid_argument);

    PauliHamiltonian bad;
    bad.n_qubits = 1;
    bad.terms = {{PauliString("X"), std::numeric_limits<double>::quiet_NaN()}};
    CHECK_THROWS_AS(bad.normalize(), std::invalid_argument);
}

TEST_CASE("lambda and lambda_max") {
    PauliHamiltonian h;
    h.n_qubits = 1;
    h.offset = 9.0;  // offset never contributes
    h.terms = {{PauliString("X"), -0.5}, {PauliString("Z"), 0.25}};
    CHECK(h.lambda() == doctest::Approx(0.75));
    CHECK(h.lambda_max() == doctest::Approx(0.5));
    PauliHamiltonian wo = h.without_offset();
    CHECK(wo.offset == 0.0);
    CHECK(wo.terms.size() == 2);
}

TEST_CASE("json round-trip") {
    PauliHamiltonian h;
    h.n_qubits = 2;
    h.offset = -0.125;
    h.terms = {{PauliString("XY"), 0.5}, {PauliString("ZI"), -1.5}};
    PauliHamiltonian back = PauliHamiltonian::from_json(h.to_json());
    CHECK(back.n_qubits == 2);
    CHECK(back.offset == doctest::Approx(-0.125));
    REQUIRE(back.terms.size() == 2);
    CHECK(back.terms[0].string.str() == "XY");
    CHECK(back.terms[0].coeff == doctest::Approx(0.5));
    CHECK(back.terms[1].string.str() == "ZI");
    CHECK(back.terms[1].coeff == doctest::Approx(-1.5));
}

TEST_CASE("json rejects malformed input") {
    nlohmann::json missing = {{"n_qubits", 2}};
    CHECK_THROWS(PauliHamiltonian::from_json(missing));
    nlohmann::json wrong_len = {{"n_qubits", 2}, {"offset", 0.0}, {"terms", {{{"string", "X"}, {"coeff", 1.0}}}}};
    CHECK_THROWS_AS(PauliHamiltonian::from_json(wrong_len), std::invalid_argument);
}

}  // TEST_SUITE
