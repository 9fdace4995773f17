#include "driftsim/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace driftsim {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t n) { return (n + kWordBits - 1) / kWordBits; }

// Symplectic letter code x + 2z: 0=I, 1=X, 2=Z, 3=Y.
constexpr int kPhasePow[4][4] = {
    {0, 0, 0, 0},  // I *
    {0, 0, 3, 1},  // X * {I,X,Z,Y}: XZ=-iY, XY=+iZ
    {0, 1, 0, 3},  // Z * {I,X,Z,Y}: ZX=+iY, ZY=-iX
    {0, 3, 1, 0},  // Y * {I,X,Z,Y}: YX=-iZ, YZ=+iX
};

constexpr std::complex<double> kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    throw std::logic_error("pauli_char: bad letter");
}

Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
        default: throw std::invalid_argument(std::string("invalid Pauli letter '") + c + "'");
    }
}

PauliString::PauliString(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("pauli parse error: empty string");
    n_ = text.size();
    x_.assign(word_count(n_), 0);
    z_.assign(word_count(n_), 0);
    for (std::size_t q = 0; q < n_; ++q) {
        char c = text[q];
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
            std::ostringstream msg;
            msg << "pauli parse error at position " << q << ": '" << c << "'";
            throw std::invalid_argument(msg.str());
        }
        set_letter(q, pauli_from_char(c));
    }
}

PauliString PauliString::identity(std::size_t n_qubits) {
    if (n_qubits == 0) throw std::invalid_argument("PauliString: qubit count must be >= 1");
    PauliString p;
    p.n_ = n_qubits;
    p.x_.assign(word_count(n_qubits), 0);
    p.z_.assign(word_count(n_qubits), 0);
    return p;
}

Pauli PauliString::letter(std::size_t qubit) const {
    if (qubit >= n_) throw std::out_of_range("PauliString::letter: qubit out of range");
    bool x = (x_[qubit / kWordBits] >> (qubit % kWordBits)) & 1;
    bool z = (z_[qubit / kWordBits] >> (qubit % kWordBits)) & 1;
    if (x && z) return Pauli::Y;
    if (x) return Pauli::X;
    if (z) return Pauli::Z;
    return Pauli::I;
}

void PauliString::set_letter(std::size_t qubit, Pauli p) {
    if (qubit >= n_) throw std::out_of_range("PauliString::set_letter: qubit out of range");
    std::uint64_t bit = 1ULL << (qubit % kWordBits);
    std::uint64_t& xw = x_[qubit / kWordBits];
    std::uint64_t& zw = z_[qubit / kWordBits];
    xw &= ~bit;
    zw &= ~bit;
    if (p == Pauli::X || p == Pauli::Y) xw |= bit;
    if (p == Pauli::Z || p == Pauli::Y) zw |= bit;
}

std::size_t PauliString::weight() const {
    std::size_t w = 0;
    for (std::size_t i = 0; i < x_.size(); ++i) w += std::popcount(x_[i] | z_[i]);
    return w;
}

std::string PauliString::str() const {
    std::string out(n_, 'I');
    for (std::size_t q = 0; q < n_; ++q) out[q] = pauli_char(letter(q));
    return out;
}

bool PauliString::commutes_with(const PauliString& other) const {
    if (n_ != other.n_) throw std::invalid_argument("commutes: length mismatch");
    // Parity of the symplectic form equals the parity of positions where both
    // letters are non-identity and differ.
    int parity = 0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
        parity ^= std::popcount(x_[i] & other.z_[i]) & 1;
        parity ^= std::popcount(z_[i] & other.x_[i]) & 1;
    }
    return parity == 0;
}

bool PauliString::operator<(const PauliString& other) const {
    if (n_ != other.n_) return n_ < other.n_;
    for (std::size_t q = 0; q < n_; ++q) {
        char a = pauli_char(letter(q));
        char b = pauli_char(other.letter(q));
        if (a != b) return a < b;
    }
    return false;
}

PauliProduct multiply(const PauliString& a, const PauliString& b) {
    if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("multiply: length mismatch");
    std::size_t n = a.num_qubits();
    PauliString out = PauliString::identity(n);
    int pow = 0;
    for (std::size_t q = 0; q < n; ++q) {
        Pauli pa = a.letter(q);
        Pauli pb = b.letter(q);
        auto code = [](Pauli p) {
            switch (p) {
                case Pauli::I: return 0;
                case Pauli::X: return 1;
                case Pauli::Z: return 2;
                case Pauli::Y: return 3;
            }
            return 0;
        };
        int ca = code(pa), cb = code(pb);
        pow = (pow + kPhasePow[ca][cb]) & 3;
        int cc = ca ^ cb;  // symplectic bits xor
        Pauli prod = cc == 0 ? Pauli::I : cc == 1 ? Pauli::X : cc == 2 ? Pauli::Z : Pauli::Y;
        out.set_letter(q, prod);
    }
    return {kIPow[pow], out};
}

Eigen::MatrixXcd to_dense(const PauliString& p, std::size_t dense_limit) {
    std::size_t n = p.num_qubits();
    if (n > dense_limit) {
        throw std::invalid_argument("to_dense: " + std::to_string(n) + " qubits exceeds dense limit " +
                                    std::to_string(dense_limit));
    }
    const std::complex<double> i1(0, 1);
    auto single = [&](Pauli l) {
        Eigen::Matrix2cd m;
        switch (l) {
            case Pauli::I: m << 1, 0, 0, 1; break;
            case Pauli::X: m << 0, 1, 1, 0; break;
            case Pauli::Y: m << 0, -i1, i1, 0; break;
            case Pauli::Z: m << 1, 0, 0, -1; break;
        }
        return m;
    };
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
    for (std::size_t q = 0; q < n; ++q) {
        Eigen::Matrix2cd m = single(p.letter(q));
        Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index c = 0; c < out.cols(); ++c) next.block<2, 2>(2 * r, 2 * c) = out(r, c) * m;
        out = std::move(next);
    }
    return out;
}

void PauliHamiltonian::normalize(double drop_tolerance) {
    std::map<PauliString, double> merged;
    for (const auto& term : terms) {
        if (!std::isfinite(term.coeff)) throw std::invalid_argument("PauliHamiltonian: non-finite coefficient");
        if (term.string.num_qubits() != n_qubits)
            throw std::invalid_argument("PauliHamiltonian: mixed qubit counts in term list");
        if (term.string.is_identity()) {
            offset += term.coeff;
            continue;
        }
        merged[term.string] += term.coeff;
    }
    terms.clear();
    for (auto& [string, coeff] : merged) {
        if (std::abs(coeff) <= drop_tolerance) continue;
        terms.push_back({string, coeff});
    }
}

double PauliHamiltonian::lambda() const {
    double sum = 0.0;
    for (const auto& term : terms) sum += std::abs(term.coeff);
    return sum;
}

double PauliHamiltonian::lambda_max() const {
    double best = 0.0;
    for (const auto& term : terms) best = std::max(best, std::abs(term.coeff));
    return best;
}

PauliHamiltonian PauliHamiltonian::without_offset() const {
    PauliHamiltonian copy = *this;
    copy.offset = 0.0;
    return copy;
}

nlohmann::json PauliHamiltonian::to_json() const {
    nlohmann::json terms_json = nlohmann::json::array();
    for (const auto& term : terms) terms_json.push_back({{"string", term.string.str()}, {"coeff", term.coeff}});
    return {{"n_qubits", n_qubits}, {"offset", offset}, {"terms", terms_json}};
}

PauliHamiltonian PauliHamiltonian::from_json(const nlohmann::json& j) {
    PauliHamiltonian h;
    h.n_qubits = j.at("n_qubits").get<std::size_t>();
    h.offset = j.value("offset", 0.0);
    for (const auto& term : j.at("terms")) {
        PauliString string(term.at("string").get<std::string>());
        if (string.num_qubits() != h.n_qubits)
            throw std::invalid_argument("pauli json: term length differs from n_qubits");
        h.terms.push_back({std::move(string), term.at("coeff").get<double>()});
    }
    return h;
}

}  // namespace driftsim
