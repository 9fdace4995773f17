#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace driftsim {

inline constexpr std::size_t kDenseLimit = 12;  // 4096x4096 matrices at most

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

/// Tensor product of single-qubit Paulis, one letter per qubit; qubit 0 is the
/// leftmost letter of the text form. Stored as x/z bitmask words so that
/// commutation is a popcount of the symplectic overlap.
class PauliString {
  public:
    PauliString() = default;
    explicit PauliString(std::string_view text);  // parses "IXYZ..."

    static PauliString identity(std::size_t n_qubits);

    std::size_t num_qubits() const { return n_; }
    Pauli letter(std::size_t qubit) const;
    void set_letter(std::size_t qubit, Pauli p);

    std::size_t weight() const;  // count of non-identity letters
    bool is_identity() const { return weight() == 0; }

    std::string str() const;

    /// True iff the number of positions where both letters are non-identity
    /// and differ is even.
    bool commutes_with(const PauliString& other) const;

    // Raw symplectic words; bit q of word q/64 is qubit q. X has the x bit,
    // Z the z bit, Y both.
    const std::vector<std::uint64_t>& x_words() const { return x_; }
    const std::vector<std::uint64_t>& z_words() const { return z_; }

    bool operator==(const PauliString& other) const { return n_ == other.n_ && x_ == other.x_ && z_ == other.z_; }
    bool operator!=(const PauliString& other) const { return !(*this == other); }
    /// Lexicographic on the text form (I < X < Y < Z matches character order).
    bool operator<(const PauliString& other) const;

  private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> x_, z_;
};

struct PauliProduct {
    std::complex<double> phase;  // one of +1, -1, +i, -i
    PauliString string;
};

/// Qubit-wise product a*b with the accumulated fourth-root-of-unity phase.
PauliProduct multiply(const PauliString& a, const PauliString& b);

/// 2^n x 2^n Kronecker product of single-qubit matrices in qubit order
/// (qubit 0 occupies the most significant index bits).
Eigen::MatrixXcd to_dense(const PauliString& p, std::size_t dense_limit = kDenseLimit);

struct PauliTerm {
    PauliString string;
    double coeff = 0.0;
};

/// Weighted sum of Pauli strings plus a scalar identity offset.
struct PauliHamiltonian {
    std::size_t n_qubits = 0;
    double offset = 0.0;
    std::vector<PauliTerm> terms;

    /// Merge duplicate strings, fold identity strings into offset, drop zeros.
    void normalize(double drop_tolerance = 0.0);

    double lambda() const;      // sum of |coeff|
    double lambda_max() const;  // largest |coeff|

    PauliHamiltonian without_offset() const;

    nlohmann::json to_json() const;
    static PauliHamiltonian from_json(const nlohmann::json& j);
};

}  // namespace driftsim
