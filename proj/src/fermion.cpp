#include "driftsim/fermion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace driftsim {

namespace {

constexpr double kImagTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-10;

}  // namespace

double SecondQuantizedHamiltonian::two(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    std::size_t n = n_orbitals;
    return two_body[((p * n + q) * n + r) * n + s];
}

double& SecondQuantizedHamiltonian::two(std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
    std::size_t n = n_orbitals;
    return two_body[((p * n + q) * n + r) * n + s];
}

void SecondQuantizedHamiltonian::validate(double tolerance) const {
    if (n_orbitals == 0) throw std::invalid_argument("SecondQuantizedHamiltonian: no orbitals");
    if (one_body.rows() != static_cast<Eigen::Index>(n_orbitals) ||
        one_body.cols() != static_cast<Eigen::Index>(n_orbitals))
        throw std::invalid_argument("SecondQuantizedHamiltonian: one_body shape mismatch");
    if (two_body.size() != n_orbitals * n_orbitals * n_orbitals * n_orbitals)
        throw std::invalid_argument("SecondQuantizedHamiltonian: two_body size mismatch");
    for (std::size_t p = 0; p < n_orbitals; ++p)
        for (std::size_t q = p; q < n_orbitals; ++q)
            if (std::abs(one_body(p, q) - one_body(q, p)) > tolerance)
                throw std::invalid_argument("SecondQuantizedHamiltonian: one_body not symmetric");
}

namespace {

// ---- FCIDUMP ----------------------------------------------------------

long header_int(const std::string& header, const std::string& key) {
    auto pos = header.find(key);
    if (pos == std::string::npos) return -1;
    pos += key.size();
    while (pos < header.size() && (header[pos] == ' ' || header[pos] == '=')) ++pos;
    std::size_t end = pos;
    while (end < header.size() && (std::isdigit(static_cast<unsigned char>(header[end])) || header[end] == '-' ||
                                   header[end] == '+'))
        ++end;
    if (end == pos) throw std::invalid_argument("fcidump: malformed header near " + key);
    return std::stol(header.substr(pos, end - pos));
}

// Assign with a consistency check so symmetry-violating duplicate entries are
// rejected rather than silently overwritten.
void checked_assign(double& slot, double value, const char* what, std::size_t line_no) {
    if (!std::isnan(slot) && std::abs(slot - value) > kSymmetryTolerance) {
        std::ostringstream msg;
        msg << "fcidump: symmetry violation for " << what << " at line " << line_no << " (" << slot << " vs " << value
            << ")";
        throw std::invalid_argument(msg.str());
    }
    slot = value;
}

}  // namespace

SecondQuantizedHamiltonian load_fcidump(std::istream& in) {
    std::string line;
    std::string header;
    std::size_t line_no = 0;

    // Header: starts with &FCI, runs until &END or a bare '/'.
    bool header_done = false;
    while (!header_done && std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        if (header.empty()) {
            if (trimmed.empty()) continue;
            if (trimmed.rfind("&FCI", 0) != 0) throw std::invalid_argument("fcidump: malformed header, expected &FCI");
        }
        header += " " + trimmed;
        if (header.find("&END") != std::string::npos || trimmed == "/" ||
            (!trimmed.empty() && trimmed.back() == '/'))
            header_done = true;
    }
    if (!header_done) throw std::invalid_argument("fcidump: malformed header, missing &END");

    long norb_l = header_int(header, "NORB");
    if (norb_l <= 0) throw std::invalid_argument("fcidump: malformed header, NORB missing or nonpositive");
    std::size_t norb = static_cast<std::size_t>(norb_l);
    long nelec = header.find("NELEC") != std::string::npos ? header_int(header, "NELEC") : 0;
    long ms2 = header.find("MS2") != std::string::npos ? header_int(header, "MS2") : 0;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd chem_one = Eigen::MatrixXd::Constant(norb, norb, nan);
    std::vector<double> chem_two(norb * norb * norb * norb, nan);
    auto chem2 = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) -> double& {
        return chem_two[((i * norb + j) * norb + k) * norb + l];
    };
    double core = 0.0;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first)) continue;  // blank line
        double value;
        {
            std::istringstream v(first);
            if (!(v >> value) || !v.eof()) {
                std::ostringstream msg;
                msg << "fcidump: parse error at line " << line_no << ": bad value '" << first << "'";
                throw std::invalid_argument(msg.str());
            }
        }
        long i, j, k, l;
        if (!(fields >> i >> j >> k >> l)) {
            std::ostringstream msg;
            msg << "fcidump: parse error at line " << line_no << ": expected 4 indices";
            throw std::invalid_argument(msg.str());
        }
        auto in_range = [&](long x) { return x >= 0 && x <= static_cast<long>(norb); };
        if (!in_range(i) || !in_range(j) || !in_range(k) || !in_range(l)) {
            std::ostringstream msg;
            msg << "fcidump: index out of range at line " << line_no;
            throw std::invalid_argument(msg.str());
        }

        if (i == 0 && j == 0 && k == 0 && l == 0) {
            core = value;
        } else if (j == 0 && k == 0 && l == 0) {
            // orbital-energy convention line; carries no Hamiltonian data
        } else if (k == 0 && l == 0) {
            if (i == 0) throw std::invalid_argument("fcidump: malformed line " + std::to_string(line_no));
            checked_assign(chem_one(i - 1, j - 1), value, "one-body", line_no);
            checked_assign(chem_one(j - 1, i - 1), value, "one-body", line_no);
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            std::size_t a = i - 1, b = j - 1, c = k - 1, d = l - 1;
            // chemist (ab|cd): 8-fold symmetry of real integrals
            const std::array<std::array<std::size_t, 4>, 8> images = {{{a, b, c, d},
                                                                       {b, a, c, d},
                                                                       {a, b, d, c},
                                                                       {b, a, d, c},
                                                                       {c, d, a, b},
                                                                       {d, c, a, b},
                                                                       {c, d, b, a},
                                                                       {d, c, b, a}}};
            for (const auto& im : images) checked_assign(chem2(im[0], im[1], im[2], im[3]), value, "two-body", line_no);
        } else {
            throw std::invalid_argument("fcidump: malformed line " + std::to_string(line_no));
        }
    }

    // Expand spatial orbitals to interleaved spin orbitals (even up, odd down)
    // and convert chemist (ps|qr) to the physicist tensor h_pqrs.
    SecondQuantizedHamiltonian out;
    out.n_orbitals = 2 * norb;
    out.core_constant = core;
    out.n_electrons = nelec > 0 ? static_cast<std::size_t>(nelec) : 0;
    out.ms2 = static_cast<int>(ms2);
    std::size_t n = out.n_orbitals;
    out.one_body = Eigen::MatrixXd::Zero(n, n);
    out.two_body.assign(n * n * n * n, 0.0);

    for (std::size_t a = 0; a < norb; ++a)
        for (std::size_t b = 0; b < norb; ++b) {
            double v = chem_one(a, b);
            if (std::isnan(v) || v == 0.0) continue;
            for (std::size_t spin = 0; spin < 2; ++spin) out.one_body(2 * a + spin, 2 * b + spin) = v;
        }

    for (std::size_t a = 0; a < norb; ++a)
        for (std::size_t b = 0; b < norb; ++b)
            for (std::size_t c = 0; c < norb; ++c)
                for (std::size_t d = 0; d < norb; ++d) {
                    double v = chem2(a, b, c, d);
                    if (std::isnan(v) || v == 0.0) continue;
                    // (ab|cd): electron 1 pairs p with s, electron 2 pairs q with r
                    for (std::size_t sigma = 0; sigma < 2; ++sigma)
                        for (std::size_t tau = 0; tau < 2; ++tau)
                            out.two(2 * a + sigma, 2 * c + tau, 2 * d + tau, 2 * b + sigma) = v;
                }

    out.validate();
    return out;
}

SecondQuantizedHamiltonian load_fcidump_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fcidump file: " + path);
    return load_fcidump(in);
}

SecondQuantizedHamiltonian build_hubbard(std::size_t sites, double t_hop, double u) {
    if (sites == 0) throw std::invalid_argument("build_hubbard: sites must be >= 1");
    SecondQuantizedHamiltonian h;
    h.n_orbitals = 2 * sites;
    std::size_t n = h.n_orbitals;
    h.one_body = Eigen::MatrixXd::Zero(n, n);
    h.two_body.assign(n * n * n * n, 0.0);
    h.n_electrons = sites;  // half filling
    h.ms2 = static_cast<int>(sites % 2);

    for (std::size_t i = 0; i + 1 < sites; ++i)
        for (std::size_t spin = 0; spin < 2; ++spin) {
            h.one_body(2 * i + spin, 2 * (i + 1) + spin) = -t_hop;
            h.one_body(2 * (i + 1) + spin, 2 * i + spin) = -t_hop;
        }
    for (std::size_t i = 0; i < sites; ++i) {
        std::size_t up = 2 * i, down = 2 * i + 1;
        // 1/2 (u n_up n_down + u n_down n_up) = u n_up n_down
        h.two(up, down, down, up) = u;
        h.two(down, up, up, down) = u;
    }
    return h;
}

namespace {

// ---- Jordan-Wigner -----------------------------------------------------

using Complex = std::complex<double>;

struct WeightedString {
    PauliString string;
    Complex coeff;
};

// a_j   = Z_0..Z_{j-1} (X_j + iY_j)/2
// a+_j  = Z_0..Z_{j-1} (X_j - iY_j)/2
std::array<WeightedString, 2> jw_ladder(std::size_t n, std::size_t j, bool dagger) {
    PauliString sx = PauliString::identity(n);
    PauliString sy = PauliString::identity(n);
    for (std::size_t k = 0; k < j; ++k) {
        sx.set_letter(k, Pauli::Z);
        sy.set_letter(k, Pauli::Z);
    }
    sx.set_letter(j, Pauli::X);
    sy.set_letter(j, Pauli::Y);
    Complex yc = dagger ? Complex(0.0, -0.5) : Complex(0.0, 0.5);
    return {WeightedString{sx, 0.5}, WeightedString{sy, yc}};
}

using Accumulator = std::map<PauliString, Complex>;

// Accumulates coeff * prod(factors) into acc, where each factor is a ladder
// operator's two-string expansion.
void accumulate_product(Accumulator& acc, Complex coeff, const std::vector<std::array<WeightedString, 2>>& factors) {
    struct Partial {
        PauliString string;
        Complex coeff;
    };
    std::vector<Partial> current = {{factors[0][0].string, coeff * factors[0][0].coeff},
                                    {factors[0][1].string, coeff * factors[0][1].coeff}};
    for (std::size_t f = 1; f < factors.size(); ++f) {
        std::vector<Partial> next;
        next.reserve(current.size() * 2);
        for (const auto& part : current)
            for (const auto& ws : factors[f]) {
                PauliProduct prod = multiply(part.string, ws.string);
                next.push_back({std::move(prod.string), part.coeff * ws.coeff * prod.phase});
            }
        current = std::move(next);
    }
    for (auto& part : current) acc[part.string] += part.coeff;
}

// Drain an accumulator into (offset, real terms); imaginary residue above
// tolerance means the input tensor was not Hermitian.
void finalize(Accumulator& acc, double& offset, std::vector<PauliTerm>& terms) {
    for (auto& [string, coeff] : acc) {
        if (std::abs(coeff.imag()) > kImagTolerance)
            throw std::invalid_argument("jordan_wigner: imaginary residue " + std::to_string(coeff.imag()) +
                                        " on " + string.str() + " (input tensor not Hermitian?)");
        double re = coeff.real();
        if (re == 0.0) continue;
        if (string.is_identity()) {
            offset += re;
        } else {
            terms.push_back({string, re});
        }
    }
}

// Walk all nonzero second-quantized terms, handing each contribution to sink
// as (factors, coefficient, class, canonical index key).
template <typename Sink>
void walk_terms(const SecondQuantizedHamiltonian& h, Sink&& sink) {
    std::size_t n = h.n_orbitals;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
            double v = h.one_body(p, q);
            if (v == 0.0) continue;
            std::vector<std::array<WeightedString, 2>> factors = {jw_ladder(n, p, true), jw_ladder(n, q, false)};
            if (p == q) {
                sink(factors, Complex(v), TermClass::NumberCounting, std::vector<std::size_t>{p});
            } else {
                std::size_t lo = std::min(p, q), hi = std::max(p, q);
                sink(factors, Complex(v), TermClass::Excitation, std::vector<std::size_t>{lo, hi});
            }
        }

    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;  // a+_p a+_q = 0 for p == q
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t s = 0; s < n; ++s) {
                    if (r == s) continue;
                    double v = h.two(p, q, r, s);
                    if (v == 0.0) continue;
                    std::vector<std::array<WeightedString, 2>> factors = {
                        jw_ladder(n, p, true), jw_ladder(n, q, true), jw_ladder(n, r, false), jw_ladder(n, s, false)};
                    // classify by the overlap of {p,q} and {r,s}
                    bool r_in = (r == p || r == q), s_in = (s == p || s == q);
                    std::vector<std::size_t> key;
                    TermClass cls;
                    if (r_in && s_in) {
                        cls = TermClass::Coulomb;  // includes folded exchange h_pqpq
                        key = {std::min(p, q), std::max(p, q)};
                    } else if (!r_in && !s_in) {
                        cls = TermClass::Scatter;
                        // Key by the creation/annihilation pair split, canonical
                        // under conjugation, so distinct processes on the same
                        // four spin orbitals (pair hopping vs spin exchange)
                        // stay separate groups.
                        std::pair<std::size_t, std::size_t> cre{std::min(p, q), std::max(p, q)};
                        std::pair<std::size_t, std::size_t> ann{std::min(r, s), std::max(r, s)};
                        if (ann < cre) std::swap(cre, ann);
                        key = {cre.first, cre.second, ann.first, ann.second};
                    } else {
                        cls = TermClass::CorrelatedExcitation;
                        std::size_t shared = r_in ? r : s;
                        std::size_t a = (p == shared) ? q : p;   // survivor in the creation pair
                        std::size_t b = r_in ? s : r;            // survivor in the annihilation pair
                        key = {std::min(a, b), std::max(a, b), shared};
                    }
                    sink(factors, Complex(0.5 * v), cls, std::move(key));
                }
        }
}

}  // namespace

PauliHamiltonian jordan_wigner(const SecondQuantizedHamiltonian& h) {
    h.validate();
    Accumulator acc;
    walk_terms(h, [&](const std::vector<std::array<WeightedString, 2>>& factors, Complex coeff, TermClass,
                      std::vector<std::size_t>) { accumulate_product(acc, coeff, factors); });

    PauliHamiltonian out;
    out.n_qubits = h.n_orbitals;
    out.offset = h.core_constant;
    finalize(acc, out.offset, out.terms);
    return out;
}

std::string class_name(TermClass c) {
    switch (c) {
        case TermClass::NumberCounting: return "NumberCounting";
        case TermClass::Excitation: return "Excitation";
        case TermClass::Coulomb: return "Coulomb";
        case TermClass::CorrelatedExcitation: return "CorrelatedExcitation";
        case TermClass::Scatter: return "Scatter";
    }
    throw std::logic_error("class_name: bad tag");
}

GroupedHamiltonian classify_groups(const SecondQuantizedHamiltonian& h) {
    h.validate();
    using Key = std::pair<TermClass, std::vector<std::size_t>>;
    std::map<Key, Accumulator> scatter;
    Accumulator pool;
    walk_terms(h, [&](const std::vector<std::array<WeightedString, 2>>& factors, Complex coeff, TermClass cls,
                      std::vector<std::size_t> key) {
        // Scatter processes keep their generator-level string bundles. Every
        // other class flattens into one pool first, so cancellations between
        // generators (same-spin exchange against Coulomb, identity halves of
        // conditioned hops against bare hops, Coulomb Z parts against the
        // one-body diagonal) are realized before sampling weights are taken.
        // Skipping this leaves the grouped one-norm far above the flat
        // Hamiltonian's, and grouped sampling pays the excess as variance.
        if (cls == TermClass::Scatter)
            accumulate_product(scatter[{cls, std::move(key)}], coeff, factors);
        else
            accumulate_product(pool, coeff, factors);
    });

    GroupedHamiltonian out;
    out.n_qubits = h.n_orbitals;
    out.offset = h.core_constant;

    std::map<Key, std::vector<PauliTerm>> grouped;
    for (auto& [key, acc] : scatter) {
        std::vector<PauliTerm> terms;
        finalize(acc, out.offset, terms);
        if (!terms.empty()) grouped[key] = std::move(terms);
    }

    // Rebucket the flattened strings by shape; spin orbital q sits in
    // molecular orbital q/2.
    std::vector<PauliTerm> flat;
    finalize(pool, out.offset, flat);
    for (auto& term : flat) {
        std::vector<std::size_t> xy, zs;
        for (std::size_t q = 0; q < h.n_orbitals; ++q) {
            Pauli letter = term.string.letter(q);
            if (letter == Pauli::Z)
                zs.push_back(q);
            else if (letter != Pauli::I)
                xy.push_back(q);
        }
        Key key;
        if (xy.empty() && zs.size() == 1) {
            key = {TermClass::NumberCounting, {zs[0] / 2}};
        } else if (xy.empty() && zs.size() == 2) {
            std::vector<std::size_t> orbs{zs[0] / 2, zs[1] / 2};
            if (orbs[0] == orbs[1]) orbs.pop_back();
            key = {TermClass::Coulomb, std::move(orbs)};
        } else if (xy.size() == 2) {
            // A hop with an unbroken Z chain and no spectator Z is a plain
            // excitation. Any chain gap or outside Z marks an occupation-
            // conditioned hop; its key lists the hop pair before the
            // conditioning orbitals, keeping hops over different pairs in
            // different groups (their strings need not commute).
            std::vector<std::size_t> cond;
            for (std::size_t q = xy[0] + 1; q < xy[1]; ++q)
                if (term.string.letter(q) != Pauli::Z) cond.push_back(q / 2);
            for (std::size_t z : zs)
                if (z < xy[0] || z > xy[1]) cond.push_back(z / 2);
            std::vector<std::size_t> orbs{xy[0] / 2, xy[1] / 2};
            if (orbs[0] == orbs[1]) orbs.pop_back();
            if (cond.empty()) {
                key = {TermClass::Excitation, std::move(orbs)};
            } else {
                std::sort(cond.begin(), cond.end());
                cond.erase(std::unique(cond.begin(), cond.end()), cond.end());
                orbs.insert(orbs.end(), cond.begin(), cond.end());
                key = {TermClass::CorrelatedExcitation, std::move(orbs)};
            }
        } else {
            throw std::logic_error("classify_groups: unexpected flattened string " + term.string.str());
        }
        grouped[std::move(key)].push_back(std::move(term));
    }

    for (auto& [key, terms] : grouped) {
        PhysicalGroup group;
        group.class_tag = key.first;
        group.orbital_indices = key.second;
        group.terms = std::move(terms);
        for (const auto& term : group.terms) {
            group.abs_weight += std::abs(term.coeff);
            group.mean_weight += term.coeff;
        }
        out.groups.push_back(std::move(group));
    }
    return out;
}

namespace {

PauliHamiltonian number_operator(std::size_t n_qubits, const std::vector<std::size_t>& qubits) {
    PauliHamiltonian h;
    h.n_qubits = n_qubits;
    h.offset = 0.5 * static_cast<double>(qubits.size());
    for (std::size_t q : qubits) {
        PauliString z = PauliString::identity(n_qubits);
        z.set_letter(q, Pauli::Z);
        h.terms.push_back({std::move(z), -0.5});
    }
    return h;
}

}  // namespace

ParticleNumberOperator particle_number(std::size_t n_qubits) {
    std::vector<std::size_t> all(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) all[q] = q;
    ParticleNumberOperator op;
    op.pauli_form = number_operator(n_qubits, all);
    if (n_qubits % 2 == 0)
        for (std::size_t orb = 0; orb < n_qubits / 2; ++orb)
            op.per_orbital.push_back(number_operator(n_qubits, {2 * orb, 2 * orb + 1}));
    return op;
}

ParticleNumberOperator particle_number(std::size_t n_qubits, const std::vector<std::size_t>& orbital_subset) {
    for (std::size_t q : orbital_subset)
        if (q >= n_qubits) throw std::out_of_range("particle_number: orbital index out of range");
    ParticleNumberOperator op;
    op.pauli_form = number_operator(n_qubits, orbital_subset);
    return op;
}

}  // namespace driftsim
