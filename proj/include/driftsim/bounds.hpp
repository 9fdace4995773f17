#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace driftsim {

/// Inputs for the closed-form cost and error bounds. Only the fields a given
/// bound reads need to be set.
struct BoundQuery {
    double t = 0.0;           // evolution time
    std::size_t terms = 0;    // L
    double lambda_max = 0.0;  // largest |h_k|
    double lambda_one = 0.0;  // sum |h_k|
    double epsilon = 0.0;     // target error
    double steps = 0.0;       // N
};

/// Step-count estimate for a product formula of the given order (1 or even
/// 2k), reported with constant 1 ("up to constant"):
///   order 1: (t*L*Lambda)^2 / eps;  order 2k: (t*L*Lambda)^(1+1/2k) / eps^(1/2k).
double trotter_steps(const BoundQuery& q, std::size_t order);

/// N = 2*(t*lambda)^2 / eps.
double qdrift_samples(const BoundQuery& q);

/// eps = 2*lambda^2*t^2 / N; with pre_asymptotic, multiplied by e^{2*lambda*t/N}.
double qdrift_error(const BoundQuery& q, bool pre_asymptotic = false);

/// Two-term randomized-permutation diamond bound:
///   (Lambda*t*L)^4/N^3 * e^{2*Lambda*t*L/N} + 2*(Lambda*t*L)^3/(3*N^2) * e^{Lambda*t*L/N}.
double random_perm_bound(const BoundQuery& q);

/// Stationary half-order k* = sqrt(log(1/eps) / (2*log 5)); natural logs by
/// default, base 10 behind the flag (source ambiguity documented in tests).
double optimal_trotter_order(double epsilon, bool log10_base = false);

/// Cost profile T(2k) = 5^k / eps^(1/2k) for k in 1..5.
std::vector<std::pair<std::size_t, double>> trotter_order_profile(double epsilon);

struct ImportanceCosts {
    double c_qc = 0.0;  // (t*lambda)^2/eps * (1 + E[1/C]E[C]) / E[1/C]
    double c_p = 0.0;   // 2*(t*lambda)^2/eps * E[C]
    bool satisfied = false;  // c_qc <= c_p
};

/// Evaluate both importance-sampling cost formulas under distribution p and
/// per-term cost C. The comparison is reported, not asserted.
ImportanceCosts importance_cost_compare(const std::vector<double>& p, const std::vector<double>& cost, double t,
                                        double lambda_one, double epsilon);

}  // namespace driftsim
