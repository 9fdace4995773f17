#include "driftsim/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace driftsim {

namespace {

void require_positive(double v, const char* name, const char* who) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(who) + ": " + name + " must be positive");
}

}  // namespace

double trotter_steps(const BoundQuery& q, std::size_t order) {
    require_positive(q.t, "t", "trotter_steps");
    require_positive(q.epsilon, "epsilon", "trotter_steps");
    require_positive(q.lambda_max, "lambda_max", "trotter_steps");
    if (q.terms == 0) throw std::invalid_argument("trotter_steps: terms must be >= 1");
    double x = q.t * static_cast<double>(q.terms) * q.lambda_max;
    if (order == 1) return x * x / q.epsilon;
    if (order == 0 || order % 2 != 0) throw std::invalid_argument("trotter_steps: order must be 1 or even");
    double k = static_cast<double>(order) / 2.0;
    return std::pow(x, 1.0 + 1.0 / (2.0 * k)) / std::pow(q.epsilon, 1.0 / (2.0 * k));
}

double qdrift_samples(const BoundQuery& q) {
    require_positive(q.t, "t", "qdrift_samples");
    require_positive(q.epsilon, "epsilon", "qdrift_samples");
    require_positive(q.lambda_one, "lambda_one", "qdrift_samples");
    double x = q.t * q.lambda_one;
    return 2.0 * x * x / q.epsilon;
}

double qdrift_error(const BoundQuery& q, bool pre_asymptotic) {
    require_positive(q.t, "t", "qdrift_error");
    require_positive(q.lambda_one, "lambda_one", "qdrift_error");
    if (q.steps == 0) throw std::invalid_argument("qdrift_error: steps must be >= 1");
    double n = static_cast<double>(q.steps);
    double x = q.lambda_one * q.t;
    double bound = 2.0 * x * x / n;
    if (pre_asymptotic) bound *= std::exp(2.0 * x / n);
    return bound;
}

double random_perm_bound(const BoundQuery& q) {
    require_positive(q.t, "t", "random_perm_bound");
    require_positive(q.lambda_max, "lambda_max", "random_perm_bound");
    if (q.terms == 0) throw std::invalid_argument("random_perm_bound: terms must be >= 1");
    if (q.steps == 0) throw std::invalid_argument("random_perm_bound: steps must be >= 1");
    double n = static_cast<double>(q.steps);
    double y = q.lambda_max * q.t * static_cast<double>(q.terms);
    double quartic = std::pow(y, 4.0) / (n * n * n) * std::exp(2.0 * y / n);
    double cubic = 2.0 * std::pow(y, 3.0) / (3.0 * n * n) * std::exp(y / n);
    return quartic + cubic;
}

double optimal_trotter_order(double epsilon, bool log10_base) {
    require_positive(epsilon, "epsilon", "optimal_trotter_order");
    if (epsilon >= 1.0) throw std::invalid_argument("optimal_trotter_order: epsilon must be < 1");
    double inv_log = log10_base ? std::log10(1.0 / epsilon) : std::log(1.0 / epsilon);
    double base = log10_base ? std::log10(5.0) : std::log(5.0);
    return std::sqrt(inv_log / (2.0 * base));
}

std::vector<std::pair<std::size_t, double>> trotter_order_profile(double epsilon) {
    require_positive(epsilon, "epsilon", "trotter_order_profile");
    std::vector<std::pair<std::size_t, double>> profile;
    for (std::size_t k = 1; k <= 5; ++k)
        profile.push_back({k, std::pow(5.0, static_cast<double>(k)) / std::pow(epsilon, 1.0 / (2.0 * static_cast<double>(k)))});
    return profile;
}

ImportanceCosts importance_cost_compare(const std::vector<double>& probabilities, const std::vector<double>& cost,
                                        double t, double lambda_one, double epsilon) {
    if (probabilities.size() != cost.size())
        throw std::invalid_argument("importance_cost_compare: probability and cost sizes differ");
    if (probabilities.empty()) throw std::invalid_argument("importance_cost_compare: empty input");
    require_positive(t, "t", "importance_cost_compare");
    require_positive(lambda_one, "lambda_one", "importance_cost_compare");
    require_positive(epsilon, "epsilon", "importance_cost_compare");
    double total = 0.0, mean_cost = 0.0, mean_inverse = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] < 0.0) throw std::invalid_argument("importance_cost_compare: negative probability");
        if (cost[i] <= 0.0) throw std::invalid_argument("importance_cost_compare: costs must be positive");
        total += probabilities[i];
        mean_cost += probabilities[i] * cost[i];
        mean_inverse += probabilities[i] / cost[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("importance_cost_compare: probabilities must sum to 1");
    double x = t * lambda_one;
    ImportanceCosts out;
    out.c_qc = x * x / epsilon * (1.0 + mean_inverse * mean_cost) / mean_inverse;
    out.c_p = 2.0 * x * x / epsilon * mean_cost;
    out.satisfied = out.c_qc <= out.c_p;
    return out;
}

}  // namespace driftsim
