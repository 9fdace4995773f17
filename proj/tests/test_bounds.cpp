#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "driftsim/bounds.hpp"

using namespace driftsim;

namespace {

BoundQuery base_query() {
    BoundQuery q;
    q.t = 1.0;
    q.terms = 2;
    q.lambda_max = 1.0;
    q.lambda_one = 1.0;
    q.epsilon = 0.01;
    q.steps = 10.0;
    return q;
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("product formula step counts") {
    BoundQuery q = base_query();
    CHECK(trotter_steps(q, 1) == doctest::Approx(400.0).epsilon(1e-12));
    CHECK(trotter_steps(q, 2) == doctest::Approx(28.284271247461902).epsilon(1e-12));
    CHECK(trotter_steps(q, 4) == doctest::Approx(7.521206186172787).epsilon(1e-12));

    CHECK_THROWS_AS(trotter_steps(q, 3), std::invalid_argument);
    CHECK_THROWS_AS(trotter_steps(q, 0), std::invalid_argument);
    BoundQuery bad = q;
    bad.t = 0.0;
    CHECK_THROWS_AS(trotter_steps(bad, 1), std::invalid_argument);
    bad = q;
    bad.terms = 0;
    CHECK_THROWS_AS(trotter_steps(bad, 1), std::invalid_argument);
    bad = q;
    bad.epsilon = -1.0;
    CHECK_THROWS_AS(trotter_steps(bad, 2), std::invalid_argument);
}

TEST_CASE("sampling count and error") {
    BoundQuery q = base_query();
    q.lambda_one = 3.0;
    CHECK(qdrift_samples(q) == doctest::Approx(1800.0).epsilon(1e-13));

    q = base_query();
    CHECK(qdrift_error(q) == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(qdrift_error(q, true) == doctest::Approx(0.244280551632034).epsilon(1e-13));
    BoundQuery bad = q;
    bad.steps = 0.0;
    CHECK_THROWS_AS(qdrift_error(bad), std::invalid_argument);
    bad = q;
    bad.lambda_one = 0.0;
    CHECK_THROWS_AS(qdrift_samples(bad), std::invalid_argument);
}

TEST_CASE("direction-coin bound value") {
    BoundQuery q = base_query();
    CHECK(random_perm_bound(q) == doctest::Approx(0.08901067559746939).epsilon(1e-12));

    // Decays like 1/N^2 for large N.
    BoundQuery many = q;
    many.steps = 1000.0;
    double r = random_perm_bound(q) / random_perm_bound(many);
    CHECK(r > 1e3);

    BoundQuery bad = q;
    bad.terms = 0;
    CHECK_THROWS_AS(random_perm_bound(bad), std::invalid_argument);
}

TEST_CASE("stationary half-order near two for eps = 1e-6") {
    double k = optimal_trotter_order(1e-6);
    CHECK(k == doctest::Approx(2.0717214277552327).epsilon(1e-12));
    CHECK(k > 1.9);
    CHECK(k < 2.2);

    // The log-base choice cancels in the ratio, so the flag changes nothing.
    CHECK(optimal_trotter_order(1e-6, true) == doctest::Approx(k).epsilon(1e-12));

    CHECK_THROWS_AS(optimal_trotter_order(0.0), std::invalid_argument);
    CHECK_THROWS_AS(optimal_trotter_order(1.5), std::invalid_argument);
}

TEST_CASE("order profile bottoms out at the stationary order") {
    auto profile = trotter_order_profile(1e-6);
    REQUIRE(profile.size() == 5);
    CHECK(profile[0].first == 1);
    CHECK(profile[0].second == doctest::Approx(5000.0).epsilon(1e-12));
    CHECK(profile[1].second == doctest::Approx(790.5694150420949).epsilon(1e-12));
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < profile.size(); ++i)
        if (profile[i].second < profile[argmin].second) argmin = i;
    CHECK(profile[argmin].first == 2);  // matches round(k*) for k* = 2.07
}

TEST_CASE("uniform costs price both samplers identically") {
    std::vector<double> p = {0.25, 0.25, 0.25, 0.25};
    std::vector<double> cost = {3.0, 3.0, 3.0, 3.0};
    ImportanceCosts costs = importance_cost_compare(p, cost, 1.0, 2.0, 0.01);
    // E[1/C] E[C] = 1: c_qc = x^2/eps * 2 * C == c_p
    CHECK(costs.c_qc == doctest::Approx(costs.c_p).epsilon(1e-13));
    CHECK(costs.c_p == doctest::Approx(2.0 * 4.0 / 0.01 * 3.0).epsilon(1e-13));
    CHECK(costs.satisfied);
}

TEST_CASE("importance sampling never loses on random cost profiles") {
    std::mt19937_64 gen(107);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t size = 2 + gen() % 6;
        std::vector<double> p(size), cost(size);
        double total = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            p[i] = unit(gen);
            total += p[i];
            cost[i] = unit(gen) * 10.0;
        }
        for (double& v : p) v /= total;
        ImportanceCosts costs = importance_cost_compare(p, cost, 0.7, 1.3, 0.05);

        double mean_cost = 0.0, mean_inverse = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            mean_cost += p[i] * cost[i];
            mean_inverse += p[i] / cost[i];
        }
        CHECK(mean_cost * mean_inverse >= 1.0 - 1e-12);  // Jensen
        CHECK(costs.satisfied);
        CHECK(costs.c_qc <= costs.c_p + 1e-9);
    }
}

TEST_CASE("cost comparison input validation") {
    std::vector<double> p = {0.5, 0.5};
    CHECK_THROWS_AS(importance_cost_compare(p, {1.0}, 1.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(importance_cost_compare({0.5, 0.6}, {1.0, 1.0}, 1.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(importance_cost_compare({-0.5, 1.5}, {1.0, 1.0}, 1.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(importance_cost_compare(p, {1.0, 0.0}, 1.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(importance_cost_compare(p, {1.0, 1.0}, 0.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(importance_cost_compare({}, {}, 1.0, 1.0, 0.1), std::invalid_argument);
}

}  // TEST_SUITE
