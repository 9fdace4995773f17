#include "driftsim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "driftsim/rng.hpp"

namespace driftsim {

std::string marker_kind_name(MarkerKind kind) {
    switch (kind) {
        case MarkerKind::TrotterStepEnd: return "trotter_step_end";
        case MarkerKind::SampleStepEnd: return "sample_step_end";
        case MarkerKind::GroupEnd: return "group_end";
    }
    throw std::logic_error("marker_kind_name: bad kind");
}

MarkerKind marker_kind_from_name(const std::string& name) {
    if (name == "trotter_step_end") return MarkerKind::TrotterStepEnd;
    if (name == "sample_step_end") return MarkerKind::SampleStepEnd;
    if (name == "group_end") return MarkerKind::GroupEnd;
    throw std::invalid_argument("unknown marker kind: " + name);
}

nlohmann::json GateSequence::to_json() const {
    nlohmann::json j;
    j["n_qubits"] = n_qubits;
    j["protocol"] = protocol;
    j["seed"] = seed;
    j["t"] = t;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries) j["entries"].push_back({{"string", e.string.str()}, {"angle", e.angle}});
    j["markers"] = nlohmann::json::array();
    for (const auto& m : markers) j["markers"].push_back({{"index", m.index}, {"kind", marker_kind_name(m.kind)}});
    j["params"] = params;
    return j;
}

GateSequence GateSequence::from_json(const nlohmann::json& j) {
    GateSequence seq;
    seq.n_qubits = j.at("n_qubits").get<std::size_t>();
    seq.protocol = j.at("protocol").get<std::string>();
    seq.seed = j.value("seed", std::uint64_t{0});
    seq.t = j.value("t", 0.0);
    for (const auto& e : j.at("entries")) {
        PauliString s(e.at("string").get<std::string>());
        if (s.num_qubits() != seq.n_qubits)
            throw std::invalid_argument("GateSequence: entry string length != n_qubits");
        seq.entries.push_back({std::move(s), e.at("angle").get<double>()});
    }
    if (j.contains("markers"))
        for (const auto& m : j.at("markers"))
            seq.markers.push_back({m.at("index").get<std::size_t>(), marker_kind_from_name(m.at("kind").get<std::string>())});
    if (j.contains("params"))
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
            seq.params[it.key()] = it.value().get<std::string>();
    return seq;
}

std::vector<std::size_t> canonical_order(const PauliHamiltonian& h) {
    std::vector<std::size_t> order(h.terms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double ma = std::abs(h.terms[a].coeff), mb = std::abs(h.terms[b].coeff);
        if (ma != mb) return ma > mb;
        const std::string sa = h.terms[a].string.str(), sb = h.terms[b].string.str();
        if (sa != sb) return sa < sb;
        return a < b;
    });
    return order;
}

namespace {

void require_terms(const PauliHamiltonian& h, const char* who) {
    if (h.terms.empty()) throw std::invalid_argument(std::string(who) + ": empty Hamiltonian");
    if (h.n_qubits == 0) throw std::invalid_argument(std::string(who) + ": zero qubits");
}

void require_positive_steps(std::size_t steps, const char* who) {
    if (steps == 0) throw std::invalid_argument(std::string(who) + ": steps must be >= 1");
}

GateSequence make_sequence(const PauliHamiltonian& h, std::string protocol, double t, std::uint64_t seed) {
    GateSequence seq;
    seq.n_qubits = h.n_qubits;
    seq.protocol = std::move(protocol);
    seq.t = t;
    seq.seed = seed;
    return seq;
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

GateSequence compile_trotter1(const PauliHamiltonian& h, double t, std::size_t steps) {
    require_terms(h, "compile_trotter1");
    require_positive_steps(steps, "compile_trotter1");
    auto order = canonical_order(h);
    GateSequence seq = make_sequence(h, "trotter1", t, 0);
    double dt = t / static_cast<double>(steps);
    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t k : order) seq.entries.push_back({h.terms[k].string, h.terms[k].coeff * dt});
        seq.markers.push_back({seq.entries.size(), MarkerKind::TrotterStepEnd});
    }
    seq.params["steps"] = std::to_string(steps);
    return seq;
}

namespace {

// One symmetric (forward-halves then reverse-halves) pass over the canonical
// order, evolving for time tau.
void emit_symmetric_pass(GateSequence& seq, const PauliHamiltonian& h, const std::vector<std::size_t>& order,
                         double tau) {
    for (std::size_t k : order) seq.entries.push_back({h.terms[k].string, h.terms[k].coeff * tau / 2.0});
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        seq.entries.push_back({h.terms[*it].string, h.terms[*it].coeff * tau / 2.0});
}

// Recursive symmetric product formula: order 2k on time tau.
void emit_suzuki(GateSequence& seq, const PauliHamiltonian& h, const std::vector<std::size_t>& order, double tau,
                 std::size_t k) {
    if (k == 1) {
        emit_symmetric_pass(seq, h, order, tau);
        return;
    }
    double p = 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * static_cast<double>(k) - 1.0)));
    emit_suzuki(seq, h, order, p * tau, k - 1);
    emit_suzuki(seq, h, order, p * tau, k - 1);
    emit_suzuki(seq, h, order, (1.0 - 4.0 * p) * tau, k - 1);
    emit_suzuki(seq, h, order, p * tau, k - 1);
    emit_suzuki(seq, h, order, p * tau, k - 1);
}

}  // namespace

GateSequence compile_trotter2(const PauliHamiltonian& h, double t, std::size_t steps) {
    require_terms(h, "compile_trotter2");
    require_positive_steps(steps, "compile_trotter2");
    auto order = canonical_order(h);
    GateSequence seq = make_sequence(h, "trotter2", t, 0);
    double dt = t / static_cast<double>(steps);
    for (std::size_t step = 0; step < steps; ++step) {
        emit_symmetric_pass(seq, h, order, dt);
        seq.markers.push_back({seq.entries.size(), MarkerKind::TrotterStepEnd});
    }
    seq.params["steps"] = std::to_string(steps);
    return seq;
}

GateSequence compile_suzuki(const PauliHamiltonian& h, double t, std::size_t steps, std::size_t order) {
    require_terms(h, "compile_suzuki");
    require_positive_steps(steps, "compile_suzuki");
    if (order == 0 || order % 2 != 0) throw std::invalid_argument("compile_suzuki: order must be a positive even integer");
    auto term_order = canonical_order(h);
    GateSequence seq = make_sequence(h, "suzuki", t, 0);
    double dt = t / static_cast<double>(steps);
    for (std::size_t step = 0; step < steps; ++step) {
        emit_suzuki(seq, h, term_order, dt, order / 2);
        seq.markers.push_back({seq.entries.size(), MarkerKind::TrotterStepEnd});
    }
    seq.params["steps"] = std::to_string(steps);
    seq.params["order"] = std::to_string(order);
    return seq;
}

SamplingDistribution qdrift_distribution(const PauliHamiltonian& h) {
    require_terms(h, "qdrift_distribution");
    auto order = canonical_order(h);
    double lambda = h.lambda();
    if (lambda <= 0.0) throw std::invalid_argument("qdrift_distribution: all coefficients are zero");
    SamplingDistribution dist;
    dist.scheme_tag = "qdrift_abs";
    dist.weights.reserve(order.size());
    for (std::size_t k : order) dist.weights.push_back(std::abs(h.terms[k].coeff) / lambda);
    return dist;
}

GateSequence sample_qdrift(const PauliHamiltonian& h, double t, std::size_t samples, std::uint64_t seed) {
    return sample_qdrift(h, t, samples, seed, qdrift_distribution(h));
}

GateSequence sample_qdrift(const PauliHamiltonian& h, double t, std::size_t samples, std::uint64_t seed,
                           const SamplingDistribution& distribution) {
    require_terms(h, "sample_qdrift");
    require_positive_steps(samples, "sample_qdrift");
    auto order = canonical_order(h);
    if (distribution.weights.size() != order.size())
        throw std::invalid_argument("sample_qdrift: distribution size != term count");
    for (std::size_t i = 0; i < order.size(); ++i)
        if (distribution.weights[i] <= 0.0 && h.terms[order[i]].coeff != 0.0)
            throw std::invalid_argument("sample_qdrift: zero probability on a nonzero term");

    auto cdf = cumulative_distribution(distribution.weights);
    GateSequence seq = make_sequence(h, "qdrift", t, seed);
    std::mt19937_64 gen(seed);
    double dt = t / static_cast<double>(samples);
    for (std::size_t n = 0; n < samples; ++n) {
        std::size_t pick = sample_cumulative(cdf, uniform01(gen));
        const PauliTerm& term = h.terms[order[pick]];
        double magnitude = std::abs(term.coeff) / distribution.weights[pick];
        double angle = (term.coeff < 0.0 ? -1.0 : 1.0) * magnitude * dt;
        seq.entries.push_back({term.string, angle});
        seq.markers.push_back({seq.entries.size(), MarkerKind::SampleStepEnd});
    }
    seq.params["samples"] = std::to_string(samples);
    seq.params["scheme"] = distribution.scheme_tag;
    seq.params["lambda"] = format_double(h.lambda());
    seq.params["sign_correction"] = "true";
    return seq;
}

SamplingDistribution importance_distribution(const PauliHamiltonian& h, const std::vector<double>& per_term_cost) {
    require_terms(h, "importance_distribution");
    auto order = canonical_order(h);
    if (per_term_cost.size() != order.size())
        throw std::invalid_argument("importance_distribution: cost vector size != term count");
    double lambda_c = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (per_term_cost[i] <= 0.0) throw std::invalid_argument("importance_distribution: costs must be positive");
        lambda_c += std::abs(h.terms[order[i]].coeff) / per_term_cost[i];
    }
    if (lambda_c <= 0.0) throw std::invalid_argument("importance_distribution: all coefficients are zero");
    SamplingDistribution dist;
    dist.scheme_tag = "importance";
    dist.weights.reserve(order.size());
    double total = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        double q = std::abs(h.terms[order[i]].coeff) / (per_term_cost[i] * lambda_c);
        dist.weights.push_back(q);
        total += q;
    }
    for (double& q : dist.weights) q /= total;  // remove rounding drift; sums to 1 analytically
    return dist;
}

SamplingDistribution physdrift_distribution(const GroupedHamiltonian& grouped, WeightScheme scheme) {
    if (grouped.groups.empty()) throw std::invalid_argument("physdrift_distribution: no groups");
    SamplingDistribution dist;
    dist.scheme_tag = scheme == WeightScheme::Abs ? "phys_abs" : "phys_mean";
    double total = 0.0;
    for (const auto& group : grouped.groups) {
        double w = scheme == WeightScheme::Abs ? group.abs_weight : std::abs(group.mean_weight);
        dist.weights.push_back(w);
        total += w;
    }
    if (total <= 0.0) {
        if (scheme == WeightScheme::Mean)
            throw std::invalid_argument("physdrift_distribution: all group weights are zero under the mean scheme");
        throw std::invalid_argument("physdrift_distribution: all group weights are zero");
    }
    for (double& w : dist.weights) w /= total;
    return dist;
}

namespace {

struct PhysdriftPlan {
    std::vector<double> weights;  // unnormalized W_j
    double lambda_s = 0.0;
    std::vector<double> cdf;
};

PhysdriftPlan physdrift_plan(const GroupedHamiltonian& grouped, WeightScheme scheme) {
    PhysdriftPlan plan;
    for (const auto& group : grouped.groups) {
        double w = scheme == WeightScheme::Abs ? group.abs_weight : std::abs(group.mean_weight);
        plan.weights.push_back(w);
        plan.lambda_s += w;
    }
    if (grouped.groups.empty() || plan.lambda_s <= 0.0) {
        if (scheme == WeightScheme::Mean && !grouped.groups.empty())
            throw std::invalid_argument("sample_physdrift: all group weights are zero under the mean scheme");
        throw std::invalid_argument("sample_physdrift: no groups with nonzero weight");
    }
    plan.cdf = cumulative_distribution(plan.weights);
    return plan;
}

void emit_physdrift_draw(GateSequence& seq, const PhysicalGroup& group, double group_weight, double lambda_s,
                         double dt) {
    for (const auto& term : group.terms) {
        double magnitude = std::abs(term.coeff) / group_weight;
        double angle = (term.coeff < 0.0 ? -1.0 : 1.0) * magnitude * lambda_s * dt;
        seq.entries.push_back({term.string, angle});
    }
    seq.markers.push_back({seq.entries.size(), MarkerKind::GroupEnd});
}

GateSequence sample_physdrift_impl(const GroupedHamiltonian& grouped, double t, std::size_t draws, WeightScheme scheme,
                                   std::uint64_t seed, const PhysdriftPlan& plan) {
    GateSequence seq;
    seq.n_qubits = grouped.n_qubits;
    seq.protocol = scheme == WeightScheme::Abs ? "physdrift-abs" : "physdrift-mean";
    seq.t = t;
    seq.seed = seed;
    std::mt19937_64 gen(seed);
    double dt = t / static_cast<double>(draws);
    for (std::size_t n = 0; n < draws; ++n) {
        std::size_t pick = sample_cumulative(plan.cdf, uniform01(gen));
        emit_physdrift_draw(seq, grouped.groups[pick], plan.weights[pick], plan.lambda_s, dt);
    }
    seq.params["draws"] = std::to_string(draws);
    seq.params["lambda_s"] = format_double(plan.lambda_s);
    seq.params["scheme"] = scheme == WeightScheme::Abs ? "abs" : "mean";
    return seq;
}

}  // namespace

GateSequence sample_physdrift(const GroupedHamiltonian& grouped, double t, std::size_t draws, WeightScheme scheme,
                              std::uint64_t seed) {
    require_positive_steps(draws, "sample_physdrift");
    return sample_physdrift_impl(grouped, t, draws, scheme, seed, physdrift_plan(grouped, scheme));
}

GateSequence sample_physdrift_to_depth(const GroupedHamiltonian& grouped, double t, std::size_t target_entries,
                                       WeightScheme scheme, std::uint64_t seed) {
    if (target_entries == 0) throw std::invalid_argument("sample_physdrift_to_depth: target must be >= 1");
    PhysdriftPlan plan = physdrift_plan(grouped, scheme);
    // Replay the draw stream once to find how many draws reach the target
    // entry count, then emit with that draw count and the same seed.
    std::mt19937_64 probe(seed);
    std::size_t draws = 0, entries = 0;
    while (entries < target_entries) {
        std::size_t pick = sample_cumulative(plan.cdf, uniform01(probe));
        entries += grouped.groups[pick].terms.size();
        ++draws;
    }
    return sample_physdrift_impl(grouped, t, draws, scheme, seed, plan);
}

GateSequence sample_random_permutation(const PauliHamiltonian& h, double t, std::size_t steps, std::uint64_t seed) {
    require_terms(h, "sample_random_permutation");
    require_positive_steps(steps, "sample_random_permutation");
    auto order = canonical_order(h);
    GateSequence seq = make_sequence(h, "random_permutation", t, seed);
    std::mt19937_64 gen(seed);
    double dt = t / static_cast<double>(steps);
    std::string coins;
    for (std::size_t step = 0; step < steps; ++step) {
        bool forward = uniform01(gen) < 0.5;
        coins += forward ? 'F' : 'R';
        if (forward) {
            for (std::size_t k : order) seq.entries.push_back({h.terms[k].string, h.terms[k].coeff * dt});
        } else {
            for (auto it = order.rbegin(); it != order.rend(); ++it)
                seq.entries.push_back({h.terms[*it].string, h.terms[*it].coeff * dt});
        }
        seq.markers.push_back({seq.entries.size(), MarkerKind::SampleStepEnd});
    }
    seq.params["steps"] = std::to_string(steps);
    seq.params["coins"] = coins;
    return seq;
}

GateSequence sample_sparsto(const PauliHamiltonian& h, double t, std::size_t steps, std::uint64_t seed,
                            const std::vector<double>* keep_probabilities) {
    require_terms(h, "sample_sparsto");
    require_positive_steps(steps, "sample_sparsto");
    auto order = canonical_order(h);
    if (keep_probabilities && keep_probabilities->size() != order.size())
        throw std::invalid_argument("sample_sparsto: keep vector size != term count");

    // Pool of nonzero terms in canonical order with their keep probabilities.
    std::vector<std::size_t> pool;
    std::vector<double> keep;
    double lambda_max = h.lambda_max();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const PauliTerm& term = h.terms[order[i]];
        if (term.coeff == 0.0) continue;
        double p = keep_probabilities ? (*keep_probabilities)[i] : std::abs(term.coeff) / lambda_max;
        if (p <= 0.0) throw std::invalid_argument("sample_sparsto: keep probability 0 for a nonzero term");
        if (p > 1.0) p = 1.0;
        pool.push_back(order[i]);
        keep.push_back(p);
    }
    if (pool.empty()) throw std::invalid_argument("sample_sparsto: all coefficients are zero");

    GateSequence seq = make_sequence(h, "sparsto", t, seed);
    std::mt19937_64 gen(seed);
    double dt = t / static_cast<double>(steps);
    std::vector<std::size_t> perm(pool.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t step = 0; step < steps; ++step) {
        // Fisher-Yates with the sequence generator; avoids std::shuffle's
        // implementation-defined draw pattern.
        for (std::size_t i = perm.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(gen() % i);
            std::swap(perm[i - 1], perm[j]);
        }
        auto pass = [&](std::size_t slot) {
            std::size_t idx = pool[slot];
            double p = keep[slot];
            if (uniform01(gen) < p) {
                // Each of the two passes carries half the step, rescaled by
                // 1/p so the kept-term expectation matches the full step.
                double angle = h.terms[idx].coeff * (dt / 2.0) / p;
                seq.entries.push_back({h.terms[idx].string, angle});
            }
        };
        for (std::size_t slot : perm) pass(slot);
        for (auto it = perm.rbegin(); it != perm.rend(); ++it) pass(*it);
        seq.markers.push_back({seq.entries.size(), MarkerKind::SampleStepEnd});
    }
    seq.params["steps"] = std::to_string(steps);
    {
        std::string keeps;
        for (std::size_t i = 0; i < keep.size(); ++i) {
            if (i) keeps += ',';
            keeps += format_double(keep[i]);
        }
        seq.params["keep"] = keeps;
    }
    return seq;
}

GateSequence apply_symmetric_protection(const GateSequence& seq, std::uint64_t seed, bool discrete_phase) {
    std::vector<std::size_t> boundaries;
    for (const auto& m : seq.markers)
        if (m.kind == MarkerKind::TrotterStepEnd) boundaries.push_back(m.index);
    if (boundaries.empty())
        throw std::invalid_argument("apply_symmetric_protection: sequence has no trotter step markers");
    if (boundaries.back() != seq.entries.size())
        throw std::invalid_argument("apply_symmetric_protection: trailing entries after the last step marker");

    PauliString parity = PauliString::identity(seq.n_qubits);
    for (std::size_t q = 0; q < seq.n_qubits; ++q) parity.set_letter(q, Pauli::Z);

    GateSequence out;
    out.n_qubits = seq.n_qubits;
    out.protocol = seq.protocol;
    out.t = seq.t;
    out.seed = seq.seed;
    out.params = seq.params;
    out.params["protection"] = discrete_phase ? "discrete" : "continuous";
    out.params["protection_seed"] = std::to_string(seed);

    std::mt19937_64 gen(seed);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    std::size_t start = 0;
    for (std::size_t boundary : boundaries) {
        double phi = discrete_phase ? (uniform01(gen) < 0.5 ? 0.0 : kTwoPi / 2.0) : uniform01(gen) * kTwoPi;
        out.entries.push_back({parity, -phi});
        for (std::size_t i = start; i < boundary; ++i) out.entries.push_back(seq.entries[i]);
        out.entries.push_back({parity, phi});
        out.markers.push_back({out.entries.size(), MarkerKind::TrotterStepEnd});
        start = boundary;
    }
    return out;
}

}  // namespace driftsim
