// Strategy-update rules: pairwise Fermi imitation with exploration, and the
// replicator dynamic in continuous and fixed-step discrete form.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "egt/rng.hpp"

namespace egt {

struct FermiParams {
    double selection_strength = 0.5;
};

struct ExplorationParams {
    double rate = 0.01;
};

inline void validate(const FermiParams& p) {
    if (!(p.selection_strength >= 0.0) || !std::isfinite(p.selection_strength))
        throw std::invalid_argument("selection strength must be finite and >= 0");
}

inline void validate(const ExplorationParams& p) {
    if (!(p.rate >= 0.0 && p.rate <= 1.0))
        throw std::invalid_argument("exploration rate must lie in [0, 1]");
}

/// Probability that an agent earning `own_payoff` adopts the strategy of a
/// neighbor earning `neighbor_payoff`.
inline double fermi_switch_probability(double own_payoff, double neighbor_payoff,
                                       const FermiParams& params) {
    return 1.0 / (1.0 + std::exp(params.selection_strength * (own_payoff - neighbor_payoff)));
}

inline constexpr std::size_t kNoSource = static_cast<std::size_t>(-1);

struct Adoption {
    std::size_t strategy = 0;
    /// Agent whose strategy was copied; kNoSource when the agent explored or kept its own.
    std::size_t source = kNoSource;
};

/// Synchronous imitation step over a population of strategy indices.
///
/// Agent i compares itself with agent `neighbor_choice[i]`. Draws are consumed
/// in ascending agent order: first the exploration draw; if exploration fires,
/// a uniform strategy in [0, universe_size); otherwise one Fermi draw. Every
/// comparison reads the pre-update assignment.
inline std::vector<Adoption> imitation_step(std::span<const std::size_t> strategies,
                                            std::span<const double> payoffs,
                                            std::span<const std::size_t> neighbor_choice,
                                            const FermiParams& fermi, const ExplorationParams& explore,
                                            std::size_t universe_size, Rng& rng) {
    const std::size_t n = strategies.size();
    if (payoffs.size() != n || neighbor_choice.size() != n)
        throw std::invalid_argument("imitation_update: size mismatch");
    if (universe_size == 0) throw std::invalid_argument("imitation_update: empty strategy universe");

    std::vector<Adoption> next(n);
    for (std::size_t i = 0; i < n; ++i) {
        next[i].strategy = strategies[i];
        if (rng.bernoulli(explore.rate)) {
            next[i].strategy = rng.below(universe_size);
            continue;
        }
        const std::size_t j = neighbor_choice[i];
        if (j >= n) throw std::out_of_range("imitation_update: neighbor index out of range");
        if (rng.bernoulli(fermi_switch_probability(payoffs[i], payoffs[j], fermi)))
            next[i] = {strategies[j], j};
    }
    return next;
}

inline std::vector<std::size_t> imitation_update(std::span<const std::size_t> strategies,
                                                 std::span<const double> payoffs,
                                                 std::span<const std::size_t> neighbor_choice,
                                                 const FermiParams& fermi,
                                                 const ExplorationParams& explore,
                                                 std::size_t universe_size, Rng& rng) {
    const auto step = imitation_step(strategies, payoffs, neighbor_choice, fermi, explore, universe_size, rng);
    std::vector<std::size_t> out(step.size());
    for (std::size_t i = 0; i < step.size(); ++i) out[i] = step[i].strategy;
    return out;
}

/// Point on the probability simplex over n strategies.
class MixedState {
public:
    MixedState() = default;
    explicit MixedState(std::vector<double> proportions) : x_(std::move(proportions)) {
        double sum = 0.0;
        for (double v : x_) {
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("MixedState: proportion outside [0, 1]");
            sum += v;
        }
        if (x_.empty() || std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("MixedState: proportions must sum to 1");
    }

    std::size_t size() const { return x_.size(); }
    double operator[](std::size_t i) const { return x_[i]; }
    const std::vector<double>& proportions() const { return x_; }

private:
    std::vector<double> x_;
};

/// Square matrix of expected payoffs; entry (i, j) is the payoff to strategy i
/// against strategy j.
class PayoffMatrix {
public:
    PayoffMatrix() = default;
    PayoffMatrix(std::size_t n, std::vector<double> row_major) : n_(n), a_(std::move(row_major)) {
        if (n_ == 0 || a_.size() != n_ * n_)
            throw std::invalid_argument("PayoffMatrix: expected a nonempty square matrix");
        for (double v : a_)
            if (!std::isfinite(v)) throw std::invalid_argument("PayoffMatrix: non-finite entry");
    }

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

inline std::vector<double> replicator_derivative(std::span<const double> x, const PayoffMatrix& u) {
    const std::size_t n = u.size();
    if (x.size() != n) throw std::invalid_argument("replicator_derivative: dimension mismatch");
    std::vector<double> fitness(n, 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) fitness[i] += x[j] * u(i, j);
        mean += x[i] * fitness[i];
    }
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] * (fitness[i] - mean);
    return d;
}

inline std::vector<double> replicator_derivative(const MixedState& state, const PayoffMatrix& u) {
    return replicator_derivative(std::span<const double>(state.proportions()), u);
}

/// Default Euler step used by the CLI and the trajectory helpers.
inline constexpr double kDefaultReplicatorStep = 1e-3;

class StepSizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Explicit Euler integration of the replicator dynamic from t = 0 to
/// `horizon`. The final step is shortened when `horizon` is not a multiple of
/// `step`. Each emitted state is renormalized onto the simplex.
inline std::vector<MixedState> replicator_trajectory(const MixedState& initial, const PayoffMatrix& u,
                                                     double horizon, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be >= 0");
    if (initial.size() != u.size()) throw std::invalid_argument("replicator_trajectory: dimension mismatch");

    constexpr double kSlack = 1e-12;
    const double ratio = horizon / step;
    const double whole = std::round(ratio);
    const bool exact = std::abs(ratio - whole) <= 1e-9 * std::max(1.0, ratio);
    const auto full_steps = static_cast<std::size_t>(exact ? whole : std::floor(ratio));
    const double last = exact ? 0.0 : horizon - static_cast<double>(full_steps) * step;

    std::vector<MixedState> out;
    out.reserve(full_steps + 2);
    out.push_back(initial);
    std::vector<double> x = initial.proportions();

    auto advance = [&](double h) {
        const auto d = replicator_derivative(std::span<const double>(x), u);
        double sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += h * d[i];
            if (x[i] < -kSlack || x[i] > 1.0 + kSlack)
                throw StepSizeError("replicator_trajectory: step " + std::to_string(h) +
                                    " pushes a proportion outside [0, 1]");
            x[i] = std::clamp(x[i], 0.0, 1.0);
            sum += x[i];
        }
        for (double& v : x) v /= sum;
        out.emplace_back(x);
    };

    for (std::size_t s = 0; s < full_steps; ++s) advance(step);
    if (last > 0.0) advance(last);
    return out;
}

}  // namespace egt
