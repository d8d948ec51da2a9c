#ifndef MTM_WEIGHTS_HPP
#define MTM_WEIGHTS_HPP

#include <functional>
#include <span>
#include <vector>

#include "mtm/densities.hpp"
#include "mtm/rng.hpp"

namespace mtm {

enum class WeightKind { importance, dm_mixture, liu_lambda };

// Selects the weight family used for candidate selection and acceptance.
//  - importance: w(z|x) = pi(z) / q(z|x)
//  - dm_mixture: w(z)   = pi(z) / psi(z), psi the equal mixture of all proposals
//  - liu_lambda: w(z|x) = pi(z) * q(x) * lambda(z, x), lambda symmetric positive
struct WeightSpec {
    WeightKind kind = WeightKind::importance;
    // liu_lambda only; returns log lambda(a, b) and must be symmetric.
    std::function<double(const Point&, const Point&)> log_lambda;

    static WeightSpec importance() { return {WeightKind::importance, nullptr}; }
    static WeightSpec dm_mixture() { return {WeightKind::dm_mixture, nullptr}; }
    static WeightSpec liu(std::function<double(const Point&, const Point&)> log_lambda_fn)
    {
        return {WeightKind::liu_lambda, std::move(log_lambda_fn)};
    }
};

// log pi(z) - log q(z|condition); -inf iff pi(z) = 0.
double importance_log_weight(const Point& z, const TargetDensity& target,
                             const Proposal& proposal, const Point* condition = nullptr);

// log pi(z) - log psi(z) with psi the equal mixture of components.
double dm_log_weight(const Point& z, const TargetDensity& target,
                     std::span<const Proposal> components);

// log pi(z) + log q_n(x) + log lambda(z, x).
double liu_log_weight(const Point& z, const Point& x, const TargetDensity& target,
                      const Proposal& proposal_n,
                      const std::function<double(const Point&, const Point&)>& log_lambda);

// Result of normalizing log-weights into selection probabilities and
// drawing one index. `degenerate` is set when every weight is zero; the
// caller treats that iteration as an automatic rejection.
struct Selection {
    std::vector<double> probs;
    int index = -1;
    bool degenerate = false;
};

// Normalizes via log-sum-exp and draws the index with the Gumbel-max
// rule (argmax of log-weight + Gumbel noise): equivalent in distribution
// to categorical sampling but immune to exponentiating extreme weights.
// Always consumes exactly log_weights.size() uniforms, so the stream
// position does not depend on the weight values. Ties break to the
// lowest index.
Selection normalize_and_select(std::span<const double> log_weights, RngStream& rng);

// Candidate set together with its weights and the drawn index.
struct WeightedCandidates {
    std::vector<Point> points;
    std::vector<double> log_weights;
    std::vector<double> selection_probs;
    int selected_index = -1;
};

// Sample-mean importance-weight estimate of the target's normalizing
// constant, computed stably from log-weights.
double normalizing_constant_estimate(std::span<const Point> points, const TargetDensity& target,
                                     const Proposal& proposal, const Point* condition = nullptr);

}  // namespace mtm

#endif  // MTM_WEIGHTS_HPP
