#include "mtm/weights.hpp"

#include <cmath>
#include <stdexcept>

#include "mtm/errors.hpp"
#include "mtm/logspace.hpp"

namespace mtm {

double importance_log_weight(const Point& z, const TargetDensity& target,
                             const Proposal& proposal, const Point* condition)
{
    const double log_q = proposal.log_density(z, condition);
    if (log_q == kNegInf)
        throw std::runtime_error("importance weight: proposal density is zero at a candidate");
    const double log_pi = target(z);
    if (log_pi == kNegInf) return kNegInf;
    return log_pi - log_q;
}

double dm_log_weight(const Point& z, const TargetDensity& target,
                     std::span<const Proposal> components)
{
    const double log_psi = mixture_log_density(z, components);
    if (log_psi == kNegInf)
        throw std::runtime_error("DM weight: mixture density is zero at a candidate");
    const double log_pi = target(z);
    if (log_pi == kNegInf) return kNegInf;
    return log_pi - log_psi;
}

double liu_log_weight(const Point& z, const Point& x, const TargetDensity& target,
                      const Proposal& proposal_n,
                      const std::function<double(const Point&, const Point&)>& log_lambda)
{
    const double ll = log_lambda(z, x);
    if (!(ll > kNegInf) || std::isnan(ll))
        throw config_error("liu weight: lambda must be positive");
    const double log_pi = target(z);
    if (log_pi == kNegInf) return kNegInf;
    return log_pi + proposal_n.log_density(x, nullptr) + ll;
}

Selection normalize_and_select(std::span<const double> log_weights, RngStream& rng)
{
    if (log_weights.empty()) throw std::invalid_argument("normalize_and_select: empty weights");

    // Draw the Gumbel keys up front so stream consumption is fixed.
    int best = -1;
    double best_key = kNegInf;
    for (std::size_t k = 0; k < log_weights.size(); ++k) {
        const double g = rng.gumbel();
        if (log_weights[k] == kNegInf) continue;
        const double key = log_weights[k] + g;
        if (best < 0 || key > best_key) {
            best = static_cast<int>(k);
            best_key = key;
        }
    }

    Selection sel;
    if (best < 0) {
        sel.degenerate = true;
        return sel;
    }

    const double lse = log_sum_exp(log_weights);
    sel.probs.resize(log_weights.size());
    double total = 0.0;
    for (std::size_t k = 0; k < log_weights.size(); ++k) {
        sel.probs[k] = std::exp(log_weights[k] - lse);
        total += sel.probs[k];
    }
    for (double& p : sel.probs) p /= total;
    sel.index = best;
    return sel;
}

double normalizing_constant_estimate(std::span<const Point> points, const TargetDensity& target,
                                     const Proposal& proposal, const Point* condition)
{
    if (points.empty()) throw std::invalid_argument("normalizing constant estimate: no points");
    std::vector<double> log_w(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        log_w[i] = importance_log_weight(points[i], target, proposal, condition);
    const double lse = log_sum_exp(log_w);
    if (lse == kNegInf) return 0.0;
    return std::exp(lse - std::log(static_cast<double>(points.size())));
}

}  // namespace mtm
