#include "mtm/samplers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mtm/errors.hpp"
#include "mtm/logspace.hpp"

namespace mtm {

namespace {

double clamp_alpha(double log_ratio)
{
    if (log_ratio >= 0.0) return 1.0;
    return std::exp(log_ratio);
}

// Zhat over a candidate/auxiliary set: exp(LSE(log weights) - log N).
double z_hat(std::span<const double> log_weights)
{
    const double lse = log_sum_exp(log_weights);
    if (lse == kNegInf) return 0.0;
    return std::exp(lse - std::log(static_cast<double>(log_weights.size())));
}

IterationRecord degenerate_rejection(int n_used, Point candidate)
{
    IterationRecord rec;
    rec.n_used = n_used;
    rec.alpha = 0.0;
    rec.accepted = false;
    rec.selected_candidate = std::move(candidate);
    rec.z_hat_num = 0.0;
    rec.z_hat_den = 0.0;
    return rec;
}

}  // namespace

void SamplerConfig::validate() const
{
    if (tries.values.empty()) throw config_error("sampler: empty tries schedule");
    for (int n : tries.values)
        if (n < 1) throw config_error("sampler: tries must be >= 1");
    if (proposals.empty()) throw config_error("sampler: no proposals");
    if (chain_length < 0) throw config_error("sampler: negative chain length");
    if (variant == SamplerVariant::rw_mtm) {
        if (proposals.size() != 1 || proposals.front().kind() != ProposalKind::random_walk)
            throw config_error("sampler: rw-mtm needs exactly one random-walk proposal");
    } else {
        for (const Proposal& q : proposals)
            if (q.kind() == ProposalKind::random_walk)
                throw config_error("sampler: imtm proposals must be independent");
        if (tries_per_proposal < 1) throw config_error("sampler: tries_per_proposal must be >= 1");
        if (weights.kind == WeightKind::liu_lambda && !weights.log_lambda)
            throw config_error("sampler: liu weights need a lambda function");
        if (weights.kind == WeightKind::liu_lambda && sampling_mode == ImtmSamplingMode::mixture)
            throw config_error("sampler: liu weights are defined for per-proposal sampling");
    }
}

StepResult rw_mtm_step(const Point& x_prev, const TargetDensity& target,
                       const Proposal& proposal, int n_tries, RngStream& rng)
{
    const std::size_t n = static_cast<std::size_t>(n_tries);

    std::vector<Point> cands(n);
    for (std::size_t k = 0; k < n; ++k) cands[k] = proposal.sample(&x_prev, rng);

    std::vector<double> log_w(n);
    for (std::size_t k = 0; k < n; ++k)
        log_w[k] = importance_log_weight(cands[k], target, proposal, &x_prev);

    const Selection sel = normalize_and_select(log_w, rng);
    if (sel.degenerate)
        return {x_prev, degenerate_rejection(n_tries, std::move(cands.front()))};

    const Point& z = cands[static_cast<std::size_t>(sel.index)];

    // Auxiliary set: N-1 fresh draws from q(.|z), plus the previous state.
    // The previous state was not drawn from q(.|z), so a zero reverse
    // density makes its weight infinite rather than an error.
    std::vector<double> log_v(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const Point y = proposal.sample(&z, rng);
        log_v[k] = importance_log_weight(y, target, proposal, &z);
    }
    const double log_pi_prev = target(x_prev);
    const double log_q_prev = proposal.log_density(x_prev, &z);
    const bool reverse_blocked = log_pi_prev != kNegInf && log_q_prev == kNegInf;
    log_v[n - 1] = log_pi_prev == kNegInf ? kNegInf : log_pi_prev - log_q_prev;

    const double log_num = log_sum_exp(log_w);

    double alpha;
    double log_den;
    if (reverse_blocked) {
        log_den = std::numeric_limits<double>::infinity();
        alpha = 0.0;
    } else {
        log_den = log_sum_exp(log_v);
        alpha = log_den == kNegInf ? 1.0 : clamp_alpha(log_num - log_den);
    }

    IterationRecord rec;
    rec.n_used = n_tries;
    rec.alpha = alpha;
    rec.accepted = rng.uniform01() < alpha;
    rec.selected_candidate = z;
    rec.z_hat_num = z_hat(log_w);
    rec.z_hat_den =
        reverse_blocked ? std::numeric_limits<double>::infinity() : z_hat(log_v);

    Point next = rec.accepted ? z : x_prev;
    return {std::move(next), std::move(rec)};
}

StepResult variable_n_step(const Point& x_prev, const TargetDensity& target,
                           const Proposal& proposal, std::span<const int> schedule,
                           RngStream& rng)
{
    if (schedule.empty()) throw std::invalid_argument("variable_n_step: empty schedule");
    std::size_t pick = 0;
    if (schedule.size() > 1) pick = rng.uniform_index(schedule.size());
    return rw_mtm_step(x_prev, target, proposal, schedule[pick], rng);
}

double log_imtm_ratio_importance(std::span<const double> cand_log_weights, int selected,
                                 double log_weight_prev)
{
    const double log_num = log_sum_exp(cand_log_weights);
    // Denominator: same sum with w_j(z_j) swapped for w_j(x_prev).
    double log_den = log_weight_prev;
    for (std::size_t k = 0; k < cand_log_weights.size(); ++k)
        if (static_cast<int>(k) != selected) log_den = log_add(log_den, cand_log_weights[k]);
    if (log_den == kNegInf) return std::numeric_limits<double>::infinity();
    return log_num - log_den;
}

double log_imtm_ratio_generic(std::span<const double> cand_log_weights, int selected,
                              double log_weight_prev, double log_target_selected,
                              double log_target_prev, double log_qj_selected,
                              double log_qj_prev)
{
    if (log_target_prev == kNegInf)
        throw std::runtime_error("generic-weight acceptance requires pi(x_prev) > 0");
    const double log_sum = log_sum_exp(cand_log_weights);
    double log_swapped = log_weight_prev;
    for (std::size_t k = 0; k < cand_log_weights.size(); ++k)
        if (static_cast<int>(k) != selected) log_swapped = log_add(log_swapped, cand_log_weights[k]);

    const double log_wz = cand_log_weights[static_cast<std::size_t>(selected)] - log_sum;
    if (log_swapped == kNegInf) return std::numeric_limits<double>::infinity();
    const double log_wx = log_weight_prev - log_swapped;

    const double prefactor =
        (log_target_selected + log_qj_prev) - (log_target_prev + log_qj_selected);
    return prefactor + log_wx - log_wz;
}

StepResult imtm_step(const Point& x_prev, const TargetDensity& target,
                     const SamplerConfig& config, RngStream& rng)
{
    const std::vector<Proposal>& props = config.proposals;
    const std::size_t n_props = props.size();
    const std::size_t k_tries = static_cast<std::size_t>(config.tries_per_proposal);

    const bool mixture_mode = config.sampling_mode == ImtmSamplingMode::mixture;
    const std::size_t n_cands = n_props * k_tries;

    std::vector<Point> cands(n_cands);
    std::vector<std::size_t> cand_prop(n_cands);  // proposal that owns candidate t
    if (mixture_mode) {
        const Proposal psi = Proposal::mixture(props);
        for (std::size_t t = 0; t < n_cands; ++t) cands[t] = psi.sample(nullptr, rng);
    } else {
        // Block order: candidates (i*k .. i*k + k-1) come from proposal i.
        for (std::size_t t = 0; t < n_cands; ++t) {
            cand_prop[t] = t / k_tries;
            cands[t] = props[cand_prop[t]].sample(nullptr, rng);
        }
    }

    auto log_psi_at = [&](const Point& p) { return mixture_log_density(p, props); };

    // Candidate log-weights and the j-th weight function evaluated at x_prev.
    std::vector<double> log_w(n_cands);
    const double log_pi_prev = target(x_prev);
    double log_w_prev = kNegInf;  // filled after selection for per-candidate kinds

    switch (config.weights.kind) {
        case WeightKind::importance:
            if (mixture_mode) {
                for (std::size_t t = 0; t < n_cands; ++t) {
                    const double lq = log_psi_at(cands[t]);
                    if (lq == kNegInf)
                        throw std::runtime_error("imtm: mixture density zero at its own draw");
                    const double lp = target(cands[t]);
                    log_w[t] = lp == kNegInf ? kNegInf : lp - lq;
                }
            } else {
                for (std::size_t t = 0; t < n_cands; ++t)
                    log_w[t] = importance_log_weight(cands[t], target, props[cand_prop[t]]);
            }
            break;
        case WeightKind::dm_mixture:
            for (std::size_t t = 0; t < n_cands; ++t)
                log_w[t] = dm_log_weight(cands[t], target, props);
            break;
        case WeightKind::liu_lambda:
            for (std::size_t t = 0; t < n_cands; ++t)
                log_w[t] = liu_log_weight(cands[t], x_prev, target, props[cand_prop[t]],
                                          config.weights.log_lambda);
            break;
    }

    const Selection sel = normalize_and_select(log_w, rng);
    if (sel.degenerate)
        return {x_prev, degenerate_rejection(static_cast<int>(n_cands), std::move(cands.front()))};

    const std::size_t j = static_cast<std::size_t>(sel.index);
    const Point& zj = cands[j];

    double alpha;
    bool reverse_blocked = false;
    double log_den_for_record = kNegInf;
    if (config.weights.kind == WeightKind::liu_lambda) {
        // State-dependent weight functions: detailed balance needs the
        // unselected candidates re-weighted from the proposed state. For
        // state-free lambdas this reduces to the generic-weight ratio.
        if (log_pi_prev == kNegInf)
            throw std::runtime_error("generic-weight acceptance requires pi(x_prev) > 0");
        std::vector<double> log_bwd(n_cands);
        for (std::size_t t = 0; t < n_cands; ++t) {
            if (t == j) continue;
            const double lp = target(cands[t]);
            log_bwd[t] = lp == kNegInf
                             ? kNegInf
                             : lp + props[cand_prop[t]].log_density(zj, nullptr) +
                                   config.weights.log_lambda(cands[t], zj);
        }
        log_bwd[j] = log_pi_prev + props[cand_prop[j]].log_density(zj, nullptr) +
                     config.weights.log_lambda(x_prev, zj);
        const double log_fwd = log_sum_exp(log_w);
        log_den_for_record = log_sum_exp(log_bwd);
        alpha = log_den_for_record == kNegInf ? 1.0
                                              : clamp_alpha(log_fwd - log_den_for_record);
    } else {
        double log_q_prev;
        if (mixture_mode || config.weights.kind == WeightKind::dm_mixture) {
            log_q_prev = log_psi_at(x_prev);
        } else {
            log_q_prev = props[cand_prop[j]].log_density(x_prev, nullptr);
        }
        // A previous state the proposals cannot reach blocks the reverse
        // move (its weight is infinite).
        reverse_blocked = log_pi_prev != kNegInf && log_q_prev == kNegInf;
        log_w_prev = log_pi_prev == kNegInf ? kNegInf : log_pi_prev - log_q_prev;
        if (reverse_blocked) {
            alpha = 0.0;
        } else {
            double log_ratio = log_imtm_ratio_importance(log_w, sel.index, log_w_prev);
            // DM weights are generic weights (common function pi/psi), so
            // the acceptance keeps the proposal-vs-mixture factor from the
            // generic-weight formula. Candidates drawn from psi itself
            // have q_j = psi and the factor vanishes.
            if (!mixture_mode && config.weights.kind == WeightKind::dm_mixture) {
                const Proposal& qj = props[cand_prop[j]];
                log_ratio += (qj.log_density(x_prev, nullptr) - log_q_prev) -
                             (qj.log_density(zj, nullptr) - log_psi_at(zj));
            }
            alpha = clamp_alpha(log_ratio);
        }
    }

    IterationRecord rec;
    rec.n_used = static_cast<int>(n_cands);
    rec.alpha = alpha;
    rec.accepted = rng.uniform01() < alpha;
    rec.selected_candidate = zj;
    rec.z_hat_num = z_hat(log_w);
    if (config.weights.kind == WeightKind::liu_lambda) {
        rec.z_hat_den = std::exp(log_den_for_record - std::log(static_cast<double>(n_cands)));
    } else if (reverse_blocked) {
        rec.z_hat_den = std::numeric_limits<double>::infinity();
    } else {
        // Zhat2 is the candidate sum with w_j(z_j) replaced by w_j(x_prev).
        std::vector<double> swapped(log_w);
        swapped[j] = log_w_prev;
        rec.z_hat_den = z_hat(swapped);
    }

    Point next = rec.accepted ? zj : x_prev;
    return {std::move(next), std::move(rec)};
}

ChainTrace run_chain(const TargetDensity& target, const SamplerConfig& config, const Point& x0,
                     RngStream& rng)
{
    config.validate();
    if (config.weights.kind == WeightKind::liu_lambda && target(x0) == kNegInf)
        throw config_error("run_chain: generic weights require pi(x0) > 0");

    ChainTrace trace;
    trace.states.reserve(static_cast<std::size_t>(config.chain_length) + 1);
    trace.records.reserve(static_cast<std::size_t>(config.chain_length));
    trace.states.push_back(x0);

    for (long t = 1; t <= config.chain_length; ++t) {
        try {
            StepResult step = [&] {
                const Point& x = trace.states.back();
                if (config.variant == SamplerVariant::rw_mtm) {
                    if (config.tries.is_fixed())
                        return rw_mtm_step(x, target, config.proposals.front(),
                                           config.tries.values.front(), rng);
                    return variable_n_step(x, target, config.proposals.front(),
                                           config.tries.values, rng);
                }
                return imtm_step(x, target, config, rng);
            }();
            trace.states.push_back(std::move(step.state));
            trace.records.push_back(std::move(step.record));
        } catch (const std::exception& e) {
            throw std::runtime_error("iteration " + std::to_string(t) + ": " + e.what());
        }
    }
    return trace;
}

ChainTrace run_chain(const TargetDensity& target, const SamplerConfig& config, const Point& x0)
{
    RngStream rng(config.seed);
    return run_chain(target, config, x0, rng);
}

}  // namespace mtm
