#ifndef MTM_SAMPLERS_HPP
#define MTM_SAMPLERS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "mtm/densities.hpp"
#include "mtm/rng.hpp"
#include "mtm/weights.hpp"

namespace mtm {

// Per-iteration diagnostics. Rejected iterations still carry the selected
// candidate and alpha so stuck-chain behavior can be analyzed offline.
struct IterationRecord {
    int n_used = 0;
    double alpha = 0.0;
    bool accepted = false;
    Point selected_candidate;
    double z_hat_num = 0.0;  // normalizing-constant estimate from the candidates
    double z_hat_den = 0.0;  // same estimate from the reverse/auxiliary set
};

// states has length T+1 (x0 included); records has length T.
struct ChainTrace {
    std::vector<Point> states;
    std::vector<IterationRecord> records;
};

enum class SamplerVariant { rw_mtm, imtm };
enum class ImtmSamplingMode { per_proposal, mixture };

// Fixed N (single value) or a per-iteration uniform choice among values.
struct TriesSchedule {
    std::vector<int> values;

    static TriesSchedule fixed(int n) { return {{n}}; }
    static TriesSchedule variable(std::vector<int> ns) { return {std::move(ns)}; }
    bool is_fixed() const { return values.size() == 1; }
};

struct SamplerConfig {
    SamplerVariant variant = SamplerVariant::rw_mtm;
    TriesSchedule tries = TriesSchedule::fixed(1);  // rw_mtm only
    // rw_mtm: exactly one random-walk proposal; imtm: N independent proposals.
    std::vector<Proposal> proposals;
    WeightSpec weights = WeightSpec::importance();
    ImtmSamplingMode sampling_mode = ImtmSamplingMode::per_proposal;  // imtm only
    int tries_per_proposal = 1;  // imtm per-proposal mode: P = k * N
    long chain_length = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct StepResult {
    Point state;
    IterationRecord record;
};

// One multiple-try random-walk step: draw N candidates from q(.|x_prev),
// select one by normalized importance weights, draw N-1 auxiliary points
// from q(.|z) plus y_N = x_prev, accept with min(1, Zhat1/Zhat2).
//
// Stream order per call: N candidate draws, N selection uniforms, N-1
// auxiliary draws, one accept uniform. A degenerate candidate set (all
// weights zero) consumes only the first two groups and rejects with
// alpha = 0.
StepResult rw_mtm_step(const Point& x_prev, const TargetDensity& target,
                       const Proposal& proposal, int n_tries, RngStream& rng);

// Uniformly picks N from the schedule (one index draw, skipped when the
// schedule has a single entry), then runs rw_mtm_step. Realizes the
// uniform mixture of the per-N kernels.
StepResult variable_n_step(const Point& x_prev, const TargetDensity& target,
                           const Proposal& proposal, std::span<const int> schedule,
                           RngStream& rng);

// One step with independent proposals. Per-proposal mode draws k tries
// from each of the N proposals (P = kN candidates, block order); mixture
// mode draws all P candidates from the equal mixture psi. Acceptance uses
// the importance-weight ratio for importance/DM weights and the generic
// W_X/W_Z form for liu_lambda weights.
//
// Stream order per call: P candidate draws (mixture mode: one component
// index plus one draw each), P selection uniforms, one accept uniform.
StepResult imtm_step(const Point& x_prev, const TargetDensity& target,
                     const SamplerConfig& config, RngStream& rng);

// Runs chain_length steps from x0 with the given stream; the convenience
// overload derives the stream from config.seed.
ChainTrace run_chain(const TargetDensity& target, const SamplerConfig& config, const Point& x0,
                     RngStream& rng);
ChainTrace run_chain(const TargetDensity& target, const SamplerConfig& config, const Point& x0);

// Log acceptance ratios before clamping at 1, exposed so the two
// algebraic forms can be checked against each other.
//
// Importance-weight form: sum_n w_n(z_n) over the same sum with w_j(z_j)
// replaced by w_j(x_prev).
double log_imtm_ratio_importance(std::span<const double> cand_log_weights, int selected,
                                 double log_weight_prev);

// Generic-weight form: target/proposal prefactor times W_X / W_Z.
// Requires pi(x_prev) > 0.
double log_imtm_ratio_generic(std::span<const double> cand_log_weights, int selected,
                              double log_weight_prev, double log_target_selected,
                              double log_target_prev, double log_qj_selected,
                              double log_qj_prev);

}  // namespace mtm

#endif  // MTM_SAMPLERS_HPP
