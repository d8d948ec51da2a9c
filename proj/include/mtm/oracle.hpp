#ifndef MTM_ORACLE_HPP
#define MTM_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "mtm/densities.hpp"
#include "mtm/rng.hpp"

namespace mtm {

// Row-stochastic kernel over a finite state space.
struct TransitionMatrix {
    std::size_t n = 0;
    std::vector<double> entries;  // row-major

    explicit TransitionMatrix(std::size_t size = 0) : n(size), entries(size * size, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return entries[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
    std::vector<double> row_sums() const;
};

TransitionMatrix uniform_kernel_mixture(const std::vector<TransitionMatrix>& kernels);

// Finite state space with a target pmf and a conditional proposal pmf,
// the ground-truth harness for every sampler variant. Points carry the
// embedded coordinates handed to the production samplers.
struct DiscreteSpace {
    std::vector<Point> points;
    std::vector<double> target_pmf;                 // pi over points
    std::vector<std::vector<double>> proposal_pmf;  // row i: q(.|point_i)

    std::size_t size() const { return points.size(); }
    void validate() const;

    // Index of an embedded point; states only ever hold exact copies of
    // grid points, so comparison is exact.
    int index_of(const Point& x) const;

    // Hooks that run the production samplers on this space.
    TargetDensity make_target() const;
    Proposal make_conditional_proposal() const;
    Proposal make_independent_proposal(std::vector<double> pmf) const;

    // n states embedded at coordinates 0..n-1 on the real line.
    static DiscreteSpace line(std::vector<double> target_pmf,
                              std::vector<std::vector<double>> proposal_pmf);
};

enum class DiscreteWeightKind { importance, dm_mixture, liu_lambda };

struct DiscreteWeightSpec {
    DiscreteWeightKind kind = DiscreteWeightKind::importance;
    // liu_lambda only: linear-space lambda_k(a, b) on state indices,
    // symmetric in (a, b); the first argument selects the proposal.
    std::function<double(std::size_t, int, int)> lambda;
};

// Exact RW-MTM kernel by brute-force enumeration of every candidate
// tuple, selection, auxiliary tuple and accept/reject outcome. Work is
// N * n^(2N-1) terms; throws size_error above the guard (default 1e7).
TransitionMatrix exact_rw_mtm_kernel(const DiscreteSpace& space, int n_tries, int n_threads = 1,
                                     double term_guard = 1e7);

// Exact I-MTM kernel (one try per proposal) for importance, DM, or
// lambda-generic weights. Work is N * n^N terms.
TransitionMatrix exact_imtm_kernel(const DiscreteSpace& space,
                                   const std::vector<std::vector<double>>& proposal_pmfs,
                                   const DiscreteWeightSpec& weights, int n_threads = 1,
                                   double term_guard = 1e7);

// Empirical kernel from repeated invocations of a (production) step
// function; each (state, sample) pair owns a derived stream, so the
// estimate is independent of thread count. Rows sum to 1 exactly.
using DiscreteStepFn = std::function<Point(const Point&, RngStream&)>;
TransitionMatrix mc_kernel_estimate(const DiscreteStepFn& step, const DiscreteSpace& space,
                                    int samples_per_state, std::uint64_t seed,
                                    int n_threads = 1);

struct StationarityReport {
    double l1_residual = 0.0;
    bool pass = false;
};

struct DetailedBalanceReport {
    double max_violation = 0.0;
    bool pass = false;
};

// ||pi K - pi||_1 against tol.
StationarityReport check_stationarity(const TransitionMatrix& kernel,
                                      const std::vector<double>& pi, double tol);

// max_{i,j} |pi_i K_ij - pi_j K_ji| against tol.
DetailedBalanceReport check_detailed_balance(const TransitionMatrix& kernel,
                                             const std::vector<double>& pi, double tol);

}  // namespace mtm

#endif  // MTM_ORACLE_HPP
