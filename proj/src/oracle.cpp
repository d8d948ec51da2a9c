#include "mtm/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mtm/errors.hpp"
#include "mtm/logspace.hpp"

namespace mtm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Visit every tuple in [0, n)^len in odometer order; len == 0 visits the
// empty tuple once.
template <typename F>
void for_each_tuple(std::size_t n, std::size_t len, F&& body)
{
    std::vector<int> idx(len, 0);
    for (;;) {
        body(idx);
        std::size_t pos = 0;
        while (pos < len) {
            if (++idx[pos] < static_cast<int>(n)) break;
            idx[pos] = 0;
            ++pos;
        }
        if (pos == len) break;
    }
}

void check_pmf(const std::vector<double>& pmf, const char* what)
{
    double sum = 0.0;
    for (double p : pmf) {
        if (p < 0.0 || std::isnan(p)) throw config_error(std::string(what) + ": negative mass");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw config_error(std::string(what) + ": does not sum to 1");
}

int draw_category(const std::vector<double>& pmf, RngStream& rng)
{
    double u = rng.uniform01();
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        if (u < pmf[k]) return static_cast<int>(k);
        u -= pmf[k];
    }
    return static_cast<int>(pmf.size()) - 1;  // accumulated rounding guard
}

}  // namespace

std::vector<double> TransitionMatrix::row_sums() const
{
    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sums[i] += at(i, j);
    return sums;
}

TransitionMatrix uniform_kernel_mixture(const std::vector<TransitionMatrix>& kernels)
{
    if (kernels.empty()) throw std::invalid_argument("kernel mixture: no kernels");
    TransitionMatrix out(kernels.front().n);
    for (const TransitionMatrix& k : kernels) {
        if (k.n != out.n) throw std::invalid_argument("kernel mixture: size mismatch");
        for (std::size_t e = 0; e < out.entries.size(); ++e) out.entries[e] += k.entries[e];
    }
    const double scale = 1.0 / static_cast<double>(kernels.size());
    for (double& e : out.entries) e *= scale;
    return out;
}

void DiscreteSpace::validate() const
{
    const std::size_t n = points.size();
    if (n == 0) throw config_error("discrete space: empty");
    if (target_pmf.size() != n) throw config_error("discrete space: target size mismatch");
    if (proposal_pmf.size() != n) throw config_error("discrete space: proposal rows mismatch");
    check_pmf(target_pmf, "discrete target");
    for (const auto& row : proposal_pmf) {
        if (row.size() != n) throw config_error("discrete space: proposal row size mismatch");
        check_pmf(row, "discrete proposal row");
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (points[i] == points[j]) throw config_error("discrete space: duplicate points");
}

int DiscreteSpace::index_of(const Point& x) const
{
    for (std::size_t i = 0; i < points.size(); ++i)
        if (points[i] == x) return static_cast<int>(i);
    throw std::invalid_argument("discrete space: point not in space");
}

TargetDensity DiscreteSpace::make_target() const
{
    auto self = std::make_shared<const DiscreteSpace>(*this);
    TargetDensity t;
    t.dim = points.front().size();
    t.log_density = [self](const Point& x) {
        const double p = self->target_pmf[static_cast<std::size_t>(self->index_of(x))];
        return p > 0.0 ? std::log(p) : kNegInf;
    };
    return t;
}

Proposal DiscreteSpace::make_conditional_proposal() const
{
    auto self = std::make_shared<const DiscreteSpace>(*this);
    return Proposal::custom(
        ProposalKind::random_walk, points.front().size(),
        [self](const Point* cond, RngStream& rng) {
            const auto i = static_cast<std::size_t>(self->index_of(*cond));
            return self->points[static_cast<std::size_t>(draw_category(self->proposal_pmf[i], rng))];
        },
        [self](const Point& z, const Point* cond) {
            const auto i = static_cast<std::size_t>(self->index_of(*cond));
            const double p = self->proposal_pmf[i][static_cast<std::size_t>(self->index_of(z))];
            return p > 0.0 ? std::log(p) : kNegInf;
        });
}

Proposal DiscreteSpace::make_independent_proposal(std::vector<double> pmf) const
{
    if (pmf.size() != size()) throw config_error("discrete proposal: size mismatch");
    check_pmf(pmf, "discrete independent proposal");
    auto self = std::make_shared<const DiscreteSpace>(*this);
    auto shared_pmf = std::make_shared<const std::vector<double>>(std::move(pmf));
    return Proposal::custom(
        ProposalKind::independent, points.front().size(),
        [self, shared_pmf](const Point*, RngStream& rng) {
            return self->points[static_cast<std::size_t>(draw_category(*shared_pmf, rng))];
        },
        [self, shared_pmf](const Point& z, const Point*) {
            const double p = (*shared_pmf)[static_cast<std::size_t>(self->index_of(z))];
            return p > 0.0 ? std::log(p) : kNegInf;
        });
}

DiscreteSpace DiscreteSpace::line(std::vector<double> target,
                                  std::vector<std::vector<double>> proposal)
{
    DiscreteSpace s;
    s.target_pmf = std::move(target);
    s.proposal_pmf = std::move(proposal);
    s.points.resize(s.target_pmf.size());
    for (std::size_t i = 0; i < s.points.size(); ++i)
        s.points[i] = Point{static_cast<double>(i)};
    s.validate();
    return s;
}

TransitionMatrix exact_rw_mtm_kernel(const DiscreteSpace& space, int n_tries, int n_threads,
                                     double term_guard)
{
    space.validate();
    if (n_tries < 1) throw std::invalid_argument("exact kernel: tries must be >= 1");
    const std::size_t n = space.size();
    const std::size_t N = static_cast<std::size_t>(n_tries);

    const double terms =
        static_cast<double>(N) * std::pow(static_cast<double>(n), static_cast<double>(2 * N - 1));
    if (terms > term_guard) throw size_error("exact rw-mtm kernel: enumeration too large");

    TransitionMatrix kernel(n);
    const auto& pi = space.target_pmf;
    const auto& q = space.proposal_pmf;

#pragma omp parallel for num_threads(n_threads) schedule(dynamic)
    for (long long start = 0; start < static_cast<long long>(n); ++start) {
        const std::size_t i = static_cast<std::size_t>(start);
        double* row = &kernel.entries[i * n];

        for_each_tuple(n, N, [&](const std::vector<int>& cand) {
            double p_tuple = 1.0;
            for (int c : cand) p_tuple *= q[i][static_cast<std::size_t>(c)];
            if (p_tuple == 0.0) return;

            double sum_w = 0.0;
            std::vector<double> w(N);
            for (std::size_t t = 0; t < N; ++t) {
                const auto c = static_cast<std::size_t>(cand[t]);
                w[t] = pi[c] / q[i][c];
                sum_w += w[t];
            }
            if (sum_w == 0.0) {  // degenerate candidate set: automatic rejection
                row[i] += p_tuple;
                return;
            }

            for (std::size_t k = 0; k < N; ++k) {
                if (w[k] == 0.0) continue;
                const double p_select = w[k] / sum_w;
                const auto z = static_cast<std::size_t>(cand[k]);

                // Reverse weight of the previous state under q(.|z).
                double w_prev;
                bool blocked = false;
                if (pi[i] == 0.0) {
                    w_prev = 0.0;
                } else if (q[z][i] == 0.0) {
                    blocked = true;
                    w_prev = kInf;
                } else {
                    w_prev = pi[i] / q[z][i];
                }

                for_each_tuple(n, N - 1, [&](const std::vector<int>& aux) {
                    double p_aux = 1.0;
                    for (int a : aux) p_aux *= q[z][static_cast<std::size_t>(a)];
                    if (p_aux == 0.0) return;

                    double alpha;
                    if (blocked) {
                        alpha = 0.0;
                    } else {
                        double sum_v = w_prev;
                        for (int a : aux) {
                            const auto y = static_cast<std::size_t>(a);
                            sum_v += pi[y] / q[z][y];
                        }
                        alpha = sum_v == 0.0 ? 1.0 : std::min(1.0, sum_w / sum_v);
                    }

                    const double mass = p_tuple * p_select * p_aux;
                    row[z] += mass * alpha;
                    row[i] += mass * (1.0 - alpha);
                });
            }
        });
    }
    return kernel;
}

TransitionMatrix exact_imtm_kernel(const DiscreteSpace& space,
                                   const std::vector<std::vector<double>>& proposal_pmfs,
                                   const DiscreteWeightSpec& weights, int n_threads,
                                   double term_guard)
{
    space.validate();
    if (proposal_pmfs.empty()) throw std::invalid_argument("exact imtm kernel: no proposals");
    const std::size_t n = space.size();
    const std::size_t N = proposal_pmfs.size();
    for (const auto& pmf : proposal_pmfs) {
        if (pmf.size() != n) throw config_error("exact imtm kernel: proposal size mismatch");
        check_pmf(pmf, "imtm proposal");
    }
    if (weights.kind == DiscreteWeightKind::liu_lambda && !weights.lambda)
        throw config_error("exact imtm kernel: liu weights need lambda");

    const double terms =
        static_cast<double>(N) * std::pow(static_cast<double>(n), static_cast<double>(N));
    if (terms > term_guard) throw size_error("exact imtm kernel: enumeration too large");

    const auto& pi = space.target_pmf;
    if (weights.kind == DiscreteWeightKind::liu_lambda)
        for (double p : pi)
            if (p == 0.0)
                throw config_error("exact imtm kernel: generic weights need a positive target");

    // psi for DM weights: equal mixture of the proposal pmfs.
    std::vector<double> psi(n, 0.0);
    for (const auto& pmf : proposal_pmfs)
        for (std::size_t s = 0; s < n; ++s) psi[s] += pmf[s] / static_cast<double>(N);

    auto weight_of = [&](std::size_t state, std::size_t prop, std::size_t cond) {
        switch (weights.kind) {
            case DiscreteWeightKind::importance:
                return pi[state] / proposal_pmfs[prop][state];
            case DiscreteWeightKind::dm_mixture:
                return pi[state] / psi[state];
            case DiscreteWeightKind::liu_lambda:
            default:
                return pi[state] * proposal_pmfs[prop][cond] *
                       weights.lambda(prop, static_cast<int>(state), static_cast<int>(cond));
        }
    };

    TransitionMatrix kernel(n);

#pragma omp parallel for num_threads(n_threads) schedule(dynamic)
    for (long long start = 0; start < static_cast<long long>(n); ++start) {
        const std::size_t i = static_cast<std::size_t>(start);
        double* row = &kernel.entries[i * n];

        for_each_tuple(n, N, [&](const std::vector<int>& cand) {
            double p_tuple = 1.0;
            for (std::size_t t = 0; t < N; ++t)
                p_tuple *= proposal_pmfs[t][static_cast<std::size_t>(cand[t])];
            if (p_tuple == 0.0) return;

            double sum_w = 0.0;
            std::vector<double> w(N);
            for (std::size_t t = 0; t < N; ++t) {
                w[t] = weight_of(static_cast<std::size_t>(cand[t]), t, i);
                sum_w += w[t];
            }
            if (sum_w == 0.0) {
                row[i] += p_tuple;
                return;
            }

            for (std::size_t j = 0; j < N; ++j) {
                if (w[j] == 0.0) continue;
                const double p_select = w[j] / sum_w;
                const auto z = static_cast<std::size_t>(cand[j]);

                double alpha;
                if (weights.kind == DiscreteWeightKind::liu_lambda) {
                    // State-dependent weights: the reverse side re-weights
                    // the unselected candidates from the proposed state.
                    double backward = weight_of(i, j, z);
                    for (std::size_t n = 0; n < N; ++n)
                        if (n != j)
                            backward += weight_of(static_cast<std::size_t>(cand[n]), n, z);
                    alpha = backward == 0.0 ? 1.0 : std::min(1.0, sum_w / backward);
                } else {
                    double w_prev;
                    bool blocked = false;
                    const double q_prev = weights.kind == DiscreteWeightKind::dm_mixture
                                              ? psi[i]
                                              : proposal_pmfs[j][i];
                    if (pi[i] == 0.0) {
                        w_prev = 0.0;
                    } else if (q_prev == 0.0) {
                        blocked = true;
                        w_prev = kInf;
                    } else {
                        w_prev = pi[i] / q_prev;
                    }
                    if (blocked) {
                        alpha = 0.0;
                    } else {
                        const double denom = sum_w - w[j] + w_prev;
                        alpha = denom == 0.0 ? 1.0 : std::min(1.0, sum_w / denom);
                        // DM weights are generic (not per-proposal importance)
                        // so the acceptance keeps the proposal/mixture factor
                        // from the generic-weight formula.
                        if (weights.kind == DiscreteWeightKind::dm_mixture)
                            alpha = std::min(
                                1.0, sum_w / denom * (proposal_pmfs[j][i] * psi[z]) /
                                         (psi[i] * proposal_pmfs[j][z]));
                    }
                }

                row[z] += p_tuple * p_select * alpha;
                row[i] += p_tuple * p_select * (1.0 - alpha);
            }
        });
    }
    return kernel;
}

TransitionMatrix mc_kernel_estimate(const DiscreteStepFn& step, const DiscreteSpace& space,
                                    int samples_per_state, std::uint64_t seed, int n_threads)
{
    space.validate();
    if (samples_per_state < 1)
        throw std::invalid_argument("mc kernel estimate: samples_per_state must be >= 1");
    const std::size_t n = space.size();
    const long long total = static_cast<long long>(n) * samples_per_state;

    TransitionMatrix counts(n);
#pragma omp parallel num_threads(n_threads)
    {
        TransitionMatrix local(n);
#pragma omp for schedule(static)
        for (long long flat = 0; flat < total; ++flat) {
            const std::size_t i = static_cast<std::size_t>(flat / samples_per_state);
            const std::uint64_t s = static_cast<std::uint64_t>(flat % samples_per_state);
            RngStream rng = RngStream::derive(seed, {static_cast<std::uint64_t>(i), s});
            const Point next = step(space.points[i], rng);
            local.at(i, static_cast<std::size_t>(space.index_of(next))) += 1.0;
        }
#pragma omp critical
        for (std::size_t e = 0; e < counts.entries.size(); ++e)
            counts.entries[e] += local.entries[e];
    }

    for (double& e : counts.entries) e /= static_cast<double>(samples_per_state);
    return counts;
}

StationarityReport check_stationarity(const TransitionMatrix& kernel,
                                      const std::vector<double>& pi, double tol)
{
    if (pi.size() != kernel.n) throw std::invalid_argument("stationarity check: size mismatch");
    double residual = 0.0;
    for (std::size_t j = 0; j < kernel.n; ++j) {
        double mass = 0.0;
        for (std::size_t i = 0; i < kernel.n; ++i) mass += pi[i] * kernel.at(i, j);
        residual += std::abs(mass - pi[j]);
    }
    return {residual, residual < tol};
}

DetailedBalanceReport check_detailed_balance(const TransitionMatrix& kernel,
                                             const std::vector<double>& pi, double tol)
{
    if (pi.size() != kernel.n) throw std::invalid_argument("detailed balance check: size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < kernel.n; ++i)
        for (std::size_t j = i + 1; j < kernel.n; ++j)
            worst = std::max(worst,
                             std::abs(pi[i] * kernel.at(i, j) - pi[j] * kernel.at(j, i)));
    return {worst, worst < tol};
}

}  // namespace mtm
