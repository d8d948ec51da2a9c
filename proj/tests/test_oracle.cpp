#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtm/errors.hpp"
#include "mtm/logspace.hpp"
#include "mtm/oracle.hpp"
#include "mtm/samplers.hpp"

using namespace mtm;

namespace {

// Five states, strictly positive target, symmetric circulant proposal.
DiscreteSpace five_state_space()
{
    const std::vector<double> target{0.34, 0.08, 0.20, 0.26, 0.12};
    const std::vector<double> base{0.4, 0.2, 0.1, 0.1, 0.2};
    std::vector<std::vector<double>> rows(5, std::vector<double>(5));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 5; ++k) rows[i][(i + k) % 5] = base[k];
    return DiscreteSpace::line(target, rows);
}

std::vector<std::vector<double>> two_proposals()
{
    return {{0.40, 0.30, 0.10, 0.10, 0.10}, {0.05, 0.15, 0.30, 0.30, 0.20}};
}

// Textbook Metropolis-Hastings kernel for a conditional proposal,
// written directly from the acceptance formula.
TransitionMatrix metropolis_hastings_kernel(const DiscreteSpace& space)
{
    const std::size_t n = space.size();
    TransitionMatrix k(n);
    for (std::size_t i = 0; i < n; ++i) {
        double stay = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double q_ij = space.proposal_pmf[i][j];
            const double q_ji = space.proposal_pmf[j][i];
            double alpha = 1.0;
            if (space.target_pmf[i] * q_ij > 0.0)
                alpha = std::min(1.0, space.target_pmf[j] * q_ji /
                                          (space.target_pmf[i] * q_ij));
            k.at(i, j) = q_ij * alpha;
            stay += q_ij * (1.0 - alpha);
        }
        k.at(i, i) = space.proposal_pmf[i][i] + stay;
    }
    return k;
}

// Independence MH kernel for pmf proposal q and importance weights.
TransitionMatrix independence_mh_kernel(const DiscreteSpace& space,
                                        const std::vector<double>& q)
{
    const std::size_t n = space.size();
    TransitionMatrix k(n);
    for (std::size_t i = 0; i < n; ++i) {
        double stay = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double wi = space.target_pmf[i] / q[i];
            const double wj = space.target_pmf[j] / q[j];
            const double alpha = wi > 0.0 ? std::min(1.0, wj / wi) : 1.0;
            k.at(i, j) = q[j] * alpha;
            stay += q[j] * (1.0 - alpha);
        }
        k.at(i, i) = q[i] + stay;
    }
    return k;
}

double max_entry_diff(const TransitionMatrix& a, const TransitionMatrix& b)
{
    double worst = 0.0;
    for (std::size_t e = 0; e < a.entries.size(); ++e)
        worst = std::max(worst, std::abs(a.entries[e] - b.entries[e]));
    return worst;
}

}  // namespace

TEST_CASE("exact kernels are row-stochastic")
{
    const DiscreteSpace space = five_state_space();
    for (int n : {1, 2, 3}) {
        const TransitionMatrix k = exact_rw_mtm_kernel(space, n);
        for (double s : k.row_sums()) CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("one-try kernel equals the textbook Metropolis kernel")
{
    const DiscreteSpace space = five_state_space();
    const TransitionMatrix got = exact_rw_mtm_kernel(space, 1);
    const TransitionMatrix want = metropolis_hastings_kernel(space);
    CHECK(max_entry_diff(got, want) < 1e-12);
}

TEST_CASE("uniform target with uniform proposal moves like the proposal")
{
    // Every weight equals 1, so alpha is identically 1 and the kernel is
    // the proposal itself.
    const std::vector<double> uniform{0.5, 0.5};
    const std::vector<std::vector<double>> rows{{0.5, 0.5}, {0.5, 0.5}};
    const DiscreteSpace space = DiscreteSpace::line(uniform, rows);
    const TransitionMatrix k = exact_rw_mtm_kernel(space, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(std::abs(k.at(i, j) - rows[i][j]) < 1e-12);
}

TEST_CASE("exact rw-mtm kernels are stationary and in detailed balance")
{
    const DiscreteSpace space = five_state_space();
    for (int n : {1, 2, 3}) {
        const TransitionMatrix k = exact_rw_mtm_kernel(space, n);
        CHECK(check_stationarity(k, space.target_pmf, 1e-12).pass);
        CHECK(check_detailed_balance(k, space.target_pmf, 1e-12).pass);
    }
}

TEST_CASE("exact kernel rows are identical under any thread count")
{
    const DiscreteSpace space = five_state_space();
    const TransitionMatrix serial = exact_rw_mtm_kernel(space, 3, 1);
    const TransitionMatrix parallel = exact_rw_mtm_kernel(space, 3, 4);
    CHECK(serial.entries == parallel.entries);
}

TEST_CASE("imtm kernel with one proposal equals independence MH")
{
    const DiscreteSpace space = five_state_space();
    const std::vector<double> q{0.25, 0.15, 0.20, 0.30, 0.10};
    const TransitionMatrix got =
        exact_imtm_kernel(space, {q}, {DiscreteWeightKind::importance, nullptr});
    const TransitionMatrix want = independence_mh_kernel(space, q);
    CHECK(max_entry_diff(got, want) < 1e-12);
}

TEST_CASE("generic weights recovering importance weights give the same kernel")
{
    const DiscreteSpace space = five_state_space();
    const auto pmfs = two_proposals();
    const TransitionMatrix imp =
        exact_imtm_kernel(space, pmfs, {DiscreteWeightKind::importance, nullptr});

    DiscreteWeightSpec liu;
    liu.kind = DiscreteWeightKind::liu_lambda;
    liu.lambda = [pmfs](std::size_t k, int a, int b) {
        return 1.0 / (pmfs[k][static_cast<std::size_t>(a)] *
                      pmfs[k][static_cast<std::size_t>(b)]);
    };
    const TransitionMatrix gen = exact_imtm_kernel(space, pmfs, liu);
    CHECK(max_entry_diff(imp, gen) < 1e-12);
}

TEST_CASE("imtm kernels are stationary for every weight family")
{
    const DiscreteSpace space = five_state_space();
    const auto pmfs = two_proposals();

    SUBCASE("importance")
    {
        const TransitionMatrix k =
            exact_imtm_kernel(space, pmfs, {DiscreteWeightKind::importance, nullptr});
        CHECK(check_stationarity(k, space.target_pmf, 1e-12).pass);
        for (double s : k.row_sums()) CHECK(std::abs(s - 1.0) < 1e-12);
    }
    SUBCASE("deterministic mixture")
    {
        const TransitionMatrix k =
            exact_imtm_kernel(space, pmfs, {DiscreteWeightKind::dm_mixture, nullptr});
        CHECK(check_stationarity(k, space.target_pmf, 1e-12).pass);
        CHECK(check_detailed_balance(k, space.target_pmf, 1e-12).pass);
    }
    SUBCASE("lambda-generic")
    {
        DiscreteWeightSpec liu;
        liu.kind = DiscreteWeightKind::liu_lambda;
        liu.lambda = [](std::size_t, int a, int b) { return 1.0 / (1.0 + std::abs(a - b)); };
        const TransitionMatrix k = exact_imtm_kernel(space, pmfs, liu);
        CHECK(check_stationarity(k, space.target_pmf, 1e-12).pass);
    }
}

TEST_CASE("kernel mixtures of stationary kernels stay stationary")
{
    const DiscreteSpace space = five_state_space();
    const TransitionMatrix k1 = exact_rw_mtm_kernel(space, 1);
    const TransitionMatrix k2 = exact_rw_mtm_kernel(space, 2);
    const TransitionMatrix mix = uniform_kernel_mixture({k1, k2});
    CHECK(check_stationarity(mix, space.target_pmf, 1e-12).pass);
    CHECK(check_detailed_balance(mix, space.target_pmf, 1e-12).pass);
}

TEST_CASE("monte carlo estimate of a deterministic step gives indicator rows")
{
    const DiscreteSpace space = five_state_space();
    const DiscreteStepFn step = [&space](const Point&, RngStream&) { return space.points[2]; };
    const TransitionMatrix k = mc_kernel_estimate(step, space, 100, 1);
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t j = 0; j < space.size(); ++j)
            CHECK(k.at(i, j) == (j == 2 ? 1.0 : 0.0));
}

TEST_CASE("production rw-mtm step matches the enumerated kernel")
{
    const DiscreteSpace space = five_state_space();
    const TargetDensity target = space.make_target();
    const Proposal proposal = space.make_conditional_proposal();

    const DiscreteStepFn step = [&](const Point& x, RngStream& rng) {
        return rw_mtm_step(x, target, proposal, 2, rng).state;
    };
    const int samples = 100000;
    const TransitionMatrix est = mc_kernel_estimate(step, space, samples, 42, 4);
    const TransitionMatrix exact = exact_rw_mtm_kernel(space, 2);
    const double bound = 4.0 * std::sqrt(0.25 / samples);
    CHECK(max_entry_diff(est, exact) < bound);
}

TEST_CASE("production imtm step with DM weights matches the enumerated kernel")
{
    const DiscreteSpace space = five_state_space();
    const TargetDensity target = space.make_target();
    const auto pmfs = two_proposals();

    SamplerConfig config;
    config.variant = SamplerVariant::imtm;
    config.proposals = {space.make_independent_proposal(pmfs[0]),
                        space.make_independent_proposal(pmfs[1])};
    config.weights = WeightSpec::dm_mixture();

    const DiscreteStepFn step = [&](const Point& x, RngStream& rng) {
        return imtm_step(x, target, config, rng).state;
    };
    const int samples = 100000;
    const TransitionMatrix est = mc_kernel_estimate(step, space, samples, 43, 4);
    const TransitionMatrix exact =
        exact_imtm_kernel(space, pmfs, {DiscreteWeightKind::dm_mixture, nullptr});
    const double bound = 4.0 * std::sqrt(0.25 / samples);
    CHECK(max_entry_diff(est, exact) < bound);
    CHECK(check_stationarity(est, space.target_pmf, space.size() * bound).pass);
}

TEST_CASE("production imtm step with lambda weights matches the enumerated kernel")
{
    const DiscreteSpace space = five_state_space();
    const TargetDensity target = space.make_target();
    const auto pmfs = two_proposals();

    SamplerConfig config;
    config.variant = SamplerVariant::imtm;
    config.proposals = {space.make_independent_proposal(pmfs[0]),
                        space.make_independent_proposal(pmfs[1])};
    // Symmetric state-dependent lambda on the embedded line coordinates.
    config.weights = WeightSpec::liu([](const Point& a, const Point& b) {
        return -std::log(1.0 + std::abs(a[0] - b[0]));
    });

    const DiscreteStepFn step = [&](const Point& x, RngStream& rng) {
        return imtm_step(x, target, config, rng).state;
    };
    const int samples = 100000;
    const TransitionMatrix est = mc_kernel_estimate(step, space, samples, 45, 4);

    DiscreteWeightSpec liu;
    liu.kind = DiscreteWeightKind::liu_lambda;
    liu.lambda = [](std::size_t, int a, int b) { return 1.0 / (1.0 + std::abs(a - b)); };
    const TransitionMatrix exact = exact_imtm_kernel(space, pmfs, liu);
    CHECK(max_entry_diff(est, exact) < 4.0 * std::sqrt(0.25 / samples));
    CHECK(check_stationarity(exact, space.target_pmf, 1e-12).pass);
}

TEST_CASE("k tries per proposal behave like duplicated proposals")
{
    const DiscreteSpace space = five_state_space();
    const TargetDensity target = space.make_target();
    const auto pmfs = two_proposals();

    SamplerConfig config;
    config.variant = SamplerVariant::imtm;
    config.proposals = {space.make_independent_proposal(pmfs[0]),
                        space.make_independent_proposal(pmfs[1])};
    config.tries_per_proposal = 2;

    const DiscreteStepFn step = [&](const Point& x, RngStream& rng) {
        return imtm_step(x, target, config, rng).state;
    };
    const int samples = 100000;
    const TransitionMatrix est = mc_kernel_estimate(step, space, samples, 46, 4);

    // P = kN tries with block order is the I-MTM whose proposal list
    // repeats each pmf k times.
    const std::vector<std::vector<double>> doubled{pmfs[0], pmfs[0], pmfs[1], pmfs[1]};
    const TransitionMatrix exact =
        exact_imtm_kernel(space, doubled, {DiscreteWeightKind::importance, nullptr});
    CHECK(max_entry_diff(est, exact) < 4.0 * std::sqrt(0.25 / samples));
    CHECK(check_stationarity(exact, space.target_pmf, 1e-12).pass);
}

TEST_CASE("variable-try production step matches the averaged exact kernels")
{
    const DiscreteSpace space = five_state_space();
    const TargetDensity target = space.make_target();
    const Proposal proposal = space.make_conditional_proposal();
    const std::vector<int> schedule{1, 2};

    const DiscreteStepFn step = [&](const Point& x, RngStream& rng) {
        return variable_n_step(x, target, proposal, schedule, rng).state;
    };
    const int samples = 100000;
    const TransitionMatrix est = mc_kernel_estimate(step, space, samples, 44, 4);
    const TransitionMatrix exact = uniform_kernel_mixture(
        {exact_rw_mtm_kernel(space, 1), exact_rw_mtm_kernel(space, 2)});
    CHECK(max_entry_diff(est, exact) < 4.0 * std::sqrt(0.25 / samples));
}

TEST_CASE("stationarity check on trivial kernels")
{
    const std::vector<double> pi{0.2, 0.5, 0.3};
    SUBCASE("identity kernel")
    {
        TransitionMatrix k(3);
        for (std::size_t i = 0; i < 3; ++i) k.at(i, i) = 1.0;
        const auto rep = check_stationarity(k, pi, 1e-12);
        CHECK(rep.l1_residual == 0.0);
        CHECK(rep.pass);
    }
    SUBCASE("perfect sampler rows")
    {
        TransitionMatrix k(3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) k.at(i, j) = pi[j];
        CHECK(check_stationarity(k, pi, 1e-12).l1_residual == 0.0);
    }
}

TEST_CASE("detailed balance check and its negative control")
{
    SUBCASE("symmetric kernel, uniform target")
    {
        TransitionMatrix k(3);
        const double rows[3][3] = {{0.5, 0.3, 0.2}, {0.3, 0.4, 0.3}, {0.2, 0.3, 0.5}};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) k.at(i, j) = rows[i][j];
        const std::vector<double> pi(3, 1.0 / 3.0);
        const auto rep = check_detailed_balance(k, pi, 1e-12);
        CHECK(rep.max_violation == 0.0);
        CHECK(rep.pass);
    }
    SUBCASE("a perturbed exact kernel fails both checks")
    {
        const DiscreteSpace space = five_state_space();
        TransitionMatrix k = exact_rw_mtm_kernel(space, 2);
        k.at(0, 1) += 1e-3;
        double sum = 0.0;
        for (std::size_t j = 0; j < k.n; ++j) sum += k.at(0, j);
        for (std::size_t j = 0; j < k.n; ++j) k.at(0, j) /= sum;
        CHECK(!check_detailed_balance(k, space.target_pmf, 1e-12).pass);
        CHECK(!check_stationarity(k, space.target_pmf, 1e-12).pass);
    }
}

TEST_CASE("detailed balance implies stationarity at n times the tolerance")
{
    const DiscreteSpace space = five_state_space();
    for (int n : {1, 2}) {
        const TransitionMatrix k = exact_rw_mtm_kernel(space, n);
        const double db = check_detailed_balance(k, space.target_pmf, 1e-12).max_violation;
        const double st = check_stationarity(k, space.target_pmf, 1e-12).l1_residual;
        CHECK(st <= static_cast<double>(space.size()) * std::max(db, 1e-300) + 1e-13);
    }
}

TEST_CASE("enumeration guard rejects oversized requests")
{
    const DiscreteSpace space = five_state_space();
    CHECK_THROWS_AS(exact_rw_mtm_kernel(space, 8), size_error);
    CHECK_THROWS_AS(
        exact_imtm_kernel(space, std::vector<std::vector<double>>(12, space.target_pmf),
                          {DiscreteWeightKind::importance, nullptr}),
        size_error);
}

TEST_CASE("generic weights demand a strictly positive target")
{
    std::vector<double> target{0.5, 0.5, 0.0, 0.0, 0.0};
    const std::vector<double> base{0.4, 0.2, 0.1, 0.1, 0.2};
    std::vector<std::vector<double>> rows(5, std::vector<double>(5));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 5; ++k) rows[i][(i + k) % 5] = base[k];
    const DiscreteSpace space = DiscreteSpace::line(target, rows);
    DiscreteWeightSpec liu;
    liu.kind = DiscreteWeightKind::liu_lambda;
    liu.lambda = [](std::size_t, int, int) { return 1.0; };
    CHECK_THROWS_AS(exact_imtm_kernel(space, two_proposals(), liu), config_error);
}

TEST_CASE("monte carlo estimates are thread-count independent")
{
    const DiscreteSpace space = five_state_space();
    const TargetDensity target = space.make_target();
    const Proposal proposal = space.make_conditional_proposal();
    const DiscreteStepFn step = [&](const Point& x, RngStream& rng) {
        return rw_mtm_step(x, target, proposal, 2, rng).state;
    };
    const TransitionMatrix a = mc_kernel_estimate(step, space, 2000, 7, 1);
    const TransitionMatrix b = mc_kernel_estimate(step, space, 2000, 7, 4);
    CHECK(a.entries == b.entries);
}
