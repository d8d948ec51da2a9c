#include "mtm/experiments.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "mtm/errors.hpp"
#include "mtm/logspace.hpp"

namespace mtm {

const char* scheme_name(Scheme s)
{
    switch (s) {
        case Scheme::rw_standard: return "rw-standard";
        case Scheme::rw_variable_n: return "rw-variable-n";
        case Scheme::imtm_standard: return "imtm-standard";
        case Scheme::imtm_dm: return "imtm-dm";
        case Scheme::imtm_mixture: return "imtm-mixture";
    }
    return "unknown";
}

Scheme scheme_from_name(const std::string& name)
{
    if (name == "rw-standard") return Scheme::rw_standard;
    if (name == "rw-variable-n") return Scheme::rw_variable_n;
    if (name == "imtm-standard") return Scheme::imtm_standard;
    if (name == "imtm-dm") return Scheme::imtm_dm;
    if (name == "imtm-mixture") return Scheme::imtm_mixture;
    throw config_error("unknown scheme: " + name);
}

namespace {

bool is_imtm(Scheme s)
{
    return s == Scheme::imtm_standard || s == Scheme::imtm_dm || s == Scheme::imtm_mixture;
}

}  // namespace

void ExperimentConfig::validate() const
{
    if (schemes.empty()) throw config_error("experiment: no schemes");
    if (sigma_grid.empty()) throw config_error("experiment: empty sigma grid");
    if (n_grid.empty()) throw config_error("experiment: empty n grid");
    for (double s : sigma_grid)
        if (!(s > 0.0)) throw config_error("experiment: sigma must be > 0");
    if (runs < 1) throw config_error("experiment: runs must be >= 1");
    if (chain_length < 1) throw config_error("experiment: chain length must be >= 1");
    model.validate();
    for (Scheme s : schemes) {
        if (is_imtm(s)) {
            if (imtm_means.empty())
                throw config_error("experiment: imtm schemes need proposal means");
            for (const Point& m : imtm_means)
                if (m.size() != 2) throw config_error("experiment: imtm means must be 2-d");
            for (int p : n_grid)
                if (p % static_cast<int>(imtm_means.size()) != 0)
                    throw config_error(
                        "experiment: imtm tries must be a multiple of the proposal count");
        }
        for (int n : n_grid)
            if (n < 1) throw config_error("experiment: tries must be >= 1");
    }
    if (start.uniform) {
        if (start.box.lo.size() != 2 || start.box.hi.size() != 2 ||
            !(start.box.lo[0] < start.box.hi[0]) || !(start.box.lo[1] < start.box.hi[1]))
            throw config_error("experiment: bad start box");
    } else if (start.fixed.size() != 2) {
        throw config_error("experiment: start point must be 2-d");
    }
}

SamplerConfig make_scheme_sampler(const ExperimentConfig& config, Scheme scheme, double sigma,
                                  int n_tilde)
{
    SamplerConfig sc;
    sc.chain_length = config.chain_length;
    const Covariance cov = Covariance::isotropic(2, sigma * sigma);

    switch (scheme) {
        case Scheme::rw_standard:
            sc.variant = SamplerVariant::rw_mtm;
            sc.proposals = {Proposal::gaussian_random_walk(cov)};
            sc.tries = TriesSchedule::fixed(n_tilde);
            break;
        case Scheme::rw_variable_n:
            sc.variant = SamplerVariant::rw_mtm;
            sc.proposals = {Proposal::gaussian_random_walk(cov)};
            // {1, N~, 2N~-1} keeps the average number of tries at N~.
            sc.tries = TriesSchedule::variable({1, n_tilde, 2 * n_tilde - 1});
            break;
        case Scheme::imtm_standard:
        case Scheme::imtm_dm:
        case Scheme::imtm_mixture: {
            sc.variant = SamplerVariant::imtm;
            for (const Point& mean : config.imtm_means)
                sc.proposals.push_back(Proposal::gaussian_independent(mean, cov));
            sc.tries_per_proposal = n_tilde / static_cast<int>(config.imtm_means.size());
            if (scheme == Scheme::imtm_standard) {
                sc.weights = WeightSpec::importance();
                sc.sampling_mode = ImtmSamplingMode::per_proposal;
            } else if (scheme == Scheme::imtm_dm) {
                sc.weights = WeightSpec::dm_mixture();
                sc.sampling_mode = ImtmSamplingMode::per_proposal;
            } else {
                sc.weights = WeightSpec::dm_mixture();
                sc.sampling_mode = ImtmSamplingMode::mixture;
            }
            break;
        }
    }
    return sc;
}

std::uint64_t run_seed(std::uint64_t master_seed, Scheme scheme, double sigma, int n_tilde,
                       int run_index)
{
    // Keyed by cell values rather than grid indices so permuting the grid
    // leaves every cell's runs untouched.
    return mix_seed(master_seed,
                    {static_cast<std::uint64_t>(scheme), std::bit_cast<std::uint64_t>(sigma),
                     static_cast<std::uint64_t>(n_tilde), static_cast<std::uint64_t>(run_index)});
}

int escape_time(const ChainTrace& trace, const Point& x0, const Point& mu)
{
    if (trace.states.empty()) throw std::invalid_argument("escape_time: empty trace");
    const int T = static_cast<int>(trace.states.size()) - 1;
    for (int t = 1; t <= T; ++t) {
        const Point& x = trace.states[static_cast<std::size_t>(t)];
        if (squared_distance(x, x0) > squared_distance(x, mu)) return t;
    }
    return T;
}

namespace {

Point chain_mean(const ChainTrace& trace)
{
    Point mean(trace.states.front().size(), 0.0);
    for (const Point& x : trace.states)
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += x[i];
    for (double& m : mean) m /= static_cast<double>(trace.states.size());
    return mean;
}

struct RunOutcome {
    bool ok = false;
    int tau = 0;
    double sq_error = 0.0;
    std::string error;
};

struct Cell {
    Scheme scheme;
    double sigma;
    int n_tilde;
};

RunOutcome execute_run(const ExperimentConfig& config, const TargetDensity& target,
                       const Cell& cell, const Point& mu, int run_index)
{
    RunOutcome out;
    try {
        RngStream rng(run_seed(config.master_seed, cell.scheme, cell.sigma, cell.n_tilde,
                               run_index));
        Point x0 = config.start.fixed;
        if (config.start.uniform) {
            x0.resize(2);
            for (std::size_t i = 0; i < 2; ++i) {
                const double u = rng.uniform01();
                x0[i] = config.start.box.lo[i] +
                        u * (config.start.box.hi[i] - config.start.box.lo[i]);
            }
        }
        const SamplerConfig sc = make_scheme_sampler(config, cell.scheme, cell.sigma,
                                                     cell.n_tilde);
        const ChainTrace trace = run_chain(target, sc, x0, rng);
        out.tau = escape_time(trace, x0, mu);
        out.sq_error = squared_distance(chain_mean(trace), mu);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

CellSummary summarize(const Cell& cell, const ExperimentConfig& config,
                      std::span<const RunOutcome> outcomes)
{
    CellSummary s;
    s.scheme = cell.scheme;
    s.sigma = cell.sigma;
    s.n_tilde = cell.n_tilde;

    double tau_sum = 0.0, tau_sq = 0.0, err_sum = 0.0, err_sq = 0.0;
    for (const RunOutcome& r : outcomes) {
        if (!r.ok) {
            s.run_errors.push_back(r.error);
            continue;
        }
        ++s.runs_completed;
        tau_sum += r.tau;
        tau_sq += static_cast<double>(r.tau) * r.tau;
        err_sum += r.sq_error;
        err_sq += r.sq_error * r.sq_error;
    }
    if (s.runs_completed > 0) {
        const double n = s.runs_completed;
        s.mean_tau = tau_sum / n;
        const double tau_var = std::max(0.0, tau_sq / n - s.mean_tau * s.mean_tau);
        s.tau_std_error = std::sqrt(tau_var / n);
        if (config.start.uniform) {
            const double mse = err_sum / n;
            const double mse_var = std::max(0.0, err_sq / n - mse * mse);
            s.mse = mse;
            s.mse_std_error = std::sqrt(mse_var / n);
        }
    }
    return s;
}

std::vector<Cell> grid_cells(const ExperimentConfig& config)
{
    std::vector<Cell> cells;
    for (Scheme scheme : config.schemes)
        for (double sigma : config.sigma_grid)
            for (int n : config.n_grid) cells.push_back({scheme, sigma, n});
    return cells;
}

Point resolve_mu(const ExperimentConfig& config)
{
    if (config.posterior_mean) return *config.posterior_mean;
    const Box box{{-10.0, -10.0}, {10.0, 10.0}};
    return grid_posterior_mean(config.model, box, 400);
}

}  // namespace

double mse_estimate(std::span<const ChainTrace> traces, const Point& mu_true)
{
    if (traces.empty()) throw std::invalid_argument("mse_estimate: no traces");
    double sum = 0.0;
    for (const ChainTrace& t : traces) sum += squared_distance(chain_mean(t), mu_true);
    return sum / static_cast<double>(traces.size());
}

ExperimentSummary run_experiment(const ExperimentConfig& config, int n_threads)
{
    config.validate();
    const TargetDensity target = config.model.make_target();
    const Point mu = resolve_mu(config);
    const std::vector<Cell> cells = grid_cells(config);

    // Flat (cell, run) job list; every job owns a derived stream, so the
    // schedule cannot influence results.
    const long long total = static_cast<long long>(cells.size()) * config.runs;
    std::vector<RunOutcome> outcomes(static_cast<std::size_t>(total));

#pragma omp parallel for num_threads(n_threads) schedule(dynamic)
    for (long long flat = 0; flat < total; ++flat) {
        const std::size_t cell_idx = static_cast<std::size_t>(flat / config.runs);
        const int run_idx = static_cast<int>(flat % config.runs);
        outcomes[static_cast<std::size_t>(flat)] =
            execute_run(config, target, cells[cell_idx], mu, run_idx);
    }

    ExperimentSummary summary;
    summary.posterior_mean = mu;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::span<const RunOutcome> slice(outcomes.data() + c * config.runs,
                                                static_cast<std::size_t>(config.runs));
        summary.cells.push_back(summarize(cells[c], config, slice));
    }
    return summary;
}

ExperimentSummary run_experiment_serial(const ExperimentConfig& config)
{
    config.validate();
    const TargetDensity target = config.model.make_target();
    const Point mu = resolve_mu(config);

    ExperimentSummary summary;
    summary.posterior_mean = mu;
    for (const Cell& cell : grid_cells(config)) {
        std::vector<RunOutcome> outcomes;
        outcomes.reserve(static_cast<std::size_t>(config.runs));
        for (int r = 0; r < config.runs; ++r)
            outcomes.push_back(execute_run(config, target, cell, mu, r));
        summary.cells.push_back(summarize(cell, config, outcomes));
    }
    return summary;
}

}  // namespace mtm
