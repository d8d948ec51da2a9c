#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mtm/config.hpp"
#include "mtm/csv.hpp"
#include "mtm/errors.hpp"
#include "mtm/experiments.hpp"
#include "mtm/oracle.hpp"
#include "mtm/samplers.hpp"
#include "mtm/sensor.hpp"

#if defined(_OPENMP)
#include <omp.h>
#else
static int omp_get_max_threads() { return 1; }
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_manifest(const std::string& output_path, const std::string& command,
                    const mtm::Json& resolved, std::uint64_t seed, double duration)
{
    const mtm::Json manifest = mtm::make_manifest(command, resolved, seed, duration);
    mtm::write_text_file(output_path + ".manifest.json", manifest.dump(2) + "\n");
}

int cmd_run(const std::string& config_path, const std::string& output_path,
            std::optional<std::uint64_t> seed_override)
{
    const auto start = Clock::now();
    mtm::RunSpec spec = mtm::parse_run_spec(mtm::load_json_file(config_path));
    if (seed_override) {
        spec.sampler.seed = *seed_override;
        spec.resolved["sampler"]["seed"] = *seed_override;
    }

    const mtm::ChainTrace trace = mtm::run_chain(spec.target, spec.sampler, spec.x0);
    mtm::write_text_file(output_path, mtm::trace_to_csv(trace));
    write_manifest(output_path, "run", spec.resolved, spec.sampler.seed, seconds_since(start));
    return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& output_path,
                   std::optional<std::uint64_t> seed_override, int threads)
{
    const auto start = Clock::now();
    mtm::ExperimentSpec spec = mtm::parse_experiment_spec(mtm::load_json_file(config_path));
    if (seed_override) {
        spec.config.master_seed = *seed_override;
        spec.resolved["experiment"]["master_seed"] = *seed_override;
    }

    const mtm::ExperimentSummary summary = mtm::run_experiment(spec.config, threads);
    mtm::write_text_file(output_path, mtm::summary_to_csv(summary));
    write_manifest(output_path, "experiment", spec.resolved, spec.config.master_seed,
                   seconds_since(start));

    for (const mtm::CellSummary& cell : summary.cells)
        for (const std::string& err : cell.run_errors)
            std::cerr << "warning: " << mtm::scheme_name(cell.scheme) << " sigma=" << cell.sigma
                      << " n=" << cell.n_tilde << ": run failed: " << err << "\n";
    return 0;
}

mtm::TransitionMatrix kernel_for_case(const mtm::OracleSpec& spec, const mtm::OracleCase& c)
{
    using Variant = mtm::OracleCase::Variant;
    mtm::TransitionMatrix kernel;
    switch (c.variant) {
        case Variant::rw:
            kernel = mtm::exact_rw_mtm_kernel(spec.space, c.tries, 1, spec.term_guard);
            break;
        case Variant::rw_mixture: {
            std::vector<mtm::TransitionMatrix> parts;
            for (int n : c.schedule)
                parts.push_back(mtm::exact_rw_mtm_kernel(spec.space, n, 1, spec.term_guard));
            kernel = mtm::uniform_kernel_mixture(parts);
            break;
        }
        case Variant::imtm: {
            mtm::DiscreteWeightSpec w;
            w.kind = c.weights;
            if (w.kind == mtm::DiscreteWeightKind::liu_lambda)
                w.lambda = [](std::size_t, int a, int b) {
                    return 1.0 / (1.0 + std::abs(a - b));
                };
            kernel = mtm::exact_imtm_kernel(spec.space, c.proposal_pmfs, w, 1, spec.term_guard);
            break;
        }
    }
    if (c.perturb != 0.0) {
        // Negative control: damage one transition and renormalize the row.
        kernel.at(0, 1) += c.perturb;
        double sum = 0.0;
        for (std::size_t j = 0; j < kernel.n; ++j) sum += kernel.at(0, j);
        for (std::size_t j = 0; j < kernel.n; ++j) kernel.at(0, j) /= sum;
    }
    return kernel;
}

int cmd_oracle_check(const std::string& config_path)
{
    const mtm::OracleSpec spec = mtm::parse_oracle_spec(mtm::load_json_file(config_path));
    bool all_pass = true;
    for (const mtm::OracleCase& c : spec.cases) {
        const mtm::TransitionMatrix kernel = kernel_for_case(spec, c);
        const auto st = mtm::check_stationarity(kernel, spec.space.target_pmf, spec.tolerance);
        const auto db =
            mtm::check_detailed_balance(kernel, spec.space.target_pmf, spec.tolerance);
        const bool pass = st.pass && db.pass;
        all_pass = all_pass && pass;
        std::printf("[%s] %s: stationarity L1 = %.3e, detailed balance max = %.3e (tol %.1e)\n",
                    pass ? "ok" : "FAIL", c.label.c_str(), st.l1_residual, db.max_violation,
                    spec.tolerance);
    }
    return all_pass ? 0 : 1;
}

int cmd_grid_mean(const std::string& config_path)
{
    const mtm::GridSpec spec = mtm::parse_grid_spec(mtm::load_json_file(config_path));
    const mtm::Point mean = mtm::grid_posterior_mean(spec.model, spec.box, spec.resolution);
    std::printf("grid posterior mean: (%.6f, %.6f) at resolution %d over [%g,%g]x[%g,%g]\n",
                mean[0], mean[1], spec.resolution, spec.box.lo[0], spec.box.hi[0],
                spec.box.lo[1], spec.box.hi[1]);
    if (spec.reference) {
        const mtm::Point& ref = *spec.reference;
        std::printf("reference: (%.6f, %.6f), delta = (%.6f, %.6f)\n", ref[0], ref[1],
                    mean[0] - ref[0], mean[1] - ref[1]);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multiple-try Metropolis sampler and benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_path;
    std::optional<std::uint64_t> seed;
    int threads = omp_get_max_threads();

    CLI::App* run = app.add_subcommand("run", "Run a single chain and write its trace CSV");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--output", output_path, "Trace CSV path")->required();
    run->add_option("--seed", seed, "Override the sampler seed");

    CLI::App* experiment =
        app.add_subcommand("experiment", "Run a batch experiment grid and write a summary CSV");
    experiment->add_option("--config", config_path, "JSON config file")->required();
    experiment->add_option("--output", output_path, "Summary CSV path")->required();
    experiment->add_option("--seed", seed, "Override the master seed");
    experiment->add_option("--threads", threads, "Worker threads for experiment cells");

    CLI::App* oracle = app.add_subcommand(
        "oracle-check", "Verify exact kernels against stationarity and detailed balance");
    oracle->add_option("--config", config_path, "JSON config file")->required();

    CLI::App* grid =
        app.add_subcommand("grid-mean", "Compute the posterior mean by grid quadrature");
    grid->add_option("--config", config_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, output_path, seed);
        if (experiment->parsed()) return cmd_experiment(config_path, output_path, seed, threads);
        if (oracle->parsed()) return cmd_oracle_check(config_path);
        if (grid->parsed()) return cmd_grid_mean(config_path);
    } catch (const mtm::config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const mtm::size_error& e) {
        std::cerr << "size guard: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
