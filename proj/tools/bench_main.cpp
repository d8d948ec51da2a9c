// Timing comparison between the serial reference implementations and the
// OpenMP kernels: grid quadrature, exact kernel enumeration, experiment
// batches. Verifies agreement while timing.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mtm/experiments.hpp"
#include "mtm/oracle.hpp"
#include "mtm/sensor.hpp"

#if defined(_OPENMP)
#include <omp.h>
#else
static int omp_get_max_threads() { return 1; }
#endif

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn)
{
    const auto t0 = Clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool match)
{
    std::printf("%-36s %10.1f ms %10.1f ms %8.2fx %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, match ? "" : "MISMATCH");
}

bool close_enough(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Serial-reference vs OpenMP timing for the heavy kernels"};
    int threads = omp_get_max_threads();
    app.add_option("--threads", threads, "Worker threads for the parallel side");
    CLI11_PARSE(app, argc, argv);

    std::printf("%-36s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    {
        const mtm::SensorModel model = mtm::SensorModel::defaults();
        const mtm::TargetDensity target = model.make_target();
        const mtm::Box box{{-10.0, -10.0}, {10.0, 10.0}};
        const int res = 1200;
        mtm::Point serial_mean, parallel_mean;
        const double s = time_ms([&] { serial_mean = mtm::grid_posterior_mean_serial(target, box, res); });
        const double p = time_ms([&] { parallel_mean = mtm::grid_posterior_mean(target, box, res, threads); });
        report("grid posterior mean (res 1200)", s, p,
               close_enough(serial_mean[0], parallel_mean[0]) && close_enough(serial_mean[1], parallel_mean[1]));
    }

    {
        const std::vector<double> target{0.30, 0.10, 0.20, 0.25, 0.15};
        const std::vector<double> base{0.4, 0.2, 0.1, 0.1, 0.2};
        std::vector<std::vector<double>> rows(5, std::vector<double>(5));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t k = 0; k < 5; ++k) rows[i][(i + k) % 5] = base[k];
        const mtm::DiscreteSpace space = mtm::DiscreteSpace::line(target, rows);

        mtm::TransitionMatrix ks, kp;
        const double s = time_ms([&] { ks = mtm::exact_rw_mtm_kernel(space, 4, 1, 1e9); });
        const double p = time_ms([&] { kp = mtm::exact_rw_mtm_kernel(space, 4, threads, 1e9); });
        bool match = true;
        for (std::size_t e = 0; e < ks.entries.size(); ++e)
            match = match && ks.entries[e] == kp.entries[e];
        report("exact rw-mtm kernel (n=5, N=4)", s, p, match);
    }

    {
        mtm::ExperimentConfig config;
        config.schemes = {mtm::Scheme::rw_standard};
        config.sigma_grid = {1.0};
        config.n_grid = {100};
        config.runs = 24;
        config.chain_length = 400;
        config.start = mtm::StartMode::at({-6.0, -6.0});
        config.master_seed = 7;
        config.posterior_mean = mtm::Point{-0.753, -0.037};

        mtm::ExperimentSummary ss, sp;
        const double s = time_ms([&] { ss = mtm::run_experiment_serial(config); });
        const double p = time_ms([&] { sp = mtm::run_experiment(config, threads); });
        report("experiment cell (24 runs, T=400)", s, p,
               ss.cells.front().mean_tau == sp.cells.front().mean_tau);
    }

    return 0;
}
