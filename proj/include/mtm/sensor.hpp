#ifndef MTM_SENSOR_HPP
#define MTM_SENSOR_HPP

#include <vector>

#include "mtm/densities.hpp"

namespace mtm {

enum class LogBase { natural, base10 };

// Range-measurement model for localizing a 2-d target: each sensor j
// reports attenuation r_j = 10 * log(|x - h_j| / d0) + noise, noise iid
// Gaussian. The posterior under a flat prior is the product of the six
// Gaussian likelihood factors.
struct SensorModel {
    std::vector<Point> anchors;
    std::vector<double> observations;
    double noise_variance = 5.0;
    double reference_distance = 0.3;
    LogBase log_base = LogBase::natural;

    // Six-sensor benchmark configuration.
    static SensorModel defaults();

    void validate() const;
    TargetDensity make_target() const;

    // Noise-free observation at x for sensor j; -inf when x sits on the
    // anchor itself.
    double mean_observation(const Point& x, std::size_t j) const;
};

// Unnormalized log posterior; -inf exactly on the anchor points.
double sensor_log_target(const Point& x, const SensorModel& model);

struct Box {
    Point lo;
    Point hi;
};

// Posterior mean by midpoint-rule quadrature on a resolution^2 grid over
// the box, accumulated in log space. The parallel version splits by grid
// row and combines per-row partial sums in row order, so the result is
// bit-identical for any thread count.
Point grid_posterior_mean(const TargetDensity& target, const Box& box, int resolution,
                          int n_threads = 1);
Point grid_posterior_mean(const SensorModel& model, const Box& box, int resolution,
                          int n_threads = 1);

// Plain single-loop reference used to cross-check the parallel kernel.
Point grid_posterior_mean_serial(const TargetDensity& target, const Box& box, int resolution);

}  // namespace mtm

#endif  // MTM_SENSOR_HPP
