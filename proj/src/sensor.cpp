#include "mtm/sensor.hpp"

#include <cmath>
#include <stdexcept>

#include "mtm/errors.hpp"
#include "mtm/logspace.hpp"

namespace mtm {

SensorModel SensorModel::defaults()
{
    SensorModel m;
    m.anchors = {{-5.0, 1.0}, {-2.0, 6.0}, {0.0, 0.0}, {5.0, -6.0}, {6.0, 4.0}, {-4.0, -4.0}};
    m.observations = {26.0, 26.5, 25.0, 28.0, 28.0, 25.3};
    return m;
}

void SensorModel::validate() const
{
    if (anchors.empty()) throw config_error("sensor model: no anchors");
    if (anchors.size() != observations.size())
        throw config_error("sensor model: anchors/observations size mismatch");
    for (const Point& h : anchors)
        if (h.size() != 2) throw config_error("sensor model: anchors must be 2-d");
    for (std::size_t i = 0; i < anchors.size(); ++i)
        for (std::size_t j = i + 1; j < anchors.size(); ++j)
            if (anchors[i] == anchors[j]) throw config_error("sensor model: duplicate anchors");
    if (!(noise_variance > 0.0)) throw config_error("sensor model: noise variance must be > 0");
    if (!(reference_distance > 0.0))
        throw config_error("sensor model: reference distance must be > 0");
}

double SensorModel::mean_observation(const Point& x, std::size_t j) const
{
    const double d = distance(x, anchors[j]);
    if (d == 0.0) return kNegInf;
    const double ratio = d / reference_distance;
    return 10.0 * (log_base == LogBase::natural ? std::log(ratio) : std::log10(ratio));
}

double sensor_log_target(const Point& x, const SensorModel& model)
{
    double log_p = 0.0;
    const double two_var = 2.0 * model.noise_variance;
    for (std::size_t j = 0; j < model.anchors.size(); ++j) {
        const double mu = model.mean_observation(x, j);
        if (mu == kNegInf) return kNegInf;
        const double resid = model.observations[j] - mu;
        log_p -= resid * resid / two_var;
    }
    return log_p;
}

TargetDensity SensorModel::make_target() const
{
    validate();
    auto self = std::make_shared<const SensorModel>(*this);
    TargetDensity t;
    t.dim = 2;
    t.log_density = [self](const Point& x) { return sensor_log_target(x, *self); };
    return t;
}

namespace {

struct RowPartial {
    double max_log = kNegInf;
    double mass = 0.0;
    double mass_x = 0.0;
    double mass_y = 0.0;
};

void check_grid_args(const Box& box, int resolution)
{
    if (box.lo.size() != 2 || box.hi.size() != 2)
        throw config_error("grid mean: box must be 2-d");
    if (!(box.lo[0] < box.hi[0] && box.lo[1] < box.hi[1]))
        throw config_error("grid mean: box is empty");
    if (resolution < 2) throw config_error("grid mean: resolution must be >= 2");
}

}  // namespace

Point grid_posterior_mean(const TargetDensity& target, const Box& box, int resolution,
                          int n_threads)
{
    check_grid_args(box, resolution);
    const std::size_t res = static_cast<std::size_t>(resolution);
    const double hx = (box.hi[0] - box.lo[0]) / static_cast<double>(res);
    const double hy = (box.hi[1] - box.lo[1]) / static_cast<double>(res);

    // Pass 1: per-row maxima (for a shared log shift), pass 2: per-row
    // shifted sums. Each row is computed serially by whichever thread
    // owns it and partials combine in row order afterwards.
    std::vector<double> row_max(res, kNegInf);
#pragma omp parallel for num_threads(n_threads) schedule(static)
    for (long long r = 0; r < static_cast<long long>(res); ++r) {
        const double x = box.lo[0] + (static_cast<double>(r) + 0.5) * hx;
        double hi = kNegInf;
        for (std::size_t c = 0; c < res; ++c) {
            const double y = box.lo[1] + (static_cast<double>(c) + 0.5) * hy;
            hi = std::max(hi, target(Point{x, y}));
        }
        row_max[static_cast<std::size_t>(r)] = hi;
    }
    double shift = kNegInf;
    for (double m : row_max) shift = std::max(shift, m);
    if (shift == kNegInf) throw config_error("grid mean: target vanishes on the whole grid");

    std::vector<RowPartial> partials(res);
#pragma omp parallel for num_threads(n_threads) schedule(static)
    for (long long r = 0; r < static_cast<long long>(res); ++r) {
        const double x = box.lo[0] + (static_cast<double>(r) + 0.5) * hx;
        RowPartial acc;
        for (std::size_t c = 0; c < res; ++c) {
            const double y = box.lo[1] + (static_cast<double>(c) + 0.5) * hy;
            const double w = std::exp(target(Point{x, y}) - shift);
            acc.mass += w;
            acc.mass_x += w * x;
            acc.mass_y += w * y;
        }
        partials[static_cast<std::size_t>(r)] = acc;
    }

    double mass = 0.0, mass_x = 0.0, mass_y = 0.0;
    for (const RowPartial& p : partials) {
        mass += p.mass;
        mass_x += p.mass_x;
        mass_y += p.mass_y;
    }
    return Point{mass_x / mass, mass_y / mass};
}

Point grid_posterior_mean(const SensorModel& model, const Box& box, int resolution, int n_threads)
{
    return grid_posterior_mean(model.make_target(), box, resolution, n_threads);
}

Point grid_posterior_mean_serial(const TargetDensity& target, const Box& box, int resolution)
{
    check_grid_args(box, resolution);
    const std::size_t res = static_cast<std::size_t>(resolution);
    const double hx = (box.hi[0] - box.lo[0]) / static_cast<double>(res);
    const double hy = (box.hi[1] - box.lo[1]) / static_cast<double>(res);

    std::vector<double> logs;
    logs.reserve(res * res);
    double shift = kNegInf;
    for (std::size_t r = 0; r < res; ++r) {
        const double x = box.lo[0] + (static_cast<double>(r) + 0.5) * hx;
        for (std::size_t c = 0; c < res; ++c) {
            const double y = box.lo[1] + (static_cast<double>(c) + 0.5) * hy;
            logs.push_back(target(Point{x, y}));
            shift = std::max(shift, logs.back());
        }
    }
    if (shift == kNegInf) throw config_error("grid mean: target vanishes on the whole grid");

    double mass = 0.0, mass_x = 0.0, mass_y = 0.0;
    std::size_t idx = 0;
    for (std::size_t r = 0; r < res; ++r) {
        const double x = box.lo[0] + (static_cast<double>(r) + 0.5) * hx;
        for (std::size_t c = 0; c < res; ++c, ++idx) {
            const double y = box.lo[1] + (static_cast<double>(c) + 0.5) * hy;
            const double w = std::exp(logs[idx] - shift);
            mass += w;
            mass_x += w * x;
            mass_y += w * y;
        }
    }
    return Point{mass_x / mass, mass_y / mass};
}

}  // namespace mtm
