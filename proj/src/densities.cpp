#include "mtm/densities.hpp"

#include <cmath>
#include <stdexcept>

#include "mtm/errors.hpp"
#include "mtm/logspace.hpp"

namespace mtm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double squared_distance(const Point& a, const Point& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double distance(const Point& a, const Point& b)
{
    return std::sqrt(squared_distance(a, b));
}

Covariance Covariance::diagonal(std::vector<double> variances)
{
    if (variances.empty()) throw config_error("covariance: empty diagonal");
    Covariance c;
    c.dim_ = variances.size();
    c.diag_ = true;
    c.factor_.resize(c.dim_);
    double log_det_half = 0.0;
    for (std::size_t i = 0; i < c.dim_; ++i) {
        if (!(variances[i] > 0.0)) throw config_error("covariance: non-positive variance");
        c.factor_[i] = std::sqrt(variances[i]);
        log_det_half += std::log(c.factor_[i]);
    }
    c.log_norm_const_ = -0.5 * static_cast<double>(c.dim_) * kLog2Pi - log_det_half;
    return c;
}

Covariance Covariance::isotropic(std::size_t dim, double variance)
{
    return diagonal(std::vector<double>(dim, variance));
}

Covariance Covariance::dense(std::size_t dim, std::vector<double> entries)
{
    if (dim == 0 || entries.size() != dim * dim)
        throw config_error("covariance: bad dense dimensions");
    Covariance c;
    c.dim_ = dim;
    c.diag_ = false;
    c.factor_.assign(dim * dim, 0.0);
    // Cholesky; failure of a pivot means the matrix is not SPD.
    double log_det_half = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = entries[i * dim + j];
            for (std::size_t k = 0; k < j; ++k)
                s -= c.factor_[i * dim + k] * c.factor_[j * dim + k];
            if (i == j) {
                if (!(s > 0.0)) throw config_error("covariance: matrix not positive definite");
                c.factor_[i * dim + i] = std::sqrt(s);
                log_det_half += 0.5 * std::log(s);
            } else {
                c.factor_[i * dim + j] = s / c.factor_[j * dim + j];
            }
        }
    }
    c.log_norm_const_ = -0.5 * static_cast<double>(dim) * kLog2Pi - log_det_half;
    return c;
}

double Covariance::quad_form(const Point& diff) const
{
    if (diff.size() != dim_) throw std::invalid_argument("covariance: dimension mismatch");
    if (diag_) {
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double u = diff[i] / factor_[i];
            s += u * u;
        }
        return s;
    }
    // Solve L u = diff, then |u|^2.
    std::vector<double> u(dim_);
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        double v = diff[i];
        for (std::size_t k = 0; k < i; ++k) v -= factor_[i * dim_ + k] * u[k];
        u[i] = v / factor_[i * dim_ + i];
        s += u[i] * u[i];
    }
    return s;
}

void Covariance::transform(std::span<double> eps) const
{
    if (eps.size() != dim_) throw std::invalid_argument("covariance: dimension mismatch");
    if (diag_) {
        for (std::size_t i = 0; i < dim_; ++i) eps[i] *= factor_[i];
        return;
    }
    for (std::size_t i = dim_; i-- > 0;) {
        double v = 0.0;
        for (std::size_t k = 0; k <= i; ++k) v += factor_[i * dim_ + k] * eps[k];
        eps[i] = v;
    }
}

double gaussian_log_density(const Point& z, const Point& mean, const Covariance& cov)
{
    if (z.size() != mean.size() || z.size() != cov.dim())
        throw std::invalid_argument("gaussian_log_density: dimension mismatch");
    Point diff(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) diff[i] = z[i] - mean[i];
    return cov.log_norm_const() - 0.5 * cov.quad_form(diff);
}

Proposal Proposal::gaussian_random_walk(Covariance cov)
{
    Proposal p;
    p.kind_ = ProposalKind::random_walk;
    p.dim_ = cov.dim();
    auto shared_cov = std::make_shared<const Covariance>(std::move(cov));
    p.sample_ = [shared_cov](const Point* condition, RngStream& rng) {
        Point eps(shared_cov->dim());
        for (double& e : eps) e = rng.normal();
        shared_cov->transform(eps);
        for (std::size_t i = 0; i < eps.size(); ++i) eps[i] += (*condition)[i];
        return eps;
    };
    p.log_density_ = [shared_cov](const Point& z, const Point* condition) {
        return gaussian_log_density(z, *condition, *shared_cov);
    };
    return p;
}

Proposal Proposal::gaussian_independent(Point mean, Covariance cov)
{
    if (mean.size() != cov.dim())
        throw config_error("proposal: mean/covariance dimension mismatch");
    Proposal p;
    p.kind_ = ProposalKind::independent;
    p.dim_ = cov.dim();
    auto shared_cov = std::make_shared<const Covariance>(std::move(cov));
    auto shared_mean = std::make_shared<const Point>(std::move(mean));
    p.sample_ = [shared_cov, shared_mean](const Point*, RngStream& rng) {
        Point eps(shared_cov->dim());
        for (double& e : eps) e = rng.normal();
        shared_cov->transform(eps);
        for (std::size_t i = 0; i < eps.size(); ++i) eps[i] += (*shared_mean)[i];
        return eps;
    };
    p.log_density_ = [shared_cov, shared_mean](const Point& z, const Point*) {
        return gaussian_log_density(z, *shared_mean, *shared_cov);
    };
    return p;
}

Proposal Proposal::mixture(std::vector<Proposal> components)
{
    if (components.empty()) throw config_error("mixture proposal: no components");
    const std::size_t dim = components.front().dim();
    for (const Proposal& c : components) {
        if (c.dim() != dim) throw config_error("mixture proposal: component dimension mismatch");
        if (c.kind() == ProposalKind::random_walk)
            throw config_error("mixture proposal: components must be independent");
    }
    Proposal p;
    p.kind_ = ProposalKind::mixture;
    p.dim_ = dim;
    auto comps = std::make_shared<const std::vector<Proposal>>(std::move(components));
    p.components_ = comps;
    p.sample_ = [comps](const Point* condition, RngStream& rng) {
        const std::size_t i = rng.uniform_index(comps->size());
        return (*comps)[i].sample(condition, rng);
    };
    p.log_density_ = [comps](const Point& z, const Point*) {
        return mixture_log_density(z, *comps);
    };
    return p;
}

Proposal Proposal::custom(ProposalKind kind, std::size_t dim,
                          std::function<Point(const Point*, RngStream&)> sample_fn,
                          std::function<double(const Point&, const Point*)> log_density_fn)
{
    Proposal p;
    p.kind_ = kind;
    p.dim_ = dim;
    p.sample_ = std::move(sample_fn);
    p.log_density_ = std::move(log_density_fn);
    return p;
}

Point Proposal::sample(const Point* condition, RngStream& rng) const
{
    if (kind_ == ProposalKind::random_walk && condition == nullptr)
        throw std::invalid_argument("proposal: random-walk sample requires a condition point");
    return sample_(condition, rng);
}

double Proposal::log_density(const Point& z, const Point* condition) const
{
    if (kind_ == ProposalKind::random_walk && condition == nullptr)
        throw std::invalid_argument("proposal: random-walk density requires a condition point");
    if (z.size() != dim_) throw std::invalid_argument("proposal: dimension mismatch");
    return log_density_(z, condition);
}

const std::vector<Proposal>& Proposal::components() const
{
    if (!components_) throw std::invalid_argument("proposal: not a mixture");
    return *components_;
}

double mixture_log_density(const Point& z, std::span<const Proposal> components)
{
    if (components.empty()) throw std::invalid_argument("mixture_log_density: no components");
    std::vector<double> logs(components.size());
    for (std::size_t i = 0; i < components.size(); ++i)
        logs[i] = components[i].log_density(z, nullptr);
    return log_sum_exp(logs) - std::log(static_cast<double>(components.size()));
}

}  // namespace mtm
