#ifndef MTM_DENSITIES_HPP
#define MTM_DENSITIES_HPP

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mtm/rng.hpp"

namespace mtm {

// State-space coordinate vector. Length must equal the dimension of the
// density it is evaluated against; all entries finite.
using Point = std::vector<double>;

double squared_distance(const Point& a, const Point& b);
double distance(const Point& a, const Point& b);

// SPD covariance with its Cholesky factor computed once at construction.
// Either diagonal or full; the factor is what every evaluation and draw
// actually uses.
class Covariance {
public:
    static Covariance diagonal(std::vector<double> variances);
    static Covariance isotropic(std::size_t dim, double variance);
    // Row-major symmetric positive-definite matrix.
    static Covariance dense(std::size_t dim, std::vector<double> entries);

    std::size_t dim() const { return dim_; }

    // log of the multivariate normal normalizing constant:
    // -d/2 log(2 pi) - sum_i log L_ii.
    double log_norm_const() const { return log_norm_const_; }

    // diff^T Sigma^{-1} diff via one forward substitution.
    double quad_form(const Point& diff) const;

    // eps := L * eps, turning iid standard normals into a draw with this
    // covariance.
    void transform(std::span<double> eps) const;

private:
    Covariance() = default;

    std::size_t dim_ = 0;
    bool diag_ = true;
    // diagonal: sqrt variances; dense: lower-triangular factor, row-major.
    std::vector<double> factor_;
    double log_norm_const_ = 0.0;
};

// log N(z; mean, cov), fully normalized.
double gaussian_log_density(const Point& z, const Point& mean, const Covariance& cov);

// Unnormalized log target with an optional known normalizer. log_density
// never returns +inf or NaN; zero-density points map to -inf.
struct TargetDensity {
    std::size_t dim = 0;
    std::function<double(const Point&)> log_density;
    std::optional<double> known_normalizer;

    double operator()(const Point& x) const { return log_density(x); }
};

enum class ProposalKind { random_walk, independent, mixture };

// Proposal density with draw + log-density evaluation. Gaussian flavors
// cover every experiment in the library; custom() plugs arbitrary
// sample/evaluate hooks (used to embed finite state spaces so the exact
// oracle exercises the production sampler code path).
class Proposal {
public:
    static Proposal gaussian_random_walk(Covariance cov);
    static Proposal gaussian_independent(Point mean, Covariance cov);
    // Equal-weight mixture of independent components.
    static Proposal mixture(std::vector<Proposal> components);
    static Proposal custom(ProposalKind kind, std::size_t dim,
                           std::function<Point(const Point*, RngStream&)> sample_fn,
                           std::function<double(const Point&, const Point*)> log_density_fn);

    ProposalKind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }

    // condition is required iff kind() == random_walk; mixture components
    // are drawn uniformly, then sampled.
    Point sample(const Point* condition, RngStream& rng) const;
    double log_density(const Point& z, const Point* condition) const;

    const std::vector<Proposal>& components() const;

private:
    Proposal() = default;

    ProposalKind kind_ = ProposalKind::independent;
    std::size_t dim_ = 0;
    std::function<Point(const Point*, RngStream&)> sample_;
    std::function<double(const Point&, const Point*)> log_density_;
    std::shared_ptr<const std::vector<Proposal>> components_;
};

// log((1/N) sum_n q_n(z)) via log-sum-exp.
double mixture_log_density(const Point& z, std::span<const Proposal> components);

}  // namespace mtm

#endif  // MTM_DENSITIES_HPP
