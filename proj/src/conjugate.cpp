#include "hdp/conjugate.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <string>

#include "hdp/numerics.hpp"

namespace hdp {

namespace {

constexpr double kTickScale = 0x1.0p50;

void require_dim(Eigen::Index expected, Eigen::Index got) {
    if (expected != got) {
        throw Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                    std::to_string(got));
    }
}

}  // namespace

void GammaPoissonParams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw Error("gamma-poisson prior needs alpha > 0 and beta > 0");
    }
}

void NormalGammaParams::validate() const {
    if (mu0.size() < 1 || !mu0.allFinite()) throw Error("normal-gamma mu0 must be a finite vector");
    if (!(kappa0 > 0.0) || !(alpha0 > 0.0) || !(beta0 > 0.0) || !std::isfinite(kappa0) ||
        !std::isfinite(alpha0) || !std::isfinite(beta0)) {
        throw Error("normal-gamma prior needs kappa0, alpha0, beta0 > 0");
    }
}

__int128 LogFactorialSum::to_ticks(std::int64_t x) {
    return static_cast<__int128>(std::nearbyint(log_gamma(static_cast<double>(x) + 1.0) * kTickScale));
}

double LogFactorialSum::value() const { return static_cast<double>(ticks_) / kTickScale; }

void CountStats::add(std::int64_t x) {
    assert(x >= 0);
    ++n;
    sum_x += x;
    log_fact.add(x);
}

void CountStats::remove(std::int64_t x) {
    if (n == 0) throw Error("remove from empty count stats");
    --n;
    sum_x -= x;
    log_fact.remove(x);
}

CountStats& CountStats::operator+=(const CountStats& o) {
    n += o.n;
    sum_x += o.sum_x;
    log_fact += o.log_fact;
    return *this;
}

CountStats& CountStats::operator-=(const CountStats& o) {
    if (o.n > n) throw Error("count stats subtraction below zero");
    n -= o.n;
    sum_x -= o.sum_x;
    log_fact -= o.log_fact;
    return *this;
}

CountStats CountStats::of(std::span<const std::int64_t> xs) {
    CountStats s;
    for (std::int64_t x : xs) s.add(x);
    return s;
}

void VectorStats::add(const Eigen::Ref<const Eigen::VectorXd>& x) {
    require_dim(dim(), x.size());
    ++n;
    sum_x += x;
    sum_sq += x.squaredNorm();
}

void VectorStats::remove(const Eigen::Ref<const Eigen::VectorXd>& x) {
    require_dim(dim(), x.size());
    if (n == 0) throw Error("remove from empty vector stats");
    if (--n == 0) {
        sum_x.setZero();
        sum_sq = 0.0;
        return;
    }
    sum_x -= x;
    sum_sq -= x.squaredNorm();
}

double VectorStats::scatter() const {
    if (n == 0) return 0.0;
    const double s = sum_sq - sum_x.squaredNorm() / static_cast<double>(n);
    assert(s >= -1e-9 * std::max(1.0, sum_sq));
    return s > 0.0 ? s : 0.0;
}

VectorStats& VectorStats::operator+=(const VectorStats& o) {
    require_dim(dim(), o.dim());
    n += o.n;
    sum_x += o.sum_x;
    sum_sq += o.sum_sq;
    return *this;
}

VectorStats& VectorStats::operator-=(const VectorStats& o) {
    require_dim(dim(), o.dim());
    if (o.n > n) throw Error("vector stats subtraction below zero");
    n -= o.n;
    if (n == 0) {
        sum_x.setZero();
        sum_sq = 0.0;
    } else {
        sum_x -= o.sum_x;
        sum_sq -= o.sum_sq;
    }
    return *this;
}

VectorStats VectorStats::of(const Eigen::Ref<const Eigen::MatrixXd>& xs) {
    VectorStats s(xs.rows());
    for (Eigen::Index c = 0; c < xs.cols(); ++c) s.add(xs.col(c));
    return s;
}

bool approx_equal(const CountStats& a, const CountStats& b, double tol) {
    if (tol == 0.0) return a == b;
    return a.n == b.n && a.sum_x == b.sum_x &&
           std::abs(a.sum_log_fact() - b.sum_log_fact()) <= tol;
}

bool approx_equal(const VectorStats& a, const VectorStats& b, double tol) {
    if (a.n != b.n || a.dim() != b.dim()) return false;
    const double scale = 1.0 + std::max(std::abs(a.sum_sq), std::abs(b.sum_sq));
    return (a.sum_x - b.sum_x).lpNorm<Eigen::Infinity>() <= tol * scale &&
           std::abs(a.sum_sq - b.sum_sq) <= tol * scale;
}

// ---------------------------------------------------------------------------

GammaPoissonParams gp_posterior(const GammaPoissonParams& prior, const CountStats& stats) {
    return {prior.alpha + static_cast<double>(stats.sum_x), prior.beta + static_cast<double>(stats.n)};
}

double gp_log_pred_one(const GammaPoissonParams& post, std::int64_t x) {
    if (x < 0) throw Error("negative count " + std::to_string(x));
    const double xd = static_cast<double>(x);
    return -log_gamma(xd + 1.0) + log_gamma(xd + post.alpha) - log_gamma(post.alpha) +
           post.alpha * std::log(post.beta) - (xd + post.alpha) * std::log(post.beta + 1.0);
}

double gp_log_pred_block(const GammaPoissonParams& post, std::span<const std::int64_t> xs) {
    if (xs.empty()) throw Error("block predictive of an empty block");
    for (std::int64_t x : xs) {
        if (x < 0) throw Error("negative count " + std::to_string(x));
    }
    return gp_log_pred_block(post, CountStats::of(xs));
}

double gp_log_pred_block(const GammaPoissonParams& post, const CountStats& block) {
    if (block.empty()) throw Error("block predictive of an empty block");
    const double total = static_cast<double>(block.sum_x);
    const double size = static_cast<double>(block.n);
    return log_gamma(total + post.alpha) - log_gamma(post.alpha) - block.sum_log_fact() +
           post.alpha * std::log(post.beta) - (total + post.alpha) * std::log(post.beta + size);
}

double gp_log_marginal(const GammaPoissonParams& prior, const CountStats& stats) {
    if (stats.empty()) return 0.0;
    const auto post = gp_posterior(prior, stats);
    return -stats.sum_log_fact() + prior.alpha * std::log(prior.beta) + log_gamma(post.alpha) -
           log_gamma(prior.alpha) - post.alpha * std::log(post.beta);
}

// ---------------------------------------------------------------------------

NormalGammaParams ng_posterior(const NormalGammaParams& prior, const VectorStats& stats) {
    require_dim(prior.dim(), stats.dim());
    if (stats.empty()) return prior;
    const double n = static_cast<double>(stats.n);
    const double d = static_cast<double>(prior.dim());
    const Eigen::VectorXd mean = stats.sum_x / n;

    NormalGammaParams post;
    post.kappa0 = prior.kappa0 + n;
    post.mu0 = (prior.kappa0 * prior.mu0 + stats.sum_x) / post.kappa0;
    post.alpha0 = prior.alpha0 + 0.5 * d * n;
    post.beta0 = prior.beta0 + 0.5 * stats.scatter() +
                 prior.kappa0 * n / (2.0 * post.kappa0) * (mean - prior.mu0).squaredNorm();
    return post;
}

double ng_log_pred_one(const NormalGammaParams& post, const Eigen::Ref<const Eigen::VectorXd>& x) {
    require_dim(post.dim(), x.size());
    if (!x.allFinite()) throw Error("non-finite observation");
    const double d = static_cast<double>(post.dim());
    const double nu = 2.0 * post.alpha0;
    const double scale2 = post.beta0 * (post.kappa0 + 1.0) / (post.alpha0 * post.kappa0);
    const double dist2 = (x - post.mu0).squaredNorm();
    return log_gamma(0.5 * (nu + d)) - log_gamma(0.5 * nu) -
           0.5 * d * std::log(nu * std::numbers::pi * scale2) -
           0.5 * (nu + d) * std::log1p(dist2 / (nu * scale2));
}

double ng_log_pred_block(const NormalGammaParams& post, const Eigen::Ref<const Eigen::MatrixXd>& xs) {
    if (xs.cols() == 0) throw Error("block predictive of an empty block");
    require_dim(post.dim(), xs.rows());
    if (!xs.allFinite()) throw Error("non-finite observation");
    return ng_log_pred_block(post, VectorStats::of(xs));
}

double ng_log_pred_block(const NormalGammaParams& post, const VectorStats& block) {
    if (block.empty()) throw Error("block predictive of an empty block");
    return ng_log_marginal(post, block);
}

double ng_log_marginal(const NormalGammaParams& prior, const VectorStats& stats) {
    require_dim(prior.dim(), stats.dim());
    if (stats.empty()) return 0.0;
    const auto post = ng_posterior(prior, stats);
    const double d = static_cast<double>(prior.dim());
    const double n = static_cast<double>(stats.n);
    return 0.5 * d * (std::log(prior.kappa0) - std::log(post.kappa0)) +
           prior.alpha0 * std::log(prior.beta0) - post.alpha0 * std::log(post.beta0) +
           log_gamma(post.alpha0) - log_gamma(prior.alpha0) -
           0.5 * n * d * std::log(2.0 * std::numbers::pi);
}

}  // namespace hdp
