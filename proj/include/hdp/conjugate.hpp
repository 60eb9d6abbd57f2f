#pragma once

// Conjugate families for the collapsed sampler.
//
// Gamma-Poisson: x ~ Poisson(phi), phi ~ Gamma(alpha, rate beta). The
// customer-level predictive is Negative Binomial NB(alpha_v, beta_v/(beta_v+1)).
//
// Normal-Gamma-Normal: x ~ N(mu, lambda^-1 I_d), (mu, lambda) ~
// NG(mu0, kappa0, alpha0, beta0). The customer-level predictive is a
// multivariate Student-t with 2 alpha_v degrees of freedom and isotropic scale
// beta_v (kappa_v + 1) / (alpha_v kappa_v).
//
// Every density here is returned in log domain.

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "hdp/dataset.hpp"

namespace hdp {

struct GammaPoissonParams {
    double alpha = 1.0;  // shape
    double beta = 1.0;   // rate

    void validate() const;
    friend bool operator==(const GammaPoissonParams&, const GammaPoissonParams&) = default;
};

struct NormalGammaParams {
    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(1);
    double kappa0 = 1.0;
    double alpha0 = 1.0;
    double beta0 = 1.0;

    Eigen::Index dim() const { return mu0.size(); }
    void validate() const;
};

// Sum of log(x!) held in 2^-50 fixed point, so insertion and removal are
// exact inverses regardless of order.
class LogFactorialSum {
 public:
    void add(std::int64_t x) { ticks_ += to_ticks(x); }
    void remove(std::int64_t x) { ticks_ -= to_ticks(x); }
    LogFactorialSum& operator+=(const LogFactorialSum& o) { ticks_ += o.ticks_; return *this; }
    LogFactorialSum& operator-=(const LogFactorialSum& o) { ticks_ -= o.ticks_; return *this; }
    double value() const;
    friend bool operator==(const LogFactorialSum&, const LogFactorialSum&) = default;

 private:
    static __int128 to_ticks(std::int64_t x);
    __int128 ticks_ = 0;
};

/// Sufficient statistics of a multiset of counts: n, sum x, sum log(x!).
struct CountStats {
    std::int64_t n = 0;
    std::int64_t sum_x = 0;
    LogFactorialSum log_fact;

    void add(std::int64_t x);
    void remove(std::int64_t x);
    bool empty() const { return n == 0; }
    double sum_log_fact() const { return log_fact.value(); }

    CountStats& operator+=(const CountStats& o);
    CountStats& operator-=(const CountStats& o);
    friend CountStats operator+(CountStats a, const CountStats& b) { return a += b; }
    friend bool operator==(const CountStats&, const CountStats&) = default;

    static CountStats of(std::span<const std::int64_t> xs);
};

/// Sufficient statistics of a multiset of d-vectors: n, sum x, sum |x|^2.
struct VectorStats {
    std::int64_t n = 0;
    Eigen::VectorXd sum_x;
    double sum_sq = 0.0;

    explicit VectorStats(Eigen::Index dim = 1) : sum_x(Eigen::VectorXd::Zero(dim)) {}

    Eigen::Index dim() const { return sum_x.size(); }
    void add(const Eigen::Ref<const Eigen::VectorXd>& x);
    void remove(const Eigen::Ref<const Eigen::VectorXd>& x);
    bool empty() const { return n == 0; }

    /// S = sum |x - mean|^2 from the running sums, clamped at zero.
    double scatter() const;

    VectorStats& operator+=(const VectorStats& o);
    VectorStats& operator-=(const VectorStats& o);
    friend VectorStats operator+(VectorStats a, const VectorStats& b) { return a += b; }

    /// Columns of `xs` are the observations.
    static VectorStats of(const Eigen::Ref<const Eigen::MatrixXd>& xs);
};

bool approx_equal(const CountStats& a, const CountStats& b, double tol = 0.0);
bool approx_equal(const VectorStats& a, const VectorStats& b, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Gamma-Poisson

GammaPoissonParams gp_posterior(const GammaPoissonParams& prior, const CountStats& stats);

/// log p_c(x -> k) given posterior hyperparameters; the NB pmf at x.
double gp_log_pred_one(const GammaPoissonParams& post, std::int64_t x);

/// log p_t(x_T -> k): the closed-form block predictive
///   Γ(Σx + α_w) / (Γ(α_w) Π x!) · β_w^α_w / (β_w + |T|)^(Σx + α_w).
double gp_log_pred_block(const GammaPoissonParams& post, std::span<const std::int64_t> xs);
double gp_log_pred_block(const GammaPoissonParams& post, const CountStats& block);

/// log of the evidence ∫ Π Poisson(x|φ) Gamma(φ|α,β) dφ; zero for empty stats.
double gp_log_marginal(const GammaPoissonParams& prior, const CountStats& stats);

// ---------------------------------------------------------------------------
// Normal-Gamma-Normal

NormalGammaParams ng_posterior(const NormalGammaParams& prior, const VectorStats& stats);

/// Multivariate Student-t log density, ν = 2α, location μ, scale σ²I with
/// σ² = β(κ+1)/(ακ).
double ng_log_pred_one(const NormalGammaParams& post, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Joint predictive of a block of observations (columns of `xs`), i.e. the
/// evidence of the block under `post` used as a prior. Equals the ratio
/// M(W ∪ T) / M(W) when `post` is the posterior given W.
double ng_log_pred_block(const NormalGammaParams& post, const Eigen::Ref<const Eigen::MatrixXd>& xs);
double ng_log_pred_block(const NormalGammaParams& post, const VectorStats& block);

double ng_log_marginal(const NormalGammaParams& prior, const VectorStats& stats);

// ---------------------------------------------------------------------------
// Family policies consumed by the seating state and the sampler.

struct GammaPoisson {
    using Params = GammaPoissonParams;
    using Stats = CountStats;
    using Value = std::int64_t;

    Params prior;

    static constexpr ObsKind kind = ObsKind::Count;
    static Value observation(const GroupedDataset& data, std::size_t j, std::size_t i) {
        return data.count(j, i);
    }

    Stats empty_stats() const { return {}; }
    Params posterior(const Stats& s) const { return gp_posterior(prior, s); }
    double log_pred_one(const Stats& cond, Value x) const {
        return gp_log_pred_one(gp_posterior(prior, cond), x);
    }
    double log_pred_block(const Stats& cond, const Stats& block) const {
        return gp_log_pred_block(gp_posterior(prior, cond), block);
    }
    double log_marginal(const Stats& s) const { return gp_log_marginal(prior, s); }
};

struct NormalGamma {
    using Params = NormalGammaParams;
    using Stats = VectorStats;
    using Value = Eigen::Ref<const Eigen::VectorXd>;

    Params prior;

    static constexpr ObsKind kind = ObsKind::RealVector;
    static Eigen::MatrixXd::ConstColXpr observation(const GroupedDataset& data, std::size_t j,
                                                    std::size_t i) {
        return data.vector(j, i);
    }

    Stats empty_stats() const { return Stats(prior.dim()); }
    Params posterior(const Stats& s) const { return ng_posterior(prior, s); }
    double log_pred_one(const Stats& cond, const Value& x) const {
        return ng_log_pred_one(ng_posterior(prior, cond), x);
    }
    double log_pred_block(const Stats& cond, const Stats& block) const {
        return ng_log_marginal(prior, cond + block) - ng_log_marginal(prior, cond);
    }
    double log_marginal(const Stats& s) const { return ng_log_marginal(prior, s); }
};

}  // namespace hdp
