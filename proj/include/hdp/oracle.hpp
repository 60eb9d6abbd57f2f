#pragma once

// Independent checks for the closed forms and the sampler: numerical
// quadrature of the predictive integrals, exhaustive enumeration of the
// posterior over seatings for tiny instances, and a joint-distribution test
// of the Gibbs conditionals.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hdp/conjugate.hpp"
#include "hdp/sampler.hpp"
#include "hdp/seating.hpp"
#include "hdp/synth.hpp"

namespace hdp {

struct QuadSpec {
    int nodes = 32;            // Gauss-Legendre nodes per panel
    double rel_tol = 1e-13;    // panel doubling must change the result by less than this
    int max_panels = 1 << 12;
    double tail_drop = 60.0;   // integrate where log f is within this of its maximum

    void validate() const;
};

/// log ∫ exp(log_f(x)) dx over the real line, for unimodal integrands.
///
/// Locates the mode, brackets the region where log_f is within tail_drop of
/// its maximum, then runs composite Gauss-Legendre with the panel count
/// doubled until successive estimates agree to rel_tol. Integrand values are
/// shifted by their maximum before exponentiation.
double log_integrate_real_line(const std::function<double(double)>& log_f, const QuadSpec& spec = {},
                               double hint = 0.0);

/// log ∫_0^∞ exp(log_f(x)) dx, integrated in u = log x.
double log_integrate_half_line(const std::function<double(double)>& log_f, const QuadSpec& spec = {});

/// Predictive of the `query` block given `conditioning`, as the ratio of two
/// integrals of the literal Poisson likelihood times the Gamma prior density.
double quad_log_pred_gp(const GammaPoissonParams& prior, std::span<const std::int64_t> conditioning,
                        std::span<const std::int64_t> query, const QuadSpec& spec = {});

/// Same ratio for the scalar Normal-Gamma model: a tensor rule over the mean
/// (real line) nested inside the precision (half line).
double quad_log_pred_ng(const NormalGammaParams& prior, std::span<const double> conditioning,
                        std::span<const double> query, const QuadSpec& spec = {});

// ---------------------------------------------------------------------------
// Exhaustive enumeration

/// Every set partition of {0..n-1} as a restricted growth string.
std::vector<std::vector<int>> set_partitions(int n);

/// Calls fn(table_of, dish_of_table) once per franchise configuration, each
/// already in canonical labeling.
void for_each_configuration(
    const std::vector<std::size_t>& group_sizes,
    const std::function<void(const std::vector<std::vector<int>>&, const std::vector<std::vector<int>>&)>& fn);

using ConfigDistribution = std::map<std::vector<int>, double>;

inline constexpr std::size_t kMaxEnumerationCustomers = 8;

/// Exact posterior over canonical configurations: CRF prior times collapsed
/// evidence, normalized.
template <class Family>
ConfigDistribution enumerate_exact_posterior(const GroupedDataset& data, const HdpModel<Family>& model) {
    if (data.total_size() > kMaxEnumerationCustomers) throw Error("instance too large to enumerate");
    std::vector<std::vector<int>> keys;
    std::vector<double> scores;
    for_each_configuration(data.group_sizes(), [&](const auto& table_of, const auto& dish_of_table) {
        const auto state = build_seating(data, model.family, table_of, dish_of_table);
        keys.push_back(canonicalize(state).key());
        scores.push_back(log_joint(state, model));
    });
    const double norm = log_sum_exp(scores);
    ConfigDistribution out;
    for (std::size_t c = 0; c < keys.size(); ++c) out[keys[c]] += std::exp(scores[c] - norm);
    return out;
}

/// Frequencies of canonical configurations over the post-burn-in sweeps of
/// one chain.
template <class Family>
ConfigDistribution gibbs_configuration_frequencies(const GroupedDataset& data, const HdpModel<Family>& model,
                                                   const SamplerConfig& config) {
    config.validate();
    Rng rng = make_rng(config.rng_seed);
    auto state = init_seating(data, model.family, config.init_mode);
    std::map<std::vector<int>, long> counts;
    for (int sweep = 1; sweep <= config.sweeps; ++sweep) {
        gibbs_sweep(state, data, model, config, rng);
        if (sweep > config.burn_in) ++counts[canonicalize(state).key()];
    }
    ConfigDistribution out;
    const double total = static_cast<double>(config.sweeps - config.burn_in);
    for (const auto& [key, c] : counts) out[key] = static_cast<double>(c) / total;
    return out;
}

/// Half the L1 distance; keys missing from one side count as zero mass.
double total_variation(const ConfigDistribution& p, const ConfigDistribution& q);

// ---------------------------------------------------------------------------
// Joint-distribution ("getting it right") test

struct GewekeStatistic {
    std::string name;
    double forward_mean = 0.0;
    double chain_mean = 0.0;
    double z = 0.0;
};

struct GewekeReport {
    int iterations = 0;
    std::vector<GewekeStatistic> statistics;
    double max_abs_z() const;
};

/// Mean observation (first coordinate for vectors).
double data_mean(const GroupedDataset& data);

/// Names of the statistics compared by geweke_check.
const std::vector<std::string>& geweke_statistic_names();

namespace detail {

// Joint statistics of one (seating, data) draw, in the order of
// geweke_statistic_names().
std::vector<double> geweke_statistics(const CrfSeating& seating, const GroupedDataset& data);

struct GewekeSamples {
    std::vector<std::vector<double>> columns;
    void push(const std::vector<double>& values) {
        if (columns.empty()) columns.resize(values.size());
        for (std::size_t s = 0; s < values.size(); ++s) columns[s].push_back(values[s]);
    }
};

GewekeReport geweke_summarize(const GewekeSamples& forward, const GewekeSamples& chain);

}  // namespace detail

/// Compares forward draws of (seating, data) from the prior with the
/// successive-conditional chain that alternates one Gibbs sweep of the
/// seating given the data with a fresh draw of the data given the seating.
/// Forward standard errors are iid; chain standard errors use batch means.
template <class Family>
GewekeReport geweke_check(const HdpModel<Family>& model, const std::vector<std::size_t>& group_sizes,
                          int iterations, std::uint64_t seed, bool corrupt_sampler = false) {
    if (iterations < 1000) throw Error("geweke_check needs at least 1000 iterations");
    model.validate();
    detail::GewekeSamples forward, chain;
    Rng rng = make_rng(seed, 0);
    for (int it = 0; it < iterations; ++it) {
        const auto seating = sample_crf_seating(model.gamma, model.alpha0, group_sizes, rng);
        const auto data = sample_data(model.family.prior, seating, rng);
        forward.push(detail::geweke_statistics(seating, data));
    }

    Rng chain_rng = make_rng(seed, 1);
    SamplerConfig config;
    config.scan_order = ScanOrder::ShuffledPerSweep;
    config.fault_skip_detach = corrupt_sampler;
    CrfSeating seating = sample_crf_seating(model.gamma, model.alpha0, group_sizes, chain_rng);
    GroupedDataset data = sample_data(model.family.prior, seating, chain_rng);
    for (int it = 0; it < iterations; ++it) {
        auto state = build_seating(data, model.family, seating.table_of, seating.dish_of_table);
        gibbs_sweep(state, data, model, config, chain_rng);
        const auto canon = canonicalize(state);
        seating.table_of = canon.table_of;
        seating.dish_of_table = canon.dish_of_table;
        seating.num_dishes = state.num_dishes();
        data = sample_data(model.family.prior, seating, chain_rng);
        chain.push(detail::geweke_statistics(seating, data));
    }
    auto report = detail::geweke_summarize(forward, chain);
    report.iterations = iterations;
    return report;
}

// ---------------------------------------------------------------------------

/// Fraction of observations whose inferred label agrees with the truth under
/// the best one-to-one matching of labels.
double label_agreement(const std::vector<std::vector<int>>& truth, const std::vector<std::vector<int>>& inferred);

}  // namespace hdp
