#pragma once

// Fully collapsed Gibbs sampler for the Chinese restaurant franchise.
//
// Dish parameters are never instantiated: every move is weighted by the
// conjugate predictive of the customer (or table block) under each dish's
// current sufficient statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "hdp/random.hpp"
#include "hdp/seating.hpp"

namespace hdp {

enum class ScanOrder { Fixed, ShuffledPerSweep };

struct SamplerConfig {
    int sweeps = 1000;
    int burn_in = 0;
    int snapshot_every = 0;  // 0 disables snapshots
    std::uint64_t rng_seed = 1;
    ScanOrder scan_order = ScanOrder::ShuffledPerSweep;
    InitMode init_mode = InitMode::AllTogether;
    bool debug_checks = false;  // check_consistency after every move
    // Fault injection for sampler self-tests: customer weights are computed
    // while the customer is still seated.
    bool fault_skip_detach = false;

    void validate() const;
};

/// Log weights of a customer move in group j.
struct CustomerWeights {
    std::vector<double> tables;  // existing tables of group j, then the new table
    std::vector<double> dishes;  // m_.k p_c(x -> k) per dish, then gamma p_c(x -> k*)
};

template <class Family>
CustomerWeights customer_log_weights(const StateFor<Family>& state, const HdpModel<Family>& model,
                                     std::size_t j, const typename Family::Value& x) {
    const int K = state.num_dishes();
    const int T = state.num_tables(j);
    CustomerWeights w;
    std::vector<double> pred(K);
    w.dishes.resize(K + 1);
    for (int k = 0; k < K; ++k) {
        pred[k] = model.family.log_pred_one(state.dish(k).stats, x);
        w.dishes[k] = std::log(static_cast<double>(state.dish(k).tables)) + pred[k];
    }
    w.dishes[K] = std::log(model.gamma) + model.family.log_pred_one(state.empty_stats(), x);

    w.tables.resize(T + 1);
    for (int t = 0; t < T; ++t) {
        const auto& tab = state.table(j, t);
        w.tables[t] = std::log(static_cast<double>(tab.customers)) + pred[tab.dish];
    }
    // New table: the dish is marginalized over the top-level urn.
    const double m_total = static_cast<double>(state.total_tables());
    w.tables[T] = std::log(model.alpha0) + log_sum_exp(w.dishes) - std::log(m_total + model.gamma);
    return w;
}

/// Draws the table for a detached customer. Returns num_tables(j) for a new table.
template <class Family>
int sample_table(const StateFor<Family>& state, const HdpModel<Family>& model, std::size_t j,
                 const typename Family::Value& x, Rng& rng, CustomerWeights* weights_out = nullptr) {
    CustomerWeights w = customer_log_weights(state, model, j, x);
    const int t = static_cast<int>(sample_log_categorical(w.tables, rng));
    if (weights_out) *weights_out = std::move(w);
    return t;
}

/// Dish for a freshly opened table, from the dish half of the customer
/// weights. Returns the dish count for a new dish.
inline int sample_dish_for_new_table(const CustomerWeights& weights, Rng& rng) {
    return static_cast<int>(sample_log_categorical(weights.dishes, rng));
}

/// Log weights for re-dishing table (j, t), whose block must already be
/// detached: m_.k p_t(x_jt -> k) per dish, then gamma p_t(x_jt -> k*).
template <class Family>
std::vector<double> table_dish_log_weights(const StateFor<Family>& state, const HdpModel<Family>& model,
                                           std::size_t j, int t) {
    const auto& block = state.table(j, t).stats;
    const int K = state.num_dishes();
    std::vector<double> w(K + 1);
    for (int k = 0; k < K; ++k) {
        w[k] = std::log(static_cast<double>(state.dish(k).tables)) +
               model.family.log_pred_block(state.dish(k).stats, block);
    }
    w[K] = std::log(model.gamma) + model.family.log_pred_block(state.empty_stats(), block);
    return w;
}

/// Detaches table (j, t) from its dish, draws a dish and reattaches.
template <class Family>
int sample_dish_for_table(StateFor<Family>& state, const HdpModel<Family>& model, std::size_t j, int t,
                          Rng& rng) {
    state.detach_table(j, t);
    const auto w = table_dish_log_weights(state, model, j, t);
    int k = static_cast<int>(sample_log_categorical(w, rng));
    if (k == state.num_dishes()) k = state.open_dish();
    state.attach_table(j, t, k);
    return k;
}

template <class Family>
void detach_customer(StateFor<Family>& state, const GroupedDataset& data, std::size_t j, std::size_t i) {
    state.unseat(j, i, Family::observation(data, j, i));
}

namespace detail {

template <class Family>
void debug_check(const StateFor<Family>& state, const GroupedDataset& data) {
    const auto report = check_consistency<Family>(state, data);
    if (!report.ok()) throw Error("seating invariant violated:\n" + report.to_string());
}

template <class Family>
void seat_with_choice(StateFor<Family>& state, const GroupedDataset& data, std::size_t j, std::size_t i,
                      int table, int dish) {
    if (table == state.num_tables(j)) {
        if (dish == state.num_dishes()) dish = state.open_dish();
        table = state.open_table(j, dish);
    }
    state.seat(j, i, table, Family::observation(data, j, i));
}

// Deliberately wrong customer move: the customer's own count and data stay in
// the weights, and choosing its own table leaves it in place. Other choices
// are remapped through the compaction that follows.
template <class Family>
void faulty_customer_move(StateFor<Family>& state, const GroupedDataset& data, const HdpModel<Family>& model,
                          std::size_t j, std::size_t i, Rng& rng) {
    const auto x = Family::observation(data, j, i);
    const CustomerWeights w = customer_log_weights(state, model, j, x);
    const int t0 = state.table_of(j, i);
    const int k0 = state.dish_of_table(j, t0);
    const int T_old = state.num_tables(j);
    const int K_old = state.num_dishes();
    int table = static_cast<int>(sample_log_categorical(w.tables, rng));
    if (table == t0) return;
    state.unseat(j, i, x);
    const bool table_closed = state.num_tables(j) < T_old;
    const bool dish_closed = state.num_dishes() < K_old;
    if (table < T_old && table_closed && table == T_old - 1) table = t0;
    int dish = -1;
    if (table == T_old) {
        table = state.num_tables(j);
        dish = sample_dish_for_new_table(w, rng);
        if (dish < K_old && dish_closed) {
            if (dish == k0) dish = K_old;
            else if (dish == K_old - 1) dish = k0;
        }
        if (dish == K_old) dish = state.num_dishes();
    }
    seat_with_choice<Family>(state, data, j, i, table, dish);
}

// Deliberately wrong table move: the table's own block and count stay in its
// dish's weight.
template <class Family>
void faulty_table_move(StateFor<Family>& state, const HdpModel<Family>& model, std::size_t j, int t, Rng& rng) {
    const auto w = table_dish_log_weights(state, model, j, t);
    const int k0 = state.dish_of_table(j, t);
    const int K_old = state.num_dishes();
    int k = static_cast<int>(sample_log_categorical(w, rng));
    if (k == k0) return;
    state.detach_table(j, t);
    if (state.num_dishes() < K_old && k == K_old - 1) k = k0;
    if (k == K_old) k = state.open_dish();
    state.attach_table(j, t, k);
}

}  // namespace detail

/// One sweep: every customer is detached and reseated, then every table
/// re-draws its dish.
template <class Family>
void gibbs_sweep(StateFor<Family>& state, const GroupedDataset& data, const HdpModel<Family>& model,
                 const SamplerConfig& config, Rng& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> customers;
    customers.reserve(data.total_size());
    for (std::size_t j = 0; j < data.num_groups(); ++j) {
        for (std::size_t i = 0; i < data.group_size(j); ++i) customers.emplace_back(j, i);
    }
    if (config.scan_order == ScanOrder::ShuffledPerSweep) std::shuffle(customers.begin(), customers.end(), rng);

    for (const auto& [j, i] : customers) {
        if (config.fault_skip_detach) {
            detail::faulty_customer_move(state, data, model, j, i, rng);
        } else {
            const auto x = Family::observation(data, j, i);
            state.unseat(j, i, x);
            CustomerWeights w;
            const int table = sample_table(state, model, j, x, rng, &w);
            const int dish = table == state.num_tables(j) ? sample_dish_for_new_table(w, rng) : -1;
            detail::seat_with_choice<Family>(state, data, j, i, table, dish);
        }
        if (config.debug_checks) detail::debug_check<Family>(state, data);
    }

    std::vector<std::pair<std::size_t, int>> tables;
    for (std::size_t j = 0; j < data.num_groups(); ++j) {
        for (int t = 0; t < state.num_tables(j); ++t) tables.emplace_back(j, t);
    }
    if (config.scan_order == ScanOrder::ShuffledPerSweep) std::shuffle(tables.begin(), tables.end(), rng);
    for (const auto& [j, t] : tables) {
        if (config.fault_skip_detach) {
            detail::faulty_table_move(state, model, j, t, rng);
        } else {
            sample_dish_for_table(state, model, j, t, rng);
        }
        if (config.debug_checks) detail::debug_check<Family>(state, data);
    }
}

struct Snapshot {
    int sweep = 0;
    CanonicalSeating seating;
};

/// Per-sweep record of a chain. Entries before burn_in are kept for
/// plotting but excluded from summaries.
struct ChainTrace {
    int burn_in = 0;
    std::vector<int> num_dishes;
    std::vector<double> log_joint;
    std::vector<Snapshot> snapshots;

    std::size_t size() const { return num_dishes.size(); }
    /// Most frequent K after burn-in; ties go to the smaller K.
    int modal_num_dishes() const;
};

template <class Family>
struct ChainResult {
    ChainTrace trace;
    StateFor<Family> state;
    /// Highest log-joint seating after burn-in (the final one if none).
    CanonicalSeating map_seating;
    int map_sweep = 0;
};

template <class Family>
ChainResult<Family> run_chain(const GroupedDataset& data, const HdpModel<Family>& model,
                              const SamplerConfig& config, std::uint64_t chain_index = 0) {
    config.validate();
    model.validate();
    Rng rng = make_rng(config.rng_seed, chain_index);
    auto state = init_seating(data, model.family, config.init_mode);
    ChainTrace trace;
    trace.burn_in = config.burn_in;
    trace.num_dishes.reserve(config.sweeps);
    trace.log_joint.reserve(config.sweeps);
    CanonicalSeating map_seating;
    int map_sweep = 0;
    double best = 0.0;
    for (int sweep = 1; sweep <= config.sweeps; ++sweep) {
        gibbs_sweep(state, data, model, config, rng);
        trace.num_dishes.push_back(state.num_dishes());
        trace.log_joint.push_back(log_joint(state, model));
        if (sweep > config.burn_in && (map_sweep == 0 || trace.log_joint.back() > best)) {
            best = trace.log_joint.back();
            map_sweep = sweep;
            map_seating = canonicalize(state);
        }
        if (config.snapshot_every > 0 && sweep % config.snapshot_every == 0) {
            trace.snapshots.push_back({sweep, canonicalize(state)});
        }
    }
    if (map_sweep == 0) {
        map_sweep = config.sweeps;
        map_seating = canonicalize(state);
    }
    return {std::move(trace), std::move(state), std::move(map_seating), map_sweep};
}

/// Independent chains on separate threads; chain c uses stream c of the
/// configured seed, so results do not depend on scheduling.
template <class Family>
std::vector<ChainResult<Family>> run_chains(const GroupedDataset& data, const HdpModel<Family>& model,
                                            const SamplerConfig& config, int chains) {
    if (chains < 1) throw Error("need at least one chain");
    std::vector<std::optional<ChainResult<Family>>> slots(chains);
    std::vector<std::exception_ptr> errors(chains);
    {
        std::vector<std::jthread> workers;
        for (int c = 0; c < chains; ++c) {
            workers.emplace_back([&, c] {
                try {
                    slots[c].emplace(run_chain(data, model, config, static_cast<std::uint64_t>(c)));
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
    }
    std::vector<ChainResult<Family>> out;
    for (int c = 0; c < chains; ++c) {
        if (errors[c]) std::rethrow_exception(errors[c]);
        out.push_back(std::move(*slots[c]));
    }
    return out;
}

}  // namespace hdp
