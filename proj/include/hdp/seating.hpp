#pragma once

// Chinese restaurant franchise seating state.
//
// Customers (j, i) sit at tables local to group j; every table serves one
// global dish. Table ids within a group and dish ids are dense and compacted
// on removal by moving the last entry into the freed slot.

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hdp/conjugate.hpp"
#include "hdp/dataset.hpp"
#include "hdp/numerics.hpp"

namespace hdp {

/// Concentrations plus the base-measure family.
template <class Family>
struct HdpModel {
    double gamma = 1.0;   // top-level concentration
    double alpha0 = 1.0;  // group-level concentration
    Family family;

    void validate() const {
        if (!(gamma > 0.0) || !(alpha0 > 0.0)) throw Error("gamma and alpha0 must be positive");
        family.prior.validate();
    }
};

/// Family-erased hyperparameters, as read from configuration.
struct HdpHyper {
    double gamma = 1.0;
    double alpha0 = 1.0;
    std::variant<GammaPoissonParams, NormalGammaParams> family_prior;

    void validate() const;
};

enum class InitMode { AllTogether, AllSingleton };

template <class Stats>
class SeatingState {
 public:
    struct Table {
        int customers = 0;
        int dish = -1;
        Stats stats;
    };
    struct Dish {
        int tables = 0;
        Stats stats;
    };

    static constexpr int kUnseated = -1;

    SeatingState(const std::vector<std::size_t>& group_sizes, Stats empty)
        : empty_(std::move(empty)), table_of_(group_sizes.size()), tables_(group_sizes.size()),
          m_jk_(group_sizes.size()) {
        for (std::size_t j = 0; j < group_sizes.size(); ++j) table_of_[j].assign(group_sizes[j], kUnseated);
    }

    std::size_t num_groups() const { return table_of_.size(); }
    std::size_t group_size(std::size_t j) const { return table_of_[j].size(); }
    int num_tables(std::size_t j) const { return static_cast<int>(tables_[j].size()); }
    int num_dishes() const { return static_cast<int>(dishes_.size()); }
    int total_tables() const {
        int m = 0;
        for (const auto& d : dishes_) m += d.tables;
        return m;
    }

    int table_of(std::size_t j, std::size_t i) const { return table_of_[j][i]; }
    int dish_of_table(std::size_t j, int t) const { return tables_[j][t].dish; }
    int dish_of(std::size_t j, std::size_t i) const {
        const int t = table_of_[j][i];
        return t == kUnseated ? kUnseated : tables_[j][t].dish;
    }
    const Table& table(std::size_t j, int t) const { return tables_[j][t]; }
    const Dish& dish(int k) const { return dishes_[k]; }
    /// m_jk: tables in group j serving dish k.
    int tables_in_group(std::size_t j, int k) const { return m_jk_[j][k]; }
    const Stats& empty_stats() const { return empty_; }

    /// New dish with empty stats and no tables. Caller must attach a table.
    int open_dish() {
        dishes_.push_back({0, empty_});
        for (auto& row : m_jk_) row.push_back(0);
        return num_dishes() - 1;
    }

    /// New empty table in group j serving dish k.
    int open_table(std::size_t j, int k) {
        tables_[j].push_back({0, -1, empty_});
        const int t = num_tables(j) - 1;
        attach_table(j, t, k);
        return t;
    }

    template <class X>
    void seat(std::size_t j, std::size_t i, int t, const X& x) {
        if (table_of_[j][i] != kUnseated) throw Error("customer already seated");
        Table& tab = tables_[j][t];
        table_of_[j][i] = t;
        ++tab.customers;
        tab.stats.add(x);
        dishes_[tab.dish].stats.add(x);
    }

    /// Removes customer (j, i). An emptied table is closed, and a dish left
    /// with no tables is closed with it.
    template <class X>
    void unseat(std::size_t j, std::size_t i, const X& x) {
        const int t = table_of_[j][i];
        if (t == kUnseated) throw Error("customer is not seated");
        Table& tab = tables_[j][t];
        table_of_[j][i] = kUnseated;
        --tab.customers;
        tab.stats.remove(x);
        dishes_[tab.dish].stats.remove(x);
        if (tab.customers == 0) close_table(j, t);
    }

    /// Takes table (j, t)'s block out of its dish, leaving the table without
    /// a dish. Closes the dish if that was its last table.
    void detach_table(std::size_t j, int t) {
        Table& tab = tables_[j][t];
        const int k = tab.dish;
        if (k < 0) throw Error("table has no dish");
        dishes_[k].stats -= tab.stats;
        --dishes_[k].tables;
        --m_jk_[j][k];
        tab.dish = -1;
        if (dishes_[k].tables == 0) close_dish(k);
    }

    void attach_table(std::size_t j, int t, int k) {
        Table& tab = tables_[j][t];
        if (tab.dish >= 0) throw Error("table already serves a dish");
        tab.dish = k;
        dishes_[k].stats += tab.stats;
        ++dishes_[k].tables;
        ++m_jk_[j][k];
    }

    // Raw access for fault-injection tests; bypasses every invariant.
    Table& mutable_table(std::size_t j, int t) { return tables_[j][t]; }
    Dish& mutable_dish(int k) { return dishes_[k]; }

 private:
    void close_table(std::size_t j, int t) {
        const int k = tables_[j][t].dish;
        --dishes_[k].tables;
        --m_jk_[j][k];
        const int last = num_tables(j) - 1;
        if (t != last) {
            tables_[j][t] = std::move(tables_[j][last]);
            for (int& owner : table_of_[j]) {
                if (owner == last) owner = t;
            }
        }
        tables_[j].pop_back();
        if (dishes_[k].tables == 0) close_dish(k);
    }

    void close_dish(int k) {
        const int last = num_dishes() - 1;
        if (k != last) {
            dishes_[k] = std::move(dishes_[last]);
            for (auto& group : tables_) {
                for (auto& tab : group) {
                    if (tab.dish == last) tab.dish = k;
                }
            }
            for (auto& row : m_jk_) row[k] = row[last];
        }
        dishes_.pop_back();
        for (auto& row : m_jk_) row.pop_back();
    }

    Stats empty_;
    std::vector<std::vector<int>> table_of_;
    std::vector<std::vector<Table>> tables_;
    std::vector<Dish> dishes_;
    std::vector<std::vector<int>> m_jk_;
};

template <class Family>
using StateFor = SeatingState<typename Family::Stats>;

template <class Family>
StateFor<Family> init_seating(const GroupedDataset& data, const Family& family, InitMode mode) {
    if (data.num_groups() == 0 || data.total_size() == 0) throw Error("cannot seat an empty dataset");
    if (data.kind() != Family::kind) throw Error("dataset kind does not match the family");
    StateFor<Family> state(data.group_sizes(), family.empty_stats());
    if (mode == InitMode::AllTogether) {
        const int k = state.open_dish();
        for (std::size_t j = 0; j < data.num_groups(); ++j) {
            const int t = state.open_table(j, k);
            for (std::size_t i = 0; i < data.group_size(j); ++i) {
                state.seat(j, i, t, Family::observation(data, j, i));
            }
        }
    } else {
        for (std::size_t j = 0; j < data.num_groups(); ++j) {
            for (std::size_t i = 0; i < data.group_size(j); ++i) {
                const int t = state.open_table(j, state.open_dish());
                state.seat(j, i, t, Family::observation(data, j, i));
            }
        }
    }
    return state;
}

/// Builds the state with customer (j, i) at table table_of[j][i] and table
/// (j, t) serving dish dish_of_table[j][t]. Ids must be dense from zero.
template <class Family>
StateFor<Family> build_seating(const GroupedDataset& data, const Family& family,
                               const std::vector<std::vector<int>>& table_of,
                               const std::vector<std::vector<int>>& dish_of_table) {
    if (table_of.size() != data.num_groups() || dish_of_table.size() != data.num_groups()) {
        throw Error("seating does not match the dataset's groups");
    }
    StateFor<Family> state(data.group_sizes(), family.empty_stats());
    int dishes = 0;
    for (const auto& row : dish_of_table) {
        for (int k : row) dishes = std::max(dishes, k + 1);
    }
    for (int k = 0; k < dishes; ++k) state.open_dish();
    for (std::size_t j = 0; j < data.num_groups(); ++j) {
        for (int k : dish_of_table[j]) {
            if (k < 0) throw Error("negative dish id");
            state.open_table(j, k);
        }
        if (table_of[j].size() != data.group_size(j)) throw Error("seating has wrong group size");
        for (std::size_t i = 0; i < data.group_size(j); ++i) {
            const int t = table_of[j][i];
            if (t < 0 || t >= state.num_tables(j)) throw Error("table id out of range");
            state.seat(j, i, t, Family::observation(data, j, i));
        }
    }
    return state;
}

struct ConsistencyReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const {
        std::string out;
        for (const auto& v : violations) out += v + "\n";
        return out;
    }
};

/// Verifies every seating invariant against a from-scratch recount,
/// including the cached table and dish statistics.
template <class Family>
ConsistencyReport check_consistency(const StateFor<Family>& state, const GroupedDataset& data) {
    ConsistencyReport report;
    auto fail = [&](auto&&... parts) {
        std::ostringstream os;
        (os << ... << parts);
        report.violations.push_back(os.str());
    };

    if (state.num_groups() != data.num_groups()) {
        fail("group count ", state.num_groups(), " != dataset ", data.num_groups());
        return report;
    }
    const int K = state.num_dishes();
    const auto empty = state.empty_stats();
    std::vector<int> tables_per_dish(K, 0);
    std::vector<typename Family::Stats> dish_stats(K, empty);

    for (std::size_t j = 0; j < data.num_groups(); ++j) {
        if (state.group_size(j) != data.group_size(j)) {
            fail("group ", j, " size ", state.group_size(j), " != dataset ", data.group_size(j));
            continue;
        }
        const int T = state.num_tables(j);
        std::vector<int> customers(T, 0);
        std::vector<typename Family::Stats> table_stats(T, empty);
        std::size_t seated = 0;
        for (std::size_t i = 0; i < data.group_size(j); ++i) {
            const int t = state.table_of(j, i);
            if (t < 0 || t >= T) {
                fail("customer (", j, ",", i, ") has invalid table ", t);
                continue;
            }
            ++customers[t];
            ++seated;
            table_stats[t].add(Family::observation(data, j, i));
        }
        if (seated != data.group_size(j)) fail("group ", j, ": sum of n_jt ", seated, " != n_j ", data.group_size(j));

        std::vector<int> m_jk(K, 0);
        for (int t = 0; t < T; ++t) {
            const auto& tab = state.table(j, t);
            if (tab.customers != customers[t]) {
                fail("table (", j, ",", t, ") n_jt ", tab.customers, " != recount ", customers[t]);
            }
            if (tab.customers < 1) fail("table (", j, ",", t, ") is empty");
            if (!approx_equal(tab.stats, table_stats[t])) fail("table (", j, ",", t, ") has stale stats");
            if (tab.dish < 0 || tab.dish >= K) {
                fail("table (", j, ",", t, ") has invalid dish ", tab.dish);
                continue;
            }
            ++m_jk[tab.dish];
            ++tables_per_dish[tab.dish];
            dish_stats[tab.dish] += table_stats[t];
        }
        for (int k = 0; k < K; ++k) {
            if (state.tables_in_group(j, k) != m_jk[k]) {
                fail("m_jk for group ", j, " dish ", k, " is ", state.tables_in_group(j, k), " != recount ", m_jk[k]);
            }
        }
    }
    for (int k = 0; k < K; ++k) {
        const auto& dish = state.dish(k);
        if (dish.tables != tables_per_dish[k]) {
            fail("dish ", k, " m_.k ", dish.tables, " != recount ", tables_per_dish[k]);
        }
        if (dish.tables < 1) fail("dish ", k, " serves no tables");
        if (!approx_equal(dish.stats, dish_stats[k])) fail("dish ", k, " has stale stats");
    }
    return report;
}

/// log probability of the seating under the franchise prior: a CRP(alpha0)
/// partition of every group's customers into tables times a CRP(gamma)
/// partition of all tables into dishes.
template <class Stats>
double crf_log_prior(const SeatingState<Stats>& state, double gamma, double alpha0) {
    double lp = 0.0;
    for (std::size_t j = 0; j < state.num_groups(); ++j) {
        const int T = state.num_tables(j);
        for (std::size_t i = 0; i < state.group_size(j); ++i) {
            if (state.table_of(j, i) == SeatingState<Stats>::kUnseated) throw Error("crf_log_prior: unseated customer");
        }
        const double n = static_cast<double>(state.group_size(j));
        lp += T * std::log(alpha0) - (log_gamma(alpha0 + n) - log_gamma(alpha0));
        for (int t = 0; t < T; ++t) {
            const auto& tab = state.table(j, t);
            if (tab.customers < 1 || tab.dish < 0) throw Error("crf_log_prior: inconsistent table");
            lp += log_gamma(static_cast<double>(tab.customers));
        }
    }
    const int K = state.num_dishes();
    const double m_total = static_cast<double>(state.total_tables());
    lp += K * std::log(gamma) - (log_gamma(gamma + m_total) - log_gamma(gamma));
    for (int k = 0; k < K; ++k) {
        if (state.dish(k).tables < 1) throw Error("crf_log_prior: dish without tables");
        lp += log_gamma(static_cast<double>(state.dish(k).tables));
    }
    return lp;
}

/// crf_log_prior plus the collapsed evidence of every dish's data.
template <class Family>
double log_joint(const StateFor<Family>& state, const HdpModel<Family>& model) {
    double lp = crf_log_prior(state, model.gamma, model.alpha0);
    for (int k = 0; k < state.num_dishes(); ++k) lp += model.family.log_marginal(state.dish(k).stats);
    return lp;
}

/// Seating relabeled by order of first appearance: tables per group by first
/// customer, dishes by first table in (group, canonical table) order.
struct CanonicalSeating {
    std::vector<std::vector<int>> table_of;
    std::vector<std::vector<int>> dish_of_table;
    std::vector<std::vector<int>> dish_of;  // per customer

    /// Flat key identifying the configuration up to relabeling.
    std::vector<int> key() const;
    friend bool operator==(const CanonicalSeating&, const CanonicalSeating&) = default;
};

CanonicalSeating canonicalize(const std::vector<std::vector<int>>& table_of,
                              const std::vector<std::vector<int>>& dish_of_table);

template <class Stats>
CanonicalSeating canonicalize(const SeatingState<Stats>& state) {
    std::vector<std::vector<int>> table_of(state.num_groups());
    std::vector<std::vector<int>> dish_of_table(state.num_groups());
    for (std::size_t j = 0; j < state.num_groups(); ++j) {
        for (std::size_t i = 0; i < state.group_size(j); ++i) table_of[j].push_back(state.table_of(j, i));
        for (int t = 0; t < state.num_tables(j); ++t) dish_of_table[j].push_back(state.dish_of_table(j, t));
    }
    return canonicalize(table_of, dish_of_table);
}

}  // namespace hdp
