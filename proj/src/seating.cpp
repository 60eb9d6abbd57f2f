#include "hdp/seating.hpp"

namespace hdp {

void HdpHyper::validate() const {
    if (!(gamma > 0.0) || !(alpha0 > 0.0)) throw Error("gamma and alpha0 must be positive");
    std::visit([](const auto& prior) { prior.validate(); }, family_prior);
}

CanonicalSeating canonicalize(const std::vector<std::vector<int>>& table_of,
                              const std::vector<std::vector<int>>& dish_of_table) {
    CanonicalSeating out;
    const std::size_t J = table_of.size();
    out.table_of.resize(J);
    out.dish_of_table.resize(J);
    out.dish_of.resize(J);
    std::vector<int> dish_map;
    int next_dish = 0;
    auto relabel_dish = [&](int k) {
        if (k >= static_cast<int>(dish_map.size())) dish_map.resize(k + 1, -1);
        if (dish_map[k] < 0) dish_map[k] = next_dish++;
        return dish_map[k];
    };
    for (std::size_t j = 0; j < J; ++j) {
        std::vector<int> table_map(dish_of_table[j].size(), -1);
        int next_table = 0;
        for (int t : table_of[j]) {
            if (table_map[t] < 0) {
                table_map[t] = next_table++;
                out.dish_of_table[j].push_back(dish_of_table[j][t]);
            }
            out.table_of[j].push_back(table_map[t]);
        }
        for (int& k : out.dish_of_table[j]) k = relabel_dish(k);
        for (int t : out.table_of[j]) out.dish_of[j].push_back(out.dish_of_table[j][t]);
    }
    return out;
}

std::vector<int> CanonicalSeating::key() const {
    std::vector<int> key;
    for (std::size_t j = 0; j < table_of.size(); ++j) {
        key.push_back(static_cast<int>(table_of[j].size()));
        key.insert(key.end(), table_of[j].begin(), table_of[j].end());
        key.push_back(static_cast<int>(dish_of_table[j].size()));
        key.insert(key.end(), dish_of_table[j].begin(), dish_of_table[j].end());
    }
    return key;
}

}  // namespace hdp
