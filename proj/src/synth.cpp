#include "hdp/synth.hpp"

#include <cmath>

#include "hdp/numerics.hpp"

namespace hdp {

int CrfSeating::num_tables() const {
    int m = 0;
    for (const auto& row : dish_of_table) m += static_cast<int>(row.size());
    return m;
}

CrfSeating sample_crf_seating(double gamma, double alpha0, const std::vector<std::size_t>& group_sizes, Rng& rng) {
    if (group_sizes.empty()) throw Error("group_sizes is empty");
    for (std::size_t n : group_sizes) {
        if (n == 0) throw Error("group sizes must be positive");
    }
    CrfSeating out;
    out.table_of.resize(group_sizes.size());
    out.dish_of_table.resize(group_sizes.size());
    std::vector<int> tables_per_dish;
    std::vector<double> w;
    for (std::size_t j = 0; j < group_sizes.size(); ++j) {
        std::vector<int> customers;
        for (std::size_t i = 0; i < group_sizes[j]; ++i) {
            w.assign(customers.size() + 1, 0.0);
            for (std::size_t t = 0; t < customers.size(); ++t) w[t] = std::log(static_cast<double>(customers[t]));
            w.back() = std::log(alpha0);
            const auto t = sample_log_categorical(w, rng);
            if (t == customers.size()) {
                w.assign(tables_per_dish.size() + 1, 0.0);
                for (std::size_t k = 0; k < tables_per_dish.size(); ++k) {
                    w[k] = std::log(static_cast<double>(tables_per_dish[k]));
                }
                w.back() = std::log(gamma);
                const auto k = sample_log_categorical(w, rng);
                if (k == tables_per_dish.size()) tables_per_dish.push_back(0);
                ++tables_per_dish[k];
                customers.push_back(0);
                out.dish_of_table[j].push_back(static_cast<int>(k));
            }
            ++customers[t];
            out.table_of[j].push_back(static_cast<int>(t));
        }
    }
    out.num_dishes = static_cast<int>(tables_per_dish.size());
    return out;
}

double draw_atom(const GammaPoissonParams& prior, Rng& rng) {
    return sample_gamma(prior.alpha, prior.beta, rng);
}

NormalAtom draw_atom(const NormalGammaParams& prior, Rng& rng) {
    NormalAtom atom;
    atom.precision = sample_gamma(prior.alpha0, prior.beta0, rng);
    const double sd = 1.0 / std::sqrt(prior.kappa0 * atom.precision);
    atom.mean = prior.mu0;
    for (Eigen::Index c = 0; c < atom.mean.size(); ++c) atom.mean(c) += sd * sample_normal(rng);
    return atom;
}

std::int64_t draw_observation(double rate, Rng& rng) { return sample_poisson(rate, rng); }

Eigen::VectorXd draw_observation(const NormalAtom& atom, Rng& rng) {
    const double sd = 1.0 / std::sqrt(atom.precision);
    Eigen::VectorXd x = atom.mean;
    for (Eigen::Index c = 0; c < x.size(); ++c) x(c) += sd * sample_normal(rng);
    return x;
}

GroupedDataset sample_data(const GammaPoissonParams& prior, const CrfSeating& seating, Rng& rng,
                           std::vector<double>* atoms) {
    std::vector<double> rates(seating.num_dishes);
    for (auto& r : rates) r = draw_atom(prior, rng);
    std::vector<std::vector<std::int64_t>> groups(seating.table_of.size());
    for (std::size_t j = 0; j < groups.size(); ++j) {
        for (std::size_t i = 0; i < seating.table_of[j].size(); ++i) {
            groups[j].push_back(draw_observation(rates[seating.dish_of(j, i)], rng));
        }
    }
    if (atoms) *atoms = std::move(rates);
    return GroupedDataset::counts(std::move(groups));
}

GroupedDataset sample_data(const NormalGammaParams& prior, const CrfSeating& seating, Rng& rng,
                           std::vector<NormalAtom>* atoms) {
    std::vector<NormalAtom> params;
    for (int k = 0; k < seating.num_dishes; ++k) params.push_back(draw_atom(prior, rng));
    std::vector<Eigen::MatrixXd> groups(seating.table_of.size());
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const auto n = static_cast<Eigen::Index>(seating.table_of[j].size());
        groups[j].resize(prior.dim(), n);
        for (Eigen::Index i = 0; i < n; ++i) {
            groups[j].col(i) = draw_observation(params[seating.dish_of(j, static_cast<std::size_t>(i))], rng);
        }
    }
    if (atoms) *atoms = std::move(params);
    return GroupedDataset::vectors(std::move(groups));
}

ForwardSample<double> forward_sample(const HdpModel<GammaPoisson>& model,
                                     const std::vector<std::size_t>& group_sizes, Rng& rng) {
    model.validate();
    auto seating = sample_crf_seating(model.gamma, model.alpha0, group_sizes, rng);
    std::vector<double> atoms;
    auto data = sample_data(model.family.prior, seating, rng, &atoms);
    return {std::move(data), std::move(seating), std::move(atoms)};
}

ForwardSample<NormalAtom> forward_sample(const HdpModel<NormalGamma>& model,
                                         const std::vector<std::size_t>& group_sizes, Rng& rng) {
    model.validate();
    auto seating = sample_crf_seating(model.gamma, model.alpha0, group_sizes, rng);
    std::vector<NormalAtom> atoms;
    auto data = sample_data(model.family.prior, seating, rng, &atoms);
    return {std::move(data), std::move(seating), std::move(atoms)};
}

namespace {

constexpr std::size_t kScenarioGroups = 3;
constexpr int kScenarioMix[3] = {15, 10, 5};

// Dish label of observation i in group j of a canned scenario.
int scenario_dish(std::size_t j, std::size_t i) {
    std::size_t offset = 0;
    for (int slot = 0; slot < 3; ++slot) {
        offset += static_cast<std::size_t>(kScenarioMix[slot]);
        if (i < offset) return static_cast<int>((j + static_cast<std::size_t>(slot)) % 3);
    }
    return -1;
}

std::vector<std::vector<int>> scenario_labels() {
    std::vector<std::vector<int>> labels(kScenarioGroups);
    for (std::size_t j = 0; j < kScenarioGroups; ++j) {
        for (std::size_t i = 0; i < 30; ++i) labels[j].push_back(scenario_dish(j, i));
    }
    return labels;
}

}  // namespace

std::vector<std::string> scenario_names() { return {"gp-3rates", "ng-3means"}; }

Scenario fixed_scenario(const std::string& name) {
    const auto labels = scenario_labels();
    const std::vector<std::string> names = {"g0", "g1", "g2"};
    if (name == "gp-3rates") {
        Rng rng = make_rng(20240611, 1);
        const double rates[3] = {1.0, 20.0, 400.0};
        std::vector<std::vector<std::int64_t>> groups(kScenarioGroups);
        for (std::size_t j = 0; j < kScenarioGroups; ++j) {
            for (int k : labels[j]) groups[j].push_back(sample_poisson(rates[k], rng));
        }
        return {name, GroupedDataset::counts(std::move(groups), names), labels, 3};
    }
    if (name == "ng-3means") {
        Rng rng = make_rng(20240611, 2);
        const NormalAtom atoms[3] = {{Eigen::Vector2d(0.0, 0.0), 1.0},
                                     {Eigen::Vector2d(5.0, 5.0), 1.0},
                                     {Eigen::Vector2d(-5.0, 5.0), 1.0}};
        std::vector<Eigen::MatrixXd> groups(kScenarioGroups, Eigen::MatrixXd(2, 30));
        for (std::size_t j = 0; j < kScenarioGroups; ++j) {
            for (Eigen::Index i = 0; i < 30; ++i) {
                groups[j].col(i) = draw_observation(atoms[labels[j][static_cast<std::size_t>(i)]], rng);
            }
        }
        return {name, GroupedDataset::vectors(std::move(groups), names), labels, 3};
    }
    throw Error("unknown scenario '" + name + "'");
}

}  // namespace hdp
