#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "hdp/oracle.hpp"
#include "hdp/synth.hpp"

using namespace hdp;
using doctest::Approx;
using Counts = std::vector<std::vector<std::int64_t>>;

TEST_CASE("one customer gets one table and one dish") {
    Rng rng = make_rng(1);
    const HdpModel<GammaPoisson> model{3.0, 3.0, GammaPoisson{{1, 1}}};
    for (int d = 0; d < 100; ++d) {
        const auto s = forward_sample(model, {1}, rng);
        CHECK(s.seating.num_tables() == 1);
        CHECK(s.seating.num_dishes == 1);
        CHECK(s.atoms.size() == 1);
    }
}

TEST_CASE("more dishes with larger top-level concentration") {
    auto mean_dishes = [](double gamma) {
        Rng rng = make_rng(2);
        double sum = 0.0;
        for (int d = 0; d < 2000; ++d) sum += sample_crf_seating(gamma, 1.0, {10, 10}, rng).num_dishes;
        return sum / 2000;
    };
    CHECK(mean_dishes(0.1) < mean_dishes(10.0));
}

TEST_CASE("forward samples are well formed") {
    Rng rng = make_rng(3);
    const HdpModel<GammaPoisson> gp{1.0, 2.0, GammaPoisson{{0.3, 0.1}}};
    for (int d = 0; d < 200; ++d) {
        const auto s = forward_sample(gp, {4, 1, 6}, rng);
        REQUIRE(s.data.kind() == ObsKind::Count);
        CHECK(s.data.group_sizes() == std::vector<std::size_t>{4, 1, 6});
        CHECK(static_cast<int>(s.atoms.size()) == s.seating.num_dishes);
        for (std::size_t j = 0; j < s.data.num_groups(); ++j) {
            for (std::size_t i = 0; i < s.data.group_size(j); ++i) CHECK(s.data.count(j, i) >= 0);
        }
        for (double rate : s.atoms) CHECK(rate > 0.0);
    }

    NormalGammaParams prior;
    prior.mu0 = Eigen::Vector3d(1, 2, 3);
    const HdpModel<NormalGamma> ng{1.0, 1.0, NormalGamma{prior}};
    const auto s = forward_sample(ng, {2, 2}, rng);
    CHECK(s.data.dim() == 3);
    for (const auto& atom : s.atoms) {
        CHECK(atom.mean.size() == 3);
        CHECK(atom.precision > 0.0);
    }
    CHECK_THROWS_AS(forward_sample(gp, {}, rng), Error);
    CHECK_THROWS_AS(forward_sample(gp, {2, 0}, rng), Error);
}

TEST_CASE("urn frequencies match the franchise prior") {
    for (const auto& sizes : std::vector<std::vector<std::size_t>>{{3}, {2, 1}, {2, 2}}) {
        const double gamma = 0.8;
        const double alpha0 = 1.5;
        Counts zeros;
        for (auto n : sizes) zeros.emplace_back(n, 0);
        const auto data = GroupedDataset::counts(zeros);

        ConfigDistribution exact;
        for_each_configuration(sizes, [&](const auto& table_of, const auto& dish_of_table) {
            const auto s = build_seating(data, GammaPoisson{{1, 1}}, table_of, dish_of_table);
            exact[canonicalize(s).key()] = std::exp(crf_log_prior(s, gamma, alpha0));
        });

        Rng rng = make_rng(11);
        const int draws = 200000;
        ConfigDistribution empirical;
        for (int d = 0; d < draws; ++d) {
            const auto s = sample_crf_seating(gamma, alpha0, sizes, rng);
            empirical[canonicalize(s.table_of, s.dish_of_table).key()] += 1.0 / draws;
        }
        CHECK(total_variation(exact, empirical) <= 0.02);
    }
}

TEST_CASE("gamma variates have the right moments, including shape below one") {
    Rng rng = make_rng(12);
    for (auto [shape, rate] : {std::pair{0.1, 1.0}, {0.5, 2.0}, {1.0, 1.0}, {4.5, 0.3}}) {
        const int n = 400000;
        double s = 0.0, s2 = 0.0;
        int negative = 0;
        for (int i = 0; i < n; ++i) {
            const double x = sample_gamma(shape, rate, rng);
            negative += x < 0.0 ? 1 : 0;
            s += x;
            s2 += x * x;
        }
        const double mean = s / n;
        const double var = s2 / n - mean * mean;
        const double true_mean = shape / rate;
        const double true_var = shape / (rate * rate);
        CAPTURE(shape);
        CHECK(negative == 0);
        CHECK(std::abs(mean - true_mean) <= 5.0 * std::sqrt(true_var / n));
        CHECK(var == Approx(true_var).epsilon(0.05));
    }
}

TEST_CASE("fixed scenarios") {
    const auto gp = fixed_scenario("gp-3rates");
    CHECK(gp.data.kind() == ObsKind::Count);
    CHECK(gp.data.total_size() == 90);
    CHECK(gp.data.num_groups() == 3);
    CHECK(gp.num_true_dishes == 3);
    std::vector<int> seen(3, 0);
    for (const auto& row : gp.true_dish) {
        for (int k : row) ++seen.at(k);
    }
    CHECK(seen == std::vector<int>{30, 30, 30});

    const auto ng = fixed_scenario("ng-3means");
    CHECK(ng.data.kind() == ObsKind::RealVector);
    CHECK(ng.data.dim() == 2);
    CHECK(ng.data.total_size() == 90);

    const auto again = fixed_scenario("gp-3rates");
    for (std::size_t j = 0; j < 3; ++j) CHECK(again.data.count_group(j) == gp.data.count_group(j));

    CHECK(scenario_names().size() == 2);
    CHECK_THROWS_AS(fixed_scenario("no-such-thing"), Error);
}
