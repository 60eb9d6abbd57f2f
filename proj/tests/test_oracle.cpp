#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "hdp/oracle.hpp"

using namespace hdp;
using doctest::Approx;

namespace {

using Counts = std::vector<std::vector<std::int64_t>>;

double total(const ConfigDistribution& d) {
    double s = 0.0;
    for (const auto& [key, p] : d) s += p;
    return s;
}

NormalGammaParams scalar_prior(double mu0, double kappa0, double alpha0, double beta0) {
    NormalGammaParams p;
    p.mu0 = Eigen::VectorXd::Constant(1, mu0);
    p.kappa0 = kappa0;
    p.alpha0 = alpha0;
    p.beta0 = beta0;
    return p;
}

}  // namespace

TEST_CASE("quadrature reproduces analytic predictives") {
    using V = std::vector<std::int64_t>;
    CHECK(std::exp(quad_log_pred_gp({1, 1}, V{}, V{0})) == Approx(0.5).epsilon(1e-12));
    CHECK(std::exp(quad_log_pred_gp({3, 2}, V{}, V{0})) == Approx(8.0 / 27.0).epsilon(1e-12));
    CHECK(std::exp(quad_log_pred_gp({1, 1}, V{2}, V{0})) == Approx(8.0 / 27.0).epsilon(1e-12));

    const std::vector<double> none;
    const std::vector<double> zero{0.0};
    CHECK(std::exp(quad_log_pred_ng(scalar_prior(0, 1, 1, 1), none, zero)) == Approx(0.25).epsilon(1e-9));
}

TEST_CASE("quadrature is stable under node doubling") {
    QuadSpec coarse;
    QuadSpec fine;
    fine.nodes = 64;
    const std::vector<std::int64_t> cond{4, 0, 9};
    const std::vector<std::int64_t> q{3};
    const double a = quad_log_pred_gp({0.5, 3.0}, cond, q, coarse);
    const double b = quad_log_pred_gp({0.5, 3.0}, cond, q, fine);
    CHECK(std::abs(a - b) <= 1e-12);

    const std::vector<double> vc{0.3, -1.2};
    const std::vector<double> vq{0.8};
    const double c = quad_log_pred_ng(scalar_prior(0, 0.1, 3, 2), vc, vq, coarse);
    const double d = quad_log_pred_ng(scalar_prior(0, 0.1, 3, 2), vc, vq, fine);
    CHECK(std::abs(c - d) <= 1e-10);

    QuadSpec bad;
    bad.nodes = 16;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("scalar quadrature is symmetric for symmetric conditioning") {
    const auto prior = scalar_prior(0, 2, 1.5, 0.5);
    const std::vector<double> cond{-1.0, 1.0};
    for (double x : {0.4, 2.0, 5.0}) {
        const std::vector<double> up{x}, down{-x};
        CHECK(quad_log_pred_ng(prior, cond, up) == Approx(quad_log_pred_ng(prior, cond, down)).epsilon(1e-11));
    }
}

TEST_CASE("set partitions are counted by Bell numbers") {
    const int bell[] = {1, 1, 2, 5, 15, 52, 203};
    for (int n = 0; n <= 6; ++n) CHECK(static_cast<int>(set_partitions(n).size()) == bell[n]);
}

TEST_CASE("exact posterior of two identical customers") {
    const auto data = GroupedDataset::counts({{0, 0}});
    const HdpModel<GammaPoisson> model{1.0, 1.0, GammaPoisson{{1, 1}}};
    const auto post = enumerate_exact_posterior(data, model);
    REQUIRE(post.size() == 3);
    CHECK(post.at({2, 0, 0, 1, 0}) == Approx(8.0 / 15.0).epsilon(1e-12));
    CHECK(post.at({2, 0, 1, 2, 0, 0}) == Approx(4.0 / 15.0).epsilon(1e-12));
    CHECK(post.at({2, 0, 1, 2, 0, 1}) == Approx(3.0 / 15.0).epsilon(1e-12));
    CHECK(total(post) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact posterior basics") {
    const HdpModel<GammaPoisson> model{0.4, 2.0, GammaPoisson{{2, 0.5}}};
    const auto one = enumerate_exact_posterior(GroupedDataset::counts({{7}}), model);
    REQUIRE(one.size() == 1);
    CHECK(one.begin()->second == Approx(1.0).epsilon(1e-15));

    const auto a = enumerate_exact_posterior(GroupedDataset::counts({{0, 3, 1}, {5, 2}}), model);
    CHECK(total(a) == Approx(1.0).epsilon(1e-12));
    // Within-group reordering permutes customers, so compare as multisets of
    // probabilities.
    const auto b = enumerate_exact_posterior(GroupedDataset::counts({{1, 0, 3}, {2, 5}}), model);
    std::vector<double> pa, pb;
    for (const auto& [k, p] : a) pa.push_back(p);
    for (const auto& [k, p] : b) pb.push_back(p);
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == Approx(pb[i]).epsilon(1e-12));

    Counts big{{0, 0, 0, 0, 0}, {0, 0, 0, 0}};
    CHECK_THROWS_AS(enumerate_exact_posterior(GroupedDataset::counts(big), model), Error);
}

TEST_CASE("total variation") {
    const ConfigDistribution p{{{0}, 0.5}, {{1}, 0.5}};
    const ConfigDistribution q{{{0}, 0.2}, {{2}, 0.8}};
    CHECK(total_variation(p, p) == 0.0);
    CHECK(total_variation(p, q) == Approx(0.8));
}

TEST_CASE("long Gibbs runs match the exact posterior on tiny instances") {
    struct Instance {
        Counts data;
        double gamma, alpha0;
        GammaPoissonParams prior;
    };
    const std::vector<Instance> grid{
        {{{0, 0}}, 1.0, 1.0, {1, 1}},
        {{{0, 1, 1}}, 1.0, 1.0, {1, 1}},
        {{{0, 1}, {1, 1}}, 0.7, 1.3, {1, 1}},
        {{{1}, {0, 0, 1}}, 2.0, 0.5, {0.5, 2}},
        {{{0, 1, 0, 1}}, 0.5, 3.0, {2, 1}},
    };
    std::uint64_t seed = 100;
    for (const auto& inst : grid) {
        const auto data = GroupedDataset::counts(inst.data);
        const HdpModel<GammaPoisson> model{inst.gamma, inst.alpha0, GammaPoisson{inst.prior}};
        SamplerConfig config;
        config.sweeps = 201000;
        config.burn_in = 1000;
        config.rng_seed = ++seed;
        const double tv =
            total_variation(enumerate_exact_posterior(data, model), gibbs_configuration_frequencies(data, model, config));
        CAPTURE(seed);
        CHECK(tv <= 0.02);
    }

    // Vector family, scalar observations.
    Eigen::MatrixXd g0(1, 2), g1(1, 2);
    g0 << 0.0, 0.3;
    g1 << 2.5, -0.4;
    const auto data = GroupedDataset::vectors({g0, g1});
    const HdpModel<NormalGamma> model{1.0, 1.0, NormalGamma{scalar_prior(0, 0.5, 2, 1)}};
    SamplerConfig config;
    config.sweeps = 201000;
    config.burn_in = 1000;
    config.rng_seed = 7;
    CHECK(total_variation(enumerate_exact_posterior(data, model), gibbs_configuration_frequencies(data, model, config)) <=
          0.02);
}

TEST_CASE("geweke report shape") {
    const HdpModel<GammaPoisson> model{1.0, 1.0, GammaPoisson{{5, 5}}};
    const auto report = geweke_check(model, {3, 3}, 2000, 3);
    CHECK(report.iterations == 2000);
    REQUIRE(report.statistics.size() == geweke_statistic_names().size());
    for (const auto& s : report.statistics) {
        CHECK_FALSE(s.name.empty());
        CHECK(std::isfinite(s.z));
        CHECK(std::isfinite(s.forward_mean));
    }
    CHECK(std::isfinite(report.max_abs_z()));
    CHECK_THROWS_AS(geweke_check(model, {3, 3}, 10, 3), Error);

    NormalGammaParams prior;
    const HdpModel<NormalGamma> ng{1.0, 1.0, NormalGamma{prior}};
    CHECK(std::isfinite(geweke_check(ng, {2, 2}, 1000, 4).max_abs_z()));
}

TEST_CASE("joint statistics of a fixed draw") {
    CrfSeating seating;
    seating.table_of = {{0, 0, 1}, {0}};
    seating.dish_of_table = {{0, 1}, {1}};
    seating.num_dishes = 2;
    const auto data = GroupedDataset::counts({{1, 3, 4}, {6}});
    const auto s = detail::geweke_statistics(seating, data);
    const auto& names = geweke_statistic_names();
    REQUIRE(s.size() == names.size());
    auto get = [&](const std::string& name) {
        return s[std::find(names.begin(), names.end(), name) - names.begin()];
    };
    CHECK(get("num_dishes") == 2);
    CHECK(get("num_tables") == 3);
    CHECK(get("singleton_tables") == 2);
    CHECK(get("same_dish_pairs") == Approx(2.0 / 6.0));
    CHECK(get("data_mean") == Approx(3.5));
    CHECK(get("data_second_moment") == Approx((1 + 9 + 16 + 36) / 4.0));
    // Dish 0 holds {1, 3}, dish 1 holds {4, 6}: squared deviations 1+1+1+1.
    CHECK(get("within_dish_spread") == Approx(1.0));
}

TEST_CASE("label agreement under the best matching") {
    CHECK(label_agreement({{0, 0, 1, 1}}, {{1, 1, 0, 0}}) == 1.0);
    CHECK(label_agreement({{0, 0, 1, 1}}, {{0, 0, 0, 0}}) == 0.5);
    CHECK(label_agreement({{0, 1}, {2, 2}}, {{3, 1}, {0, 0}}) == 1.0);
    CHECK(label_agreement({{0, 0, 0, 1}}, {{0, 1, 2, 3}}) == 0.5);
    CHECK_THROWS_AS(label_agreement({{0}}, {{0}, {1}}), Error);
}
