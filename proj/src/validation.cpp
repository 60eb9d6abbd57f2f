#include "hdp/validation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "hdp/numerics.hpp"
#include "hdp/oracle.hpp"
#include "hdp/random.hpp"
#include "hdp/seating.hpp"

namespace hdp {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

template <class... Parts>
std::string label(const Parts&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
}

std::string join(const std::vector<std::int64_t>& xs) {
    std::string s = "{";
    for (std::size_t q = 0; q < xs.size(); ++q) s += (q ? "," : "") + std::to_string(xs[q]);
    return s + "}";
}

}  // namespace

void ValidationReport::add(std::string name, double expected, double got, double tolerance, bool pass) {
    lines_.push_back({std::move(name), expected, got, tolerance, pass});
}

void ValidationReport::add_relative_log(std::string name, double log_expected, double log_got, double tol) {
    const double rel = std::abs(std::expm1(log_got - log_expected));
    add(std::move(name), std::exp(log_expected), std::exp(log_got), tol, rel <= tol);
}

void ValidationReport::add_absolute(std::string name, double expected, double got, double tol) {
    add(std::move(name), expected, got, tol, std::abs(got - expected) <= tol);
}

void ValidationReport::append(const ValidationReport& other) {
    lines_.insert(lines_.end(), other.lines_.begin(), other.lines_.end());
}

bool ValidationReport::all_passed() const { return failures() == 0; }

std::size_t ValidationReport::failures() const {
    std::size_t n = 0;
    for (const auto& l : lines_) n += l.pass ? 0 : 1;
    return n;
}

void ValidationReport::print(std::ostream& os) const {
    for (const auto& l : lines_) {
        os << l.name << " expected=" << fmt_double(l.expected) << " got=" << fmt_double(l.got)
           << " tol=" << fmt_double(l.tolerance) << ' ' << (l.pass ? "PASS" : "FAIL") << '\n';
    }
}

// ---------------------------------------------------------------------------

std::vector<GpCase> gp_validation_grid(Grid grid) {
    const bool full = grid == Grid::Full;
    const std::vector<double> alphas = full ? std::vector<double>{0.5, 1.0, 2.0, 5.0} : std::vector<double>{0.5, 5.0};
    const std::vector<double> betas = full ? std::vector<double>{0.5, 1.0, 3.0} : std::vector<double>{1.0, 3.0};
    const std::vector<int> sizes = full ? std::vector<int>{0, 1, 2, 3, 4, 5} : std::vector<int>{0, 5};
    const std::vector<std::int64_t> queries = full ? std::vector<std::int64_t>{0, 1, 4, 10}
                                                   : std::vector<std::int64_t>{0, 10};
    Rng rng = make_rng(1001);
    std::vector<GpCase> cases;
    for (double a : alphas) {
        for (double b : betas) {
            for (int n : sizes) {
                std::vector<std::int64_t> cond;
                for (int q = 0; q < n; ++q) cond.push_back(static_cast<std::int64_t>(rng() % 7));
                for (auto x : queries) cases.push_back({{a, b}, cond, x});
            }
        }
    }
    return cases;
}

std::vector<NgCase> ng_validation_grid(Grid grid) {
    const bool full = grid == Grid::Full;
    Rng rng = make_rng(2002);
    std::vector<NgCase> cases;
    int index = 0;
    for (double kappa : {0.1, 1.0, 10.0}) {
        for (double alpha : {0.5, 1.0, 3.0}) {
            for (double beta : {0.5, 2.0}) {
                for (int n = 0; n <= 5; ++n) {
                    NgCase c;
                    c.prior.mu0 = Eigen::VectorXd::Constant(1, 2.0 * uniform01(rng) - 1.0);
                    c.prior.kappa0 = kappa;
                    c.prior.alpha0 = alpha;
                    c.prior.beta0 = beta;
                    for (int q = 0; q < n; ++q) c.conditioning.push_back(1.5 * sample_normal(rng) + 0.5);
                    c.query = 6.0 * uniform01(rng) - 3.0;
                    if (full || index % 9 == 0) cases.push_back(c);
                    ++index;
                }
            }
        }
    }
    return cases;
}

ValidationReport validate_gp_quadrature(Grid grid) {
    ValidationReport report;
    for (const auto& c : gp_validation_grid(grid)) {
        const double closed = gp_log_pred_one(gp_posterior(c.prior, CountStats::of(c.conditioning)), c.query);
        const std::int64_t q[1] = {c.query};
        const double quad = quad_log_pred_gp(c.prior, c.conditioning, q);
        report.add_relative_log(label("gp_pred_vs_quad[a=", c.prior.alpha, ",b=", c.prior.beta,
                                      ",data=", join(c.conditioning), ",x=", c.query, "]"),
                                quad, closed, 1e-8);
    }
    return report;
}

ValidationReport validate_ng_quadrature(Grid grid) {
    ValidationReport report;
    for (const auto& c : ng_validation_grid(grid)) {
        Eigen::MatrixXd cond(1, static_cast<Eigen::Index>(c.conditioning.size()));
        for (std::size_t q = 0; q < c.conditioning.size(); ++q) cond(0, static_cast<Eigen::Index>(q)) = c.conditioning[q];
        const auto post = ng_posterior(c.prior, VectorStats::of(cond));
        const double closed = ng_log_pred_one(post, Eigen::VectorXd::Constant(1, c.query));
        const double q[1] = {c.query};
        const double quad = quad_log_pred_ng(c.prior, c.conditioning, q);
        report.add_relative_log(label("ng_pred_vs_quad[k=", c.prior.kappa0, ",a=", c.prior.alpha0, ",b=",
                                      c.prior.beta0, ",n=", c.conditioning.size(), ",x=", fmt_double(c.query), "]"),
                                quad, closed, 1e-6);
    }
    return report;
}

double nb_total_mass(const GammaPoissonParams& post, double tail_tol) {
    double total = 0.0;
    for (std::int64_t x = 0;; ++x) {
        const double p = std::exp(gp_log_pred_one(post, x));
        total += p;
        const double xd = static_cast<double>(x);
        // Successive-term ratio p(x+1)/p(x) = (x+a)/(x+1) / (b+1), non-increasing
        // in x when a >= 1 and bounded by 1/(b+1) when a < 1.
        const double ratio = post.alpha >= 1.0 ? (xd + post.alpha) / (xd + 1.0) / (post.beta + 1.0)
                                               : 1.0 / (post.beta + 1.0);
        if (ratio < 1.0 && p * ratio / (1.0 - ratio) < tail_tol) break;
        if (x > 100000000) throw Error("nb_total_mass: tail did not close");
    }
    return total;
}

double student_t_total_mass(const NormalGammaParams& post) {
    if (post.dim() != 1) throw Error("student_t_total_mass supports d = 1 only");
    const double scale = std::sqrt(post.beta0 * (post.kappa0 + 1.0) / (post.alpha0 * post.kappa0));
    const double center = post.mu0(0);
    auto in_u = [&](double u) {
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, center + scale * std::sinh(u));
        return ng_log_pred_one(post, x) + std::log(scale * std::cosh(u));
    };
    return std::exp(log_integrate_real_line(in_u));
}

ValidationReport validate_nb_normalization(Grid grid) {
    ValidationReport report;
    const std::vector<double> alphas = {0.5, 1.0, 2.5, 7.0, 15.0};
    const std::vector<double> betas = {0.2, 1.0, 4.0, 10.0};
    int index = 0;
    for (double a : alphas) {
        for (double b : betas) {
            if (grid == Grid::Full || index % 5 == 0) {
                report.add_absolute(label("nb_pmf_sums_to_one[a=", a, ",b=", b, "]"), 1.0, nb_total_mass({a, b}), 1e-8);
            }
            ++index;
        }
    }
    return report;
}

ValidationReport validate_t_normalization(Grid grid) {
    ValidationReport report;
    const double settings[10][4] = {{0.0, 1.0, 1.0, 1.0},  {0.0, 0.1, 0.5, 0.5}, {2.0, 10.0, 3.0, 2.0},
                                    {-1.5, 2.0, 0.5, 4.0}, {0.3, 5.0, 7.5, 0.2}, {10.0, 1.0, 2.0, 20.0},
                                    {0.0, 0.5, 1.5, 1.0},  {-4.0, 50.0, 25.0, 3.0}, {1.0, 3.0, 0.75, 0.1},
                                    {0.0, 1.0, 100.0, 100.0}};
    int index = 0;
    for (const auto& s : settings) {
        if (grid == Grid::Full || index % 3 == 0) {
            NormalGammaParams post;
            post.mu0 = Eigen::VectorXd::Constant(1, s[0]);
            post.kappa0 = s[1];
            post.alpha0 = s[2];
            post.beta0 = s[3];
            report.add_absolute(label("student_t_integrates_to_one[mu=", s[0], ",k=", s[1], ",a=", s[2], ",b=", s[3], "]"),
                                1.0, student_t_total_mass(post), 1e-8);
        }
        ++index;
    }
    return report;
}

ValidationReport validate_block_agreement(Grid grid) {
    ValidationReport report;
    constexpr double kTol = 1e-10;
    Rng rng = make_rng(3003);
    const int repeats = grid == Grid::Full ? 6 : 2;

    for (int rep = 0; rep < repeats; ++rep) {
        const GammaPoissonParams prior{0.5 + 4.0 * uniform01(rng), 0.5 + 2.5 * uniform01(rng)};
        std::vector<std::int64_t> cond;
        for (int q = 0, n = static_cast<int>(rng() % 6); q < n; ++q) cond.push_back(static_cast<std::int64_t>(rng() % 9));
        for (int size = 1; size <= 4; ++size) {
            std::vector<std::int64_t> block;
            for (int q = 0; q < size; ++q) block.push_back(static_cast<std::int64_t>(rng() % 9));
            const auto w = CountStats::of(cond);
            const auto t = CountStats::of(block);
            const double closed = gp_log_pred_block(gp_posterior(prior, w), block);
            const double ratio = gp_log_marginal(prior, w + t) - gp_log_marginal(prior, w);
            double chain = 0.0;
            auto running = w;
            for (auto x : block) {
                chain += gp_log_pred_one(gp_posterior(prior, running), x);
                running.add(x);
            }
            const std::string tag = label("[rep=", rep, ",|W|=", cond.size(), ",|T|=", size, "]");
            report.add_absolute("gp_block_closed_vs_ratio" + tag, ratio, closed, kTol);
            report.add_absolute("gp_block_closed_vs_chain" + tag, chain, closed, kTol);
        }
    }

    for (int rep = 0; rep < repeats; ++rep) {
        const Eigen::Index d = rep % 2 == 0 ? 1 : 3;
        NormalGammaParams prior;
        prior.mu0 = Eigen::VectorXd::NullaryExpr(d, [&] { return sample_normal(rng); });
        prior.kappa0 = 0.1 + 5.0 * uniform01(rng);
        prior.alpha0 = 0.5 + 3.0 * uniform01(rng);
        prior.beta0 = 0.5 + 2.0 * uniform01(rng);
        const Eigen::Index n = static_cast<Eigen::Index>(rng() % 6);
        const Eigen::MatrixXd cond = Eigen::MatrixXd::NullaryExpr(d, n, [&] { return 2.0 * sample_normal(rng); });
        for (Eigen::Index size = 1; size <= 4; ++size) {
            const Eigen::MatrixXd block = Eigen::MatrixXd::NullaryExpr(d, size, [&] { return 2.0 * sample_normal(rng); });
            const auto w = VectorStats::of(cond);
            const double direct = ng_log_pred_block(ng_posterior(prior, w), block);
            const double ratio = ng_log_marginal(prior, w + VectorStats::of(block)) - ng_log_marginal(prior, w);
            double chain = 0.0;
            auto running = w;
            for (Eigen::Index c = 0; c < size; ++c) {
                chain += ng_log_pred_one(ng_posterior(prior, running), block.col(c));
                running.add(block.col(c));
            }
            const std::string tag = label("[rep=", rep, ",d=", d, ",|W|=", n, ",|T|=", size, "]");
            report.add_absolute("ng_block_direct_vs_ratio" + tag, ratio, direct, kTol);
            report.add_absolute("ng_block_direct_vs_chain" + tag, chain, direct, kTol);
        }
    }
    return report;
}

ValidationReport validate_exact_enumeration() {
    ValidationReport report;
    {
        const auto data = GroupedDataset::counts({{0, 0}});
        const HdpModel<GammaPoisson> model{1.0, 1.0, GammaPoisson{{1.0, 1.0}}};
        const auto posterior = enumerate_exact_posterior(data, model);
        // Keys: one table; two tables sharing a dish; two tables on two dishes.
        const std::vector<int> one_table = {2, 0, 0, 1, 0};
        const std::vector<int> shared = {2, 0, 1, 2, 0, 0};
        const std::vector<int> split = {2, 0, 1, 2, 0, 1};
        auto prob = [&](const std::vector<int>& key) {
            auto it = posterior.find(key);
            return it == posterior.end() ? 0.0 : it->second;
        };
        report.add_absolute("exact_posterior_one_table", 8.0 / 15.0, prob(one_table), 1e-12);
        report.add_absolute("exact_posterior_shared_dish", 4.0 / 15.0, prob(shared), 1e-12);
        report.add_absolute("exact_posterior_two_dishes", 3.0 / 15.0, prob(split), 1e-12);
        double total = 0.0;
        for (const auto& [key, p] : posterior) total += p;
        report.add_absolute("exact_posterior_total_mass", 1.0, total, 1e-12);
    }

    const std::vector<std::vector<std::size_t>> shapes = {{1}, {2}, {3}, {4}, {1, 1}, {2, 1}, {2, 2}, {1, 3}};
    for (const auto& shape : shapes) {
        for (const auto& [gamma, alpha0] : {std::pair{1.0, 1.0}, std::pair{0.3, 2.5}}) {
            std::vector<std::vector<std::int64_t>> zeros;
            for (auto n : shape) zeros.emplace_back(n, 0);
            const auto data = GroupedDataset::counts(zeros);
            const GammaPoisson family{{1.0, 1.0}};
            std::vector<double> logs;
            for_each_configuration(shape, [&](const auto& table_of, const auto& dish_of_table) {
                logs.push_back(crf_log_prior(build_seating(data, family, table_of, dish_of_table), gamma, alpha0));
            });
            std::string shape_label;
            for (auto n : shape) shape_label += (shape_label.empty() ? "" : "x") + std::to_string(n);
            report.add_absolute(label("crf_prior_log_total[shape=", shape_label, ",g=", gamma, ",a0=", alpha0, "]"),
                                0.0, log_sum_exp(logs), 1e-10);
        }
    }
    return report;
}

ValidationReport run_validation(Grid grid) {
    ValidationReport report;
    report.append(validate_gp_quadrature(grid));
    report.append(validate_ng_quadrature(grid));
    report.append(validate_nb_normalization(grid));
    report.append(validate_t_normalization(grid));
    report.append(validate_block_agreement(grid));
    report.append(validate_exact_enumeration());
    return report;
}

}  // namespace hdp
