#include "hdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>

#include "hdp/numerics.hpp"

namespace hdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct GaussLegendre {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

GaussLegendre make_gauss_legendre(int n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

const GaussLegendre& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

double safe_eval(const std::function<double(double)>& f, double x) {
    const double v = f(x);
    return std::isnan(v) ? kNegInf : v;
}

// Golden-section search for the maximum of a unimodal function.
double find_mode(const std::function<double(double)>& f, double hint) {
    double step = 1.0;
    double a = hint - step;
    double b = hint + step;
    double x = hint;
    double fx = safe_eval(f, x);
    double fa = safe_eval(f, a);
    double fb = safe_eval(f, b);
    // Walk uphill until the maximum is bracketed by [a, b].
    for (int iter = 0; iter < 200 && (fa > fx || fb > fx); ++iter) {
        step *= 2.0;
        if (fb > fx) {
            a = x;
            fa = fx;
            x = b;
            fx = fb;
            b = x + step;
            fb = safe_eval(f, b);
        } else {
            b = x;
            fb = fx;
            x = a;
            fx = fa;
            a = x - step;
            fa = safe_eval(f, a);
        }
    }
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = safe_eval(f, c);
    double fd = safe_eval(f, d);
    for (int iter = 0; iter < 300 && (b - a) > 1e-12 * (1.0 + std::abs(c)); ++iter) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = safe_eval(f, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = safe_eval(f, d);
        }
    }
    return fc >= fd ? c : d;
}

// Smallest power-of-two offset from the mode, in direction `dir`, at which f
// has fallen more than `drop` below `peak`.
double tail_offset(const std::function<double(double)>& f, double mode, double peak, double drop, double dir) {
    auto below = [&](double s) { return safe_eval(f, mode + dir * s) < peak - drop; };
    double s = 1.0;
    if (below(s)) {
        while (s > 1e-300 && below(0.5 * s)) s *= 0.5;
    } else {
        while (!below(s)) {
            s *= 2.0;
            if (s > 1e300) throw Error("quadrature: integrand does not decay");
        }
    }
    return s;
}

double log_composite(const std::function<double(double)>& f, double lo, double hi, int panels,
                     const GaussLegendre& rule) {
    const double width = (hi - lo) / panels;
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(panels) * rule.nodes.size());
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            logs.push_back(safe_eval(f, mid + 0.5 * width * rule.nodes[q]) + std::log(rule.weights[q]));
        }
    }
    return log_sum_exp(logs) + std::log(0.5 * width);
}

}  // namespace

void QuadSpec::validate() const {
    if (nodes < 32) throw Error("QuadSpec: node count must be >= 32");
    if (!(rel_tol > 0.0)) throw Error("QuadSpec: tolerance must be positive");
    if (max_panels < 4) throw Error("QuadSpec: max_panels must be >= 4");
}

double log_integrate_real_line(const std::function<double(double)>& log_f, const QuadSpec& spec, double hint) {
    spec.validate();
    const double mode = find_mode(log_f, hint);
    const double peak = safe_eval(log_f, mode);
    if (!std::isfinite(peak)) throw Error("quadrature: integrand has no finite maximum");
    const double lo = mode - tail_offset(log_f, mode, peak, spec.tail_drop, -1.0);
    const double hi = mode + tail_offset(log_f, mode, peak, spec.tail_drop, +1.0);
    const auto& rule = gauss_legendre(spec.nodes);
    double previous = log_composite(log_f, lo, hi, 4, rule);
    for (int panels = 8; panels <= spec.max_panels; panels *= 2) {
        const double current = log_composite(log_f, lo, hi, panels, rule);
        // The log value itself carries rounding of order eps * |log I|.
        const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(current);
        if (std::abs(std::expm1(current - previous)) < std::max(spec.rel_tol, floor)) return current;
        previous = current;
    }
    throw Error("quadrature did not converge at max panels");
}

double log_integrate_half_line(const std::function<double(double)>& log_f, const QuadSpec& spec) {
    return log_integrate_real_line([&](double u) { return log_f(std::exp(u)) + u; }, spec, 0.0);
}

namespace {

double log_poisson(std::int64_t x, double rate) {
    const double xd = static_cast<double>(x);
    return xd * std::log(rate) - rate - log_gamma(xd + 1.0);
}

double log_gamma_density(double phi, double shape, double rate) {
    return shape * std::log(rate) - log_gamma(shape) + (shape - 1.0) * std::log(phi) - rate * phi;
}

double log_normal(double x, double mean, double precision) {
    return 0.5 * std::log(precision / (2.0 * std::numbers::pi)) - 0.5 * precision * (x - mean) * (x - mean);
}

double log_normal_gamma_density(double mu, double lambda, const NormalGammaParams& p) {
    return log_normal(mu, p.mu0(0), p.kappa0 * lambda) + log_gamma_density(lambda, p.alpha0, p.beta0);
}

}  // namespace

double quad_log_pred_gp(const GammaPoissonParams& prior, std::span<const std::int64_t> conditioning,
                        std::span<const std::int64_t> query, const QuadSpec& spec) {
    prior.validate();
    for (auto x : conditioning) {
        if (x < 0) throw Error("negative count");
    }
    for (auto x : query) {
        if (x < 0) throw Error("negative count");
    }
    auto kernel = [&](double phi, bool with_query) {
        double v = log_gamma_density(phi, prior.alpha, prior.beta);
        for (auto x : conditioning) v += log_poisson(x, phi);
        if (with_query) {
            for (auto x : query) v += log_poisson(x, phi);
        }
        return v;
    };
    const double numerator = log_integrate_half_line([&](double phi) { return kernel(phi, true); }, spec);
    const double denominator = log_integrate_half_line([&](double phi) { return kernel(phi, false); }, spec);
    return numerator - denominator;
}

double quad_log_pred_ng(const NormalGammaParams& prior, std::span<const double> conditioning,
                        std::span<const double> query, const QuadSpec& spec) {
    prior.validate();
    if (prior.dim() != 1) throw Error("quad_log_pred_ng supports d = 1 only");
    auto log_evidence = [&](bool with_query) {
        auto over_precision = [&](double lambda) {
            auto over_mean = [&](double mu) {
                double v = log_normal_gamma_density(mu, lambda, prior);
                for (double x : conditioning) v += log_normal(x, mu, lambda);
                if (with_query) {
                    for (double x : query) v += log_normal(x, mu, lambda);
                }
                return v;
            };
            return log_integrate_real_line(over_mean, spec, prior.mu0(0));
        };
        return log_integrate_half_line(over_precision, spec);
    };
    return log_evidence(true) - log_evidence(false);
}

// ---------------------------------------------------------------------------

std::vector<std::vector<int>> set_partitions(int n) {
    std::vector<std::vector<int>> out;
    if (n == 0) {
        out.emplace_back();
        return out;
    }
    std::vector<int> rgs(n, 0);
    std::vector<int> max_prefix(n, 0);  // max label among rgs[0..i-1], plus one
    std::function<void(int)> extend = [&](int i) {
        if (i == n) {
            out.push_back(rgs);
            return;
        }
        const int limit = i == 0 ? 0 : max_prefix[i - 1] + 1;
        for (int v = 0; v <= limit; ++v) {
            rgs[i] = v;
            max_prefix[i] = std::max(i == 0 ? 0 : max_prefix[i - 1], v);
            extend(i + 1);
        }
    };
    extend(0);
    return out;
}

void for_each_configuration(
    const std::vector<std::size_t>& group_sizes,
    const std::function<void(const std::vector<std::vector<int>>&, const std::vector<std::vector<int>>&)>& fn) {
    const std::size_t J = group_sizes.size();
    std::vector<std::vector<std::vector<int>>> per_group(J);
    for (std::size_t j = 0; j < J; ++j) per_group[j] = set_partitions(static_cast<int>(group_sizes[j]));

    std::vector<std::vector<int>> table_of(J);
    std::vector<int> tables(J, 0);
    std::function<void(std::size_t)> choose_group = [&](std::size_t j) {
        if (j == J) {
            const int total = std::accumulate(tables.begin(), tables.end(), 0);
            for (const auto& dishes : set_partitions(total)) {
                std::vector<std::vector<int>> dish_of_table(J);
                int offset = 0;
                for (std::size_t g = 0; g < J; ++g) {
                    dish_of_table[g].assign(dishes.begin() + offset, dishes.begin() + offset + tables[g]);
                    offset += tables[g];
                }
                fn(table_of, dish_of_table);
            }
            return;
        }
        for (const auto& partition : per_group[j]) {
            table_of[j] = partition;
            tables[j] = partition.empty() ? 0 : *std::max_element(partition.begin(), partition.end()) + 1;
            choose_group(j + 1);
        }
    };
    choose_group(0);
}

double total_variation(const ConfigDistribution& p, const ConfigDistribution& q) {
    double l1 = 0.0;
    for (const auto& [key, prob] : p) {
        auto it = q.find(key);
        l1 += std::abs(prob - (it == q.end() ? 0.0 : it->second));
    }
    for (const auto& [key, prob] : q) {
        if (!p.contains(key)) l1 += prob;
    }
    return 0.5 * l1;
}

// ---------------------------------------------------------------------------

double GewekeReport::max_abs_z() const {
    double m = 0.0;
    for (const auto& s : statistics) m = std::max(m, std::abs(s.z));
    return m;
}

double data_mean(const GroupedDataset& data) {
    double sum = 0.0;
    for (std::size_t j = 0; j < data.num_groups(); ++j) {
        for (std::size_t i = 0; i < data.group_size(j); ++i) {
            sum += data.kind() == ObsKind::Count ? static_cast<double>(data.count(j, i)) : data.vector(j, i)(0);
        }
    }
    return sum / static_cast<double>(data.total_size());
}

const std::vector<std::string>& geweke_statistic_names() {
    static const std::vector<std::string> names = {"num_dishes",      "num_tables", "singleton_tables",
                                                   "same_dish_pairs", "data_mean",  "data_second_moment",
                                                   "within_dish_spread"};
    return names;
}

namespace detail {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double iid_variance_of_mean(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size());
}

// Variance of the mean from non-overlapping batch means.
double batch_variance_of_mean(const std::vector<double>& v, std::size_t batches = 100) {
    const std::size_t size = v.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t q = b * size; q < (b + 1) * size; ++q) s += v[q];
        means.push_back(s / static_cast<double>(size));
    }
    return iid_variance_of_mean(means);
}

GewekeStatistic compare(const std::string& name, const std::vector<double>& forward,
                        const std::vector<double>& chain) {
    GewekeStatistic s;
    s.name = name;
    s.forward_mean = mean_of(forward);
    s.chain_mean = mean_of(chain);
    const double var = iid_variance_of_mean(forward) + batch_variance_of_mean(chain);
    s.z = var > 0.0 ? (s.chain_mean - s.forward_mean) / std::sqrt(var) : 0.0;
    return s;
}

}  // namespace

std::vector<double> geweke_statistics(const CrfSeating& seating, const GroupedDataset& data) {
    const auto value = [&](std::size_t j, std::size_t i) {
        return data.kind() == ObsKind::Count ? static_cast<double>(data.count(j, i)) : data.vector(j, i)(0);
    };
    const double n = static_cast<double>(data.total_size());
    double singletons = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
    std::vector<double> dish_n(seating.num_dishes, 0.0), dish_sum(seating.num_dishes, 0.0);
    for (std::size_t j = 0; j < data.num_groups(); ++j) {
        std::vector<int> occupancy(seating.dish_of_table[j].size(), 0);
        for (std::size_t i = 0; i < data.group_size(j); ++i) {
            const double x = value(j, i);
            const int k = seating.dish_of(j, i);
            ++occupancy[seating.table_of[j][i]];
            sum += x;
            sum_sq += x * x;
            dish_n[k] += 1.0;
            dish_sum[k] += x;
        }
        for (int c : occupancy) singletons += c == 1 ? 1.0 : 0.0;
    }
    double same_dish_pairs = 0.0;
    double between = 0.0;
    for (int k = 0; k < seating.num_dishes; ++k) {
        same_dish_pairs += dish_n[k] * (dish_n[k] - 1.0) / 2.0;
        if (dish_n[k] > 0.0) between += dish_sum[k] * dish_sum[k] / dish_n[k];
    }
    const double pairs = n * (n - 1.0) / 2.0;
    return {static_cast<double>(seating.num_dishes),
            static_cast<double>(seating.num_tables()),
            singletons,
            pairs > 0.0 ? same_dish_pairs / pairs : 0.0,
            sum / n,
            sum_sq / n,
            (sum_sq - between) / n};
}

GewekeReport geweke_summarize(const GewekeSamples& forward, const GewekeSamples& chain) {
    const auto& names = geweke_statistic_names();
    if (forward.columns.size() != names.size() || chain.columns.size() != names.size()) {
        throw Error("geweke_summarize: statistic count mismatch");
    }
    GewekeReport report;
    for (std::size_t s = 0; s < names.size(); ++s) {
        report.statistics.push_back(compare(names[s], forward.columns[s], chain.columns[s]));
    }
    return report;
}

}  // namespace detail

double label_agreement(const std::vector<std::vector<int>>& truth, const std::vector<std::vector<int>>& inferred) {
    if (truth.size() != inferred.size()) throw Error("label_agreement: group count mismatch");
    int truth_labels = 0;
    int inferred_labels = 0;
    std::size_t total = 0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (truth[j].size() != inferred[j].size()) throw Error("label_agreement: group size mismatch");
        for (std::size_t i = 0; i < truth[j].size(); ++i) {
            truth_labels = std::max(truth_labels, truth[j][i] + 1);
            inferred_labels = std::max(inferred_labels, inferred[j][i] + 1);
            ++total;
        }
    }
    if (total == 0) return 1.0;
    if (truth_labels > 20) throw Error("label_agreement: too many true labels");
    std::vector<std::vector<long>> table(inferred_labels, std::vector<long>(truth_labels, 0));
    for (std::size_t j = 0; j < truth.size(); ++j) {
        for (std::size_t i = 0; i < truth[j].size(); ++i) ++table[inferred[j][i]][truth[j][i]];
    }
    // best[mask]: largest matched count using exactly the true labels in mask,
    // each matched to a distinct inferred label seen so far.
    const std::size_t masks = std::size_t{1} << truth_labels;
    std::vector<long> best(masks, -1);
    best[0] = 0;
    for (int a = 0; a < inferred_labels; ++a) {
        auto next = best;
        for (std::size_t mask = 0; mask < masks; ++mask) {
            if (best[mask] < 0) continue;
            for (int b = 0; b < truth_labels; ++b) {
                if (mask & (std::size_t{1} << b)) continue;
                auto& slot = next[mask | (std::size_t{1} << b)];
                slot = std::max(slot, best[mask] + table[a][b]);
            }
        }
        best = std::move(next);
    }
    return static_cast<double>(*std::max_element(best.begin(), best.end())) / static_cast<double>(total);
}

}  // namespace hdp
