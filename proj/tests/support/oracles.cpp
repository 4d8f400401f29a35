#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace oracles {

double alpha_pair_enumeration(const std::vector<std::vector<int>>& rows) {
    // category totals over retained units and per-unit disagreeing pairs
    std::map<int, double> category_totals;
    double n = 0.0;
    double observed_sum = 0.0;  // sum over units of (disagreeing ordered pairs)/(m_u - 1)
    bool any_unit = false;
    for (const auto& row : rows) {
        std::vector<int> values;
        for (int v : row) {
            if (v >= 0) values.push_back(v);
        }
        if (values.size() < 2) continue;
        any_unit = true;
        long disagreements = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (std::size_t j = 0; j < values.size(); ++j) {
                if (i != j && values[i] != values[j]) ++disagreements;
            }
            category_totals[values[i]] += 1.0;
            n += 1.0;
        }
        observed_sum += static_cast<double>(disagreements) /
                        static_cast<double>(values.size() - 1);
    }
    if (!any_unit) throw std::runtime_error("oracle: no unit with >= 2 values");

    const double d_o = observed_sum / n;
    double expected_pairs = 0.0;
    for (const auto& [c, n_c] : category_totals) {
        for (const auto& [k, n_k] : category_totals) {
            if (c != k) expected_pairs += n_c * n_k;
        }
    }
    const double d_e = expected_pairs / (n * (n - 1.0));
    if (d_e == 0.0) return 1.0;
    return 1.0 - d_o / d_e;
}

namespace {

double simpson_rule(double (*f)(double, const void*), const void* ctx, double a, double fa,
                    double b, double fb, double& fm) {
    const double m = 0.5 * (a + b);
    fm = f(m, ctx);
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_recurse(double (*f)(double, const void*), const void* ctx, double a, double fa,
                       double b, double fb, double m, double fm, double whole, double eps,
                       int depth) {
    double flm = 0.0, frm = 0.0;
    const double left = simpson_rule(f, ctx, a, fa, m, fm, flm);
    const double right = simpson_rule(f, ctx, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) {
        return left + right + delta / 15.0;
    }
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    return simpson_recurse(f, ctx, a, fa, m, fm, lm, flm, left, eps * 0.5, depth - 1) +
           simpson_recurse(f, ctx, m, fm, b, fb, rm, frm, right, eps * 0.5, depth - 1);
}

}  // namespace

double adaptive_simpson(double (*f)(double, const void*), const void* ctx, double a, double b,
                        double eps) {
    const double fa = f(a, ctx);
    const double fb = f(b, ctx);
    double fm = 0.0;
    const double whole = simpson_rule(f, ctx, a, fa, b, fb, fm);
    return simpson_recurse(f, ctx, a, fa, b, fb, 0.5 * (a + b), fm, whole, eps, 60);
}

namespace {

struct TCtx {
    double df;
};

double t_pdf(double x, const void* raw) {
    const double df = static_cast<const TCtx*>(raw)->df;
    const double log_c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                         0.5 * std::log(df * std::numbers::pi);
    return std::exp(log_c - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

struct FCtx {
    double d1, d2, lbeta;
};

// F density under x = u^2: integrand = pdf(u^2) * 2u, finite at u = 0 for
// d1 >= 1 (value 2 / (sqrt(d2) * B(1/2, d2/2)) when d1 == 1).
double f_pdf_subst(double u, const void* raw) {
    const auto& c = *static_cast<const FCtx*>(raw);
    if (u == 0.0) {
        if (c.d1 > 1.0) return 0.0;
        return 2.0 * std::exp(-0.5 * std::log(c.d2) - c.lbeta);
    }
    const double log_g = std::log(2.0) + (c.d1 - 1.0) * std::log(u) +
                         0.5 * c.d1 * std::log(c.d1) + 0.5 * c.d2 * std::log(c.d2) -
                         0.5 * (c.d1 + c.d2) * std::log(c.d2 + c.d1 * u * u) - c.lbeta;
    return std::exp(log_g);
}

}  // namespace

double t_two_tailed_p(double t, double df) {
    const double at = std::fabs(t);
    if (at == 0.0) return 1.0;
    if (std::isinf(at)) return 0.0;
    TCtx ctx{df};
    const double integral = adaptive_simpson(&t_pdf, &ctx, 0.0, at, 1e-13);
    return std::clamp(1.0 - 2.0 * integral, 0.0, 1.0);
}

double f_upper_p(double f, double d1, double d2) {
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    FCtx ctx{d1, d2,
             std::lgamma(0.5 * d1) + std::lgamma(0.5 * d2) - std::lgamma(0.5 * (d1 + d2))};
    const double integral = adaptive_simpson(&f_pdf_subst, &ctx, 0.0, std::sqrt(f), 1e-13);
    return std::clamp(1.0 - integral, 0.0, 1.0);
}

namespace {

double welch_stat(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean_var = [](const std::vector<double>& xs) {
        double m = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        double v = 0.0;
        for (double x : xs) v += (x - m) * (x - m);
        v /= static_cast<double>(xs.size() - 1);
        return std::pair<double, double>(m, v);
    };
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    const double se2 = va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size());
    if (se2 == 0.0) return 0.0;
    return (ma - mb) / std::sqrt(se2);
}

double anova_stat(const std::vector<std::vector<double>>& groups) {
    double grand = 0.0;
    std::size_t total = 0;
    for (const auto& g : groups) {
        for (double x : g) grand += x;
        total += g.size();
    }
    grand /= static_cast<double>(total);
    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        double gm = 0.0;
        for (double x : g) gm += x;
        gm /= static_cast<double>(g.size());
        ss_between += static_cast<double>(g.size()) * (gm - grand) * (gm - grand);
        for (double x : g) ss_within += (x - gm) * (x - gm);
    }
    const double df1 = static_cast<double>(groups.size()) - 1.0;
    const double df2 = static_cast<double>(total - groups.size());
    if (ss_within == 0.0) return ss_between == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (ss_between / df1) / (ss_within / df2);
}

}  // namespace

double permutation_welch_p(const std::vector<double>& a, const std::vector<double>& b, int iters,
                           std::uint64_t seed) {
    const double observed = std::fabs(welch_stat(a, b));
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::mt19937_64 rng(seed);
    long hits = 0;
    for (int i = 0; i < iters; ++i) {
        std::shuffle(pooled.begin(), pooled.end(), rng);
        const std::vector<double> pa(pooled.begin(),
                                     pooled.begin() + static_cast<long>(a.size()));
        const std::vector<double> pb(pooled.begin() + static_cast<long>(a.size()), pooled.end());
        if (std::fabs(welch_stat(pa, pb)) >= observed - 1e-12) ++hits;
    }
    return static_cast<double>(hits + 1) / static_cast<double>(iters + 1);
}

double permutation_anova_p(const std::vector<std::vector<double>>& groups, int iters,
                           std::uint64_t seed) {
    const double observed = anova_stat(groups);
    std::vector<double> pooled;
    std::vector<std::size_t> sizes;
    for (const auto& g : groups) {
        pooled.insert(pooled.end(), g.begin(), g.end());
        sizes.push_back(g.size());
    }
    std::mt19937_64 rng(seed);
    long hits = 0;
    for (int i = 0; i < iters; ++i) {
        std::shuffle(pooled.begin(), pooled.end(), rng);
        std::vector<std::vector<double>> perm;
        std::size_t offset = 0;
        for (std::size_t s : sizes) {
            perm.emplace_back(pooled.begin() + static_cast<long>(offset),
                              pooled.begin() + static_cast<long>(offset + s));
            offset += s;
        }
        if (anova_stat(perm) >= observed - 1e-12) ++hits;
    }
    return static_cast<double>(hits + 1) / static_cast<double>(iters + 1);
}

std::vector<double> nb_posterior_direct(const std::vector<std::map<int, long>>& docs,
                                        const std::vector<int>& labels, int n_classes,
                                        std::size_t vocab_size, double alpha,
                                        const std::map<int, long>& test_doc) {
    std::vector<double> prior(static_cast<std::size_t>(n_classes), 0.0);
    std::vector<std::map<int, long>> token_counts(static_cast<std::size_t>(n_classes));
    std::vector<long> class_mass(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto c = static_cast<std::size_t>(labels[d]);
        prior[c] += 1.0;
        for (const auto& [token, count] : docs[d]) {
            token_counts[c][token] += count;
            class_mass[c] += count;
        }
    }
    for (double& p : prior) p /= static_cast<double>(docs.size());

    std::vector<double> score(static_cast<std::size_t>(n_classes), 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(n_classes); ++c) {
        double s = prior[c];
        const double denom =
            static_cast<double>(class_mass[c]) + alpha * static_cast<double>(vocab_size);
        for (const auto& [token, count] : test_doc) {
            long in_class = 0;
            const auto it = token_counts[c].find(token);
            if (it != token_counts[c].end()) in_class = it->second;
            const double likelihood = (static_cast<double>(in_class) + alpha) / denom;
            s *= std::pow(likelihood, static_cast<double>(count));
        }
        score[c] = s;
        total += s;
    }
    for (double& s : score) s /= total;
    return score;
}

}  // namespace oracles
