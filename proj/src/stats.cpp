#include "focalize/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "focalize/errors.hpp"

namespace focalize::stats {

double lbeta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// continued fraction for the incomplete beta (modified Lentz)
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DataError("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - lbeta(b, a)) *
                     beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
    if (df <= 0.0) throw DataError("t distribution needs df > 0");
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    double p = regularized_incomplete_beta(df / 2.0, 0.5, x);
    return std::clamp(p, 0.0, 1.0);
}

double f_upper_tail_p(double f, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw DataError("F distribution needs positive df");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double x = d2 / (d2 + d1 * f);
    double p = regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x);
    return std::clamp(p, 0.0, 1.0);
}

double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

TestResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch("pearson inputs differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw InsufficientData("pearson needs n >= 3");

    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ZeroVariance("pearson input has zero variance");

    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);

    TestResult res;
    res.statistic = r;
    res.df1 = static_cast<double>(n - 2);
    const double denom = 1.0 - r * r;
    if (denom <= 0.0) {
        res.p_value = 0.0;
    } else {
        const double t = r * std::sqrt(res.df1 / denom);
        res.p_value = student_t_two_tailed_p(t, res.df1);
    }
    return res;
}

TestResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw InsufficientData("ANOVA needs >= 2 groups");
    std::size_t total_n = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw InsufficientData("every ANOVA group needs >= 2 values");
        total_n += g.size();
    }

    double grand_sum = 0.0;
    for (const auto& g : groups) {
        for (double v : g) grand_sum += v;
    }
    const double grand_mean = grand_sum / static_cast<double>(total_n);

    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        const double gm = mean(g);
        ss_between += static_cast<double>(g.size()) * (gm - grand_mean) * (gm - grand_mean);
        for (double v : g) ss_within += (v - gm) * (v - gm);
    }

    TestResult res;
    res.df1 = static_cast<double>(groups.size() - 1);
    res.df2 = static_cast<double>(total_n - groups.size());
    if (ss_within == 0.0) {
        // no within-group variance: either a completely constant dataset
        // (F defined as 0) or infinite separation
        if (ss_between == 0.0) {
            res.statistic = 0.0;
            res.p_value = 1.0;
        } else {
            res.statistic = std::numeric_limits<double>::infinity();
            res.p_value = 0.0;
        }
        return res;
    }
    const double ms_between = ss_between / res.df1;
    const double ms_within = ss_within / res.df2;
    res.statistic = ms_between / ms_within;
    res.p_value = f_upper_tail_p(res.statistic, res.df1, res.df2);
    return res;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw InsufficientData("welch_t needs >= 2 values per side");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double sa = sample_std(a);
    const double sb = sample_std(b);
    const double va = sa * sa / na;
    const double vb = sb * sb / nb;
    if (va + vb == 0.0) throw InsufficientData("welch_t on two zero-variance samples");

    TestResult res;
    res.statistic = (mean(a) - mean(b)) / std::sqrt(va + vb);
    res.df1 = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    res.p_value = student_t_two_tailed_p(res.statistic, res.df1);
    return res;
}

}  // namespace focalize::stats
