#pragma once

#include <span>
#include <vector>

namespace focalize::stats {

/// Outcome of a significance test. df2 is only meaningful for the F test;
/// df1 may be fractional (Welch-Satterthwaite).
struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double df1 = 0.0;
    double df2 = 0.0;
};

double lbeta(double a, double b);

/// Regularized incomplete beta I_x(a,b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-tailed p for Student's t with (possibly fractional) df.
double student_t_two_tailed_p(double t, double df);

/// Upper-tail p for the F distribution with (d1, d2) df.
double f_upper_tail_p(double f, double d1, double d2);

/// Pearson's r with two-tailed p from t = r*sqrt((n-2)/(1-r^2)), df = n-2.
/// |r| = 1 is reported with p = 0. Throws LengthMismatch, ZeroVariance,
/// InsufficientData (n < 3).
TestResult pearson(std::span<const double> x, std::span<const double> y);

/// Classic one-way ANOVA; df (k-1, N-k). Throws InsufficientData unless
/// there are >= 2 groups with >= 2 values each.
TestResult anova_oneway(const std::vector<std::vector<double>>& groups);

/// Welch's two-sample t-test with Welch-Satterthwaite df, two-tailed p.
/// Throws InsufficientData when a side has < 2 values or both variances
/// are zero.
TestResult welch_t(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> xs);

/// Sample standard deviation (n-1); 0 for n < 2.
double sample_std(std::span<const double> xs);

}  // namespace focalize::stats
