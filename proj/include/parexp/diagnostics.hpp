#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parexp/core.hpp"
#include "parexp/randomize.hpp"

namespace parexp {

/// Two-sided normal test of H0: share of test arms equals `target`.
/// Requires at least 30 entries.
double proportion_test(std::span<const Arm> arms, double target);

/// Wald chi-square test that covariate means are equal across arms, with the
/// unequal-variance covariance S_t/n_t + S_c/n_c. `covariates` holds one row
/// per user. Throws IdentificationError naming the covariates when the
/// covariance is singular.
double balance_test(const std::vector<std::vector<double>>& covariates, std::span<const Arm> arms,
                    const std::vector<std::string>& names = {});

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against U(0,1), asymptotic p-value.
KsResult ks_uniformity(std::span<const double> values);

/// Kolmogorov survival function P(K > x).
double kolmogorov_survival(double x);

/// (i/(n+1), i-th smallest value) pairs for a uniform quantile plot.
std::vector<std::pair<double, double>> uniform_quantile_pairs(std::span<const double> values);

struct BoxStats {
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Type-7 quartiles.
BoxStats box_stats(std::vector<double> values);

struct StateTau {
  BitVector state;
  double tau = 0.0;
};

struct HeterogeneitySummary {
  std::vector<double> cdf;                          // sorted taus; F at cdf[i] is (i+1)/n
  std::vector<std::vector<double>> cdf_on;          // per competitor, taus with omega_k = 1
  std::vector<std::vector<double>> cdf_off;         // omega_k = 0
  std::vector<BoxStats> by_count;                   // index = number of advertising competitors
  double pooled_tau = 0.0;
  double pooled_percentile = 0.0;                   // share of taus <= pooled_tau
};

HeterogeneitySummary heterogeneity_summary(std::span<const StateTau> taus, double pooled_tau);

/// True when the empirical CDF of `a` lies on or below that of `b` everywhere.
bool first_order_dominates(std::span<const double> a, std::span<const double> b);

}  // namespace parexp
