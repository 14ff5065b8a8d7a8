#include "parexp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "parexp/estimators.hpp"

namespace parexp {

double proportion_test(std::span<const Arm> arms, double target) {
  if (arms.empty()) throw std::invalid_argument("proportion_test: empty input");
  if (arms.size() < 30) throw std::invalid_argument("proportion_test: need at least 30 assignments");
  if (!(target >= 0.0 && target <= 1.0)) throw std::invalid_argument("proportion_test: target outside [0,1]");
  const double n = static_cast<double>(arms.size());
  const double share = empirical_share(arms);
  const double se = std::sqrt(target * (1.0 - target) / n);
  if (se == 0.0) return share == target ? 1.0 : 0.0;
  return normal_two_sided((share - target) / se);
}

double balance_test(const std::vector<std::vector<double>>& covariates, std::span<const Arm> arms,
                    const std::vector<std::string>& names) {
  if (covariates.size() != arms.size()) throw std::invalid_argument("balance_test: one covariate row per user");
  if (covariates.empty()) throw std::invalid_argument("balance_test: empty input");
  const std::size_t k = covariates.front().size();
  if (k == 0) throw std::invalid_argument("balance_test: no covariates");

  Eigen::VectorXd mean[2] = {Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
  Eigen::MatrixXd scatter[2] = {Eigen::MatrixXd::Zero(k, k), Eigen::MatrixXd::Zero(k, k)};
  double n[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    if (covariates[i].size() != k) throw std::invalid_argument("balance_test: ragged covariate rows");
    const int a = arms[i] == Arm::test ? 1 : 0;
    const Eigen::Map<const Eigen::VectorXd> x(covariates[i].data(), static_cast<Eigen::Index>(k));
    n[a] += 1.0;
    const Eigen::VectorXd delta = x - mean[a];
    mean[a] += delta / n[a];
    scatter[a].noalias() += delta * (x - mean[a]).transpose();
  }
  if (n[0] < 2.0 || n[1] < 2.0) throw IdentificationError("balance_test: each arm needs at least 2 users");

  const Eigen::MatrixXd cov = scatter[1] / ((n[1] - 1.0) * n[1]) + scatter[0] / ((n[0] - 1.0) * n[0]);
  const Eigen::VectorXd diff = mean[1] - mean[0];
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const double scale = cov.diagonal().cwiseAbs().maxCoeff();
  const auto pivots = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(scale > 0.0) || pivots.minCoeff() <= 1e-12 * scale) {
    std::string list;
    for (std::size_t c = 0; c < k; ++c) {
      if (!list.empty()) list += ", ";
      list += c < names.size() ? names[c] : "x" + std::to_string(c);
    }
    throw IdentificationError("balance_test: singular covariance for covariates [" + list + "]");
  }
  const double wald = diff.dot(ldlt.solve(diff));
  return boost::math::gamma_q(0.5 * static_cast<double>(k), 0.5 * std::max(0.0, wald));
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-10) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_uniformity(std::span<const double> values) {
  if (values.size() < 5) throw std::invalid_argument("ks_uniformity: need at least 5 values");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("ks_uniformity: value outside [0,1]");
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double above = static_cast<double>(i + 1) / n - v[i];
    const double below = v[i] - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

std::vector<std::pair<double, double>> uniform_quantile_pairs(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(static_cast<double>(i + 1) / (n + 1.0), v[i]);
  return out;
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats b;
  b.count = values.size();
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  b.min = values.front();
  b.q1 = quantile(0.25);
  b.median = quantile(0.5);
  b.q3 = quantile(0.75);
  b.max = values.back();
  return b;
}

HeterogeneitySummary heterogeneity_summary(std::span<const StateTau> taus, double pooled_tau) {
  if (taus.empty()) throw std::invalid_argument("heterogeneity_summary: empty table");
  const std::size_t width = taus.front().state.size();
  HeterogeneitySummary s;
  s.cdf_on.resize(width);
  s.cdf_off.resize(width);
  std::vector<std::vector<double>> by_count(width + 1);
  for (const auto& t : taus) {
    if (t.state.size() != width) throw std::invalid_argument("heterogeneity_summary: mixed state widths");
    s.cdf.push_back(t.tau);
    for (std::size_t k = 0; k < width; ++k) (t.state[k] ? s.cdf_on : s.cdf_off)[k].push_back(t.tau);
    by_count[static_cast<std::size_t>(t.state.count())].push_back(t.tau);
  }
  std::sort(s.cdf.begin(), s.cdf.end());
  for (auto& v : s.cdf_on) std::sort(v.begin(), v.end());
  for (auto& v : s.cdf_off) std::sort(v.begin(), v.end());
  for (auto& v : by_count) s.by_count.push_back(box_stats(std::move(v)));
  s.pooled_tau = pooled_tau;
  const auto below = std::upper_bound(s.cdf.begin(), s.cdf.end(), pooled_tau) - s.cdf.begin();
  s.pooled_percentile = static_cast<double>(below) / static_cast<double>(s.cdf.size());
  return s;
}

bool first_order_dominates(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return false;
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  auto ecdf = [](const std::vector<double>& v, double t) {
    return static_cast<double>(std::upper_bound(v.begin(), v.end(), t) - v.begin()) / static_cast<double>(v.size());
  };
  for (const auto* v : {&x, &y})
    for (double t : *v)
      if (ecdf(x, t) > ecdf(y, t)) return false;
  return true;
}

}  // namespace parexp
