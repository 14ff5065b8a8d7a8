#include "parexp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace parexp {

FocalData focal_data(const Roster& roster, const FocalPartitions& partitions, const AssignmentTable& assignments,
                     std::span<const OutcomeRecord> outcomes, const std::vector<UserId>* sample) {
  const std::size_t focal_pos = roster.require_position(partitions.focal);
  FocalData data;
  data.focal = partitions.focal;
  data.competitors = roster.size() - 1;
  data.partitions = static_cast<int>(partitions.size());
  for (const auto& r : outcomes) {
    if (r.focal != partitions.focal) continue;
    if (sample != nullptr && !std::binary_search(sample->begin(), sample->end(), r.user)) continue;
    const auto* row = assignments.find(r.user);
    if (row == nullptr) throw std::invalid_argument("focal_data: outcome for unassigned user " + std::to_string(r.user));
    const int label = partitions.label_of(r.user);
    if (label == 0) throw std::invalid_argument("focal_data: user " + std::to_string(r.user) + " outside TA_j");
    data.rows.push_back({r.user, row->partial(focal_pos), label, (*row)[focal_pos], r.y});
  }
  return data;
}

const char* to_string(CellFlag flag) {
  switch (flag) {
    case CellFlag::ok: return "OK";
    case CellFlag::low_support: return "LOW_SUPPORT";
    case CellFlag::not_identified: return "NOT_IDENTIFIED";
  }
  return "?";
}

const CellEstimate* AteTable::find(const CellKey& key) const {
  auto it = cells.find(key);
  return it == cells.end() ? nullptr : &it->second;
}

namespace {

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double y) {
    ++n;
    const double delta = y - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (y - mean);
  }
};

Moments moments(std::span<const double> ys) {
  Moments m;
  for (double y : ys) m.add(y);
  return m;
}

}  // namespace

CellEstimate cell_ols(std::span<const double> test, std::span<const double> control, std::size_t min_per_arm) {
  CellEstimate e;
  e.n_test = test.size();
  e.n_control = control.size();
  if (test.empty() || control.empty()) {
    e.flag = CellFlag::not_identified;
    e.alpha = e.tau = e.se_alpha = e.se_tau = std::nan("");
    return e;
  }
  const Moments t = moments(test);
  const Moments c = moments(control);
  const double nt = static_cast<double>(t.n);
  const double nc = static_cast<double>(c.n);
  e.alpha = c.mean;
  e.tau = t.mean - c.mean;
  // HC0: residual variance with divisor n, per arm.
  const double var_c = c.m2 / nc / nc;
  const double var_t = t.m2 / nt / nt;
  e.se_alpha = std::sqrt(var_c);
  e.se_tau = std::sqrt(var_c + var_t);
  e.flag = (t.n < min_per_arm || c.n < min_per_arm) ? CellFlag::low_support : CellFlag::ok;
  return e;
}

AteTable stacked_ols(const FocalData& data, std::size_t min_per_arm) {
  std::map<CellKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.rows.size(); ++i)
    groups[{data.rows[i].d, data.rows[i].partition}].push_back(i);

  AteTable table;
  table.focal = data.focal;
  table.competitors = data.competitors;
  for (const auto& [key, idx] : groups) {
    // Block of X'X for [1, D] within the cell: [[n, n1], [n1, n1]].
    double n = 0, n1 = 0, sy = 0, sdy = 0;
    for (std::size_t i : idx) {
      const auto& r = data.rows[i];
      n += 1;
      sy += r.y;
      if (r.treated) {
        n1 += 1;
        sdy += r.y;
      }
    }
    CellEstimate e;
    e.n_test = static_cast<std::size_t>(n1);
    e.n_control = static_cast<std::size_t>(n - n1);
    const double det = n * n1 - n1 * n1;
    if (n1 == 0 || n1 == n || det == 0.0) {
      e.flag = CellFlag::not_identified;
      e.alpha = e.tau = e.se_alpha = e.se_tau = std::nan("");
      table.excluded.emplace(key, e);
      continue;
    }
    const double a = (n1 * sy - n1 * sdy) / det;
    const double b = (n * sdy - n1 * sy) / det;
    // Meat: sum of e^2 x x'.
    double m00 = 0, m01 = 0, m11 = 0;
    for (std::size_t i : idx) {
      const auto& r = data.rows[i];
      const double d = r.treated ? 1.0 : 0.0;
      const double res = r.y - a - b * d;
      const double r2 = res * res;
      m00 += r2;
      m01 += r2 * d;
      m11 += r2 * d * d;
    }
    // Bread: inverse of [[n, n1], [n1, n1]].
    const double i00 = n1 / det, i01 = -n1 / det, i11 = n / det;
    // V = B M B for symmetric 2x2 matrices.
    const double t00 = i00 * m00 + i01 * m01, t01 = i00 * m01 + i01 * m11;
    const double t10 = i01 * m00 + i11 * m01, t11 = i01 * m01 + i11 * m11;
    const double v00 = t00 * i00 + t01 * i01;
    const double v11 = t10 * i01 + t11 * i11;
    e.alpha = a;
    e.tau = b;
    e.se_alpha = std::sqrt(std::max(0.0, v00));
    e.se_tau = std::sqrt(std::max(0.0, v11));
    e.flag = (e.n_test < min_per_arm || e.n_control < min_per_arm) ? CellFlag::low_support : CellFlag::ok;
    table.cells.emplace(key, e);
  }
  return table;
}

CellEstimate pooled_ols(const FocalData& data) {
  std::vector<double> test, control;
  for (const auto& r : data.rows) (r.treated ? test : control).push_back(r.y);
  return cell_ols(test, control, 1);
}

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

InteractionFit interaction_ols(std::span<const std::uint8_t> dj, std::span<const std::uint8_t> dk,
                               std::span<const double> y) {
  if (dj.size() != y.size() || dk.size() != y.size())
    throw std::invalid_argument("interaction_ols: inputs differ in length");
  InteractionFit fit;
  for (std::size_t i = 0; i < y.size(); ++i) ++fit.counts[(dj[i] ? 1 : 0) + (dk[i] ? 2 : 0)];
  static constexpr const char* kCell[4] = {"(0,0)", "(1,0)", "(0,1)", "(1,1)"};
  for (int c = 0; c < 4; ++c)
    if (fit.counts[c] == 0)
      throw IdentificationError(std::string("interaction_ols: empty (D_j, D_k) cell ") + kCell[c]);

  Eigen::Matrix4d xtx = Eigen::Matrix4d::Zero();
  Eigen::Vector4d xty = Eigen::Vector4d::Zero();
  auto row = [&](std::size_t i) {
    const double a = dj[i] ? 1.0 : 0.0, b = dk[i] ? 1.0 : 0.0;
    return Eigen::Vector4d(1.0, a, b, a * b);
  };
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Eigen::Vector4d x = row(i);
    xtx.noalias() += x * x.transpose();
    xty += x * y[i];
  }
  const Eigen::Matrix4d bread = xtx.inverse();
  const Eigen::Vector4d beta = bread * xty;
  Eigen::Matrix4d meat = Eigen::Matrix4d::Zero();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Eigen::Vector4d x = row(i);
    const double e = y[i] - x.dot(beta);
    meat.noalias() += (e * e) * (x * x.transpose());
  }
  const Eigen::Matrix4d cov = bread * meat * bread;
  for (int c = 0; c < 4; ++c) {
    fit.coef[c] = beta[c];
    fit.se[c] = std::sqrt(std::max(0.0, cov(c, c)));
    fit.p_value[c] = fit.se[c] > 0.0 ? normal_two_sided(beta[c] / fit.se[c]) : (beta[c] == 0.0 ? 1.0 : 0.0);
  }
  return fit;
}

}  // namespace parexp
