#include "parexp/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "parexp/parallel.hpp"
#include "parexp/randomize.hpp"

namespace parexp {

double kernel_weight(std::span<const std::uint8_t> Z, std::span<const std::uint8_t> z, std::span<const double> lambda) {
  if (Z.size() != z.size() || z.size() != lambda.size())
    throw std::invalid_argument("kernel_weight: dimension mismatch");
  double w = 1.0;
  for (std::size_t v = 0; v < lambda.size(); ++v) {
    if (!(lambda[v] >= 0.0 && lambda[v] <= 1.0))
      throw std::invalid_argument("kernel_weight: lambda[" + std::to_string(v) + "] outside [0,1]");
    if (Z[v] != z[v]) w *= lambda[v];
  }
  return w;
}

KernelData::KernelData(const FocalData& data) : d_width_(data.competitors), partitions_(data.partitions) {
  if (d_width_ > 64) throw std::invalid_argument("KernelData: too many competitors");
  std::map<CellKey, KernelCell> grouped;
  for (const auto& r : data.rows) {
    if (r.d.size() != d_width_) throw std::invalid_argument("KernelData: inconsistent assignment width");
    if (r.partition < 1 || r.partition > partitions_) throw std::invalid_argument("KernelData: bad partition label");
    CellKey key{r.d, r.partition};
    auto [it, fresh] = grouped.try_emplace(key);
    if (fresh) it->second.key = key;
    ArmStats& a = it->second.arm[r.treated ? 1 : 0];
    a.n += 1.0;
    const double delta = r.y - a.mean;
    a.mean += delta / a.n;
    a.m2 += delta * (r.y - a.mean);
    ++observations_;
  }
  for (auto& [key, cell] : grouped) cells_.push_back(cell);

  active_.assign(dims(), false);
  if (!cells_.empty()) {
    const std::uint64_t first = cells_.front().key.d.bits();
    for (const auto& c : cells_) {
      const std::uint64_t diff = c.key.d.bits() ^ first;
      for (std::size_t v = 0; v < d_width_; ++v)
        if ((diff >> v) & 1U) active_[v] = true;
    }
    std::vector<bool> seen(static_cast<std::size_t>(partitions_) + 1, false);
    int distinct = 0;
    for (const auto& c : cells_) {
      if (!seen[static_cast<std::size_t>(c.key.partition)]) ++distinct;
      seen[static_cast<std::size_t>(c.key.partition)] = true;
    }
    if (distinct > 1)
      for (int s = 1; s <= partitions_; ++s)
        if (seen[static_cast<std::size_t>(s)]) active_[d_width_ + static_cast<std::size_t>(s) - 1] = true;
  }
}

std::vector<std::uint8_t> KernelData::coordinates(const CellKey& key) const {
  std::vector<std::uint8_t> z(dims(), 0);
  for (std::size_t v = 0; v < d_width_; ++v) z[v] = key.d[v];
  z[d_width_ + static_cast<std::size_t>(key.partition) - 1] = 1;
  return z;
}

double KernelCovariance::se_tau() const { return std::sqrt(std::max(0.0, var_tau)); }

namespace {

void check_lambda(const KernelData& data, std::span<const double> lambda) {
  if (lambda.size() != data.dims())
    throw std::invalid_argument("kernel: expected " + std::to_string(data.dims()) + " bandwidths, got " +
                                std::to_string(lambda.size()));
  for (std::size_t v = 0; v < lambda.size(); ++v)
    if (!(lambda[v] >= 0.0 && lambda[v] <= 1.0))
      throw std::invalid_argument("kernel: lambda[" + std::to_string(v) + "] outside [0,1]");
}

/// Product of lambdas over a mismatch mask, one 256-entry table per byte of d.
class PairWeights {
 public:
  PairWeights(const KernelData& data, std::span<const double> lambda)
      : d_width_(data.d_width()), lambda_(lambda.begin(), lambda.end()) {
    const std::size_t bytes = (d_width_ + 7) / 8;
    tables_.resize(bytes);
    for (std::size_t b = 0; b < bytes; ++b) {
      auto& t = tables_[b];
      t[0] = 1.0;
      for (unsigned mask = 1; mask < 256; ++mask) {
        const unsigned low = static_cast<unsigned>(std::countr_zero(mask));
        const std::size_t v = 8 * b + low;
        const double l = v < d_width_ ? lambda_[v] : 1.0;
        t[mask] = t[mask & (mask - 1)] * l;
      }
    }
  }

  double operator()(const CellKey& a, const CellKey& b) const {
    std::uint64_t diff = a.d.bits() ^ b.d.bits();
    double w = 1.0;
    for (std::size_t k = 0; diff != 0; ++k, diff >>= 8) w *= tables_[k][diff & 0xFFU];
    if (a.partition != b.partition)
      w *= lambda_[d_width_ + static_cast<std::size_t>(a.partition) - 1] *
           lambda_[d_width_ + static_cast<std::size_t>(b.partition) - 1];
    return w;
  }

 private:
  std::size_t d_width_;
  std::vector<double> lambda_;
  std::vector<std::array<double, 256>> tables_;
};

struct Smoothed {
  double m[2] = {0.0, 0.0};  // kernel-weighted counts
  double s[2] = {0.0, 0.0};  // kernel-weighted sums of y
};

Smoothed smooth_at(const KernelData& data, const PairWeights& weights, const CellKey& z) {
  Smoothed out;
  for (const auto& c : data.cells()) {
    const double w = weights(c.key, z);
    if (w == 0.0) continue;
    for (int a = 0; a < 2; ++a) {
      out.m[a] += w * c.arm[a].n;
      out.s[a] += w * c.arm[a].n * c.arm[a].mean;
    }
  }
  return out;
}

/// Smoothed moments at every observed cell through the separable product
/// kernel on the dense grid of (partition, d) values.
std::vector<Smoothed> smooth_dense(const KernelData& data, std::span<const double> lambda) {
  const std::size_t D = data.d_width();
  const std::size_t Q = static_cast<std::size_t>(data.partitions());
  const std::size_t side = std::size_t{1} << D;
  const std::size_t G = side * Q;
  std::vector<std::array<double, 4>> grid(G, {0.0, 0.0, 0.0, 0.0});
  auto index = [&](const CellKey& k) { return (static_cast<std::size_t>(k.partition) - 1) * side + k.d.bits(); };
  for (const auto& c : data.cells()) {
    auto& g = grid[index(c.key)];
    g = {c.arm[0].n, c.arm[0].n * c.arm[0].mean, c.arm[1].n, c.arm[1].n * c.arm[1].mean};
  }
  for (std::size_t v = 0; v < D; ++v) {
    const double l = lambda[v];
    const std::size_t bit = std::size_t{1} << v;
    for (std::size_t g = 0; g < G; ++g) {
      if (g & bit) continue;
      auto& x = grid[g];
      auto& y = grid[g | bit];
      for (int q = 0; q < 4; ++q) {
        const double a = x[q], b = y[q];
        x[q] = a + l * b;
        y[q] = b + l * a;
      }
    }
  }
  if (Q > 1) {
    for (std::size_t d = 0; d < side; ++d) {
      std::array<double, 4> total{0.0, 0.0, 0.0, 0.0};
      for (std::size_t s = 0; s < Q; ++s)
        for (int q = 0; q < 4; ++q) total[q] += lambda[D + s] * grid[s * side + d][q];
      for (std::size_t s = 0; s < Q; ++s) {
        const double l = lambda[D + s];
        auto& g = grid[s * side + d];
        for (int q = 0; q < 4; ++q) g[q] = g[q] * (1.0 - l * l) + l * total[q];
      }
    }
  }
  std::vector<Smoothed> out(data.cells().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& g = grid[index(data.cells()[i].key)];
    out[i].m[0] = g[0];
    out[i].s[0] = g[1];
    out[i].m[1] = g[2];
    out[i].s[1] = g[3];
  }
  return out;
}

bool prefer_dense(const KernelData& data) {
  const std::size_t D = data.d_width();
  if (D > 22) return false;
  const double G = std::ldexp(static_cast<double>(data.partitions()), static_cast<int>(D));
  if (G > std::ldexp(1.0, 22)) return false;
  const double C = static_cast<double>(data.cells().size());
  return G * static_cast<double>(D + 2) < C * C;
}

std::vector<Smoothed> smooth_all(const KernelData& data, std::span<const double> lambda) {
  if (prefer_dense(data)) return smooth_dense(data, lambda);
  const PairWeights weights(data, lambda);
  std::vector<Smoothed> out;
  out.reserve(data.cells().size());
  for (const auto& c : data.cells()) out.push_back(smooth_at(data, weights, c.key));
  return out;
}

void check_key(const KernelData& data, const CellKey& z) {
  if (z.d.size() != data.d_width() || z.partition < 1 || z.partition > data.partitions())
    throw std::invalid_argument("kernel: evaluation point does not match the data");
}

}  // namespace

KernelTheta kernel_theta(const KernelData& data, const CellKey& z, std::span<const double> lambda) {
  check_lambda(data, lambda);
  check_key(data, z);
  const Smoothed sm = smooth_at(data, PairWeights(data, lambda), z);
  if (!(sm.m[0] > 0.0) || !(sm.m[1] > 0.0))
    throw IdentificationError("kernel_theta: an arm carries no kernel weight at d=" + z.d.to_string() +
                              " s=" + std::to_string(z.partition));
  KernelTheta t;
  t.alpha = sm.s[0] / sm.m[0];
  t.tau = sm.s[1] / sm.m[1] - t.alpha;
  t.weight_control = sm.m[0];
  t.weight_test = sm.m[1];
  return t;
}

KernelCovariance kernel_variance(const KernelData& data, const CellKey& z, std::span<const double> lambda) {
  const KernelTheta t = kernel_theta(data, z, lambda);
  const PairWeights weights(data, lambda);
  const double mu[2] = {t.alpha, t.alpha + t.tau};
  double r[2] = {0.0, 0.0};
  for (const auto& c : data.cells()) {
    const double w = weights(c.key, z);
    if (w == 0.0) continue;
    for (int a = 0; a < 2; ++a) {
      const double dev = c.arm[a].mean - mu[a];
      r[a] += w * (c.arm[a].m2 + c.arm[a].n * dev * dev);
    }
  }
  KernelCovariance cov;
  const double v0 = r[0] / (t.weight_control * t.weight_control);
  const double v1 = r[1] / (t.weight_test * t.weight_test);
  cov.var_alpha = v0;
  cov.cov = -v0;
  cov.var_tau = v0 + v1;
  return cov;
}

AteTable kernel_table(const KernelData& data, CampaignIndex focal, std::span<const double> lambda,
                      std::size_t min_per_arm) {
  check_lambda(data, lambda);
  AteTable table;
  table.focal = focal;
  table.competitors = data.d_width();
  for (const auto& c : data.cells()) {
    CellEstimate e;
    e.n_control = static_cast<std::size_t>(c.arm[0].n);
    e.n_test = static_cast<std::size_t>(c.arm[1].n);
    try {
      const KernelTheta t = kernel_theta(data, c.key, lambda);
      const KernelCovariance v = kernel_variance(data, c.key, lambda);
      e.alpha = t.alpha;
      e.tau = t.tau;
      e.se_alpha = std::sqrt(std::max(0.0, v.var_alpha));
      e.se_tau = v.se_tau();
      e.flag = (e.n_test < min_per_arm || e.n_control < min_per_arm) ? CellFlag::low_support : CellFlag::ok;
      table.cells.emplace(c.key, e);
    } catch (const IdentificationError&) {
      e.flag = CellFlag::not_identified;
      e.alpha = e.tau = e.se_alpha = e.se_tau = std::nan("");
      table.excluded.emplace(c.key, e);
    }
  }
  return table;
}

CvValue cv_loss(const KernelData& data, std::span<const double> lambda) {
  check_lambda(data, lambda);
  const auto smoothed = smooth_all(data, lambda);
  CvValue out;
  double total = 0.0;
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    const auto& cell = data.cells()[i];
    for (int a = 0; a < 2; ++a) {
      const ArmStats& st = cell.arm[a];
      if (st.n == 0.0) continue;
      const double m = smoothed[i].m[a];
      const double s = smoothed[i].s[a];
      const double other = smoothed[i].m[1 - a];
      // The held-out point carries weight 1 in its own arm.
      if (m - 1.0 <= 1e-9 * m || !(other > 0.0)) {
        out.skipped += static_cast<std::size_t>(st.n);
        continue;
      }
      const double gap = m * st.mean - s;
      total += (m * m * st.m2 + st.n * gap * gap) / ((m - 1.0) * (m - 1.0));
      out.included += static_cast<std::size_t>(st.n);
    }
  }
  if (out.included == 0) throw IdentificationError("cv_loss: every point was skipped");
  out.loss = total / static_cast<double>(out.included);
  return out;
}

namespace {

class CvSearch {
 public:
  CvSearch(const KernelData& data, double tolerance) : data_(data), tolerance_(tolerance) {
    for (std::size_t v = 0; v < data.dims(); ++v)
      if (data.active()[v]) coords_.push_back(v);
  }

  const std::vector<std::size_t>& coords() const { return coords_; }

  double eval(const std::vector<double>& lambda) {
    ++evaluations_;
    try {
      return cv_loss(data_, lambda).loss;
    } catch (const IdentificationError&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  /// Coordinate descent from `lambda`; returns the achieved loss.
  double descend(std::vector<double>& lambda) {
    double current = eval(lambda);
    for (int sweep = 0; sweep < 100; ++sweep) {
      const double before = current;
      for (std::size_t v : coords_) current = line_search(lambda, v, current);
      if (!std::isfinite(before)) {
        if (!std::isfinite(current)) break;
        continue;
      }
      if (before - current <= tolerance_ * std::max(std::abs(before), 1e-300)) break;
    }
    return current;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  double line_search(std::vector<double>& lambda, std::size_t v, double current) {
    auto at = [&](double t) {
      const double keep = lambda[v];
      lambda[v] = t;
      const double f = eval(lambda);
      lambda[v] = keep;
      return f;
    };
    double best_t = lambda[v];
    double best = current;
    auto consider = [&](double t, double f) {
      if (f < best) {
        best = f;
        best_t = t;
      }
    };
    consider(0.0, at(0.0));
    consider(1.0, at(1.0));

    constexpr double kInvPhi = 0.6180339887498949;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
    double f1 = at(x1), f2 = at(x2);
    consider(x1, f1);
    consider(x2, f2);
    while (hi - lo > 1e-3) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = at(x1);
        consider(x1, f1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = at(x2);
        consider(x2, f2);
      }
    }
    lambda[v] = best_t;
    return best;
  }

  const KernelData& data_;
  double tolerance_;
  std::vector<std::size_t> coords_;
  std::size_t evaluations_ = 0;
};

}  // namespace

Bandwidths cv_bandwidths(const KernelData& data, const CvOptions& options) {
  if (data.observations() < 2) throw std::invalid_argument("cv_bandwidths: need at least 2 observations");
  const std::size_t V = data.dims();
  std::vector<std::size_t> coords;
  for (std::size_t v = 0; v < V; ++v)
    if (data.active()[v]) coords.push_back(v);

  std::vector<std::vector<double>> starts;
  for (double fill : {0.0, 1.0, 0.5}) {
    std::vector<double> s(V, 0.0);
    for (std::size_t v : coords) s[v] = fill;
    starts.push_back(s);
  }
  Engine engine = make_engine(options.seed, Stream::cv_starts, V, data.observations());
  std::uniform_int_distribution<int> corner(0, 2);
  for (int k = 0; k < options.random_starts && !coords.empty(); ++k) {
    std::vector<double> s(V, 0.0);
    for (std::size_t v : coords) s[v] = 0.5 * corner(engine);
    starts.push_back(s);
  }

  struct Run {
    std::vector<double> lambda;
    double loss = 0.0;
    std::size_t evaluations = 0;
  };
  auto runs = parallel_map<Run>(starts.size(), options.threads, [&](std::size_t i) {
    CvSearch search(data, options.tolerance);
    Run r;
    r.lambda = starts[i];
    r.loss = coords.empty() ? search.eval(r.lambda) : search.descend(r.lambda);
    r.evaluations = search.evaluations();
    return r;
  });

  std::size_t best = 0;
  std::size_t evaluations = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    evaluations += runs[i].evaluations;
    if (runs[i].loss < runs[best].loss) best = i;
  }
  if (!std::isfinite(runs[best].loss)) throw IdentificationError("cv_bandwidths: every point was skipped");

  Bandwidths out;
  out.lambda = runs[best].lambda;
  out.active = data.active();
  const CvValue final_value = cv_loss(data, out.lambda);
  out.cv_loss = final_value.loss;
  out.skipped = final_value.skipped;
  out.evaluations = evaluations;
  return out;
}

}  // namespace parexp
