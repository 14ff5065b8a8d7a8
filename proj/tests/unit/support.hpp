#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "parexp/core.hpp"

namespace testing {

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::vector<parexp::UserId> ids(parexp::UserId first, parexp::UserId last) {
  std::vector<parexp::UserId> out(last - first + 1);
  std::iota(out.begin(), out.end(), first);
  return out;
}

inline parexp::Campaign campaign(parexp::CampaignIndex index, std::vector<parexp::UserId> audience, double share,
                                 double bid = 1.0) {
  parexp::Campaign c;
  c.index = index;
  c.audience = std::move(audience);
  c.treatment_share = share;
  c.base_bid = bid;
  return c;
}

}  // namespace testing

#include <random>

#include "parexp/estimators.hpp"

namespace testing {

/// Random observations over `width` competitor bits and `partitions` labels.
/// Cells get distinct means so pooling is visible.
inline parexp::FocalData random_focal_data(std::uint64_t seed, std::size_t rows, std::size_t width, int partitions,
                                           double noise = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> bits(0, (std::uint64_t{1} << width) - 1);
  std::uniform_int_distribution<int> part(1, partitions);
  std::bernoulli_distribution treat(0.6);
  std::normal_distribution<double> eps(0.0, noise);
  parexp::FocalData data;
  data.focal = 1;
  data.competitors = width;
  data.partitions = partitions;
  for (std::size_t i = 0; i < rows; ++i) {
    parexp::Observation o;
    o.user = i + 1;
    o.d = parexp::BitVector(bits(rng), width);
    o.partition = part(rng);
    o.treated = treat(rng);
    const double cell = 0.3 * static_cast<double>(o.d.count()) + 0.2 * o.partition;
    o.y = 1.0 + cell + (o.treated ? 0.5 + 0.25 * o.d.count() : 0.0) + eps(rng);
    data.rows.push_back(o);
  }
  return data;
}

}  // namespace testing
