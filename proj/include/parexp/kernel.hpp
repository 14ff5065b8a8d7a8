#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "parexp/estimators.hpp"

namespace parexp {

/// prod_v (1 if Z_v == z_v else lambda_v). Throws std::invalid_argument on a
/// dimension mismatch or a lambda outside [0, 1].
double kernel_weight(std::span<const std::uint8_t> Z, std::span<const std::uint8_t> z, std::span<const double> lambda);

/// Per-arm sufficient statistics of one observed Z cell.
struct ArmStats {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations from `mean`
};

struct KernelCell {
  CellKey key;
  ArmStats arm[2];  // control, test
};

/// Z = [D_{-j}, S_j] collapsed to its distinct observed cells. Coordinates
/// 0..d_width-1 are the competitor bits; d_width + s - 1 is the one-hot
/// coordinate of partition s.
class KernelData {
 public:
  explicit KernelData(const FocalData& data);

  std::size_t d_width() const { return d_width_; }
  int partitions() const { return partitions_; }
  std::size_t dims() const { return d_width_ + static_cast<std::size_t>(partitions_); }
  const std::vector<KernelCell>& cells() const { return cells_; }
  std::size_t observations() const { return observations_; }
  /// Coordinates that vary across observed cells; lambda is irrelevant elsewhere.
  const std::vector<bool>& active() const { return active_; }

  /// Z of a cell as a 0/1 vector of length dims().
  std::vector<std::uint8_t> coordinates(const CellKey& key) const;

 private:
  std::size_t d_width_ = 0;
  int partitions_ = 0;
  std::size_t observations_ = 0;
  std::vector<KernelCell> cells_;
  std::vector<bool> active_;
};

struct KernelTheta {
  double alpha = 0.0;
  double tau = 0.0;
  double weight_control = 0.0;  // sum of L over control observations
  double weight_test = 0.0;
};

struct KernelCovariance {
  double var_alpha = 0.0;
  double cov = 0.0;
  double var_tau = 0.0;
  double se_tau() const;
};

/// Weighted least squares of y on [1, D_ij] with weights L(Z_i, z, lambda).
/// Throws IdentificationError when either arm carries zero weight at z.
KernelTheta kernel_theta(const KernelData& data, const CellKey& z, std::span<const double> lambda);

/// Sandwich covariance of (alpha, tau) at z, already divided by I.
KernelCovariance kernel_variance(const KernelData& data, const CellKey& z, std::span<const double> lambda);

/// Kernel estimates at every observed cell. Cells where an arm carries no
/// weight are excluded; raw arm counts below `min_per_arm` are flagged.
AteTable kernel_table(const KernelData& data, CampaignIndex focal, std::span<const double> lambda,
                      std::size_t min_per_arm = 2);

struct CvValue {
  double loss = 0.0;         // mean squared LOO error over included points
  std::size_t included = 0;
  std::size_t skipped = 0;   // LOO estimate undefined after removal
};

/// Leave-one-out criterion from cell sufficient statistics. Throws
/// IdentificationError when every point is skipped.
CvValue cv_loss(const KernelData& data, std::span<const double> lambda);

struct Bandwidths {
  std::vector<double> lambda;  // one per coordinate; 0 on inactive coordinates
  std::vector<bool> active;
  double cv_loss = 0.0;
  std::size_t skipped = 0;
  std::size_t evaluations = 0;
};

struct CvOptions {
  std::uint64_t seed = 0;
  int random_starts = 3;
  double tolerance = 1e-4;  // relative loss improvement per sweep
  unsigned threads = 1;
};

/// Multi-start coordinate descent with golden-section line searches. Starts
/// include all-0, all-1 and all-0.5, so the result never loses to those anchors.
Bandwidths cv_bandwidths(const KernelData& data, const CvOptions& options = {});

}  // namespace parexp
