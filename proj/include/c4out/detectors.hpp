#pragma once

#include "c4out/sym_tensor.hpp"

#include <span>
#include <vector>

namespace c4out {

// Row indices in this API are 0-based; files and JSON use 1-based numbering.

/// Mahalanobis squared distance of every row to the sample mean, under the
/// t-normalised sample covariance of all rows.
Eigen::VectorXd rx_scores(const DataMatrix& X);

/// Rows whose score exceeds the threshold.
std::vector<Index> rx_detect(const DataMatrix& X, double threshold);

/// Threshold at the p-quantile of chi-squared with n = X.cols() degrees of freedom.
std::vector<Index> rx_detect_percentile(const DataMatrix& X, double p);

/// Excess kurtosis: fourth central moment over squared variance, minus 3.
double kurtosis(std::span<const double> z);

double median(std::vector<double> v);

/// Unscaled median absolute deviation from the median.
double mad(std::span<const double> z);

/// Per-row max over columns of |z - median| / MAD. Columns with zero MAD are
/// skipped; a row whose every column is skipped scores 0.
Eigen::VectorXd robust_scores(const Eigen::MatrixXd& Z);

/// Rows of Z whose robust score exceeds beta.
std::vector<Index> flag_rows(const Eigen::MatrixXd& Z, double beta);

struct IterationInfo
{
  double k = 0;      // root-sum-square of direction kurtoses
  Index removed = 0; // rows flagged in this iteration
};

struct DetectionResult
{
  std::vector<Index> flagged; // ascending, original row numbering
  std::vector<IterationInfo> iterations;
  double beta = 0;
  Index r = 0;
};

struct C4DetectOptions
{
  double beta = 2.5;
  Index r = 3;
  /// Stop once cumulative removals exceed this fraction of the rows.
  double max_removed_fraction = 0.5;
};

/// Iterative fourth-cumulant outlier detector.
///
/// The data are centred and whitened once. Each pass recomputes C4 on the
/// remaining rows, projects them onto the r leading eigenvectors of the
/// self-contraction M^(4), scores every row by its largest MAD-normalised
/// deviation from the per-direction median and removes rows scoring above
/// beta. Passes continue while the root-sum-square kurtosis k of the
/// projections keeps falling; a pass that flags nothing, or cumulative
/// removals above max_removed_fraction of the rows, also end the loop. The
/// pass whose k failed to fall still removes its flagged rows.
DetectionResult hosvd_c4_detect(const DataMatrix& X, const C4DetectOptions& opt);

inline DetectionResult hosvd_c4_detect(const DataMatrix& X, double beta, Index r)
{
  return hosvd_c4_detect(X, C4DetectOptions{beta, r});
}

/// One detector run at one setting of its sweep parameter.
struct SweepPoint
{
  double param = 0;
  std::vector<Index> flagged;
};

struct RocPoint
{
  double param = 0;
  double fpr = 0;
  double tpr = 0;
};

struct RocCurve
{
  std::vector<RocPoint> points; // sorted by (fpr, tpr)
  double auc = 0;
};

/// TPR/FPR per sweep point and the trapezoid AUC over the points with (0,0)
/// and (1,1) appended. Labels must contain both classes.
RocCurve roc_curve(std::span<const SweepPoint> sweep, std::span<const int> labels);

} // namespace c4out
