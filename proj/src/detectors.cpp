#include "c4out/detectors.hpp"

#include "c4out/stats_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace c4out {

Eigen::VectorXd rx_scores(const DataMatrix& X)
{
  const Eigen::MatrixXd W = inverse_sqrt_covariance(X);
  return (center(X) * W).rowwise().squaredNorm();
}

std::vector<Index> rx_detect(const DataMatrix& X, double threshold)
{
  if (std::isnan(threshold))
    throw DomainError("RX threshold is NaN");
  const Eigen::VectorXd md = rx_scores(X);
  std::vector<Index> out;
  for (Index j = 0; j < md.size(); ++j)
    if (md(j) > threshold)
      out.push_back(j);
  return out;
}

std::vector<Index> rx_detect_percentile(const DataMatrix& X, double p)
{
  return rx_detect(X, chi2_quantile(p, static_cast<int>(X.cols())));
}

double kurtosis(std::span<const double> z)
{
  if (z.size() < 2)
    throw InsufficientDataError("kurtosis needs at least 2 values");
  const double n = static_cast<double>(z.size());
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
  double m2 = 0;
  double m4 = 0;
  for (double v : z) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  if (m2 == 0.0)
    return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

double median(std::vector<double> v)
{
  if (v.empty())
    throw InsufficientDataError("median of an empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1)
    return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mad(std::span<const double> z)
{
  const double med = median({z.begin(), z.end()});
  std::vector<double> dev(z.size());
  std::transform(z.begin(), z.end(), dev.begin(), [med](double v) { return std::abs(v - med); });
  return median(std::move(dev));
}

Eigen::VectorXd robust_scores(const Eigen::MatrixXd& Z)
{
  Eigen::VectorXd score = Eigen::VectorXd::Zero(Z.rows());
  std::vector<double> col(static_cast<std::size_t>(Z.rows()));
  for (Index i = 0; i < Z.cols(); ++i) {
    Eigen::VectorXd::Map(col.data(), Z.rows()) = Z.col(i);
    const double med = median(col);
    const double dev = mad(col);
    if (!(dev > 0.0))
      continue;
    for (Index j = 0; j < Z.rows(); ++j)
      score(j) = std::max(score(j), std::abs(Z(j, i) - med) / dev);
  }
  return score;
}

std::vector<Index> flag_rows(const Eigen::MatrixXd& Z, double beta)
{
  const Eigen::VectorXd score = robust_scores(Z);
  std::vector<Index> out;
  for (Index j = 0; j < score.size(); ++j)
    if (score(j) > beta)
      out.push_back(j);
  return out;
}

DetectionResult hosvd_c4_detect(const DataMatrix& X, const C4DetectOptions& opt)
{
  check_data(X);
  if (!(opt.beta > 0.0))
    throw DomainError("sensitivity beta must be positive");
  if (opt.r < 1 || opt.r > X.cols())
    throw DomainError("direction count r=" + std::to_string(opt.r) + " outside [1, " + std::to_string(X.cols()) + "]");

  const DataMatrix Y = whiten(X);
  const Index t = Y.rows();

  DetectionResult result;
  result.beta = opt.beta;
  result.r = opt.r;

  std::vector<Index> active(static_cast<std::size_t>(t));
  std::iota(active.begin(), active.end(), Index(0));
  double k_previous = std::numeric_limits<double>::infinity();
  std::vector<double> column;

  while (active.size() >= 2) {
    const DataMatrix Ya = Y(active, Eigen::all);
    const SquareMatrixT<double> M = contract_self(fourth_cumulant(Ya));
    const SpectralDirections<double> dirs = leading_directions(M, opt.r);
    const Eigen::MatrixXd Z = Ya * dirs.directions;

    double k2 = 0;
    column.resize(static_cast<std::size_t>(Z.rows()));
    for (Index i = 0; i < Z.cols(); ++i) {
      Eigen::VectorXd::Map(column.data(), Z.rows()) = Z.col(i);
      const double kurt = kurtosis(column);
      k2 += kurt * kurt;
    }
    const double k = std::sqrt(k2);

    const std::vector<Index> local = flag_rows(Z, opt.beta);
    std::vector<bool> drop(active.size(), false);
    for (Index j : local) {
      result.flagged.push_back(active[static_cast<std::size_t>(j)]);
      drop[static_cast<std::size_t>(j)] = true;
    }
    std::vector<Index> kept;
    kept.reserve(active.size() - local.size());
    for (std::size_t j = 0; j < active.size(); ++j)
      if (!drop[j])
        kept.push_back(active[j]);
    active = std::move(kept);
    result.iterations.push_back({k, static_cast<Index>(local.size())});

    const bool kurtosis_stalled = !(k < k_previous);
    const bool nothing_flagged = local.empty();
    const bool cap_reached =
      static_cast<double>(result.flagged.size()) > opt.max_removed_fraction * static_cast<double>(t);
    if (kurtosis_stalled || nothing_flagged || cap_reached)
      break;
    k_previous = k;
  }

  std::sort(result.flagged.begin(), result.flagged.end());
  return result;
}

RocCurve roc_curve(std::span<const SweepPoint> sweep, std::span<const int> labels)
{
  Index positives = 0;
  for (int l : labels) {
    if (l != 0 && l != 1)
      throw DomainError("labels must be 0 or 1");
    positives += l;
  }
  const Index negatives = static_cast<Index>(labels.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw DomainError("ROC needs at least one positive and one negative label");
  if (sweep.empty())
    throw DomainError("ROC sweep is empty");

  RocCurve curve;
  for (const SweepPoint& sp : sweep) {
    Index tp = 0;
    Index fp = 0;
    for (Index j : sp.flagged) {
      if (j < 0 || j >= static_cast<Index>(labels.size()))
        throw DomainError("flagged row " + std::to_string(j + 1) + " outside the labelled range");
      (labels[static_cast<std::size_t>(j)] ? tp : fp) += 1;
    }
    curve.points.push_back({sp.param, static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives)});
  }
  std::stable_sort(curve.points.begin(), curve.points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });

  double prev_fpr = 0;
  double prev_tpr = 0;
  double auc = 0;
  auto add = [&](double fpr, double tpr) {
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
    prev_fpr = fpr;
    prev_tpr = tpr;
  };
  for (const RocPoint& p : curve.points)
    add(p.fpr, p.tpr);
  add(1.0, 1.0);
  curve.auc = auc;
  return curve;
}

} // namespace c4out
