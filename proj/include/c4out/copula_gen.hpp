#pragma once

#include "c4out/stats_dist.hpp"
#include "c4out/sym_tensor.hpp"

#include <cstdint>
#include <vector>

namespace c4out {

/// Unit-diagonal positive definite correlation matrix.
class CorrelationMatrix
{
public:
  /// Validates symmetry, unit diagonal, entry range and positive semi-definiteness.
  explicit CorrelationMatrix(Eigen::MatrixXd values);

  Index dim() const noexcept { return values_.rows(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Correlation matrix with every off-diagonal entry equal to sigma.
  static CorrelationMatrix constant(Index n, double sigma);

private:
  Eigen::MatrixXd values_;
};

/// Parameters of the t-copula injection. `subset` holds 0-based column indices.
struct CopulaSpec
{
  int nu_c = 6;
  double nu_u = 6.0;
  std::vector<Index> subset;

  void validate(Index n) const;
};

struct ExperimentMeta
{
  std::uint64_t seed = 0;
  Index t = 0;
  Index tau = 0;
  CorrelationMatrix sigma = CorrelationMatrix(Eigen::MatrixXd::Identity(1, 1));
  CopulaSpec spec;
};

struct ExperimentDataset
{
  DataMatrix data;
  std::vector<int> labels; // 1 marks an injected outlier row
  ExperimentMeta meta;
};

/// Gram construction: B = A A^T + 0.1 I with iid N(0,1) entries in A, rescaled to unit diagonal.
CorrelationMatrix random_correlation(Index n, Rng& rng);

/// t iid rows of N(0, Sigma).
DataMatrix sample_gaussian(const CorrelationMatrix& sigma, Index t, Rng& rng);

/// Injects a t copula with nu_c degrees of freedom into the subset columns of
/// Gaussian draws, then maps every column onto t(nu_u) marginals.
///
/// Each row draws one v0 ~ chi2(nu_c) and scales its subset entries by
/// sqrt(nu_c / v0). Subset columns are then standard t(nu_c) and are pushed
/// through t_cdf(., nu_c); the remaining columns go through the Gaussian CDF.
/// The resulting uniforms are mapped with t_quantile(., nu_u).
DataMatrix gcop2tstudent(const DataMatrix& X, const CopulaSpec& spec, Rng& rng);

struct ExperimentParams
{
  Index t = 1000;
  Index tau = 100;
  Index n = 30;
  int nu_c = 6;
  double nu_u = 6.0;
  std::uint64_t seed = 0;
};

/// Labelled dataset: t - tau Gaussian-copula rows and tau rows whose random
/// half of the marginals carries a t copula, at random row positions. One
/// correlation matrix is shared by both groups. Reproducible from the seed.
ExperimentDataset make_experiment(const ExperimentParams& params);

} // namespace c4out
