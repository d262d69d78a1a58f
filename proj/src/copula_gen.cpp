#include "c4out/copula_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace c4out {

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd values) : values_(std::move(values))
{
  const Index n = values_.rows();
  if (n < 1 || values_.cols() != n)
    throw DomainError("correlation matrix must be square and non-empty");
  if (!values_.allFinite())
    throw DomainError("correlation matrix contains non-finite values");
  if ((values_ - values_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError("correlation matrix is not symmetric");
  if ((values_.diagonal().array() != 1.0).any())
    throw DomainError("correlation matrix must have an exactly unit diagonal");
  if (values_.cwiseAbs().maxCoeff() > 1.0)
    throw DomainError("correlation entries must lie in [-1, 1]");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    std::ostringstream os;
    os << "correlation matrix is not positive semi-definite (min eigenvalue " << es.eigenvalues().minCoeff() << ")";
    throw DomainError(os.str());
  }
}

CorrelationMatrix CorrelationMatrix::constant(Index n, double sigma)
{
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, sigma);
  m.diagonal().setOnes();
  return CorrelationMatrix(std::move(m));
}

void CopulaSpec::validate(Index n) const
{
  if (nu_c < 3)
    throw DomainError("copula degrees of freedom nu_c must be >= 3, got " + std::to_string(nu_c));
  if (!(nu_u > 4.0))
    throw DomainError("marginal degrees of freedom nu_u must be > 4");
  std::vector<Index> s = subset;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw DomainError("copula subset contains duplicate columns");
  for (Index i : s)
    if (i < 0 || i >= n)
      throw DomainError("copula subset column " + std::to_string(i + 1) + " outside 1.." + std::to_string(n));
}

CorrelationMatrix random_correlation(Index n, Rng& rng)
{
  if (n < 1)
    throw DomainError("correlation dimension must be >= 1");
  std::normal_distribution<double> normal;
  Eigen::MatrixXd A(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      A(i, j) = normal(rng);
  Eigen::MatrixXd B = A * A.transpose();
  B.diagonal().array() += 0.1;
  const Eigen::VectorXd inv_sd = B.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd S = inv_sd.asDiagonal() * B * inv_sd.asDiagonal();
  S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
  S.diagonal().setOnes();
  return CorrelationMatrix(std::move(S));
}

DataMatrix sample_gaussian(const CorrelationMatrix& sigma, Index t, Rng& rng)
{
  if (t < 1)
    throw DomainError("sample count must be >= 1");
  const Index n = sigma.dim();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.values());
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd jittered = sigma.values();
    jittered.diagonal().array() += 1e-10;
    llt.compute(jittered);
    if (llt.info() != Eigen::Success)
      throw NumericError("Cholesky factorisation of the correlation matrix failed after jitter");
  }
  const Eigen::MatrixXd L = llt.matrixL();

  std::normal_distribution<double> normal;
  DataMatrix Z(t, n);
  for (Index j = 0; j < t; ++j)
    for (Index i = 0; i < n; ++i)
      Z(j, i) = normal(rng);
  return Z * L.transpose();
}

namespace {

// Maps x through cdf then t_quantile(., nu_u), using the lower tail on both
// sides so that extreme values keep their precision.
template <typename LowerTail>
double to_t_marginal(double x, double nu_u, LowerTail lower_tail)
{
  double u = lower_tail(-std::abs(x));
  u = std::max(u, std::numeric_limits<double>::min());
  const double q = t_quantile(std::min(u, 0.5), nu_u);
  return x > 0 ? -q : q;
}

} // namespace

DataMatrix gcop2tstudent(const DataMatrix& X, const CopulaSpec& spec, Rng& rng)
{
  const Index t = X.rows();
  const Index n = X.cols();
  spec.validate(n);
  if (!X.allFinite())
    throw DomainError("input draws contain non-finite values");

  std::vector<bool> in_subset(static_cast<std::size_t>(n), false);
  for (Index i : spec.subset)
    in_subset[static_cast<std::size_t>(i)] = true;

  DataMatrix out(t, n);
  const double nu_c = spec.nu_c;
  for (Index j = 0; j < t; ++j) {
    const double scale = spec.subset.empty() ? 1.0 : std::sqrt(nu_c / chi2_sample(spec.nu_c, rng));
    for (Index i = 0; i < n; ++i) {
      if (in_subset[static_cast<std::size_t>(i)]) {
        out(j, i) = to_t_marginal(X(j, i) * scale, spec.nu_u, [nu_c](double v) { return t_cdf(v, nu_c); });
      } else {
        out(j, i) = to_t_marginal(X(j, i), spec.nu_u, [](double v) { return gaussian_cdf(v); });
      }
    }
  }
  return out;
}

ExperimentDataset make_experiment(const ExperimentParams& p)
{
  if (p.n < 2)
    throw DomainError("experiment needs n >= 2 marginals");
  if (!(p.tau > 0 && 2 * p.tau < p.t))
    throw DomainError("outlier count tau must satisfy 0 < tau < t/2 (tau=" + std::to_string(p.tau) +
                      ", t=" + std::to_string(p.t) + ")");

  Rng rng(p.seed);
  CorrelationMatrix sigma = random_correlation(p.n, rng);

  std::vector<Index> cols(static_cast<std::size_t>(p.n));
  std::iota(cols.begin(), cols.end(), Index(0));
  std::shuffle(cols.begin(), cols.end(), rng);
  CopulaSpec crisis{p.nu_c, p.nu_u, {cols.begin(), cols.begin() + p.n / 2}};
  std::sort(crisis.subset.begin(), crisis.subset.end());
  const CopulaSpec ordinary{p.nu_c, p.nu_u, {}};
  crisis.validate(p.n);

  std::vector<Index> rows(static_cast<std::size_t>(p.t));
  std::iota(rows.begin(), rows.end(), Index(0));
  std::shuffle(rows.begin(), rows.end(), rng);

  const DataMatrix ordinary_rows = gcop2tstudent(sample_gaussian(sigma, p.t - p.tau, rng), ordinary, rng);
  const DataMatrix crisis_rows = gcop2tstudent(sample_gaussian(sigma, p.tau, rng), crisis, rng);

  ExperimentDataset ds;
  ds.data.resize(p.t, p.n);
  ds.labels.assign(static_cast<std::size_t>(p.t), 0);
  for (Index k = 0; k < p.tau; ++k) {
    const Index r = rows[static_cast<std::size_t>(k)];
    ds.data.row(r) = crisis_rows.row(k);
    ds.labels[static_cast<std::size_t>(r)] = 1;
  }
  for (Index k = p.tau; k < p.t; ++k)
    ds.data.row(rows[static_cast<std::size_t>(k)]) = ordinary_rows.row(k - p.tau);

  ds.meta.seed = p.seed;
  ds.meta.t = p.t;
  ds.meta.tau = p.tau;
  ds.meta.sigma = std::move(sigma);
  ds.meta.spec = std::move(crisis);
  return ds;
}

} // namespace c4out
