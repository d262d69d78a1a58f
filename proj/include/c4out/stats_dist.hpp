#pragma once

#include <Eigen/Dense>

#include <limits>
#include <random>

namespace c4out {

using Rng = std::mt19937_64;

// Special functions. Arguments must lie in the usual real domains (a, b > 0,
// 0 <= x <= 1 for the incomplete beta, x >= 0 for the incomplete gamma).
double log_gamma(double x);
double log_beta(double a, double b);
double digamma(double x);
double incomplete_beta(double a, double b, double x);
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Univariate t-Student distribution with real, positive degrees of freedom.
struct TDist
{
  double nu;

  explicit TDist(double dof);

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  double variance() const;        // requires nu > 2
  double fourth_cumulant() const; // requires nu > 4: 6/(nu-4) * (nu/(nu-2))^2
};

double t_pdf(double x, double nu);

/// Integral of the t density from -inf to x via the regularised incomplete beta.
/// Non-finite x maps to the limits 0 and 1.
double t_cdf(double x, double nu);

/// Inverse of t_cdf; u must lie strictly inside (0, 1).
double t_quantile(double u, double nu);

double gaussian_cdf(double x);
double gaussian_quantile(double u);

/// One draw from chi-squared with nu >= 1 degrees of freedom.
double chi2_sample(int nu, Rng& rng);

double chi2_cdf(double x, int nu);

/// Inverse chi-squared CDF. Diverges as p -> 1; p must lie in (0, 1).
double chi2_quantile(double p, int nu);

inline constexpr double kGaussianLimit = std::numeric_limits<double>::infinity();

/// Lower (= upper) tail dependence of the bivariate t copula,
/// 2 t_{nu+1}(-sqrt(nu+1) sqrt((1-sigma)/(1+sigma))). Pass kGaussianLimit for
/// the Gaussian copula.
double tail_dependence(double sigma, double nu_c);

struct MutualInfoReport
{
  double i_sigma = 0; // nats
  double i_nu_n = 0;  // nats
  double total = 0;   // i_sigma + i_nu_n
};

/// -1/2 log det Sigma for a unit-diagonal positive definite correlation matrix.
double mi_gaussian(const Eigen::MatrixXd& sigma);

/// Excess mutual information of the n-marginal t copula over the Gaussian one.
/// Evaluated in the log domain throughout.
double mi_student_extra(double nu_c, int n);

MutualInfoReport mutual_information(const Eigen::MatrixXd& sigma, double nu_c);

} // namespace c4out
