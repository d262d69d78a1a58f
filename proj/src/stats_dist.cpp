#include "c4out/stats_dist.hpp"

#include "c4out/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace c4out {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

std::string fmt_value(double v)
{
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_fraction(double a, double b, double x)
{
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny)
    d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps)
      return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

// I_x(a, b) given x, y = 1 - x and their logarithms, all supplied by the
// caller so that neither complement suffers cancellation.
double ibeta(double a, double b, double x, double y, double log_x, double log_y)
{
  if (x <= 0.0)
    return 0.0;
  if (y <= 0.0)
    return 1.0;
  const double front = std::exp(a * log_x + b * log_y - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, y) / b;
}

// Lower tail of the t distribution for x <= 0.
double t_lower_tail(double x, double nu)
{
  const double ax = std::abs(x);
  if (ax == 0.0)
    return 0.5;
  if (std::isinf(ax))
    return 0.0;
  if (nu == 1.0)
    return std::atan(1.0 / ax) / std::numbers::pi;
  if (nu == 2.0) {
    const double s = std::sqrt(2.0 + ax * ax);
    return 1.0 / (s * (s + ax));
  }
  // z = nu / (nu + x^2), y = x^2 / (nu + x^2), computed in the log domain.
  const double log_x2 = 2.0 * std::log(ax);
  const double log_nu = std::log(nu);
  const double log_sum = log_x2 > log_nu ? log_x2 + std::log1p(std::exp(log_nu - log_x2))
                                         : log_nu + std::log1p(std::exp(log_x2 - log_nu));
  const double log_z = log_nu - log_sum;
  const double log_y = log_x2 - log_sum;
  return 0.5 * ibeta(0.5 * nu, 0.5, std::exp(log_z), std::exp(log_y), log_z, log_y);
}

void check_nu(double nu)
{
  if (!(nu > 0.0) || std::isnan(nu))
    throw DomainError("degrees of freedom must be positive, got " + fmt_value(nu));
}

void check_probability(double u, const char* what)
{
  if (!(u > 0.0 && u < 1.0))
    throw DomainError(std::string(what) + ": probability " + fmt_value(u) + " outside (0, 1)");
}

// Lower-tail quantile of t for p <= 0.5 (result <= 0).
double t_lower_quantile(double p, double nu)
{
  if (p == 0.5)
    return 0.0;
  if (nu == 1.0)
    return -1.0 / std::tan(std::numbers::pi * p);
  if (nu == 2.0)
    return (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));

  // Cornish-Fisher expansion around the normal quantile; deep in the tail
  // the power-law asymptote can be the better start, keep whichever has the
  // CDF closer to p.
  const double log_b = log_beta(0.5 * nu, 0.5);
  const double z = gaussian_quantile(p);
  const double z2 = z * z;
  double x = z + z * (z2 + 1.0) / (4.0 * nu) + z * ((5.0 * z2 + 16.0) * z2 + 3.0) / (96.0 * nu * nu) +
             z * (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) / (384.0 * nu * nu * nu);
  x = std::min(x, -1e-300);
  if (p < 0.01) {
    const double x_tail = -std::sqrt(nu) * std::exp(-(std::log(p) + std::log(nu) + log_b) / nu);
    if (std::isfinite(x_tail)) {
      const double e_cf = std::abs(std::log(t_lower_tail(x, nu) / p));
      const double e_tail = std::abs(std::log(t_lower_tail(x_tail, nu) / p));
      if (e_tail < e_cf)
        x = x_tail;
    }
  }
  const double log_norm = -0.5 * std::log(nu) - log_b;

  // Safeguarded Halley iteration on F(x) - p.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double f = t_lower_tail(x, nu) - p;
    if (f < 0.0)
      lo = x;
    else
      hi = x;
    const double pdf = std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
    double next;
    if (pdf > 0.0) {
      const double delta = f / pdf;
      const double curvature = -(nu + 1.0) * x / (nu + x * x);
      const double denom = 1.0 - 0.5 * delta * curvature;
      next = x - (denom > 0.5 ? delta / denom : delta);
    } else {
      next = std::numeric_limits<double>::quiet_NaN();
    }
    if (!(next > lo && next < hi)) {
      // Outside the bracket: bisect, geometrically when the bracket is wide.
      if (std::isinf(lo))
        next = 2.0 * std::min(x, -1.0);
      else if (hi < -1.0)
        next = -std::sqrt(lo * hi);
      else
        next = 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 4e-16 * std::max(1.0, std::abs(x)))
      return next;
    x = next;
  }
  return x;
}

} // namespace

double log_gamma(double x)
{
  if (!(x > 0.0))
    throw DomainError("log_gamma requires a positive argument, got " + fmt_value(x));
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_beta(double a, double b)
{
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double digamma(double x)
{
  if (!(x > 0.0))
    throw DomainError("digamma requires a positive argument, got " + fmt_value(x));
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  // Asymptotic series in 1/x^2 with Bernoulli-number coefficients.
  const double series =
    r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12))))));
  return acc + std::log(x) - 0.5 / x - series;
}

double incomplete_beta(double a, double b, double x)
{
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("incomplete beta requires positive shape parameters");
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("incomplete beta argument " + fmt_value(x) + " outside [0, 1]");
  const double y = 1.0 - x;
  return ibeta(a, b, x, y, std::log(x), std::log1p(-x));
}

double gamma_p(double a, double x)
{
  if (!(a > 0.0) || !(x >= 0.0))
    throw DomainError("incomplete gamma requires a > 0 and x >= 0");
  if (x == 0.0)
    return 0.0;
  if (std::isinf(x))
    return 1.0;
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps)
        return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
    throw NumericError("incomplete gamma series did not converge");
  }
  return 1.0 - gamma_q(a, x);
}

double gamma_q(double a, double x)
{
  if (!(a > 0.0) || !(x >= 0.0))
    throw DomainError("incomplete gamma requires a > 0 and x >= 0");
  if (x < a + 1.0)
    return 1.0 - gamma_p(a, x);
  if (std::isinf(x))
    return 0.0;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps)
      return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
  }
  throw NumericError("incomplete gamma continued fraction did not converge");
}

TDist::TDist(double dof) : nu(dof)
{
  check_nu(dof);
}

double TDist::pdf(double x) const { return t_pdf(x, nu); }
double TDist::cdf(double x) const { return t_cdf(x, nu); }
double TDist::quantile(double u) const { return t_quantile(u, nu); }

double TDist::variance() const
{
  if (!(nu > 2.0))
    throw DomainError("t variance requires nu > 2, got " + fmt_value(nu));
  return nu / (nu - 2.0);
}

double TDist::fourth_cumulant() const
{
  if (!(nu > 4.0))
    throw DomainError("t fourth cumulant requires nu > 4, got " + fmt_value(nu));
  const double v = nu / (nu - 2.0);
  return 6.0 / (nu - 4.0) * v * v;
}

double t_pdf(double x, double nu)
{
  check_nu(nu);
  const double log_norm = -0.5 * std::log(nu) - log_beta(0.5 * nu, 0.5);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double t_cdf(double x, double nu)
{
  check_nu(nu);
  if (std::isnan(x))
    throw DomainError("t_cdf of NaN");
  if (x <= 0.0)
    return t_lower_tail(x, nu);
  return 1.0 - t_lower_tail(-x, nu);
}

double t_quantile(double u, double nu)
{
  check_nu(nu);
  check_probability(u, "t_quantile");
  if (u <= 0.5)
    return t_lower_quantile(u, nu);
  return -t_lower_quantile(1.0 - u, nu);
}

double gaussian_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double gaussian_quantile(double u)
{
  check_probability(u, "gaussian_quantile");
  if (u > 0.5)
    return -gaussian_quantile(1.0 - u);

  // Rational approximation (relative error ~1e-9), then Halley refinement.
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                           1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                           6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                           -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                           3.754408661907416e+00};
  double x;
  if (u < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
  for (int it = 0; it < 3; ++it) {
    const double e = gaussian_cdf(x) - u;
    const double w = e * sqrt_2pi * std::exp(0.5 * x * x);
    x -= w / (1.0 + 0.5 * x * w);
  }
  return x;
}

double chi2_sample(int nu, Rng& rng)
{
  if (nu < 1)
    throw DomainError("chi-squared degrees of freedom must be >= 1, got " + std::to_string(nu));
  std::chi_squared_distribution<double> dist(static_cast<double>(nu));
  double v = dist(rng);
  while (!(v > 0.0))
    v = dist(rng);
  return v;
}

double chi2_cdf(double x, int nu)
{
  if (nu < 1)
    throw DomainError("chi-squared degrees of freedom must be >= 1, got " + std::to_string(nu));
  if (x <= 0.0)
    return 0.0;
  return gamma_p(0.5 * nu, 0.5 * x);
}

double chi2_quantile(double p, int nu)
{
  if (nu < 1)
    throw DomainError("chi-squared degrees of freedom must be >= 1, got " + std::to_string(nu));
  check_probability(p, "chi2_quantile");
  const double a = 0.5 * nu;
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  const double log_norm = -a * std::numbers::ln2 - log_gamma(a);

  // Wilson-Hilferty start, with the small-x power law as fallback.
  const double z = gaussian_quantile(p);
  const double h = 2.0 / (9.0 * nu);
  double x = nu * std::pow(1.0 - h + z * std::sqrt(h), 3.0);
  const double x_small = 2.0 * std::exp((std::log(p) + log_gamma(a + 1.0)) / a);
  if (!(x > 0.0) || x < x_small)
    x = std::min(x_small, nu + 10.0);

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 300; ++it) {
    // f increases in x for both tails.
    const double f = upper ? target - gamma_q(a, 0.5 * x) : gamma_p(a, 0.5 * x) - target;
    if (f < 0.0)
      lo = x;
    else
      hi = x;
    const double pdf = std::exp(log_norm + (a - 1.0) * std::log(x) - 0.5 * x);
    double next = std::numeric_limits<double>::quiet_NaN();
    if (pdf > 0.0) {
      const double delta = f / pdf;
      const double curvature = (a - 1.0) / x - 0.5;
      const double denom = 1.0 - 0.5 * delta * curvature;
      next = x - (denom > 0.5 ? delta / denom : delta);
    }
    if (!(next > lo && next < hi))
      next = std::isinf(hi) ? 2.0 * x : (lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi);
    if (std::abs(next - x) <= 1e-15 * x)
      return next;
    x = next;
  }
  return x;
}

double tail_dependence(double sigma, double nu_c)
{
  if (!(sigma > -1.0 && sigma <= 1.0))
    throw DomainError("tail dependence requires sigma in (-1, 1], got " + fmt_value(sigma));
  if (std::isinf(nu_c) && nu_c > 0)
    return sigma == 1.0 ? 1.0 : 0.0;
  check_nu(nu_c);
  const double arg = -std::sqrt(nu_c + 1.0) * std::sqrt((1.0 - sigma) / (1.0 + sigma));
  return 2.0 * t_cdf(arg, nu_c + 1.0);
}

double mi_gaussian(const Eigen::MatrixXd& sigma)
{
  const Eigen::Index n = sigma.rows();
  if (n < 1 || sigma.cols() != n)
    throw DomainError("correlation matrix must be square and non-empty");
  if (!sigma.allFinite())
    throw DomainError("correlation matrix contains non-finite values");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("correlation matrix is not symmetric");
  if ((sigma.diagonal().array() - 1.0).abs().maxCoeff() > 1e-10)
    throw DomainError("correlation matrix must have a unit diagonal");
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw DomainError("correlation matrix is singular or not positive definite");
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  if ((diag.array() <= 0.0).any())
    throw DomainError("correlation matrix is singular");
  const double log_det = 2.0 * diag.array().log().sum();
  return -0.5 * log_det;
}

double mi_student_extra(double nu_c, int n)
{
  if (!(nu_c >= 1.0) || std::isnan(nu_c))
    throw DomainError("copula degrees of freedom must be >= 1, got " + fmt_value(nu_c));
  if (n < 1)
    throw DomainError("marginal count must be >= 1");
  const double nd = n;
  const double h = 0.5 * nu_c;
  if (h < 25.0) {
    const double log_ratio = nd * log_beta(h, 0.5) + log_gamma(0.5 * nd) - 0.5 * nd * std::log(std::numbers::pi) -
                             log_beta(h, 0.5 * nd);
    return log_ratio - h * (nd - 1.0) * digamma(h) + 0.5 * nd * (nu_c + 1.0) * digamma(h + 0.5) -
           (h + 0.5 * nd) * digamma(h + 0.5 * nd);
  }
  // Large nu: the same expression regrouped as -n G(h, 1/2) + G(h, n/2) with
  // G(h, a) = phi(h + a) - phi(h), phi(x) = log Gamma(x) - x psi(x). The terms
  // linear in x and log x cancel analytically; what remains is evaluated from
  // the asymptotic series of phi, avoiding the O(nu) cancellation of the
  // direct form.
  auto series = [](double x) {
    const double r = 1.0 / (x * x);
    return (1.0 / 6 - r * (1.0 / 90 - r * (1.0 / 210 - r * (1.0 / 210 - r * 5.0 / 594)))) / x;
  };
  auto g = [&](double a) { return -0.5 * std::log1p(a / h) + series(h + a) - series(h); };
  return -nd * g(0.5) + g(0.5 * nd);
}

MutualInfoReport mutual_information(const Eigen::MatrixXd& sigma, double nu_c)
{
  MutualInfoReport r;
  r.i_sigma = mi_gaussian(sigma);
  r.i_nu_n = std::isinf(nu_c) && nu_c > 0 ? 0.0 : mi_student_extra(nu_c, static_cast<int>(sigma.rows()));
  r.total = r.i_sigma + r.i_nu_n;
  return r;
}

} // namespace c4out
