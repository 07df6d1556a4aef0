#include "p2l/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2l::bounds {

namespace {

constexpr int kMaxBisection = 200;
constexpr double kBracketWidth = 1e-10;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge (a=" +
                           std::to_string(a) + ", b=" + std::to_string(b) +
                           ", x=" + std::to_string(x) + ")");
}

double log_sum_exp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

// log Psi as a function of s = log(1 - eps). Working in s keeps full relative
// resolution on 1 - eps when the root sits within 1e-12 of one.
double log_psi_of_log_slack(const BoundQuery& q, double log_slack) {
  const double n = static_cast<double>(q.n);
  const double k = static_cast<double>(q.k);
  const double log_cnk = log_choose(n, k);
  std::vector<double> terms;
  terms.reserve(q.n - q.k);
  for (std::size_t m = q.k; m < q.n; ++m) {
    const double md = static_cast<double>(m);
    terms.push_back(log_choose(md, k) - log_cnk - (n - md) * log_slack);
  }
  return std::log(q.delta) - std::log(n) + log_sum_exp(terms);
}

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0))
    throw std::domain_error(std::string(what) + " must lie in (0, 1), got " + std::to_string(v));
}

}  // namespace

void BoundQuery::validate() const {
  if (n < 1) throw std::domain_error("BoundQuery: N must be >= 1");
  if (k > n)
    throw std::domain_error("BoundQuery: k = " + std::to_string(k) + " exceeds N = " +
                            std::to_string(n));
  require_open_unit(delta, "BoundQuery: delta");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::IncompleteBetaBisection: return "incomplete-beta bisection";
    case Method::DirectPsiBisection: return "direct-psi bisection";
    case Method::ClosedForm: return "closed form";
  }
  return "unknown";
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double incomplete_beta(double a, double b, double x) {
  if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0))
    throw std::domain_error("incomplete_beta: need a, b >= 0, not both zero");
  if (x < 0.0 || x > 1.0 || std::isnan(x))
    throw std::domain_error("incomplete_beta: x must lie in [0, 1]");
  if (a == 0.0) return 1.0;
  if (b == 0.0) return x < 1.0 ? 0.0 : 1.0;
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double log_psi_value(const BoundQuery& q, double eps) {
  q.validate();
  if (q.k >= q.n) throw std::domain_error("psi_value: requires k < N");
  require_open_unit(eps, "psi_value: eps");
  return log_psi_of_log_slack(q, std::log1p(-eps));
}

double psi_value(const BoundQuery& q, double eps) { return std::exp(log_psi_value(q, eps)); }

BoundResult eps_bar(const BoundQuery& q) {
  q.validate();
  if (q.k == q.n) return {1.0, Method::ClosedForm, 0, 0.0};

  const double k = static_cast<double>(q.k);
  const double n = static_cast<double>(q.n);
  double t1 = 0.0;
  double t2 = 1.0;
  int iter = 0;
  double residual = 0.0;
  while (t2 - t1 > kBracketWidth && iter < kMaxBisection) {
    const double t = (t1 + t2) / 2.0;
    const double upper = incomplete_beta(k + 1.0, n - k, t);
    const double left = q.delta * upper;
    const double right = t * n * (incomplete_beta(k, n - k + 1.0, t) - upper);
    if (left > right)
      t2 = t;
    else
      t1 = t;
    residual = left - right;
    ++iter;
  }
  return {t2, Method::IncompleteBetaBisection, iter, residual};
}

BoundResult eps_bar_oracle(const BoundQuery& q) {
  q.validate();
  if (q.k == q.n) return {1.0, Method::ClosedForm, 0, 0.0};

  // Psi is increasing in eps, i.e. decreasing in s = log(1 - eps). Psi <= 1 at
  // eps = k/N and Psi > 1 for 1 - eps = 1e-300.
  double s_hi = std::log1p(-static_cast<double>(q.k) / static_cast<double>(q.n));
  double s_lo = std::log(1e-300);
  int iter = 0;
  while (iter < kMaxBisection) {
    const double mid = 0.5 * (s_lo + s_hi);
    if (mid <= s_lo || mid >= s_hi || s_hi - s_lo < 1e-14) break;
    if (log_psi_of_log_slack(q, mid) > 0.0)
      s_lo = mid;
    else
      s_hi = mid;
    ++iter;
  }
  const double s = 0.5 * (s_lo + s_hi);
  const double residual = std::expm1(log_psi_of_log_slack(q, s));
  if (!(std::fabs(residual) <= 1e-6))
    throw std::runtime_error("eps_bar_oracle: |Psi - 1| = " + std::to_string(std::fabs(residual)) +
                             " at termination");
  return {-std::expm1(s), Method::DirectPsiBisection, iter, residual};
}

double binomial_cdf(std::size_t k, std::size_t n, double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("binomial_cdf: p must lie in [0, 1]");
  if (k >= n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  const double nd = static_cast<double>(n);
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  std::vector<double> terms;
  terms.reserve(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    const double jd = static_cast<double>(j);
    terms.push_back(log_choose(nd, jd) + jd * lp + (nd - jd) * lq);
  }
  return std::min(1.0, std::exp(log_sum_exp(terms)));
}

double binomial_tail_inversion(std::size_t k, std::size_t n, double delta) {
  if (n < 1) throw std::domain_error("binomial_tail_inversion: n must be >= 1");
  if (k > n) throw std::domain_error("binomial_tail_inversion: k must not exceed n");
  require_open_unit(delta, "binomial_tail_inversion: delta");
  if (k == n) return 1.0;

  // The lower-tail CDF decreases from 1 at p = 0 to 0 at p = 1.
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < kMaxBisection; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (binomial_cdf(k, n, mid) > delta)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double conformal_eps(std::size_t k, std::size_t n_cal, double delta) {
  if (k < 1 || k > n_cal)
    throw std::domain_error("conformal_eps: need 1 <= k <= n_cal");
  return binomial_tail_inversion(n_cal - k, n_cal, delta);
}

double union_delta(double delta_total, std::size_t r) {
  require_open_unit(delta_total, "union_delta: delta_total");
  if (r < 1) throw std::domain_error("union_delta: r must be >= 1");
  return delta_total / static_cast<double>(r);
}

}  // namespace p2l::bounds
