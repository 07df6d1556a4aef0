#pragma once

#include <cstddef>
#include <string_view>

namespace p2l::bounds {

/// (k, N, delta) triple. k is a compression size (|T| or |T|+|U|), N the
/// number of samples the certificate refers to.
struct BoundQuery {
  std::size_t k = 0;
  std::size_t n = 1;
  double delta = 0.01;

  /// Throws std::domain_error unless 0 <= k <= n, n >= 1 and 0 < delta < 1.
  void validate() const;
};

enum class Method { IncompleteBetaBisection, DirectPsiBisection, ClosedForm };

std::string_view to_string(Method m);

struct BoundResult {
  double eps = 1.0;
  Method method = Method::ClosedForm;
  int iterations = 0;
  // Route-specific: left-right of the beta criterion, or Psi(eps)-1.
  double residual = 0.0;
};

/// Regularized incomplete beta I_x(a, b) by Lentz continued fraction with
/// the usual symmetry switch at x > (a+1)/(a+b+2). I_x(0, b) = 1 for x > 0.
double incomplete_beta(double a, double b, double x);

/// log of the binomial coefficient C(n, k).
double log_choose(double n, double k);

/// Psi_{k,delta}(eps) = (delta/N) sum_{m=k}^{N-1} C(m,k)/C(N,k) (1-eps)^{-(N-m)}.
/// Accumulated in the log domain. Requires k < N and eps in (0,1).
double psi_value(const BoundQuery& q, double eps);
double log_psi_value(const BoundQuery& q, double eps);

/// Risk bound eps_bar(k, delta, N): bisection on
///   delta * I_t(k+1, N-k)  vs  t*N*(I_t(k, N-k+1) - I_t(k+1, N-k))
/// down to a bracket of width 1e-10, returning the upper end. k == N gives 1.
BoundResult eps_bar(const BoundQuery& q);

/// Same quantity obtained by bisecting Psi(eps) = 1 directly on [k/N, 1].
/// Kept as a cross-check; throws std::runtime_error if |Psi - 1| > 1e-6 at exit.
BoundResult eps_bar_oracle(const BoundQuery& q);

/// Binomial lower-tail CDF P[Bin(n, p) <= k], summed in the log domain.
double binomial_cdf(std::size_t k, std::size_t n, double p);

/// Solves sum_{j<=k} C(n,j) e^j (1-e)^{n-j} = delta for e. k == n gives 1.
double binomial_tail_inversion(std::size_t k, std::size_t n, double delta);

/// Split-conformal bound for the k-th smallest of n_cal calibration scores,
/// 1 <= k <= n_cal. Equal to binomial_tail_inversion(n_cal - k, n_cal, delta).
double conformal_eps(std::size_t k, std::size_t n_cal, double delta);

/// Per-statement confidence budget for r simultaneous statements.
double union_delta(double delta_total, std::size_t r);

}  // namespace p2l::bounds
