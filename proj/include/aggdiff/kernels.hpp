#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

// Scalar kernels of the Scharfetter–Gummel flux family: the Bernoulli
// function B_kappa, the two-point cell-problem flux theta_kappa, the edge
// dissipation density alpha_kappa, the Onsager force-to-flux map phi_kappa,
// the zero-diffusivity (upwind) limit, and the logarithmic mean.
//
// All functions are pure and total on their stated domains. Branch cutoffs
// are chosen so that the raw formulas never overflow or cancel:
//   bernoulli:  Taylor series for |s/kappa| < 1e-5, s/expm1(s/kappa) in the
//               moderate range, asymptotic tails beyond |s/kappa| = 500.
//   log_mean:   3-term expansion for relative spreads below 1e-4.

namespace aggdiff {

namespace detail {

[[noreturn]] inline void throw_domain(const char* what) { throw std::domain_error(what); }

} // namespace detail

/// Bernoulli function B_kappa(s) = s / (e^{s/kappa} - 1), continued by
/// B_kappa(0) = kappa. Convex, strictly decreasing, B_kappa(s) >= max(-s, 0).
template <typename Scalar>
Scalar bernoulli(Scalar kappa, Scalar s) {
  if (!(kappa > Scalar(0))) detail::throw_domain("bernoulli: kappa must be positive");
  if (!std::isfinite(s)) detail::throw_domain("bernoulli: s must be finite");
  const Scalar z = s / kappa;
  if (std::abs(z) < Scalar(1e-5)) {
    // kappa - s/2 + s^2/(12 kappa); next term is O(z^4) and below rounding
    return kappa - s / Scalar(2) + s * z / Scalar(12);
  }
  if (z > Scalar(500)) return s * std::exp(-z); // e^z - 1 == e^z to rounding
  if (z < Scalar(-500)) return -s;              // e^z vanishes
  return s / std::expm1(z);
}

/// dB_kappa/ds. Lies in (-1, 0); equals -1/2 at s = 0.
template <typename Scalar>
Scalar bernoulli_deriv(Scalar kappa, Scalar s) {
  if (!(kappa > Scalar(0))) detail::throw_domain("bernoulli_deriv: kappa must be positive");
  if (!std::isfinite(s)) detail::throw_domain("bernoulli_deriv: s must be finite");
  const Scalar z = s / kappa;
  if (std::abs(z) < Scalar(1e-5)) return Scalar(-0.5) + z / Scalar(6);
  if (z > Scalar(300)) return (Scalar(1) - z) * std::exp(-z);
  if (z < Scalar(-300)) return Scalar(-1);
  const Scalar em = std::expm1(z);
  return (em - z * (em + Scalar(1))) / (em * em);
}

/// Cell-problem flux theta_kappa(a, b; v) between neighbor densities a, b
/// under the edge drift v (already scaled by the center distance).
/// Evaluated through the two-Bernoulli form
///   theta = B_kappa(-v) a - B_kappa(v) b,
/// which is algebraically the sinh-quotient definition but needs only one
/// stable primitive. theta(a, b; 0) = kappa (a - b).
template <typename Scalar>
Scalar theta(Scalar kappa, Scalar a, Scalar b, Scalar v) {
  return bernoulli(kappa, -v) * a - bernoulli(kappa, v) * b;
}

/// d theta / dv, bounded between min(a,b) and max(a,b) for a, b >= 0.
template <typename Scalar>
Scalar theta_dv(Scalar kappa, Scalar a, Scalar b, Scalar v) {
  return -a * bernoulli_deriv(kappa, -v) - b * bernoulli_deriv(kappa, v);
}

/// Zero-diffusivity limit of theta: density is taken from the upstream cell.
template <typename Scalar>
Scalar upwind_theta(Scalar a, Scalar b, Scalar v) {
  if (v > Scalar(0)) return a * v;
  if (v < Scalar(0)) return b * v;
  return Scalar(0);
}

/// Edge dissipation density
///   alpha_kappa(a, b; v) = (log a - log b + v/kappa) * theta_kappa(a, b; v),
/// nonnegative, vanishing exactly when theta vanishes (v = -kappa log(a/b)).
/// The (log a - log b + v/kappa) form never builds a e^{v/2kappa} and is safe
/// for large |v|/kappa. Rounding near the common root of both factors may
/// produce a tiny negative product; it is clamped to zero.
template <typename Scalar>
Scalar alpha(Scalar kappa, Scalar a, Scalar b, Scalar v) {
  if (!(a > Scalar(0)) || !(b > Scalar(0)))
    detail::throw_domain("alpha: densities must be positive");
  const Scalar force = std::log(a) - std::log(b) + v / kappa;
  const Scalar raw = force * theta(kappa, a, b, v);
  return raw > Scalar(0) ? raw : Scalar(0);
}

/// Logarithmic mean Lambda(a, b) = (a - b) / (log a - log b), with
/// Lambda(a, a) = a. Strictly between min(a,b) and max(a,b) for a != b.
template <typename Scalar>
Scalar log_mean(Scalar a, Scalar b) {
  if (!(a > Scalar(0)) || !(b > Scalar(0)))
    detail::throw_domain("log_mean: arguments must be positive");
  const Scalar m = (a + b) / Scalar(2);
  const Scalar r = (a - b) / m;
  if (std::abs(r) < Scalar(1e-4)) {
    // (a-b)/(log a - log b) = m / (1 + r^2/12 + O(r^4))
    return m * (Scalar(1) - r * r / Scalar(12));
  }
  return (a - b) / (std::log(a) - std::log(b));
}

/// Onsager relation: flux as a monotone one-to-one function of the
/// thermodynamic force xi, phi_kappa(a, b; xi) = theta(a, b; xi - kappa log(a/b)).
template <typename Scalar>
Scalar onsager_phi(Scalar kappa, Scalar a, Scalar b, Scalar xi) {
  if (!(a > Scalar(0)) || !(b > Scalar(0)))
    detail::throw_domain("onsager_phi: densities must be positive");
  return theta(kappa, a, b, xi - kappa * (std::log(a) - std::log(b)));
}

} // namespace aggdiff
