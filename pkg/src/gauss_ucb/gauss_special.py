"""Scalar special functions of the standard normal law.

Everything here works on plain Python floats; the bounds code integrates
these with ``scipy.integrate.quad`` where per-call overhead matters more than
vectorisation.
"""

import math

from scipy.special import erfcx

SQRT2 = math.sqrt(2.0)
SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI
_SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)


def std_normal_pdf(x: float) -> float:
    """Density of N(0, 1) at ``x``."""
    return math.exp(-0.5 * x * x) * INV_SQRT_2PI


def std_normal_cdf(x: float) -> float:
    """P(Z <= x) for Z ~ N(0, 1).

    Goes through ``erfc`` so that both tails keep full relative precision;
    ``1 - Phi(x)`` should be written as ``std_normal_cdf(-x)``.
    """
    return 0.5 * math.erfc(-x / SQRT2)


def mills_ratio(z: float) -> float:
    """Phi(-z) / phi(z), computed without underflow for large ``z``."""
    return _SQRT_PI_OVER_2 * float(erfcx(z / SQRT2))


def partial_second_moment(x: float) -> float:
    """E[(Z + x)_+^2] for Z ~ N(0, 1).

    Closed form ``(1 + x^2) Phi(x) + x phi(x)``.  For ``x < -1`` the two
    terms nearly cancel, so the density is factored out and the remaining
    bracket is evaluated through the Mills ratio.
    """
    if x >= -1.0:
        return (1.0 + x * x) * std_normal_cdf(x) + x * std_normal_pdf(x)
    z = -x
    bracket = (1.0 + z * z) * mills_ratio(z) - z
    return max(std_normal_pdf(z) * bracket, 0.0)


def partial_first_moment(x: float) -> float:
    """E[(Z + x)_+] = x Phi(x) + phi(x); half the derivative of the second moment."""
    if x >= -1.0:
        return x * std_normal_cdf(x) + std_normal_pdf(x)
    z = -x
    return max(std_normal_pdf(z) * (1.0 - z * mills_ratio(z)), 0.0)


def truncated_normal_mean(a: float, c: float) -> float:
    """E[Z | a < Z < c] for Z ~ N(0, 1).

    Raises ``ValueError`` if ``a >= c`` or if the interval carries no
    representable probability mass.
    """
    if not a < c:
        raise ValueError(f"need a < c, got a={a}, c={c}")
    if a > 0.0:
        # Both endpoints in the upper tail: reflect so the mass is a
        # difference of small, accurately represented numbers.
        return -truncated_normal_mean(-c, -a)
    if c < -1.0:
        # Lower tail: divide numerator and mass by phi(c) so nothing underflows.
        ratio = math.exp(0.5 * (c - a) * (c + a))  # phi(a) / phi(c) < 1
        scaled_mass = mills_ratio(-c) - ratio * mills_ratio(-a)
        if not scaled_mass > 0.0:
            raise ValueError(f"interval ({a}, {c}) has vanishing normal mass")
        mean = (ratio - 1.0) / scaled_mass
        return min(max(mean, math.nextafter(a, math.inf)), math.nextafter(c, -math.inf))
    mass = std_normal_cdf(c) - std_normal_cdf(a)
    if not mass > 0.0:
        raise ValueError(f"interval ({a}, {c}) has vanishing normal mass")
    mean = (std_normal_pdf(a) - std_normal_pdf(c)) / mass
    return min(max(mean, math.nextafter(a, math.inf)), math.nextafter(c, -math.inf))


def gaussian_kl(mu1: float, mu2: float, sigma: float) -> float:
    """KL divergence between N(mu1, sigma^2) and N(mu2, sigma^2)."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    d = mu1 - mu2
    return d * d / (2.0 * sigma * sigma)
