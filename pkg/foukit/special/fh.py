"""
Numerically stable evaluation of f_H and its first two derivatives.

    f_H(x) = e^{-x}(Γ(2H) − ∫₀ˣ eˢ s^{2H−1} ds) + e^{x}(Γ(2H) − ∫₀ˣ e^{−s} s^{2H−1} ds)

The first term is rewritten as e^{-x}Γ(2H) − D(x) with the damped integral
D(x) = ∫₀ˣ e^{−(x−s)} s^{2H−1} ds, so every intermediate stays bounded. The
second term is e^{x}Γ(2H, x), the scaled upper incomplete gamma function,
evaluated by continued fraction or series depending on x.

Derivatives follow from A′ = −A − x^{2H−1} and B′ = B − x^{2H−1}:

    f_H′(x)  = −A(x) + B(x) − 2x^{2H−1}
    f_H″(x)  =  A(x) + B(x) − 2(2H−1)x^{2H−2}
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import integrate, special

from foukit.errors import DomainError, NumericalFailureError

logger = logging.getLogger(__name__)

# Mass of the damped integral further than this below x is below e^{-40}.
DAMPING_WINDOW = 40.0

_MAX_ITERATIONS = 500
_EPS = float(np.finfo(float).eps)
_FPMIN = 1.0e-300


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the adaptive quadrature behind the damped integral."""

    abs_tol: float = 1.0e-13
    rel_tol: float = 1.0e-11
    max_subdivisions: int = 200
    # Smallest exponent 2H accepted by the s = u^{1/(2H)} substitution
    singularity_exponent_floor: float = 0.02

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if self.singularity_exponent_floor <= 0:
            raise DomainError("singularity_exponent_floor must be positive")


DEFAULT_QUADRATURE = QuadratureConfig()


def check_hurst(h: float) -> float:
    """
    Validate a Hurst parameter.

    Args:
        h: Candidate Hurst parameter

    Returns:
        h as a float

    Raises:
        DomainError: If h is not a finite number strictly inside (0, 1)
    """
    h = float(h)
    if not math.isfinite(h) or not 0.0 < h < 1.0:
        raise DomainError(f"Hurst parameter must lie in (0, 1), got {h}")
    return h


def _check_argument(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"f_H is defined for finite x >= 0, got {x}")
    return x


def _lower_series(a: float, x: float) -> float:
    """Σ_{n≥0} xⁿ / (a(a+1)…(a+n)), the series of γ(a, x) e^{x} x^{-a}."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITERATIONS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total
    raise NumericalFailureError(
        f"incomplete gamma series did not converge for a={a}, x={x}"
    )


def _continued_fraction(a: float, x: float) -> float:
    """Legendre continued fraction for Γ(a, x) e^{x} x^{-a} (modified Lentz)."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITERATIONS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NumericalFailureError(
        f"incomplete gamma continued fraction did not converge for a={a}, x={x}"
    )


def upper_gamma_scaled(a: float, x: float) -> float:
    """
    Evaluate e^{x}Γ(a, x) without overflow.

    Args:
        a: Shape parameter, a > 0
        x: Argument, x >= 0

    Returns:
        e^{x} times the upper incomplete gamma function

    Raises:
        DomainError: If a <= 0 or x < 0
        NumericalFailureError: If the series or continued fraction stalls
    """
    if a <= 0:
        raise DomainError(f"upper incomplete gamma needs a > 0, got {a}")
    x = _check_argument(x)
    if x == 0.0:
        return float(special.gamma(a))
    x_pow_a = math.exp(a * math.log(x))
    if x > a + 1.0:
        return x_pow_a * _continued_fraction(a, x)
    return math.exp(x) * float(special.gamma(a)) - x_pow_a * _lower_series(a, x)


def _quad(fn: Callable[[float], float], lo: float, hi: float, cfg: QuadratureConfig) -> float:
    if hi <= lo:
        return 0.0
    result = integrate.quad(
        fn,
        lo,
        hi,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        full_output=1,
    )
    # A fourth element is the warning message of a non-converged integration
    if len(result) > 3:
        raise NumericalFailureError(
            f"quadrature on [{lo:.6g}, {hi:.6g}] did not converge within "
            f"{cfg.max_subdivisions} subdivisions: {result[3]}"
        )
    return float(result[0])


def damped_integral(a: float, x: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """
    Evaluate D(x) = ∫₀ˣ e^{−(x−s)} s^{a−1} ds.

    For a < 1 the substitution s = u^{1/a} removes the endpoint singularity:
    D(x) = (1/a) ∫₀^{x^a} exp(−(x − u^{1/a})) du. The range is split at
    x − DAMPING_WINDOW so the adaptive rule sees the region carrying the mass.

    Args:
        a: Exponent 2H, a > 0
        x: Upper limit, x >= 0
        cfg: Quadrature tolerances

    Returns:
        The value of the damped integral

    Raises:
        NumericalFailureError: If quadrature does not converge
    """
    x = _check_argument(x)
    if x == 0.0:
        return 0.0
    split = max(0.0, x - DAMPING_WINDOW)

    if a < 1.0:
        if a < cfg.singularity_exponent_floor:
            raise DomainError(
                f"exponent 2H={a} is below the singularity floor "
                f"{cfg.singularity_exponent_floor}"
            )
        inv_a = 1.0 / a

        def integrand(u: float) -> float:
            return math.exp(-(x - u**inv_a))

        upper = x**a
        lower = split**a
        return inv_a * (
            _quad(integrand, 0.0, lower, cfg) + _quad(integrand, lower, upper, cfg)
        )

    power = a - 1.0

    def integrand(s: float) -> float:
        return math.exp(-(x - s)) * s**power

    return _quad(integrand, 0.0, split, cfg) + _quad(integrand, split, x, cfg)


def fh_terms(h: float, x: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> Tuple[float, float]:
    """
    Return the pair (A(x), B(x)) with f_H = A + B.

    A(x) = e^{-x}Γ(2H) − D(x) and B(x) = e^{x}Γ(2H, x). Derivatives of f_H
    are linear in A, B and a power of x, so callers needing several of
    f_H, f_H′, f_H″ at the same point evaluate the quadrature once.
    """
    h = check_hurst(h)
    x = _check_argument(x)
    a = 2.0 * h
    first = math.exp(-x) * float(special.gamma(a)) - damped_integral(a, x, cfg)
    second = upper_gamma_scaled(a, x)
    return first, second


def _power_term(h: float, x: float, order: int) -> float:
    """Return the non-integral part of the order-th derivative at x."""
    a = 2.0 * h
    if order == 1:
        if x == 0.0:
            if a < 1.0:
                raise DomainError(f"f_H' is singular at x=0 for H={h} < 1/2")
            return 2.0 if a == 1.0 else 0.0
        return 2.0 * x ** (a - 1.0)
    if x == 0.0:
        raise DomainError("f_H'' is not evaluated at x=0")
    return 2.0 * (a - 1.0) * x ** (a - 2.0)


def f_h(h: float, x: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """
    Evaluate f_H(x).

    Args:
        h: Hurst parameter in (0, 1)
        x: Nonnegative argument
        cfg: Quadrature tolerances

    Returns:
        f_H(x); f_H(0) = 2Γ(2H)

    Raises:
        DomainError: If h or x is outside the domain
        NumericalFailureError: If quadrature does not converge
    """
    first, second = fh_terms(h, x, cfg)
    return first + second


def f_h_d1(h: float, x: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """
    Evaluate f_H′(x) = −A(x) + B(x) − 2x^{2H−1}.

    Raises:
        DomainError: At x = 0 when H < 1/2
    """
    h = check_hurst(h)
    x = _check_argument(x)
    power = _power_term(h, x, 1)
    first, second = fh_terms(h, x, cfg)
    return -first + second - power


def f_h_d2(h: float, x: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """
    Evaluate f_H″(x) = A(x) + B(x) − 2(2H−1)x^{2H−2}.

    Raises:
        DomainError: At x = 0
    """
    h = check_hurst(h)
    x = _check_argument(x)
    power = _power_term(h, x, 2)
    first, second = fh_terms(h, x, cfg)
    return first + second - power


def f_h_with_derivatives(
    h: float, x: float, order: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> Tuple[float, ...]:
    """
    Evaluate (f_H, f_H′, …) up to the given derivative order from one term pair.

    Args:
        h: Hurst parameter in (0, 1)
        x: Nonnegative argument
        order: Highest derivative wanted, 0, 1 or 2
        cfg: Quadrature tolerances

    Returns:
        Tuple of length order + 1
    """
    if order not in (0, 1, 2):
        raise DomainError(f"derivative order must be 0, 1 or 2, got {order}")
    h = check_hurst(h)
    x = _check_argument(x)
    powers = [_power_term(h, x, k) for k in range(1, order + 1)]
    first, second = fh_terms(h, x, cfg)
    values = [first + second]
    if order >= 1:
        values.append(-first + second - powers[0])
    if order == 2:
        values.append(first + second - powers[1])
    return tuple(values)


def f_h_array(h: float, xs, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
    """Evaluate f_H elementwise over an array of nonnegative arguments."""
    xs = np.asarray(xs, dtype=float)
    flat = np.array([f_h(h, x, cfg) for x in xs.ravel()], dtype=float)
    return flat.reshape(xs.shape)
