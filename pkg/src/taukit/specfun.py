"""Complex log-gamma, digamma, and the modified gamma function Lambda.

Lambda(w) = e^w Gamma(w) / (sqrt(2*pi) * w^(w - 1/2)) is the building block of
the uncoupled tau-function solution components.  Its logarithm is exactly the
Stirling remainder series, so log Lambda is computed from that series directly
at large |w| (no cancellation) and through log-gamma with a recursion shift
otherwise.  Everything is principal-branch with the cut along the negative
real axis.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import BranchCutError, PoleError

LOG_SQRT_TWO_PI = 0.5 * math.log(2.0 * math.pi)

# B_{2n} for n = 1..12; the n-th remainder term is B_{2n} / ((2n)(2n-1) w^(2n-1)).
_BERNOULLI_EVEN = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
)

_SHIFT_RE = 9.0            # recursion target: Re(w) >= 9 before the series
_SERIES_CUTOFF = 9.0       # |w| above which log Lambda uses the series directly
_SERIES_ARG_MAX = 0.5 * math.pi + 0.2


@dataclass(frozen=True)
class BranchPolicy:
    """Rejection margin around the negative-real branch cut."""

    principal_only: bool = True
    cut_axis: str = "negative_real"
    margin: float = 1e-8

    def check(self, w: complex) -> None:
        w = complex(w)
        if w == 0:
            raise PoleError("Lambda has a singularity at w = 0")
        if abs(cmath.phase(-w)) < self.margin:
            raise BranchCutError(
                f"w = {w} within margin {self.margin:g} of the negative-real cut"
            )


DEFAULT_BRANCH_POLICY = BranchPolicy()


def _near_nonpositive_integer(w: complex, tol: float = 1e-12) -> bool:
    if abs(w.imag) > tol:
        return False
    n = round(w.real)
    return n <= 0 and abs(w.real - n) <= tol * max(1.0, abs(n))


def _stirling_remainder(w: complex) -> complex:
    """sum_n B_{2n} / ((2n)(2n-1) w^(2n-1)); requires Re(w) or |w| large."""
    inv2 = 1.0 / (w * w)
    term = 1.0 / w
    total = 0.0 + 0.0j
    for n, b in enumerate(_BERNOULLI_EVEN, start=1):
        total += b / ((2 * n) * (2 * n - 1)) * term
        term *= inv2
    return total


def _stirling_remainder_deriv(w: complex) -> complex:
    """d/dw of the remainder: -sum_n B_{2n} / (2n * w^(2n))."""
    inv2 = 1.0 / (w * w)
    term = inv2
    total = 0.0 + 0.0j
    for n, b in enumerate(_BERNOULLI_EVEN, start=1):
        total -= b / (2 * n) * term
        term *= inv2
    return total


def log_gamma(w: complex) -> complex:
    """Principal-branch log Gamma; exp(log_gamma(w)) = Gamma(w).

    Stirling series after an integer recursion shift to Re(w) >= 9; the shift
    terms are subtracted back as principal logs, which keeps the branch equal
    to the standard analytic continuation from the positive real axis.
    """
    w = complex(w)
    if _near_nonpositive_integer(w):
        raise PoleError(f"Gamma pole at w = {w}")
    shift = max(0, math.ceil(_SHIFT_RE - w.real))
    ws = w + shift
    value = (ws - 0.5) * cmath.log(ws) - ws + LOG_SQRT_TWO_PI + _stirling_remainder(ws)
    for k in range(shift):
        value -= cmath.log(w + k)
    return value


def digamma(w: complex) -> complex:
    """Logarithmic derivative of Gamma, same shift strategy as log_gamma."""
    w = complex(w)
    if _near_nonpositive_integer(w):
        raise PoleError(f"digamma pole at w = {w}")
    shift = max(0, math.ceil(_SHIFT_RE - w.real))
    ws = w + shift
    value = cmath.log(ws) - 0.5 / ws + _stirling_remainder_deriv(ws)
    for k in range(shift):
        value -= 1.0 / (w + k)
    return value


def log_lambda(w: complex, policy: BranchPolicy = DEFAULT_BRANCH_POLICY) -> complex:
    """log Lambda(w) = w + log Gamma(w) - (1/2) log(2 pi) - (w - 1/2) Log(w).

    Decays like 1/(12 w) in the cut plane.  For |w| above the series cutoff
    (and away from the cut) the value is exactly the Stirling remainder, which
    avoids the cancellation of the defining combination.
    """
    w = complex(w)
    policy.check(w)
    if _near_nonpositive_integer(w):
        raise PoleError(f"Lambda pole at w = {w}")
    if abs(w) >= _SERIES_CUTOFF and abs(cmath.phase(w)) <= _SERIES_ARG_MAX:
        return _stirling_remainder(w)
    return w + log_gamma(w) - LOG_SQRT_TWO_PI - (w - 0.5) * cmath.log(w)


def dlog_lambda(w: complex, policy: BranchPolicy = DEFAULT_BRANCH_POLICY) -> complex:
    """d/dw log Lambda(w) = digamma(w) - Log(w) + 1/(2w) ~ -1/(12 w^2)."""
    w = complex(w)
    policy.check(w)
    if _near_nonpositive_integer(w):
        raise PoleError(f"Lambda pole at w = {w}")
    if abs(w) >= _SERIES_CUTOFF and abs(cmath.phase(w)) <= _SERIES_ARG_MAX:
        return _stirling_remainder_deriv(w)
    return digamma(w) - cmath.log(w) + 0.5 / w
