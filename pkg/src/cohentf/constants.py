"""Sharp constants for Gabor/Wigner Lp bounds and operator-norm estimates.

Exponents are floats in [1, inf]; ``math.inf`` is handled symbolically.  All
powers of the form x**x with x = 0 are taken to be 1.
"""

from __future__ import annotations

import math

from scipy.special import xlogy

from .grid import as_exponent, conjugate

__all__ = [
    "babenko",
    "h_const",
    "c_const",
    "wigner_bounded",
    "loc_norm_bound",
    "cohen_norm_bound",
    "RELATION_TOL",
]

RELATION_TOL = 1e-12


def _recip(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def babenko(p: float) -> float:
    """A_p = (p^(1/p) / p'^(1/p'))^(1/2), with A_1 = A_inf = 1."""
    p = as_exponent(p)
    if p == 1.0 or math.isinf(p):
        return 1.0
    q = conjugate(p)
    return math.exp(0.5 * (math.log(p) / p - math.log(q) / q))


def _check_hq(p: float, q: float) -> None:
    if p < 2.0:
        raise ValueError(f"H(p, q) needs p >= 2, got p={p}")
    pc = conjugate(p)
    if q < pc * (1 - RELATION_TOL) or q > p * (1 + RELATION_TOL):
        raise ValueError(f"H(p, q) needs p' <= q <= p, got p={p}, q={q}")


def h_const(p: float, q: float, d: int = 1) -> float:
    """Gabor transform constant: ||V_g f||_p <= H(p,q) ||f||_q ||g||_q'."""
    p, q = as_exponent(p), as_exponent(q)
    _check_hq(p, q)
    if math.isinf(p):
        return 1.0
    log_h = (d / p) * math.log(q / p)
    # p - q and qp - p - q vanish on the region's edges; clamp rounding noise
    pq = max(p - q, 0.0)
    log_h += xlogy(pq, pq) * d / (2 * p * q)
    r = max(q * p - p - q, 0.0)
    log_h += xlogy(r, r) * d / (2 * p * q)
    log_h -= xlogy(q - 1, q - 1) * d / (2 * q)
    log_h -= xlogy(p - 2, p - 2) * d / (2 * p)
    return math.exp(log_h)


def c_const(p: float, q: float, d: int = 1) -> float:
    """Wigner transform constant C(p,q) = 2^((p-2)d/p) H(p,q)."""
    p, q = as_exponent(p), as_exponent(q)
    _check_hq(p, q)
    if math.isinf(p):
        return 2.0 ** d
    return 2.0 ** ((p - 2.0) * d / p) * h_const(p, q, d)


def wigner_bounded(r: float, s: float, p: float) -> bool:
    """Whether Wig: L^r x L^s -> L^p is bounded.

    True iff s = r', p >= 2 and p' <= r <= p.
    """
    r, s, p = as_exponent(r), as_exponent(s), as_exponent(p)
    if abs(_recip(r) + _recip(s) - 1.0) > RELATION_TOL:
        return False
    if p < 2.0:
        return False
    return _recip(p) - RELATION_TOL <= _recip(r) <= _recip(conjugate(p)) + RELATION_TOL


def loc_norm_bound(q: float, d: int, n_phi: float, n_psi: float, n_a: float) -> float:
    """(1/q')^(d/q') ||phi||_2 ||psi||_2 ||a||_q, the factor being 1 at q = 1."""
    q = as_exponent(q)
    qc = conjugate(q)
    factor = 1.0 if math.isinf(qc) else (1.0 / qc) ** (d / qc)
    return factor * n_phi * n_psi * n_a


def cohen_norm_bound(r: float, s: float, q: float, p: float, d: int = 1) -> float:
    """(A_r A_s A_q')^d C(q', p): the B(L^p) bound per unit ||a||_r ||sigma||_s.

    Requires q in [1, 2], 1/r + 1/s = 1 + 1/q and p in [q, q'].
    """
    r, s, q, p = (as_exponent(v) for v in (r, s, q, p))
    if not 1.0 <= q <= 2.0:
        raise ValueError(f"q must lie in [1, 2], got {q}")
    if abs(_recip(r) + _recip(s) - 1.0 - _recip(q)) > RELATION_TOL:
        raise ValueError(f"need 1/r + 1/s = 1 + 1/q, got r={r}, s={s}, q={q}")
    qc = conjugate(q)
    if p < q * (1 - RELATION_TOL) or p > qc * (1 + RELATION_TOL):
        raise ValueError(f"p must lie in [q, q'] = [{q}, {qc}], got {p}")
    p = min(max(p, q), qc)
    a = babenko(r) * babenko(s) * babenko(qc)
    return a ** d * c_const(qc, p, d)
