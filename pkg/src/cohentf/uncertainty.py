"""Concentration measures and Donoho-Stark type lower bounds for |T||Omega|.

Two pipelines are provided.  The localization pipeline tests a signal with
the multiplication operator by F1 = chi_T * phi_{2 lam1} and the Fourier
multiplier by F2 = chi_Omega * phi_{2/lam2}.  The Cohen pipeline replaces the
Gaussian marginals by those of an arbitrary Cohen kernel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.fft as sfft
from scipy.signal import fftconvolve
from scipy.special import xlogy

from .constants import babenko
from .grid import (
    Grid,
    MeasurableSet,
    Signal,
    _same_grid,
    dft,
    dilate,
    gaussian,
    idft,
    lp_norm,
    make_grid,
    set_measure,
)
from .operators import MAX_DIRECT, cohen_op_matrix, operator_norm
from .transforms import CohenKernel, Dirac, TFFunction, kernel_array, wigner

__all__ = [
    "ConcentrationReport",
    "epsilon_concentration",
    "gaussian_multipliers",
    "measured_epsilons",
    "ds_classical_bound",
    "ds_bound_at",
    "ds_bound_optimize",
    "golden_max",
    "cohen_FG",
    "cohen_up_bound",
    "localization_report",
    "cohen_report",
    "scaling_experiment",
]

SUP_SLACK = 1e-9


# ---------------------------------------------------------------------------
# Concentration
# ---------------------------------------------------------------------------

def epsilon_concentration(f: Signal, U: MeasurableSet) -> float:
    """Smallest eps with ||f||_{L2(R^d minus U)} <= eps ||f||_2."""
    _same_grid(f.grid, U.grid)
    total = np.sum(np.abs(f.samples) ** 2)
    if total == 0:
        raise ValueError("epsilon-concentration is undefined for the zero signal")
    outside = np.sum(np.abs(f.samples[~U.mask]) ** 2)
    return float(math.sqrt(outside / total))


def _circular_conv(values: np.ndarray, kernel0: np.ndarray, dx: float) -> np.ndarray:
    """sum_i values[i] k(x_t - x_i) dx with k given at wrapped offsets."""
    return sfft.ifft(sfft.fft(values) * sfft.fft(kernel0)) * dx


def _gauss_offsets(grid: Grid, mu: float) -> np.ndarray:
    off = sfft.fftfreq(grid.n, grid.dw)  # i*dx, wrapped
    return math.sqrt(mu) * np.exp(-math.pi * mu * off ** 2)


def gaussian_multipliers(T: MeasurableSet, Omega: MeasurableSet, lam1: float, lam2: float):
    """F1 = chi_T * phi_{2 lam1} on the time grid and F2 = chi_Omega * phi_{2/lam2}
    on the frequency grid (both real)."""
    if T.grid.dim != 1:
        raise NotImplementedError("concentration operators are implemented for d = 1")
    if Omega.grid != T.grid.dual():
        raise ValueError("Omega must live on the dual grid of T")
    F1 = _circular_conv(T.indicator, _gauss_offsets(T.grid, 2.0 * lam1), T.grid.dx).real
    F2 = _circular_conv(Omega.indicator, _gauss_offsets(Omega.grid, 2.0 / lam2), Omega.grid.dx).real
    return F1, F2


def _eps_from(f: Signal, F1: np.ndarray, F2: np.ndarray):
    norm2 = np.sum(np.abs(f.samples) ** 2)
    if norm2 == 0:
        raise ValueError("epsilon-concentration is undefined for the zero signal")
    L1f = F1 * f.samples
    L2f = idft(F2 * dft(f.samples, f.grid), f.grid)
    e1 = math.sqrt(max(0.0, 1.0 - np.sum(np.abs(L1f) ** 2) / norm2))
    e2 = math.sqrt(max(0.0, 1.0 - np.sum(np.abs(L2f) ** 2) / norm2))
    return e1, e2


def measured_epsilons(f: Signal, T: MeasurableSet, Omega: MeasurableSet, lam1: float = 1.0, lam2: float = 1.0):
    """Minimal (eps_T, eps_Omega) with ||L_j f||^2 >= (1 - eps_j^2) ||f||^2."""
    _same_grid(f.grid, T.grid)
    F1, F2 = gaussian_multipliers(T, Omega, lam1, lam2)
    return _eps_from(f, F1, F2)


# ---------------------------------------------------------------------------
# Donoho-Stark bounds
# ---------------------------------------------------------------------------

def _check_eps(eps_t: float, eps_o: float) -> float:
    if eps_t < 0 or eps_o < 0:
        raise ValueError("epsilons must be nonnegative")
    s = eps_t + eps_o
    if s > 1.0 + 1e-15:
        raise ValueError(f"need eps_T + eps_Omega <= 1, got {s}")
    return min(s, 1.0)


def ds_classical_bound(eps_t: float, eps_o: float) -> float:
    s = _check_eps(eps_t, eps_o)
    return (1.0 - s) ** 2


def _log_ds(r, s: float, d: int):
    r = np.asarray(r, dtype=float)
    out = -d * np.log(2.0 * r) + 0.5 * d * (xlogy(r + 1.0, r + 1.0) - xlogy(r - 1.0, r - 1.0))
    if s > 0:
        out = out + 2.0 * r * math.log1p(-s)
    return out


def ds_bound_at(r: float, eps_t: float, eps_o: float, d: int = 1) -> float:
    """(1 - eps)^(2r) (2r)^(-d) ((r+1)^(r+1) / (r-1)^(r-1))^(d/2)."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    s = _check_eps(eps_t, eps_o)
    if s >= 1.0:
        return 0.0
    if r == 1.0:
        return (1.0 - s) ** 2
    return float(np.exp(_log_ds(r, s, d)))


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(func: Callable[[float], float], a: float, b: float, tol: float = 1e-9):
    """Golden-section search for the maximum of a unimodal function on [a, b].

    Returns (x, f(x)).
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


@dataclass
class BoundOptimum:
    r_star: float
    bound: float
    at_boundary: bool

    def __iter__(self):
        yield self.r_star
        yield self.bound


def ds_bound_optimize(eps_t: float, eps_o: float, d: int = 1, r_max: float = 1e3, n_scan: int = 200) -> BoundOptimum:
    """Maximise :func:`ds_bound_at` over r in [1, r_max].

    Coarse log-spaced scan, then golden-section refinement around the best
    scan point.  ``at_boundary`` reports a maximiser at r_max, i.e. a
    supremum that may only be approached as r grows.
    """
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    s = _check_eps(eps_t, eps_o)
    if s >= 1.0:
        return BoundOptimum(1.0, 0.0, False)
    rs = np.geomspace(1.0, r_max, n_scan) if r_max > 1 else np.array([1.0])
    logv = _log_ds(rs, s, d)
    i = int(np.argmax(logv))
    if i == len(rs) - 1:
        return BoundOptimum(float(r_max), float(np.exp(logv[i])), True)
    lo = rs[max(i - 1, 0)]
    hi = rs[min(i + 1, len(rs) - 1)]
    r_ref, v_ref = golden_max(lambda r: float(_log_ds(r, s, d)), lo, hi, 1e-9)
    if v_ref > logv[i]:
        return BoundOptimum(float(r_ref), float(np.exp(v_ref)), False)
    return BoundOptimum(float(rs[i]), float(np.exp(logv[i])), False)


# ---------------------------------------------------------------------------
# Cohen-class machinery
# ---------------------------------------------------------------------------

@dataclass
class CohenMarginals:
    F1: Signal
    F2: Signal
    G1: Signal
    G2: Signal
    singular: bool = False

    def __iter__(self):
        return iter((self.F1, self.F2, self.G1, self.G2))


def _linear_conv(values: np.ndarray, kernel0: np.ndarray, dx: float) -> np.ndarray:
    n = values.size
    full = fftconvolve(values, sfft.fftshift(kernel0), mode="full")
    return full[n // 2:n // 2 + n] * dx


def cohen_FG(kernel: CohenKernel, T: MeasurableSet, Omega: MeasurableSet, padding: str = "periodic") -> CohenMarginals:
    """Marginals G1(t) = int conj(sigma(-t, w)) dw, G2(xi) = int conj(sigma(x, -xi)) dx
    and F1 = chi_T * G1, F2 = chi_Omega * G2.

    ``padding`` selects a circular (default, consistent with the operator
    constructions) or zero-padded convolution.
    """
    if padding not in ("periodic", "zero"):
        raise ValueError(f"unknown padding {padding!r}")
    conv = _circular_conv if padding == "periodic" else _linear_conv
    grid = T.grid
    if grid.dim != 1:
        raise NotImplementedError("Cohen marginals are implemented for d = 1")
    if Omega.grid != grid.dual():
        raise ValueError("Omega must live on the dual grid of T")
    fgrid = Omega.grid
    n = grid.n
    o = grid.origin_index
    if isinstance(kernel, Dirac):
        g1 = np.zeros(n, dtype=complex)
        g1[o] = 1.0 / grid.dx
        g2 = np.zeros(n, dtype=complex)
        g2[n // 2] = 1.0 / fgrid.dx
        return CohenMarginals(
            Signal(grid, T.indicator), Signal(fgrid, Omega.indicator), Signal(grid, g1), Signal(fgrid, g2), True
        )
    k0 = kernel_array(kernel, grid)
    neg = (-np.arange(n)) % n
    g1_0 = k0.conj()[neg, :].sum(axis=1) * grid.dw  # G1 at offset i*dx
    g2_0 = k0.conj()[:, neg].sum(axis=0) * grid.dx  # G2 at offset i*dw
    F1 = conv(T.indicator, g1_0, grid.dx)
    F2 = conv(Omega.indicator, g2_0, fgrid.dx)
    idx = np.arange(n)
    G1 = Signal(grid, g1_0[(idx - o) % n])
    G2 = Signal(fgrid, g2_0[(idx - n // 2) % n])
    return CohenMarginals(Signal(grid, F1), Signal(fgrid, F2), G1, G2, False)


def _babenko_arr(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(p > 1, p / (p - 1), np.inf)
        term_p = np.where(np.isinf(p), 0.0, np.log(p) / p)
        term_q = np.where(np.isinf(q), 0.0, np.log(q) / q)
    return np.exp(0.5 * (term_p - term_q))


@dataclass
class ConcentrationReport:
    eps_T: float
    eps_Omega: float
    measure_T: float
    measure_Omega: float
    bound_classical: float
    bound_improved: float
    r_star: float
    hypothesis_flags: dict
    product_TOmega: float
    satisfied: bool
    applicable: bool
    kernel: str = "gausswig"
    at_boundary: bool = False
    exponents: dict = field(default_factory=dict)
    op_norms: dict = field(default_factory=dict)
    general_checks: int = 0
    general_violations: int = 0
    lattice: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _verdict(product: float, classical: float, improved: float) -> bool:
    return bool(product >= max(classical, improved) - 1e-12)


def cohen_up_bound(
    kernel: CohenKernel,
    T: MeasurableSet,
    Omega: MeasurableSet,
    eps_t: float,
    eps_o: float,
    d: int = 1,
    r_range=(1.0, 100.0),
    n_r: int = 60,
    p_range=(1.0, 20.0),
    n_p: int = 40,
    marginals: Optional[CohenMarginals] = None,
) -> ConcentrationReport:
    """Lower bound for |T||Omega| for Cohen operators with symbols chi_T, chi_Omega.

    The equal-exponent family s1 = s2 = s, p1 = p2 = p with
    1/s + 1/p = 1 + 1/(2r) is maximised over a (r, p) lattice followed by a
    golden-section refinement in r.  The general (p1, p2) lattice is checked
    against the measured |T|, |Omega| and violations are counted.
    """
    mT, mO = set_measure(T), set_measure(Omega)
    product = mT * mO
    s_eps = eps_t + eps_o
    classical = (1.0 - min(s_eps, 1.0)) ** 2 if s_eps <= 1 else 0.0
    rs = np.geomspace(r_range[0], r_range[1], n_r)
    ps = np.geomspace(p_range[0], p_range[1], n_p)
    lattice = {"r": rs.tolist(), "p": ps.tolist()}

    mg = marginals if marginals is not None else cohen_FG(kernel, T, Omega)
    flags = {"eps_sum_le_1": bool(s_eps <= 1.0)}
    F1, F2 = mg.F1.samples, mg.F2.samples
    scale = max(np.abs(F1).max(), np.abs(F2).max(), 1.0)
    real = bool(np.abs(F1.imag).max() <= 1e-12 * scale and np.abs(F2.imag).max() <= 1e-12 * scale)
    nonneg = bool(F1.real.min() >= -1e-12 * scale and F2.real.min() >= -1e-12 * scale)
    flags["F_real_nonnegative"] = real and nonneg
    flags["F_sup_le_1"] = bool(max(np.abs(F1).max(), np.abs(F2).max()) <= 1.0 + SUP_SLACK)
    flags["kernel_integrable"] = not mg.singular

    op_norms = _cohen_op_norms(kernel, T, Omega, mg)
    flags["min_op_norm_le_1"] = bool(min(op_norms["T"], op_norms["Omega"]) <= 1.0 + SUP_SLACK)
    applicable = all(flags.values())

    report = ConcentrationReport(
        eps_T=float(eps_t),
        eps_Omega=float(eps_o),
        measure_T=mT,
        measure_Omega=mO,
        bound_classical=float(classical),
        bound_improved=0.0,
        r_star=1.0,
        hypothesis_flags=flags,
        product_TOmega=product,
        satisfied=False,
        applicable=applicable,
        kernel=repr(kernel),
        op_norms=op_norms,
        lattice=lattice,
    )
    if mg.singular or s_eps >= 1.0:
        report.satisfied = _verdict(product, classical, 0.0)
        return report

    log1me = math.log1p(-s_eps)
    log_g1 = np.log([lp_norm(mg.G1, p) for p in ps])
    log_g2 = np.log([lp_norm(mg.G2, p) for p in ps])

    def log_bound(r: float, ip: int) -> float:
        """log of the |T||Omega| bound in the equal-exponent family."""
        p = ps[ip]
        inv_s = 1.0 + 1.0 / (2.0 * r) - 1.0 / p
        if not 0.0 < inv_s <= 1.0 + 1e-15:
            return -np.inf
        s = 1.0 / min(inv_s, 1.0)
        logA = 2 * math.log(babenko(s)) + 2 * math.log(babenko(p))
        logA += math.log(babenko(2 * r / (r + 1))) + 2 * math.log(babenko(2 * r / (2 * r - 1)))
        logK = d * logA + log_g1[ip] + log_g2[ip]
        return s * (log1me - logK)

    grid_vals = np.array([[log_bound(r, ip) for ip in range(n_p)] for r in rs])
    ir, ip = np.unravel_index(int(np.argmax(grid_vals)), grid_vals.shape)
    best = grid_vals[ir, ip]
    r_best = float(rs[ir])
    if np.isfinite(best):
        lo, hi = rs[max(ir - 1, 0)], rs[min(ir + 1, n_r - 1)]
        if hi > lo:
            r_ref, v_ref = golden_max(lambda r: log_bound(r, ip), lo, hi, 1e-9)
            if v_ref > best:
                best, r_best = v_ref, float(r_ref)
    improved = float(np.exp(best)) if np.isfinite(best) else 0.0
    p_best = float(ps[ip])
    inv_s = 1.0 + 1.0 / (2.0 * r_best) - 1.0 / p_best
    report.bound_improved = improved
    report.r_star = r_best
    report.at_boundary = bool(ir == n_r - 1)
    report.exponents = {"r": r_best, "p": p_best, "s": 1.0 / inv_s if inv_s > 0 else math.inf}

    # general (p1, p2) family: |T|^(1/s1) |Omega|^(1/s2) >= rhs
    R = rs[:, None, None]
    P1 = ps[None, :, None]
    P2 = ps[None, None, :]
    inv_s1 = 1.0 + 1.0 / (2.0 * R) - 1.0 / P1
    inv_s2 = 1.0 + 1.0 / (2.0 * R) - 1.0 / P2
    valid = (inv_s1 > 0) & (inv_s1 <= 1.0) & (inv_s2 > 0) & (inv_s2 <= 1.0)
    with np.errstate(divide="ignore"):
        s1 = 1.0 / np.where(valid, inv_s1, 1.0)
        s2 = 1.0 / np.where(valid, inv_s2, 1.0)
        logA = (
            np.log(_babenko_arr(s1)) + np.log(_babenko_arr(s2))
            + np.log(_babenko_arr(P1)) + np.log(_babenko_arr(P2))
            + np.log(_babenko_arr(2 * R / (R + 1))) + 2 * np.log(_babenko_arr(2 * R / (2 * R - 1)))
        )
        rhs = log1me - d * logA - log_g1[None, :, None] - log_g2[None, None, :]
        lhs = inv_s1 * (math.log(mT) if mT > 0 else -np.inf) + inv_s2 * (math.log(mO) if mO > 0 else -np.inf)
    viol = valid & (lhs < rhs - 1e-12)
    report.general_checks = int(valid.sum())
    report.general_violations = int(viol.sum())
    report.satisfied = _verdict(product, classical, improved)
    return report


def _cohen_op_norms(kernel: CohenKernel, T: MeasurableSet, Omega: MeasurableSet, mg: CohenMarginals) -> dict:
    """B(L2) norms of T_sigma^{chi_T} and T_sigma^{chi_Omega}.

    Dense matrices are built when n <= MAX_DIRECT; larger grids use the fact
    that these operators are a multiplication and a Fourier multiplier, whose
    norms are sup |F1| and sup |F2|.
    """
    grid = T.grid
    if grid.n <= MAX_DIRECT and not mg.singular:
        chiT = TFFunction(grid, np.repeat(T.indicator[:, None], grid.n, axis=1))
        chiO = TFFunction(grid, np.repeat(Omega.indicator[None, :], grid.n, axis=0))
        nT = operator_norm(cohen_op_matrix(chiT, kernel))
        nO = operator_norm(cohen_op_matrix(chiO, kernel))
        return {"T": nT, "Omega": nO, "method": "dense"}
    return {"T": float(np.abs(mg.F1.samples).max()), "Omega": float(np.abs(mg.F2.samples).max()), "method": "multiplier"}


def localization_report(
    f: Signal, T: MeasurableSet, Omega: MeasurableSet, lam1: float = 1.0, lam2: float = 1.0, r_max: float = 1e3
) -> ConcentrationReport:
    """Concentration report for the Gaussian-window localization pipeline."""
    F1, F2 = gaussian_multipliers(T, Omega, lam1, lam2)
    e1, e2 = _eps_from(f, F1, F2)
    mT, mO = set_measure(T), set_measure(Omega)
    flags = {
        "eps_sum_le_1": bool(e1 + e2 <= 1.0),
        "F_real_nonnegative": bool(F1.min() >= -1e-12 and F2.min() >= -1e-12),
        "F_sup_le_1": bool(max(F1.max(), F2.max()) <= 1.0 + SUP_SLACK),
        "min_op_norm_le_1": bool(min(np.abs(F1).max(), np.abs(F2).max()) <= 1.0 + SUP_SLACK),
    }
    applicable = all(flags.values())
    if e1 + e2 <= 1.0:
        classical = ds_classical_bound(e1, e2)
        opt = ds_bound_optimize(e1, e2, T.grid.dim, r_max)
    else:
        classical, opt = 0.0, BoundOptimum(1.0, 0.0, False)
    product = mT * mO
    return ConcentrationReport(
        eps_T=e1,
        eps_Omega=e2,
        measure_T=mT,
        measure_Omega=mO,
        bound_classical=classical,
        bound_improved=opt.bound,
        r_star=opt.r_star,
        hypothesis_flags=flags,
        product_TOmega=product,
        satisfied=_verdict(product, classical, opt.bound),
        applicable=applicable,
        kernel=f"localization(lam1={lam1}, lam2={lam2})",
        at_boundary=opt.at_boundary,
        op_norms={"T": float(np.abs(F1).max()), "Omega": float(np.abs(F2).max()), "method": "multiplier"},
        lattice={"r": [1.0, float(r_max)], "n_scan": 200},
    )


def cohen_report(f: Signal, kernel: CohenKernel, T: MeasurableSet, Omega: MeasurableSet, **kw) -> ConcentrationReport:
    """Measure eps's with the Cohen operators T_sigma^{chi_T}, T_sigma^{chi_Omega}
    (a multiplication by F1 and a Fourier multiplier by F2), then bound."""
    _same_grid(f.grid, T.grid)
    mg = cohen_FG(kernel, T, Omega)
    e1, e2 = _eps_from(f, mg.F1.samples, mg.F2.samples)
    return cohen_up_bound(kernel, T, Omega, e1, e2, f.grid.dim, marginals=mg, **kw)


# ---------------------------------------------------------------------------
# Dilation scaling experiment
# ---------------------------------------------------------------------------

@dataclass
class ScalingResult:
    slope: float
    expected: float
    lambdas: list
    ratios: list

    def __float__(self):
        return self.slope


def scaling_experiment(q: float, p: float = 2.0, lambdas: Sequence[float] = (1, 2, 4, 8), grid: Optional[Grid] = None) -> ScalingResult:
    """Log-log slope of ||Wig(u)||_p / ||u||_q^2 for u the L2-normalised dilates
    of Phi_1; theory predicts -2 d (1/2 - 1/q)."""
    lambdas = [float(v) for v in lambdas]
    if len(set(lambdas)) < 2 or min(lambdas) <= 0:
        raise ValueError("need at least two distinct positive dilation factors")
    if grid is None:
        grid = make_grid(1024, 1.0 / 32)
    base = gaussian("Phi", 1.0, grid)
    ratios = []
    for lam in lambdas:
        fl = dilate(base, lam)
        u = fl * (1.0 / lp_norm(fl, 2))
        ratios.append(lp_norm(wigner(u, u), p) / lp_norm(u, q) ** 2)
    slope = float(np.polyfit(np.log(lambdas), np.log(ratios), 1)[0])
    qinv = 0.0 if math.isinf(q) else 1.0 / q
    return ScalingResult(slope, -2.0 * grid.dim * (0.5 - qinv), lambdas, ratios)
