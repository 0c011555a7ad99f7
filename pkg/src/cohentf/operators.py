"""Dense Weyl, localization and Cohen operators on a 1-D grid.

An :class:`OperatorMatrix` acts by ``(M f)_t = sum_u M[t, u] f_u dx`` so that
entries approximate the continuous Schwartz kernel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .grid import Grid, Signal, _same_grid, _workers, dft, idft, upsample2
from .transforms import CohenKernel, TFFunction, _conj_reflect, kernel_array, tf_convolve, wigner

__all__ = [
    "OperatorMatrix",
    "ConvergenceError",
    "MAX_DENSE",
    "MAX_DIRECT",
    "identity",
    "multiplication_operator",
    "fourier_multiplier",
    "weyl_matrix",
    "schwartz_kernel",
    "localization_matrix",
    "cohen_op_matrix",
    "adjoint",
    "apply",
    "inner",
    "operator_norm",
]

logger = logging.getLogger(__name__)

MAX_DENSE = 512
MAX_DIRECT = 128


class ConvergenceError(RuntimeError):
    def __init__(self, iterations: int, estimate: float):
        super().__init__(f"power iteration did not converge after {iterations} iterations (estimate {estimate:.6g})")
        self.iterations = iterations
        self.estimate = estimate


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense operator matrix with construction metadata.

    ``structure`` optionally names a fast path: ``("identity", None)``,
    ``("multiplication", F)`` or ``("fourier_multiplier", F)``.
    """

    grid: Grid
    entries: np.ndarray
    provenance: dict = field(default_factory=dict)
    structure: Optional[tuple] = None

    def __post_init__(self):
        if self.grid.dim != 1:
            raise NotImplementedError("operators are implemented for d = 1")
        if self.grid.n > MAX_DENSE:
            raise ValueError(f"dense operators are limited to n <= {MAX_DENSE}")
        e = np.array(self.entries, dtype=complex)
        if e.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"expected a {self.grid.n}x{self.grid.n} matrix, got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("operator entries must be finite")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def action(self) -> np.ndarray:
        """Matrix of the operator on plain sample vectors (quadrature included)."""
        return self.entries * self.grid.dx


def identity(grid: Grid) -> OperatorMatrix:
    return OperatorMatrix(grid, np.eye(grid.n) / grid.dx, {"type": "identity"}, ("identity", None))


def multiplication_operator(F, grid: Grid, provenance: Optional[dict] = None) -> OperatorMatrix:
    F = np.asarray(F, dtype=complex)
    prov = {"type": "multiplication", **(provenance or {})}
    return OperatorMatrix(grid, np.diag(F) / grid.dx, prov, ("multiplication", F))


def _multiplier_entries(F: np.ndarray, grid: Grid) -> np.ndarray:
    n = grid.n
    # h[D] = sum_k F_k exp(2 pi i D dx w_k) dw
    h = grid.dw * n * sfft.ifft(sfft.ifftshift(F))
    t = np.arange(n)
    return h[(t[:, None] - t[None, :]) % n]


def fourier_multiplier(F, grid: Grid, provenance: Optional[dict] = None) -> OperatorMatrix:
    """f -> F^{-1}[F * f^] with F sampled on the dual lattice."""
    F = np.asarray(F, dtype=complex)
    prov = {"type": "fourier_multiplier", **(provenance or {})}
    return OperatorMatrix(grid, _multiplier_entries(F, grid), prov, ("fourier_multiplier", F))


def _detect_structure(b: np.ndarray) -> Optional[tuple]:
    scale = np.abs(b).max()
    if scale == 0:
        return ("multiplication", np.zeros(b.shape[0], dtype=complex))
    tol = 1e-14 * scale
    if np.abs(b - b[:, :1]).max() <= tol:
        return ("multiplication", b[:, 0].copy())
    if np.abs(b - b[:1, :]).max() <= tol:
        return ("fourier_multiplier", b[0, :].copy())
    return None


def _gather_weyl(h2: np.ndarray) -> np.ndarray:
    """M[t, u] = h2[midpoint, displacement] for h2 of shape (2n, n).

    On the torus u is replaced by its periodic image nearest to t, so the
    displacement D lies in [-n/2, n/2) and the half-grid midpoint index is
    2t - D (mod 2n).  At |D| = n/2 both images are equally near and their
    values are averaged, which keeps real symbols self-adjoint.
    """
    n = h2.shape[1]
    t = np.arange(n)[:, None]
    u = np.arange(n)[None, :]
    D = (t - u + n // 2) % n - n // 2
    M = h2[(2 * t - D) % (2 * n), D % n]
    edge = D == -(n // 2)
    alt = h2[(2 * t + n // 2) % (2 * n), n // 2]
    return np.where(edge, 0.5 * (M + np.broadcast_to(alt, M.shape)), M)


def weyl_matrix(b: TFFunction, provenance: Optional[dict] = None) -> OperatorMatrix:
    """Weyl quantization W^b f(x) = int exp(2 pi i (x - y) w) b((x + y)/2, w) f(y) dy dw.

    M[t, u] = sum_k b((x_t + x_u)/2, w_k) exp(2 pi i (x_t - x_u) w_k) dw, with
    midpoint values from 2x band-limited interpolation along x.
    """
    grid = b.grid
    n = grid.n
    if n > MAX_DENSE:
        raise ValueError(f"dense operators are limited to n <= {MAX_DENSE}")
    b2 = upsample2(b.samples, axis=0)
    h2 = grid.dw * n * sfft.ifft(sfft.ifftshift(b2, axes=1), axis=1, workers=_workers())
    prov = {"type": "weyl", **(provenance or {})}
    return OperatorMatrix(grid, _gather_weyl(h2), prov, _detect_structure(b.samples))


def schwartz_kernel(b: TFFunction) -> np.ndarray:
    """Kernel k(x, t) = (F_2^{-1} b)((x + t)/2, x - t) of W^b on the lattice.

    The partial inverse Fourier transform in w is taken first, then the
    midpoint change of variables; this is the reverse order of
    :func:`weyl_matrix`.
    """
    grid = b.grid
    n = grid.n
    khat = np.empty((n, n), dtype=complex)
    disp = np.arange(n) * grid.dx
    for j in range(n):
        # (F_2^{-1} b)(x_j, D dx) = sum_k b(x_j, w_k) exp(2 pi i w_k D dx) dw
        khat[j] = (b.samples[j][None, :] * np.exp(2j * np.pi * disp[:, None] * grid.w[None, :])).sum(axis=1) * grid.dw
    return _gather_weyl(upsample2(khat, axis=0))


def _shift_matrix(w: Signal) -> np.ndarray:
    """Row j holds tau_{x_j} w sampled on the grid (circular)."""
    g = w.grid
    n = g.n
    o = g.origin_index
    j = np.arange(n)[:, None]
    t = np.arange(n)[None, :]
    return w.samples[(t - j + o) % n]


def localization_matrix(a: TFFunction, phi: Signal, psi: Signal, path: str = "via_weyl") -> OperatorMatrix:
    """Localization operator L f = int a(x, w) V_phi f(x, w) M_w T_x psi dx dw.

    ``path="direct"`` sums rank-one terms over the lattice; ``"via_weyl"``
    uses the Weyl symbol a * Wig(psi, phi).  For even windows this kernel
    equals Wig(psi~, phi~).
    """
    grid = a.grid
    _same_grid(grid, phi.grid)
    _same_grid(grid, psi.grid)
    n = grid.n
    prov = {"type": "localization", "path": path}
    if path == "direct":
        if n > MAX_DIRECT:
            raise ValueError(f"direct localization is limited to n <= {MAX_DIRECT}")
        A = grid.dw * n * sfft.ifft(sfft.ifftshift(a.samples, axes=1), axis=1)
        Psi = _shift_matrix(psi)
        Phi = _shift_matrix(phi).conj()
        t = np.arange(n)
        diff = (t[:, None] - t[None, :]) % n
        M = np.zeros((n, n), dtype=complex)
        for j in range(n):
            M += np.outer(Psi[j], Phi[j]) * A[j][diff]
        return OperatorMatrix(grid, M * grid.dx, prov)
    if path == "via_weyl":
        k0 = kernel_array_from_tf(wigner(psi, phi))
        b = TFFunction(grid, tf_convolve(a.samples, k0, grid))
        return weyl_matrix(b, prov)
    raise ValueError(f"unknown path {path!r}")


def kernel_array_from_tf(W: TFFunction) -> np.ndarray:
    """Offset-indexed array of a TF function used as a convolution kernel."""
    from .transforms import Sampled

    return kernel_array(Sampled(W), W.grid)


def cohen_op_matrix(a: TFFunction, kernel: CohenKernel, padding: str = "periodic") -> OperatorMatrix:
    """Cohen operator T_sigma^a = W^(a * conj(sigma~)), sigma~(z) = sigma(-z)."""
    grid = a.grid
    prov = {"type": "cohen", "kernel": repr(kernel)}
    k0 = kernel_array(kernel, grid)
    if k0 is None:
        return weyl_matrix(a, prov)
    b = TFFunction(grid, tf_convolve(a.samples, _conj_reflect(k0), grid, padding))
    return weyl_matrix(b, prov)


def adjoint(M: OperatorMatrix) -> OperatorMatrix:
    structure = None
    if M.structure is not None:
        kind, vec = M.structure
        structure = (kind, None if vec is None else np.conj(vec))
    prov = {"type": "adjoint", "of": M.provenance}
    return OperatorMatrix(M.grid, M.entries.conj().T, prov, structure)


def apply(M: OperatorMatrix, f: Signal, dense: bool = False) -> Signal:
    """(M f)_t = sum_u M[t, u] f_u dx, through a fast path when one is known."""
    _same_grid(M.grid, f.grid)
    if M.structure is not None and not dense:
        kind, vec = M.structure
        if kind == "identity":
            return f
        if kind == "multiplication":
            return Signal(f.grid, vec * f.samples)
        if kind == "fourier_multiplier":
            return Signal(f.grid, idft(vec * dft(f.samples, f.grid), f.grid))
    return Signal(f.grid, M.action @ f.samples)


def inner(f: Signal, g: Signal) -> complex:
    """L2 inner product (f, g) = sum f conj(g) dx."""
    _same_grid(f.grid, g.grid)
    return complex(np.vdot(g.samples, f.samples) * f.grid.cell)


def operator_norm(M: OperatorMatrix, method: str = "auto", tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of the L2 action of M.

    ``auto`` takes a full SVD when n <= MAX_DENSE and otherwise runs power
    iteration on M*M from the all-ones vector.
    """
    A = M.action
    if method == "auto":
        method = "svd" if A.shape[0] <= MAX_DENSE else "power"
    if method == "svd":
        return float(np.linalg.norm(A, 2))
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    x = np.ones(A.shape[0], dtype=complex)
    x /= np.linalg.norm(x)
    prev = 0.0
    for it in range(1, max_iter + 1):
        y = A.conj().T @ (A @ x)
        lam = np.linalg.norm(y)
        if lam == 0:
            return 0.0
        x = y / lam
        if abs(lam - prev) <= tol * lam:
            logger.debug("power iteration converged after %d iterations", it)
            return float(np.sqrt(lam))
        prev = lam
    raise ConvergenceError(max_iter, float(np.sqrt(prev)))
