"""Pairwise kernels on squared chordal distance and the potential energy.

The energy of ``M`` lines is the ordered-pair sum

    E(L) = sum_{i != j} f(t_ij),   t_ij = 1 - <u_i, u_j>^2,

so every unordered pair is counted twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import COINCIDENT_TOL, LineSet, pairwise_distance_sq

KINDS = ("distance", "riesz", "log")


class CoincidentLines(ValueError):
    """Two lines of a configuration are (numerically) the same line."""

    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


@dataclass(frozen=True)
class Kernel:
    """Decreasing interaction kernel ``f(t)`` for ``t`` in (0, 1].

    ``distance``: ``-sqrt(t)``; ``riesz``: ``t**(-s/2)``; ``log``: ``-log(t)``.
    """

    kind: str
    s: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "riesz" and not self.s > 0:
            raise ValueError("Riesz exponent must be positive")

    @classmethod
    def distance(cls):
        return cls("distance")

    @classmethod
    def riesz(cls, s: float = 1.0):
        return cls("riesz", float(s))

    @classmethod
    def log(cls):
        return cls("log")

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        """Parse ``distance``, ``log``, ``riesz`` or ``riesz:<s>`` / ``riesz<s>``."""
        text = text.strip().lower()
        if text in ("distance", "log"):
            return cls(text)
        if text.startswith("riesz"):
            rest = text[5:].lstrip(":=")
            return cls.riesz(float(rest) if rest else 1.0)
        raise ValueError(f"unknown kernel {text!r}")

    @property
    def name(self) -> str:
        return f"riesz{self.s:g}" if self.kind == "riesz" else self.kind

    def __str__(self):
        return self.name


@dataclass
class EnergyReport:
    energy: float
    gradient_norm: float
    min_distance_sq: float
    kernel: Kernel


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= COINCIDENT_TOL):
        raise CoincidentLines("coincident lines: squared chordal distance must be positive")
    return t


def kernel_value(k: Kernel, t):
    """``f(t)``; works elementwise on arrays."""
    t = _check_t(t)
    if k.kind == "distance":
        out = -np.sqrt(t)
    elif k.kind == "riesz":
        out = t ** (-0.5 * k.s)
    else:
        out = -np.log(t)
    return float(out) if out.ndim == 0 else out


def kernel_derivative(k: Kernel, t, order: int = 1):
    """``d^order f / dt^order`` at ``t``."""
    t = _check_t(t)
    if order < 1:
        raise ValueError("order must be >= 1")
    if k.kind == "log":
        # d^n/dt^n (-log t) = -(-1)^(n-1) (n-1)! t^-n
        out = (-1.0) ** order * math.factorial(order - 1) * t ** (-order)
    else:
        # f = c t^p with (c, p) = (-1, 1/2) or (1, -s/2)
        c, p = (-1.0, 0.5) if k.kind == "distance" else (1.0, -0.5 * k.s)
        coef = c
        for m in range(order):
            coef *= p - m
        out = coef * t ** (p - order)
    return float(out) if out.ndim == 0 else out


def _offdiag_t(U):
    t = pairwise_distance_sq(U)
    M = len(U)
    off = ~np.eye(M, dtype=bool)
    if M > 1:
        tm = np.where(off, t, np.inf)
        i, j = np.unravel_index(np.argmin(tm), tm.shape)
        if tm[i, j] <= COINCIDENT_TOL:
            raise CoincidentLines(f"coincident lines {min(i, j)} and {max(i, j)}",
                                  pair=(int(min(i, j)), int(max(i, j))))
    return t, off


def _as_array(L) -> np.ndarray:
    return L.vectors if isinstance(L, LineSet) else np.asarray(L, dtype=float)


def potential_energy(L, k: Kernel, sequential: bool = False) -> float:
    """Ordered-pair energy ``sum_{i != j} f(t_ij)``.

    ``sequential=True`` accumulates pair by pair in row-major order with
    plain Python floats; golden-value tests use it so the result does not
    depend on the BLAS/numpy reduction order.
    """
    U = _as_array(L)
    t, off = _offdiag_t(U)
    if sequential:
        total = 0.0
        M = len(U)
        for i in range(M):
            for j in range(M):
                if i != j:
                    total += kernel_value(k, float(t[i, j]))
        return total
    return float(kernel_value(k, t[off]).sum())


def euclidean_gradient(U: np.ndarray, k: Kernel) -> tuple[float, np.ndarray]:
    """Energy and its unconstrained gradient with respect to the rows of ``U``.

    Uses ``dE/du_i = -4 sum_{j != i} f'(t_ij) <u_i, u_j> u_j``.
    """
    G = U @ U.T
    t, off = _offdiag_t(U)
    fv = np.zeros_like(t)
    fp = np.zeros_like(t)
    fv[off] = kernel_value(k, t[off])
    fp[off] = kernel_derivative(k, t[off])
    return float(fv.sum()), -4.0 * (fp * G) @ U


def project_tangent(U: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Remove from each row of ``D`` its component along the matching row of ``U``."""
    return D - np.sum(D * U, axis=1, keepdims=True) * U


def energy_and_gradient(L, k: Kernel) -> tuple[float, np.ndarray]:
    U = _as_array(L)
    E, g = euclidean_gradient(U, k)
    return E, project_tangent(U, g)


def energy_gradient(L, k: Kernel) -> np.ndarray:
    """Tangent (Riemannian) gradient, one row per line."""
    return energy_and_gradient(L, k)[1]


def gradient_norm(L, k: Kernel) -> float:
    return float(np.linalg.norm(energy_gradient(L, k)))


def energy_report(L: LineSet, k: Kernel) -> EnergyReport:
    E, g = energy_and_gradient(L, k)
    t = pairwise_distance_sq(L.vectors)
    iu = np.triu_indices(len(L), k=1)
    return EnergyReport(E, float(np.linalg.norm(g)), float(t[iu].min()), k)
