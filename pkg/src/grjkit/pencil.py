"""Autoregressive operator pencils and their companion linearization.

An AR(p) law on C^n is characterized by the polynomial pencil

    A(z) = I - z*A_1 - ... - z^p * A_p ,

which linearizes to the degree-one pencil I - z*B on the p-fold product
space C^{pn}, where B is the block companion operator (top block row
A_1 ... A_p, identity sub-diagonal).  The coordinate projection onto the
first block and its right inverse tie the two levels together: the
(1,1) n x n block of (I - zB)^{-1} is exactly A(z)^{-1} (Schur
complement identity), so both pencils share spectrum and pole structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .numfield import (DEFAULT_TOL, NORM_KINDS, Subspace, Tolerance, as_operator,
                       matrix_from_json, matrix_to_json, numerical_rank,
                       operator_norm)

SPECTRUM_CLUSTER_TOL = 1e-7  # merge radius for "this eigenvalue is the unit root"
DEFAULT_ETA = 0.1


class SingularAt(ArithmeticError):
    """Resolvent requested at (numerically) a spectrum point."""

    def __init__(self, z):
        self.z = z
        super().__init__(f"pencil is singular at z = {z}")


@dataclass(frozen=True)
class ArPencil:
    """AR(p) pencil data: lag order, state dimension, coefficients, norm kind."""

    p: int
    dim: int
    coeffs: list  # [A_1, ..., A_p], each dim x dim
    norm: str = "two"

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("lag order p must be >= 1")
        if self.norm not in NORM_KINDS:
            raise ValueError(f"norm must be one of {NORM_KINDS}")
        if len(self.coeffs) != self.p:
            raise ValueError(f"expected {self.p} coefficient matrices, got {len(self.coeffs)}")
        coeffs = [as_operator(a, square=True) for a in self.coeffs]
        for a in coeffs:
            if a.shape != (self.dim, self.dim):
                raise ValueError(f"coefficient shape {a.shape} != ({self.dim}, {self.dim})")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def big_dim(self) -> int:
        return self.p * self.dim

    def to_json(self) -> dict:
        return {"p": self.p, "dim": self.dim, "norm": self.norm,
                "coeffs": [matrix_to_json(a) for a in self.coeffs]}

    @staticmethod
    def from_json(obj) -> "ArPencil":
        try:
            p, dim, norm = int(obj["p"]), int(obj["dim"]), obj.get("norm", "two")
            coeffs = [matrix_from_json(c) for c in obj["coeffs"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed model object: {exc}") from exc
        return ArPencil(p=p, dim=dim, coeffs=coeffs, norm=norm)

    @staticmethod
    def load(path) -> "ArPencil":
        with open(path, "r", encoding="utf-8") as fh:
            return ArPencil.from_json(json.load(fh))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")


@dataclass(frozen=True)
class CompanionPencil:
    """Companion linearization of an ArPencil.

    a1         block companion operator on C^{pn}
    pi_p       n x pn coordinate projection onto the first block
    pi_p_star  pn x n embedding (transpose of pi_p)
    """

    big_dim: int
    a1: np.ndarray
    pi_p: np.ndarray
    pi_p_star: np.ndarray
    ar: ArPencil

    @property
    def p(self) -> int:
        return self.ar.p

    @property
    def dim(self) -> int:
        return self.ar.dim

    @property
    def norm(self) -> str:
        return self.ar.norm

    def identity(self) -> np.ndarray:
        return np.eye(self.big_dim, dtype=np.complex128)


def linearize(ar: ArPencil) -> CompanionPencil:
    """Exact block assembly of the companion operator.

    Top block row carries A_1 ... A_p; the sub-diagonal carries identity
    blocks; everything else is zero.  For p = 1 the companion operator is
    A_1 itself.
    """
    n, p = ar.dim, ar.p
    big = p * n
    a1 = np.zeros((big, big), dtype=np.complex128)
    for j, a in enumerate(ar.coeffs):
        a1[:n, j * n:(j + 1) * n] = a
    for i in range(1, p):
        a1[i * n:(i + 1) * n, (i - 1) * n:i * n] = np.eye(n)
    pi_p = np.zeros((n, big), dtype=np.complex128)
    pi_p[:, :n] = np.eye(n)
    return CompanionPencil(big_dim=big, a1=a1, pi_p=pi_p, pi_p_star=pi_p.conj().T, ar=ar)


def top_block_row(cp: CompanionPencil) -> list:
    """Reassemble A_1 ... A_p from the companion top block row (exact)."""
    n = cp.dim
    return [cp.a1[:n, j * n:(j + 1) * n].copy() for j in range(cp.p)]


def eval_poly(ar: ArPencil, z: complex) -> np.ndarray:
    """A(z) = I - z A_1 - ... - z^p A_p."""
    out = np.eye(ar.dim, dtype=np.complex128)
    zk = 1.0 + 0j
    for a in ar.coeffs:
        zk *= z
        out = out - zk * a
    return out


def resolvent(cp: CompanionPencil, z: complex, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """(I - z*a1)^{-1}, with an explicit residual check.

    Raises SingularAt(z) when the solve is numerically singular or the
    residual ||(I - z a1) X - I|| exceeds residual_abs.
    """
    n = cp.big_dim
    lhs = np.eye(n, dtype=np.complex128) - z * cp.a1
    try:
        out = np.linalg.solve(lhs, np.eye(n, dtype=np.complex128))
    except np.linalg.LinAlgError as exc:
        raise SingularAt(z) from exc
    if operator_norm(lhs @ out - np.eye(n)) > tol.residual_abs:
        raise SingularAt(z)
    return out


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of the companion operator and of the pencil.

    pencil_spectrum collects 1/lambda over the nonzero eigenvalues of the
    companion operator (the points where I - z a1 is singular).
    unit_root_ok is true iff, within the clustering tolerance, the point 1
    is the only pencil-spectrum element in the closed disk of radius
    1 + eta.  nearest_other is the distance from 1 to the closest other
    spectrum point (inf when none) -- used to pick contour radii.
    """

    eigenvalues: np.ndarray
    pencil_spectrum: np.ndarray
    eta: float
    unit_root_ok: bool
    unit_root_present: bool
    nearest_other: float

    def to_json(self) -> dict:
        return {
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "pencil_spectrum": [[float(v.real), float(v.imag)] for v in self.pencil_spectrum],
            "eta": self.eta,
            "unit_root_ok": self.unit_root_ok,
            "unit_root_present": self.unit_root_present,
            "nearest_other": self.nearest_other if np.isfinite(self.nearest_other) else None,
        }


def spectrum_report(cp: CompanionPencil, eta: float = DEFAULT_ETA,
                    tol: Tolerance = DEFAULT_TOL,
                    cluster_tol: float = SPECTRUM_CLUSTER_TOL) -> SpectrumReport:
    """Spectrum of the pencil from the eigenvalues of the companion operator.

    Finite dimensions give the exact reciprocal relationship between
    companion eigenvalues and pencil singular points; a zero-scan of
    det A(z) is kept only as a test oracle.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    eigs = np.linalg.eigvals(cp.a1)
    nonzero = eigs[np.abs(eigs) > tol.rank_rel]
    roots = np.sort_complex(1.0 / nonzero)

    # Eigenvalues of a defective unit root scatter like eps**(1/k) around 1
    # (k the largest Jordan block), far beyond any honest merge radius, so
    # membership in the unit cluster is decided by rank instead: the
    # algebraic multiplicity at 1 is the stabilized kernel dimension of
    # powers of (I - B), and that many nearest eigenvalues form the cluster.
    big = cp.big_dim
    m = cp.identity() - cp.a1
    power = np.eye(big, dtype=np.complex128)
    multiplicity = 0
    for _ in range(big):
        power = power @ m
        null_dim = big - numerical_rank(power, tol)
        if null_dim == multiplicity:
            break
        multiplicity = null_dim

    order = np.argsort(np.abs(roots - 1.0), kind="stable")
    cluster_count = min(multiplicity, roots.size)
    cluster = roots[order[:cluster_count]]
    others = roots[order[cluster_count:]]
    scatter = float(np.max(np.abs(cluster - 1.0))) if cluster.size else 0.0
    inside = others[np.abs(others) <= 1.0 + eta] if others.size else others
    nearest = float(np.min(np.abs(others - 1.0))) if others.size else float("inf")
    present = multiplicity > 0
    ok = present and inside.size == 0 and scatter <= max(cluster_tol, 0.05)
    return SpectrumReport(
        eigenvalues=eigs,
        pencil_spectrum=roots,
        eta=eta,
        unit_root_ok=bool(ok),
        unit_root_present=bool(present),
        nearest_other=nearest,
    )
