"""Dense complex linear algebra kernel.

Everything downstream (pencils, Laurent coefficients, representation
components) reduces to a handful of primitives collected here: induced
operator norms, tolerant rank / kernel / range decisions, subspace
arithmetic, oblique projections, generalized inverses relative to a pair
of complements, and the Jordan-ascent oracle at eigenvalue 1.

Conventions
-----------
* Operators are dense ``numpy`` arrays, complex128 throughout; real input
  is embedded with zero imaginary part.
* Rank decisions are Euclidean-SVD decisions regardless of the reporting
  norm: numerical rank is an SVD concept, while the one/two/sup norms
  only matter for reported norm values.
* The dual pairing is bilinear, ``f(x) = sum_i f_i x_i`` with no
  conjugation, so the adjoint of an operator is its plain transpose and
  the space of functionals annihilating ``ran A`` is the left null space
  of ``A``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

NORM_KINDS = ("one", "two", "sup")


class NotComplementary(ValueError):
    """Raised when two subspaces fail to decompose the ambient space."""


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerance pair used by every rank/residual decision.

    rank_rel      relative singular-value cutoff (numerical rank)
    residual_abs  absolute operator-norm cutoff for residual checks
    """

    rank_rel: float = 1e-10
    residual_abs: float = 1e-8

    def __post_init__(self):
        if not (0 < self.rank_rel < 1):
            raise ValueError("rank_rel must be in (0, 1)")
        if self.residual_abs <= 0:
            raise ValueError("residual_abs must be positive")


DEFAULT_TOL = Tolerance()


def as_operator(entries, *, square=False) -> np.ndarray:
    """Coerce to a finite 2-d complex128 array, validating shape."""
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"operator must be 2-d, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"operator must be at least 1x1, got {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("operator entries must be finite")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square operator, got {m.shape}")
    return m


# ---------------------------------------------------------------------------
# JSON wire format, shared by all modules:
#   matrix   {"rows": r, "cols": c, "entries": [[re, im], ...]}  row-major
#   subspace {"ambient": n, "basis": <matrix>}
# ---------------------------------------------------------------------------

def matrix_to_json(m) -> dict:
    m = as_operator(m)
    entries = [[float(v.real), float(v.imag)] for v in m.ravel(order="C")]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "entries": entries}


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ValueError("matrix must have rows >= 1 and cols >= 1")
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
    flat = [complex(re, im) for re, im in entries]
    return as_operator(np.array(flat, dtype=np.complex128).reshape(rows, cols))


def subspace_to_json(s: "Subspace") -> dict:
    basis = s.basis
    if basis.shape[1] == 0:
        # JSON matrices need cols >= 1; encode the trivial subspace explicitly
        return {"ambient": s.ambient_dim, "basis": None}
    return {"ambient": s.ambient_dim, "basis": matrix_to_json(basis)}


def subspace_from_json(obj) -> "Subspace":
    n = int(obj["ambient"])
    if obj.get("basis") is None:
        return Subspace(n, np.zeros((n, 0), dtype=np.complex128))
    return Subspace(n, matrix_from_json(obj["basis"]))


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^n held as an ambient dimension plus basis columns.

    Bases are orthonormalized on construction (columns of an isometry),
    even when the ambient reporting norm is not Euclidean -- rank and
    dimension bookkeeping stay SVD-based.
    """

    ambient_dim: int
    basis: np.ndarray  # ambient_dim x k, orthonormal columns

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise ValueError(f"basis shape {b.shape} does not match ambient {self.ambient_dim}")
        if b.shape[1] > self.ambient_dim:
            raise ValueError("more basis columns than ambient dimension")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @staticmethod
    def from_columns(cols, tol: Tolerance = DEFAULT_TOL, floor: float = 0.0) -> "Subspace":
        """Orthonormalized span of the given columns (rank-truncated SVD).

        ``floor`` is an absolute singular-value cutoff for callers that
        know the columns' natural scale (e.g. images under a bounded
        map, where components below rank_rel times the map norm are
        rounding noise, not directions).
        """
        c = np.asarray(cols, dtype=np.complex128)
        if c.ndim != 2:
            raise ValueError("columns must form a 2-d array")
        n = c.shape[0]
        if c.shape[1] == 0:
            return Subspace(n, np.zeros((n, 0), dtype=np.complex128))
        u, s, _ = np.linalg.svd(c, full_matrices=False)
        cut = max(tol.rank_rel * s[0], floor) if s.size and s[0] > 0 else math.inf
        r = int(np.sum(s > cut))
        return Subspace(n, u[:, :r])

    @staticmethod
    def full(n: int) -> "Subspace":
        return Subspace(n, np.eye(n, dtype=np.complex128))

    @staticmethod
    def trivial(n: int) -> "Subspace":
        return Subspace(n, np.zeros((n, 0), dtype=np.complex128))


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def operator_norm(m, norm: str = "two") -> float:
    """Induced operator norm of a dense matrix.

    one  -> max absolute column sum (exact)
    sup  -> max absolute row sum (exact)
    two  -> spectral norm (largest singular value)
    """
    m = as_operator(m)
    if norm == "one":
        return float(np.max(np.sum(np.abs(m), axis=0)))
    if norm == "sup":
        return float(np.max(np.sum(np.abs(m), axis=1)))
    if norm == "two":
        return float(np.linalg.norm(m, 2))
    raise ValueError(f"unknown norm kind {norm!r}")


def vector_norm(x, norm: str = "two") -> float:
    x = np.asarray(x)
    if norm == "one":
        return float(np.sum(np.abs(x)))
    if norm == "sup":
        return float(np.max(np.abs(x))) if x.size else 0.0
    if norm == "two":
        return float(np.linalg.norm(x))
    raise ValueError(f"unknown norm kind {norm!r}")


def product_operator_norm(m, blocks: int, norm: str = "two") -> float:
    """Operator norm on the p-fold product space with norm sum of block norms.

    The matrix is (blocks*d) x (blocks*d); the reported value is
    max over column blocks of the sum over row blocks of block norms.
    Exact for ``one`` (where it coincides with the plain one-norm);
    for ``two``/``sup`` it is the natural upper bound used for reporting.
    """
    m = as_operator(m, square=True)
    if m.shape[0] % blocks:
        raise ValueError(f"dimension {m.shape[0]} not divisible by {blocks} blocks")
    d = m.shape[0] // blocks
    col_sums = []
    for j in range(blocks):
        total = 0.0
        for i in range(blocks):
            total += operator_norm(m[i * d:(i + 1) * d, j * d:(j + 1) * d], norm)
        col_sums.append(total)
    return max(col_sums)


# ---------------------------------------------------------------------------
# tolerant rank / kernel / range
# ---------------------------------------------------------------------------

def numerical_rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    m = as_operator(m)
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.sum(s > tol.rank_rel * s[0]))


def kernel_basis(m, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the numerical null space (right singular vectors)."""
    m = as_operator(m)
    _, s, vh = np.linalg.svd(m)
    cols = m.shape[1]
    if s.size == 0 or s[0] <= 0:
        rank = 0
    else:
        rank = int(np.sum(s > tol.rank_rel * s[0]))
    basis = vh[rank:].conj().T  # cols x (cols-rank)
    return Subspace(cols, basis)


def range_basis(m, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the numerical column space (left singular vectors)."""
    m = as_operator(m)
    u, s, _ = np.linalg.svd(m)
    if s.size == 0 or s[0] <= 0:
        rank = 0
    else:
        rank = int(np.sum(s > tol.rank_rel * s[0]))
    return Subspace(m.shape[0], u[:, :rank])


# ---------------------------------------------------------------------------
# subspace arithmetic
# ---------------------------------------------------------------------------

def orthogonal_complement(s: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Euclidean orthogonal complement (default complement choice)."""
    if s.dim == 0:
        return Subspace.full(s.ambient_dim)
    if s.dim == s.ambient_dim:
        return Subspace.trivial(s.ambient_dim)
    # null space of B* gives the orthogonal complement of span(B)
    return kernel_basis(s.basis.conj().T, tol)


def subspace_sum(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimensions differ")
    return Subspace.from_columns(np.hstack([a.basis, b.basis]), tol)


def subspace_intersection(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Intersection via the null space of the stacked basis equation.

    x in A cap B  iff  x = U s = W t for some coefficient vectors, i.e.
    (s, t) lies in the null space of [U  -W].
    """
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimensions differ")
    if a.dim == 0 or b.dim == 0:
        return Subspace.trivial(a.ambient_dim)
    stacked = np.hstack([a.basis, -b.basis])
    nz = kernel_basis(stacked, tol)
    if nz.dim == 0:
        return Subspace.trivial(a.ambient_dim)
    vectors = a.basis @ nz.basis[: a.dim]
    return Subspace.from_columns(vectors, tol)


def apply_to_subspace(m, s: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Image subspace M(S), rank-truncated against the map's own scale so
    a mathematically zero image cannot resurface as rounding noise."""
    m = as_operator(m)
    return Subspace.from_columns(m @ s.basis, tol,
                                 floor=tol.rank_rel * operator_norm(m))


@dataclass(frozen=True)
class DirectSumResult:
    holds: bool
    defect: int


def direct_sum_check(u: Subspace, w: Subspace, tol: Tolerance = DEFAULT_TOL) -> DirectSumResult:
    """Does the ambient space decompose as U (+) W?

    holds iff dim U + dim W = ambient and the concatenated basis has full
    numerical rank; defect = ambient - rank(concatenation).
    """
    if u.ambient_dim != w.ambient_dim:
        raise ValueError("ambient dimensions differ")
    n = u.ambient_dim
    concat = np.hstack([u.basis, w.basis])
    rank = numerical_rank(concat, tol) if concat.shape[1] else 0
    return DirectSumResult(holds=(u.dim + w.dim == n and rank == n), defect=n - rank)


# ---------------------------------------------------------------------------
# oblique projections and relative generalized inverses
# ---------------------------------------------------------------------------

def oblique_projection(onto: Subspace, along: Subspace, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """The unique projection with range ``onto`` and kernel ``along``.

    With B = [U W] invertible (U, W bases of the two subspaces),
    P = B diag(I_k, 0) B^{-1}.
    """
    check = direct_sum_check(onto, along, tol)
    if not check.holds:
        raise NotComplementary(
            f"subspaces do not decompose C^{onto.ambient_dim}: "
            f"dims {onto.dim}+{along.dim}, defect {check.defect}")
    n, k = onto.ambient_dim, onto.dim
    if k == 0:
        return np.zeros((n, n), dtype=np.complex128)
    if k == n:
        return np.eye(n, dtype=np.complex128)
    b = np.hstack([onto.basis, along.basis])
    binv = np.linalg.solve(b, np.eye(n, dtype=np.complex128))
    proj = onto.basis @ binv[:k]
    # degenerate-geometry guard: a formally complementary but nearly
    # touching pair blows up the projector and its idempotency residual
    if operator_norm(proj @ proj - proj) > 10 * tol.residual_abs:
        raise NotComplementary("complement pair too ill-conditioned for a reliable projection")
    return proj


def relative_generalized_inverse(m, ker_complement: Subspace, ran_complement: Subspace,
                                 tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Generalized inverse of M relative to complements of ker M and ran M.

    Returns the operator G with
        G M = I - P_ker   and   M G = P_ran,
    where P_ker projects onto ker M along ker_complement and P_ran
    projects onto ran M along ran_complement.  G inverts M restricted to
    ker_complement -> ran M and kills ran_complement.
    """
    m = as_operator(m, square=True)
    n = m.shape[0]
    ker = kernel_basis(m, tol)
    ran = range_basis(m, tol)
    if not direct_sum_check(ker, ker_complement, tol).holds:
        raise NotComplementary("ker_complement does not complement ker M")
    if not direct_sum_check(ran, ran_complement, tol).holds:
        raise NotComplementary("ran_complement does not complement ran M")
    p_ran = oblique_projection(ran, ran_complement, tol)
    kc = ker_complement.basis  # n x q with q = rank M
    image = m @ kc
    coeffs, *_ = np.linalg.lstsq(image, p_ran, rcond=None)
    ginv = kc @ coeffs

    p_ker = oblique_projection(ker, ker_complement, tol)
    res1 = operator_norm(ginv @ m - (np.eye(n) - p_ker))
    res2 = operator_norm(m @ ginv - p_ran)
    if max(res1, res2) > 10 * tol.residual_abs:
        raise NotComplementary(
            f"generalized-inverse identities violated (residuals {res1:.2e}, {res2:.2e})")
    return ginv


# ---------------------------------------------------------------------------
# Jordan ascent at eigenvalue 1
# ---------------------------------------------------------------------------

def ascent_at_one(m, tol: Tolerance = DEFAULT_TOL) -> int:
    """Size of the largest Jordan block of M at eigenvalue 1.

    Computed by rank stabilization: the smallest k with
    dim ker (I-M)^k = dim ker (I-M)^{k+1}.  Returns 0 when 1 is not an
    eigenvalue (empty numerical kernel of I-M).  This doubles as an
    independent oracle for the pole order of (I - zM)^{-1} at z = 1.
    """
    m = as_operator(m, square=True)
    n = m.shape[0]
    d = np.eye(n, dtype=np.complex128) - m
    power = d
    null_prev = n - numerical_rank(power, tol)
    if null_prev == 0:
        return 0
    for k in range(2, n + 2):
        power = power @ d
        null_k = n - numerical_rank(power, tol)
        if null_k == null_prev:
            return k - 1
        null_prev = null_k
    return n  # cannot exceed the ambient dimension


# ---------------------------------------------------------------------------
# misc small helpers shared by the test-suite and modules
# ---------------------------------------------------------------------------

def fit_geometric_decay(norms: Iterable[float], floor: float = 1e-300):
    """Least-squares fit of ``norms[j] ~ C * rho**j`` on the nonzero tail.

    Returns (C, rho).  All-zero input fits (0.0, 0.0); a single nonzero
    point fits (that value, 0.0).  Used for the h-coefficient decay bound
    and MA tail-decay reporting.
    """
    vals = np.asarray(list(norms), dtype=float)
    idx = np.nonzero(vals > floor)[0]
    if idx.size == 0:
        return 0.0, 0.0
    if idx.size == 1:
        return float(vals[idx[0]]), 0.0
    x = idx.astype(float)
    y = np.log(vals[idx])
    slope, intercept = np.polyfit(x, y, 1)
    return float(math.exp(intercept)), float(math.exp(slope))


def dump_json(obj, path=None, **kwargs) -> str:
    """Canonical JSON encoding (sorted keys, fixed separators) for
    byte-stable reports; optionally written to ``path``."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), **kwargs)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
