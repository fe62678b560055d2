"""Built-in example models and seeded fixture builders.

The five registry entries are desk-scale discretizations of classical
pencil geometries:

  ex-c0          sequence-space shift/contraction mix whose inverse has a
                 double pole at the unit root (order two, not order one)
  ex-volterra    left-rectangle discretization of the Volterra integral
                 operator: the finite section has pole order equal to its
                 dimension, the fingerprint of an essential singularity
  ex-selfadjoint symmetric operator with an isolated unit eigenvalue
                 (always a simple pole)
  ex-evenodd     reflection averaging on a symmetric grid: the operator
                 is itself the projection onto even vectors, and equals
                 its own long-run projection
  ex-jordan      seeded similarity-conjugated Jordan structure with
                 planted blocks at 1 and a stable remainder; the planted
                 block sizes are the ground truth for pole-order oracles

Also provides the AR(2)/AR(3) factor-product fixtures used by the
simulation and consistency tests.  All randomness is counter-based and
keyed by the caller's seed, so every builder is reproducible.
"""

from __future__ import annotations

import numpy as np

from .pencil import ArPencil

_BUILDER_STREAM = 0x6D6F64656C  # distinct key lane for model construction


def _rng(seed: int, lane: int = 0):
    key = [np.uint64(int(seed) % (1 << 64)), np.uint64((_BUILDER_STREAM + lane) % (1 << 64))]
    return np.random.Generator(np.random.Philox(key=key))


def _orthogonal(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def sequence_shift_model(n: int = 8, lam: float = 0.5) -> ArPencil:
    """Truncation of the c0-sequence operator
    (a1, a2, a3, a4, ...) -> (a1, a1+a2, lam*a3, lam^2*a4, ...).

    The kernel of I - A1 is spanned by e2, which also lies in the range,
    so the order-one split fails and the inverse pencil has a double pole.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    if not 0 < lam < 1:
        raise ValueError("lam must be in (0, 1)")
    a = np.zeros((n, n))
    a[0, 0] = 1.0
    a[1, 0] = 1.0
    a[1, 1] = 1.0
    for j in range(2, n):
        a[j, j] = lam ** (j - 1)
    return ArPencil(p=1, dim=n, coeffs=[a])


def volterra_model(n: int = 8) -> ArPencil:
    """Left-rectangle discretization of integration on [0, 1]:
    V[i, j] = 1/n for j < i, and the model operator is I - V.

    All entries are dyadic for n a power of two, so matrix powers of V
    are computed exactly in floats down to the true zero V^n = 0.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    v = np.tril(np.full((n, n), 1.0 / n), k=-1)
    return ArPencil(p=1, dim=n, coeffs=[np.eye(n) - v])


def selfadjoint_model(n: int = 6, seed: int = 7, unit_multiplicity: int = 2) -> ArPencil:
    """Random symmetric operator with an isolated unit eigenvalue group.

    Self-adjointness forces the range/kernel split, hence a simple pole,
    whatever the multiplicity.
    """
    if not 1 <= unit_multiplicity < n:
        raise ValueError("unit_multiplicity must be in [1, n)")
    rng = _rng(seed, lane=1)
    rest = n - unit_multiplicity
    others = np.linspace(-0.55, 0.55, rest)
    q = _orthogonal(rng, n)
    eigs = np.concatenate([np.ones(unit_multiplicity), others])
    return ArPencil(p=1, dim=n, coeffs=[(q * eigs) @ q.T])


def evenodd_model(n: int = 16) -> ArPencil:
    """Reflection averaging g(x) |-> (g(x) + g(-x))/2 on a symmetric grid:
    the orthogonal projection onto even vectors, so the model operator
    coincides with its own long-run projection."""
    if n < 2 or n % 2:
        raise ValueError("need an even n >= 2")
    reflect = np.eye(n)[::-1]
    return ArPencil(p=1, dim=n, coeffs=[(np.eye(n) + reflect) / 2.0])


def jordan_model(seed: int, blocks_at_one=None, stable_dim: int | None = None,
                 cond_cap: float = 1e3):
    """Seeded similarity-conjugated Jordan structure.

    Plants the given block sizes at eigenvalue 1 (default: 1-2 random
    sizes from {1, 2, 3}), pads with a stable diagonal remainder
    (|eigenvalue| <= 0.8), and conjugates by S = Q1 diag(d) Q2 with
    d log-uniform so cond(S) stays well under ``cond_cap``.

    Returns (model, info) where info records the planted ground truth.
    """
    rng = _rng(seed, lane=2)
    if blocks_at_one is None:
        count = int(rng.integers(1, 3))
        blocks_at_one = [int(rng.integers(1, 4)) for _ in range(count)]
    blocks_at_one = [int(b) for b in blocks_at_one]
    if not blocks_at_one or min(blocks_at_one) < 1:
        raise ValueError("need at least one block of size >= 1 at the unit eigenvalue")
    if stable_dim is None:
        stable_dim = int(rng.integers(2, 5))
    n = sum(blocks_at_one) + stable_dim

    j = np.zeros((n, n))
    pos = 0
    for size in blocks_at_one:
        j[pos:pos + size, pos:pos + size] = np.eye(size) + np.diag(np.ones(size - 1), 1)
        pos += size
    stable_eigs = rng.uniform(-0.8, 0.8, size=stable_dim)
    j[pos:, pos:] = np.diag(stable_eigs)

    # cond(S) = max(d)/min(d), kept ~30 so conjugation noise stays far
    # below the rank tolerances while still exercising non-normality
    d = np.exp(rng.uniform(0.0, np.log(cond_cap) / 2.0, size=n))
    s = (_orthogonal(rng, n) * d) @ _orthogonal(rng, n)
    a1 = s @ j @ np.linalg.solve(s, np.eye(n))
    info = {"block_sizes": list(blocks_at_one), "max_block": max(blocks_at_one),
            "stable_eigs": stable_eigs.tolist(),
            "cond": float(np.linalg.cond(s))}
    return ArPencil(p=1, dim=n, coeffs=[a1]), info


def random_walk_model(n: int = 2) -> ArPencil:
    return ArPencil(p=1, dim=n, coeffs=[np.eye(n)])


def oblique_ar1_model() -> ArPencil:
    """The idempotent-but-not-orthogonal coefficient [[1,0],[1,0]]: its
    long-run projection is the operator itself."""
    return ArPencil(p=1, dim=2, coeffs=[np.array([[1.0, 0.0], [1.0, 0.0]])])


def factor_product(factors) -> ArPencil:
    """AR model whose pencil is the product (I - z F_1)...(I - z F_k)
    taken in the given order.  Useful because the pole structure of the
    product is readable off the factors."""
    factors = [np.asarray(f, dtype=np.complex128) for f in factors]
    n = factors[0].shape[0]
    coeffs = [np.eye(n, dtype=np.complex128)]
    for f in factors:
        widened = [np.zeros((n, n), dtype=np.complex128) for _ in range(len(coeffs) + 1)]
        for k, c in enumerate(coeffs):
            widened[k] += c
            widened[k + 1] -= c @ f
        coeffs = widened
    ar_coeffs = [-c.real if np.allclose(c.imag, 0) else -c for c in coeffs[1:]]
    return ArPencil(p=len(ar_coeffs), dim=n, coeffs=ar_coeffs)


def _semisimple_unit_factor(rng, n: int, unit_dim: int = 1) -> np.ndarray:
    """S diag(1,...,1,0,...) S^{-1} with a mildly conditioned S: a
    semisimple factor whose unit eigenvalue yields a simple pole."""
    d = np.exp(rng.uniform(0.0, np.log(5.0), size=n))
    s = (_orthogonal(rng, n) * d) @ _orthogonal(rng, n)
    eigs = np.concatenate([np.ones(unit_dim), np.zeros(n - unit_dim)])
    return s @ np.diag(eigs) @ np.linalg.solve(s, np.eye(n))


def _stable_factor(rng, n: int, radius: float = 0.5) -> np.ndarray:
    m = rng.standard_normal((n, n))
    spectral = max(abs(np.linalg.eigvals(m)))
    return m * (radius / spectral)


def ar2_unit_root_model(seed: int = 11, n: int = 3) -> ArPencil:
    """Seeded AR(2) with a simple unit root: product of a semisimple
    unit-eigenvalue factor and a stable factor (spectral radius 0.5)."""
    rng = _rng(seed, lane=3)
    phi0 = _semisimple_unit_factor(rng, n)
    phi1 = _stable_factor(rng, n)
    return factor_product([phi1, phi0])


def ar2_double_root_model(seed: int = 13, n: int = 2) -> ArPencil:
    """Seeded AR(2) with a double pole: the square of one semisimple
    unit-root factor."""
    rng = _rng(seed, lane=4)
    phi = _semisimple_unit_factor(rng, n)
    return factor_product([phi, phi])


def ar3_unit_root_model(seed: int = 17, n: int = 2) -> ArPencil:
    """Seeded AR(3) with a simple unit root: one unit factor, two stable
    factors with distinct spectral radii."""
    rng = _rng(seed, lane=5)
    phi0 = _semisimple_unit_factor(rng, n)
    phi1 = _stable_factor(rng, n, radius=0.45)
    phi2 = _stable_factor(rng, n, radius=0.3)
    return factor_product([phi2, phi1, phi0])


# ---------------------------------------------------------------------------
# registry used by the command-line front end
# ---------------------------------------------------------------------------

def build_example(name: str, n: int | None = None, lam: float | None = None,
                  seed: int | None = None, blocks=None):
    """Build a registry model by name with optional overrides.

    Returns (ArPencil, info) where info is {} except for ex-jordan.
    """
    if name == "ex-c0":
        return sequence_shift_model(n=n or 8, lam=0.5 if lam is None else lam), {}
    if name == "ex-volterra":
        return volterra_model(n=n or 8), {}
    if name == "ex-selfadjoint":
        return selfadjoint_model(n=n or 6, seed=7 if seed is None else seed), {}
    if name == "ex-evenodd":
        return evenodd_model(n=n or 16), {}
    if name == "ex-jordan":
        model, info = jordan_model(0 if seed is None else seed, blocks_at_one=blocks)
        return model, info
    raise KeyError(f"unknown example {name!r}")


EXAMPLE_NAMES = ("ex-c0", "ex-volterra", "ex-selfadjoint", "ex-evenodd", "ex-jordan")

_EXAMPLE_DEFAULTS = {
    "ex-c0": {"n": 8, "lam": 0.5,
              "about": "unilateral shift truncation; double pole at z=1"},
    "ex-volterra": {"n": 8,
                    "about": "left-rectangle quadrature; pole order grows with n"},
    "ex-selfadjoint": {"n": 6, "seed": 7,
                       "about": "symmetric matrix with closed range; simple pole"},
    "ex-evenodd": {"n": 16,
                   "about": "reflection averaging on a symmetric grid; simple pole"},
    "ex-jordan": {"seed": 0, "blocks": None,
                  "about": "seeded Jordan-form builder with known block sizes"},
}


def example_defaults(name: str) -> dict:
    if name not in _EXAMPLE_DEFAULTS:
        raise KeyError(f"unknown example {name!r}")
    return dict(_EXAMPLE_DEFAULTS[name])
