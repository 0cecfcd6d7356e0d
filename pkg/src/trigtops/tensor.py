"""Dense complex operators on C^n and its 2- and 3-fold tensor powers.

Index convention: a two-site operator is written as

    R = sum_{i,j,k,l} R_{ij,kl} E_ij (x) E_kl,

so ``R.entry(i, j, k, l)`` (1-based) is the coefficient of E_ij (x) E_kl.
As a matrix on C^n (x) C^n the row multi-index is (i, k) and the column
multi-index is (j, l).  Plain ``numpy`` arrays of shape (n, n) play the
role of single-site matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class DimensionError(ValueError):
    pass


class SingularGaugeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TensorOperator:
    """Operator on the ``arity``-fold tensor power of C^n."""

    n: int
    arity: int
    matrix: np.ndarray

    def __post_init__(self):
        size = self.n**self.arity
        if self.matrix.shape != (size, size):
            raise DimensionError(
                f"expected {size}x{size} matrix for n={self.n}, arity={self.arity}, "
                f"got {self.matrix.shape}"
            )
        self.matrix.setflags(write=False)

    @classmethod
    def from_components(cls, comp: np.ndarray) -> "TensorOperator":
        """Build an arity-2 operator from an array ``comp[i, j, k, l] = R_{ij,kl}`` (0-based)."""
        n = comp.shape[0]
        if comp.shape != (n, n, n, n):
            raise DimensionError(f"component array must be (n,n,n,n), got {comp.shape}")
        mat = np.ascontiguousarray(comp.transpose(0, 2, 1, 3)).reshape(n * n, n * n)
        return cls(n, 2, mat.astype(complex))

    @classmethod
    def identity(cls, n: int, arity: int = 2) -> "TensorOperator":
        return cls(n, arity, np.eye(n**arity, dtype=complex))

    @property
    def components(self) -> np.ndarray:
        """0-based array ``c[i, j, k, l] = R_{i+1 j+1, k+1 l+1}`` (arity 2 only)."""
        if self.arity != 2:
            raise DimensionError("components are defined for arity-2 operators")
        n = self.n
        return self.matrix.reshape(n, n, n, n).transpose(0, 2, 1, 3)

    def entry(self, *idx: int) -> complex:
        """1-based accessor: ``entry(i1, j1, i2, j2, ...)`` is the coefficient of
        E_{i1 j1} (x) E_{i2 j2} (x) ..."""
        if len(idx) != 2 * self.arity:
            raise DimensionError(f"need {2 * self.arity} indices, got {len(idx)}")
        if any(not 1 <= x <= self.n for x in idx):
            raise IndexError(f"indices must lie in 1..{self.n}: {idx}")
        row = 0
        col = 0
        for a in range(self.arity):
            row = row * self.n + idx[2 * a] - 1
            col = col * self.n + idx[2 * a + 1] - 1
        return complex(self.matrix[row, col])

    def __matmul__(self, other: "TensorOperator") -> "TensorOperator":
        _check_same(self, other)
        return TensorOperator(self.n, self.arity, self.matrix @ other.matrix)

    def __add__(self, other: "TensorOperator") -> "TensorOperator":
        _check_same(self, other)
        return TensorOperator(self.n, self.arity, self.matrix + other.matrix)

    def __sub__(self, other: "TensorOperator") -> "TensorOperator":
        _check_same(self, other)
        return TensorOperator(self.n, self.arity, self.matrix - other.matrix)

    def __neg__(self) -> "TensorOperator":
        return TensorOperator(self.n, self.arity, -self.matrix)

    def __mul__(self, scalar) -> "TensorOperator":
        return TensorOperator(self.n, self.arity, self.matrix * scalar)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def swapped(self) -> "TensorOperator":
        """R_12 -> R_21, i.e. P R P for arity 2."""
        p = permutation_op(self.n).matrix
        return TensorOperator(self.n, 2, p @ self.matrix @ p)

    def transposed(self) -> "TensorOperator":
        """Full transpose R_{ij,kl} -> R_{ji,lk}."""
        return TensorOperator(self.n, self.arity, self.matrix.T.copy())


def _check_same(a: TensorOperator, b: TensorOperator) -> None:
    if a.n != b.n or a.arity != b.arity:
        raise DimensionError(f"operator shapes differ: (n={a.n}, arity={a.arity}) vs (n={b.n}, arity={b.arity})")


def basis_matrix(n: int, i: int, j: int) -> np.ndarray:
    """E_ij with 1-based indices."""
    e = np.zeros((n, n), dtype=complex)
    e[i - 1, j - 1] = 1.0
    return e


def kron(a: np.ndarray, b: np.ndarray) -> TensorOperator:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected square matrix, got shape {a.shape}")
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return TensorOperator(a.shape[0], 2, np.kron(a, b))


@lru_cache(maxsize=None)
def _permutation_matrix(n: int) -> np.ndarray:
    p = np.zeros((n * n, n * n), dtype=complex)
    for i, j in itertools.product(range(n), repeat=2):
        p[i * n + j, j * n + i] = 1.0
    p.setflags(write=False)
    return p


def permutation_op(n: int) -> TensorOperator:
    """P_12 = sum E_ij (x) E_ji."""
    if n < 1:
        raise DimensionError("n must be positive")
    return TensorOperator(n, 2, _permutation_matrix(n))


_SLOT_PAIRS = {(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)}


def embed(op: TensorOperator, slots: tuple[int, int]) -> TensorOperator:
    """Place a two-site operator on ``slots`` of a three-site space.

    ``embed(R, (1, 3))`` is R_13; ``embed(R, (3, 1))`` is R_31, i.e. the first
    tensor factor of R acts on site 3.
    """
    slots = tuple(slots)
    if slots not in _SLOT_PAIRS:
        raise ValueError(f"invalid slot pair {slots}; need two distinct slots from 1..3")
    if op.arity != 2:
        raise DimensionError("embed expects an arity-2 operator")
    n = op.n
    # t[a, c, b, d]: row (a, c), column (b, d) of op
    t = op.matrix.reshape(n, n, n, n)
    a, b = slots[0] - 1, slots[1] - 1
    free = 3 - a - b
    eye = np.eye(n, dtype=complex)
    # out[r1 r2 r3, c1 c2 c3] = t[r_a, r_b, c_a, c_b] * delta(r_free, c_free)
    letters_r = ["x", "y", "z"]
    letters_c = ["u", "v", "w"]
    sub_t = letters_r[a] + letters_r[b] + letters_c[a] + letters_c[b]
    sub_e = letters_r[free] + letters_c[free]
    out = np.einsum(f"{sub_t},{sub_e}->xyzuvw", t, eye)
    return TensorOperator(n, 3, out.reshape(n**3, n**3))


def partial_trace(op: TensorOperator, slot: int) -> np.ndarray:
    """tr_2 (slot=2) gives X_ij = sum_k X_{ij,kk}; tr_1 analogously."""
    if op.arity != 2:
        raise DimensionError("partial_trace expects an arity-2 operator")
    t = op.matrix.reshape(op.n, op.n, op.n, op.n)
    if slot == 2:
        return np.einsum("ikjk->ij", t)
    if slot == 1:
        return np.einsum("kikj->ij", t)
    raise ValueError("slot must be 1 or 2")


def trace2_with(op: TensorOperator, s: np.ndarray) -> np.ndarray:
    """tr_2(op . (1 (x) S)), i.e. X_ij = sum_{k,l} op_{ij,kl} S_lk."""
    return np.einsum("ijkl,lk->ij", op.components, s)


def apply_gauge(op: TensorOperator, d1: np.ndarray, d2: np.ndarray, floor: float = 1e-12) -> TensorOperator:
    """(d1 (x) d2) op (d1 (x) d2)^-1."""
    for d in (d1, d2):
        d = np.asarray(d, dtype=complex)
        scale = float(np.max(np.abs(d)))
        if scale == 0.0 or abs(np.linalg.det(d)) < floor * scale ** d.shape[0]:
            raise SingularGaugeError("gauge matrix is singular")
    g = np.kron(d1, d2)
    return TensorOperator(op.n, 2, g @ op.matrix @ np.linalg.inv(g))
