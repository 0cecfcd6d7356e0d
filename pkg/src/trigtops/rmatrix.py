"""Trigonometric R-matrices R^eta(z) and their classical-limit coefficients.

Every family is written component by component, R_{ij,kl}, with explicit
indicator masks over 1-based index grids.  Nothing is simplified beyond what
the closed forms state.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .bd import BDStructure
from .tensor import TensorOperator, permutation_op

POLE_EPS = 1e-6

FAMILIES = (
    "R1",
    "R2",
    "R2Gauged",
    "NonStandard",
    "Combination",
    "XXZ",
    "Drinfeld",
    "CremmerGervais",
    "FromBD",
)


class PoleError(ValueError):
    """Evaluation point too close to a pole of the closed form."""


class SpecError(ValueError):
    pass


class UnsupportedFamily(SpecError):
    pass


@dataclass(frozen=True)
class RMatrixSpec:
    n: int
    family: str
    lam: complex | None = None
    a0: complex | None = None
    a1: complex | None = None
    a2: complex | None = None
    bd: BDStructure | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpecError(f"unknown family {self.family!r}")
        if self.n < 2:
            raise SpecError("n must be at least 2")
        needs_lam = self.family in ("NonStandard", "Combination")
        needs_a = self.family == "Combination"
        needs_bd = self.family == "FromBD"
        if needs_lam and self.lam is None:
            object.__setattr__(self, "lam", 0j)
        if not needs_lam and self.lam is not None:
            raise SpecError(f"family {self.family} takes no lambda")
        given_a = [a is not None for a in (self.a0, self.a1, self.a2)]
        if needs_a and not all(given_a):
            raise SpecError("Combination needs a0, a1 and a2")
        if not needs_a and any(given_a):
            raise SpecError(f"family {self.family} takes no a0/a1/a2")
        if needs_bd != (self.bd is not None):
            raise SpecError("bd is required exactly for family FromBD")
        if needs_bd and self.bd.n != self.n:
            raise SpecError("bd structure size differs from n")

    # Combination coefficients (A0, A1, A2 * e^{-N Lambda}) for the families
    # that are linear combinations of R1, Delta1 and Delta2.
    def coefficients(self) -> tuple[complex, complex, complex] | None:
        if self.family == "R1":
            return 1, 0, 0
        if self.family == "R2":
            return 1, 1, 0
        if self.family == "NonStandard":
            return 1, 1, cmath.exp(-self.n * self.lam)
        if self.family == "Combination":
            return self.a0, self.a1, self.a2 * cmath.exp(-self.n * self.lam)
        return None

    def to_json(self) -> dict:
        out: dict = {"n": self.n, "family": self.family}
        for name in ("lam", "a0", "a1", "a2"):
            val = getattr(self, name)
            if val is not None:
                out["lambda" if name == "lam" else name] = _cjson(val)
        if self.bd is not None:
            out["bd"] = self.bd.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "RMatrixSpec":
        kw = {}
        for key, name in (("lambda", "lam"), ("a0", "a0"), ("a1", "a1"), ("a2", "a2")):
            if key in data and data[key] is not None:
                kw[name] = _cfromjson(data[key])
        if data.get("bd") is not None:
            kw["bd"] = BDStructure.from_json(data["bd"])
        return cls(n=int(data["n"]), family=str(data["family"]), **kw)

    def label(self) -> str:
        parts = [f"{self.family}(n={self.n}"]
        for name in ("lam", "a0", "a1", "a2"):
            val = getattr(self, name)
            if val is not None:
                parts.append(f"{name}={_fmt(val)}")
        return ", ".join(parts) + ")"


def _fmt(v: complex) -> str:
    v = complex(v)
    return f"{v.real:g}" if v.imag == 0 else f"{v.real:g}{v.imag:+g}j"


def _cjson(v) -> list[float]:
    v = complex(v)
    return [v.real, v.imag]


def _cfromjson(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def non_standard(n: int, lam: complex = 0j) -> RMatrixSpec:
    return RMatrixSpec(n, "NonStandard", lam=lam)


def combination(n: int, a0, a1, a2, lam: complex = 0j) -> RMatrixSpec:
    return RMatrixSpec(n, "Combination", lam=lam, a0=a0, a1=a1, a2=a2)


# --------------------------------------------------------------------------
# index grids and masks

@lru_cache(maxsize=None)
def _grids(n: int):
    idx = np.arange(1, n + 1)
    i, j, k, l = np.meshgrid(idx, idx, idx, idx, indexing="ij")
    d = lambda a, b: (a == b).astype(float)  # noqa: E731
    masks = {
        "diag": d(i, j) * d(k, l) * d(i, k),
        "ijkl_off": d(i, j) * d(k, l) * (i != k),
        "ilkj_off": d(i, l) * d(k, j) * (i != k),
        "ilkj": d(i, l) * d(k, j),
        "d1": d(i + k, j + l) * (((i < j) & (j < k)).astype(float) - ((k < j) & (j < i)).astype(float)),
        "d2_iN": d(i + k, j + l + n) * d(i, n),
        "d2_kN": d(i + k, j + l + n) * d(k, n),
    }
    for m in masks.values():
        m.setflags(write=False)
    return i, j, k, l, masks


def _sign(x):
    return np.sign(x)


def _check_pole(value: complex, what: str, eps: float) -> None:
    if abs(value) < eps:
        raise PoleError(f"{what} = {value:.3e} is within {eps:g} of a pole")


def _check_args(n: int, eta: complex, z: complex, eps: float) -> None:
    # zeros of sinh(N x/2) and e^{N x}-1 coincide
    for name, x in (("z", z), ("eta", eta)):
        _check_pole(cmath.sinh(n * x / 2), f"sinh(N {name}/2)", eps)


def _coth(x):
    return np.cosh(x) / np.sinh(x)


# --------------------------------------------------------------------------
# pieces of the combination family

def r1_components(n: int, eta: complex, z: complex) -> np.ndarray:
    i, j, k, l, m = _grids(n)
    s = _sign(i - k)
    out = m["diag"] * (n / 2) * (_coth(n * z / 2) + _coth(n * eta / 2))
    out = out + m["ijkl_off"] * n * np.exp((i - k) * eta - s * n * eta / 2) / (2 * np.sinh(n * eta / 2))
    out = out + m["ilkj_off"] * n * np.exp((i - k) * z - s * n * z / 2) / (2 * np.sinh(n * z / 2))
    return out


def delta1_components(n: int, eta: complex, z: complex) -> np.ndarray:
    i, j, k, l, m = _grids(n)
    return n * m["d1"] * np.exp((i - j) * z + (j - k) * eta)


def delta2_components(n: int, eta: complex, z: complex) -> np.ndarray:
    i, j, k, l, m = _grids(n)
    return n * (m["d2_iN"] * np.exp(-j * z - l * eta) - m["d2_kN"] * np.exp(l * z + j * eta))


def r2_gauged_components(n: int, eta: complex, z: complex) -> np.ndarray:
    i, j, k, l, m = _grids(n)
    s = _sign(i - k)
    out = m["diag"] * (n / 2) * (_coth(n * z / 2) + _coth(n * eta / 2))
    out = out + m["ijkl_off"] * n * np.exp((i - k) * eta - s * n * eta / 2) / (2 * np.sinh(n * eta / 2))
    # exponent -sgn(i-k) N z/2: what D_1(z) R2(z) D_1(z)^-1 with D = diag(e^{-jz}) produces
    out = out + m["ilkj_off"] * n * np.exp(-s * n * z / 2) / (2 * np.sinh(n * z / 2))
    out = out + n * m["d1"] * np.exp((j - k) * eta)
    return out


def xxz_components(n: int, eta: complex, z: complex) -> np.ndarray:
    i, j, k, l, m = _grids(n)
    out = m["diag"] * (n / 2) * (_coth(n * z / 2) + _coth(n * eta / 2))
    out = out + m["ijkl_off"] * (n / 2) / np.sinh(n * eta / 2)
    # E_ij (x) E_ji e^{Nz/2} for i<j and E_ji (x) E_ij e^{-Nz/2}: on the (il, kj) pattern
    # the first index i is the row of the first factor.
    lower = (i < k).astype(float)
    upper = (i > k).astype(float)
    out = out + m["ilkj"] * (n / 2) / np.sinh(n * z / 2) * (lower * np.exp(n * z / 2) + upper * np.exp(-n * z / 2))
    return out


def from_bd_components(bd: BDStructure, eta: complex, z: complex) -> np.ndarray:
    n = bd.n
    out = np.zeros((n, n, n, n), dtype=complex)
    diag = (n / 2) * (_coth(n * z / 2) + _coth(n * eta / 2))
    for a in range(1, n + 1):
        out[a - 1, a - 1, a - 1, a - 1] += diag
    for k in range(1, n + 1):
        for nu in range(1, n):
            a = bd.c.power(k, nu)
            out[a - 1, a - 1, k - 1, k - 1] += n * cmath.exp(nu * eta) / (cmath.exp(n * eta) - 1)
    for a in range(1, n + 1):
        for mm in range(1, n):
            k = bd.c0.power(a, mm)
            out[a - 1, k - 1, k - 1, a - 1] += n * cmath.exp(mm * z) / (cmath.exp(n * z) - 1)
    for j, i, k, l, mm, nu in bd.tau_terms():
        out[i - 1, j - 1, k - 1, l - 1] += n * cmath.exp(-nu * eta - mm * z)
        out[k - 1, l - 1, i - 1, j - 1] -= n * cmath.exp(nu * eta + mm * z)
    return out


# --------------------------------------------------------------------------
# evaluation

def eval_components(spec: RMatrixSpec, eta: complex, z: complex, eps: float = POLE_EPS) -> np.ndarray:
    eta = complex(eta)
    z = complex(z)
    n = spec.n
    fam = spec.family
    if fam in ("Drinfeld", "CremmerGervais"):
        raise UnsupportedFamily(
            f"{fam} is a constant R-matrix; use baxterize_drinfeld / baxterize_cg"
        )
    _check_args(n, eta, z, eps)
    coeffs = spec.coefficients()
    if coeffs is not None:
        a0, a1, a2 = coeffs
        out = a0 * r1_components(n, eta, z)
        if a1 != 0:
            out = out + a1 * delta1_components(n, eta, z)
        if a2 != 0:
            out = out + a2 * delta2_components(n, eta, z)
        return out
    if fam == "R2Gauged":
        return r2_gauged_components(n, eta, z)
    if fam == "XXZ":
        return xxz_components(n, eta, z)
    if fam == "FromBD":
        return from_bd_components(spec.bd, eta, z)
    raise UnsupportedFamily(fam)  # pragma: no cover


def eval_R(spec: RMatrixSpec, eta: complex, z: complex, eps: float = POLE_EPS) -> TensorOperator:
    return TensorOperator.from_components(eval_components(spec, eta, z, eps))


def eval_f(spec: RMatrixSpec, eta: complex, z: complex, eps: float = POLE_EPS) -> complex:
    """Scalar f^eta(z) in R_12(z) R_21(-z) = f 1 (x) 1."""
    eta = complex(eta)
    z = complex(z)
    n = spec.n
    _check_args(n, eta, z, eps)
    a0 = spec.a0 if spec.family == "Combination" else 1.0
    return a0**2 * n**2 / 4 * (1 / cmath.sinh(n * eta / 2) ** 2 - 1 / cmath.sinh(n * z / 2) ** 2)


# --------------------------------------------------------------------------
# constant R-matrices and their baxterizations

def cremmer_gervais(n: int, q: complex) -> TensorOperator:
    """Constant Cremmer-Gervais R-matrix R^{CG,q}_12."""
    q = complex(q)
    if q == 0:
        raise SpecError("q must be nonzero")
    qn = lambda p: q ** (p / n)  # noqa: E731  principal branch q^{p/N}
    c = np.zeros((n, n, n, n), dtype=complex)
    for i in range(1, n + 1):
        c[i - 1, i - 1, i - 1, i - 1] += q
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i > j:
                c[i - 1, i - 1, j - 1, j - 1] += q * qn(-2 * (i - j))
            elif i < j:
                c[i - 1, i - 1, j - 1, j - 1] += qn(-2 * (i - j)) / q
    d = q - 1 / q
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i < j:
                for k in range(1, j - i):
                    c[j - k - 1, i - 1, i + k - 1, j - 1] -= d * qn(2 * k)
            elif i > j:
                for k in range(0, i - j):
                    c[j + k - 1, i - 1, i - k - 1, j - 1] += d * qn(-2 * k)
    return TensorOperator.from_components(qn(-1) * c)


def baxterize_cg(n: int, q: complex, x: complex, eps: float = POLE_EPS) -> TensorOperator:
    """x R^{CG,q}_12 - x^{-1} (R^{CG,q}_21)^{-1}."""
    r = cremmer_gervais(n, q)
    r21 = r.swapped()
    if abs(np.linalg.det(r21.matrix)) < eps:
        raise SpecError("constant Cremmer-Gervais R-matrix is singular")
    inv = TensorOperator(n, 2, np.linalg.inv(r21.matrix))
    return x * r - (1 / x) * inv


def drinfeld(n: int, q: complex, power: int = 1) -> TensorOperator:
    """(R^{Dr,q}_12)^{+-1} from the closed form for both powers."""
    if power not in (1, -1):
        raise ValueError("power must be +1 or -1")
    q = complex(q)
    if q == 0:
        raise SpecError("q must be nonzero")
    c = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i == j:
                c[i, i, i, i] = q**power
            else:
                c[i, i, j, j] = 1.0
                if i > j:
                    c[i, j, j, i] = power * (q - 1 / q)
    return TensorOperator.from_components(c)


def baxterize_drinfeld(n: int, q: complex, x: complex) -> TensorOperator:
    """x R^{Dr,q}_21 - x^{-1} (R^{Dr,q}_12)^{-1}."""
    if x == 0:
        raise SpecError("x must be nonzero")
    return x * drinfeld(n, q).swapped() - (1 / x) * drinfeld(n, q, -1)


# --------------------------------------------------------------------------
# classical-limit coefficients

@dataclass(frozen=True)
class ExpansionBundle:
    """Closed-form coefficients of R^h(z) = 1/h + r(z) + h m(z) + ... and
    R^h(z) = P/z + R^{h,(0)} + ..., r(z) = P/z + r0 + ..."""

    spec: RMatrixSpec
    r0: TensorOperator
    r: Callable[[complex], TensorOperator]
    m: Callable[[complex], TensorOperator]
    m0: TensorOperator
    R_eta0: Callable[[complex], TensorOperator]


def _combination_expansion(spec: RMatrixSpec) -> ExpansionBundle:
    n = spec.n
    a0, a1, a2 = spec.coefficients()
    i, j, k, l, mk = _grids(n)
    s = _sign(i - k)
    dist = (i - k) - n * s / 2  # constant term of N e^{(i-k)x - sgn N x/2} / (2 sinh(Nx/2))
    nN = n

    def r_comp(z):
        z = complex(z)
        _check_pole(cmath.sinh(n * z / 2), "sinh(N z/2)", POLE_EPS)
        out = mk["diag"] * (n / 2) * _coth(n * z / 2)
        out = out + mk["ijkl_off"] * dist
        out = out + mk["ilkj_off"] * n * np.exp((i - k) * z - s * n * z / 2) / (2 * np.sinh(n * z / 2))
        out = out + a1 * nN * np.exp((i - j) * z) * mk["d1"]
        out = out + a2 * nN * (np.exp(-j * z) * mk["d2_iN"] - np.exp(l * z) * mk["d2_kN"])
        return out

    def m_comp(z):
        z = complex(z)
        out = mk["diag"] * n**2 / 12
        out = out + mk["ijkl_off"] * ((i - k) ** 2 / 2 + n**2 / 12 - n / 2 * np.abs(i - k))
        out = out + a1 * nN * (j - k) * np.exp((i - j) * z) * mk["d1"]
        out = out - a2 * nN * (l * np.exp(-j * z) * mk["d2_iN"] + j * np.exp(l * z) * mk["d2_kN"])
        return out

    def R0_comp(eta):
        eta = complex(eta)
        _check_pole(cmath.sinh(n * eta / 2), "sinh(N eta/2)", POLE_EPS)
        out = mk["diag"] * (n / 2) * _coth(n * eta / 2)
        out = out + mk["ijkl_off"] * n * np.exp((i - k) * eta - s * n * eta / 2) / (2 * np.sinh(n * eta / 2))
        out = out + mk["ilkj_off"] * dist
        out = out + a1 * nN * np.exp((j - k) * eta) * mk["d1"]
        out = out + a2 * nN * (np.exp(-l * eta) * mk["d2_iN"] - np.exp(j * eta) * mk["d2_kN"])
        return out

    r0 = (mk["ijkl_off"] + mk["ilkj_off"]) * dist + a1 * nN * mk["d1"] + a2 * nN * (mk["d2_iN"] - mk["d2_kN"])
    wrap = TensorOperator.from_components
    return ExpansionBundle(
        spec=spec,
        r0=wrap(r0),
        r=lambda z: wrap(r_comp(z)),
        m=lambda z: wrap(m_comp(z)),
        m0=wrap(m_comp(0.0)),
        R_eta0=lambda eta: wrap(R0_comp(eta)),
    )


def _bd_expansion(spec: RMatrixSpec) -> ExpansionBundle:
    bd = spec.bd
    n = bd.n
    # exponents of the C-orbit (diagonal) and C0-orbit (swap) terms
    diag_terms = [(bd.c.power(k, nu), k, nu) for k in range(1, n + 1) for nu in range(1, n)]
    swap_terms = [(a, bd.c0.power(a, mm), mm) for a in range(1, n + 1) for mm in range(1, n)]
    tau_terms = list(bd.tau_terms())

    def r_comp(z):
        z = complex(z)
        _check_pole(cmath.sinh(n * z / 2), "sinh(N z/2)", POLE_EPS)
        out = np.zeros((n, n, n, n), dtype=complex)
        for a in range(n):
            out[a, a, a, a] += n / 2 * _coth(n * z / 2)
        for a, k, nu in diag_terms:
            out[a - 1, a - 1, k - 1, k - 1] += nu - n / 2
        for a, k, mm in swap_terms:
            out[a - 1, k - 1, k - 1, a - 1] += n * cmath.exp(mm * z) / (cmath.exp(n * z) - 1)
        for j, i, k, l, mm, nu in tau_terms:
            out[i - 1, j - 1, k - 1, l - 1] += n * cmath.exp(-mm * z)
            out[k - 1, l - 1, i - 1, j - 1] -= n * cmath.exp(mm * z)
        return out

    def m_comp(z):
        z = complex(z)
        out = np.zeros((n, n, n, n), dtype=complex)
        for a in range(n):
            out[a, a, a, a] += n**2 / 12
        for a, k, nu in diag_terms:
            out[a - 1, a - 1, k - 1, k - 1] += (6 * nu**2 - 6 * nu * n + n**2) / 12
        for j, i, k, l, mm, nu in tau_terms:
            out[i - 1, j - 1, k - 1, l - 1] -= n * nu * cmath.exp(-mm * z)
            out[k - 1, l - 1, i - 1, j - 1] -= n * nu * cmath.exp(mm * z)
        return out

    def R0_comp(eta):
        eta = complex(eta)
        _check_pole(cmath.sinh(n * eta / 2), "sinh(N eta/2)", POLE_EPS)
        out = np.zeros((n, n, n, n), dtype=complex)
        for a in range(n):
            out[a, a, a, a] += n / 2 * _coth(n * eta / 2)
        for a, k, nu in diag_terms:
            out[a - 1, a - 1, k - 1, k - 1] += n * cmath.exp(nu * eta) / (cmath.exp(n * eta) - 1)
        for a, k, mm in swap_terms:
            out[a - 1, k - 1, k - 1, a - 1] += mm - n / 2
        for j, i, k, l, mm, nu in tau_terms:
            out[i - 1, j - 1, k - 1, l - 1] += n * cmath.exp(-nu * eta)
            out[k - 1, l - 1, i - 1, j - 1] -= n * cmath.exp(nu * eta)
        return out

    r0 = np.zeros((n, n, n, n), dtype=complex)
    for a, k, nu in diag_terms:
        r0[a - 1, a - 1, k - 1, k - 1] += nu - n / 2
    for a, k, mm in swap_terms:
        r0[a - 1, k - 1, k - 1, a - 1] += mm - n / 2
    for j, i, k, l, mm, nu in tau_terms:
        r0[i - 1, j - 1, k - 1, l - 1] += n
        r0[k - 1, l - 1, i - 1, j - 1] -= n

    wrap = TensorOperator.from_components
    return ExpansionBundle(
        spec=spec,
        r0=wrap(r0),
        r=lambda z: wrap(r_comp(z)),
        m=lambda z: wrap(m_comp(z)),
        m0=wrap(m_comp(0.0)),
        R_eta0=lambda eta: wrap(R0_comp(eta)),
    )


def supports_expansion(spec: RMatrixSpec) -> bool:
    if spec.family in ("R1", "R2", "NonStandard", "FromBD"):
        return True
    if spec.family == "Combination":
        # residue 1 (x) 1 at h = 0 needs A0 = 1
        return spec.a0 == 1 and (spec.a1 == 1 or spec.a2 == 0)
    return False


def expansion(spec: RMatrixSpec) -> ExpansionBundle:
    if not supports_expansion(spec):
        raise UnsupportedFamily(f"no classical expansion for {spec.label()}")
    if spec.family == "FromBD":
        return _bd_expansion(spec)
    return _combination_expansion(spec)


def residue_identity(n: int) -> TensorOperator:
    return TensorOperator.identity(n)


def residue_permutation(n: int) -> TensorOperator:
    return permutation_op(n)
