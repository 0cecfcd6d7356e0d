"""Gauge equivalence between rank-1 tops and trigonometric Ruijsenaars-Schneider
and Calogero-Moser-Sutherland systems.

Symmetric functions follow the convention
    prod_k (zeta - x_k) = sum_k (-1)^k sigma_k zeta^k,   x_k = exp(-qbar_k),
i.e. sigma_k = (-1)^M e_{M-k}(x) for M variables.  This is the reading under
which the closed-form inverse of Xi holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numerics import derivative
from .rmatrix import eval_R, expansion, non_standard
from .tensor import trace2_with

DISTINCT_FLOOR = 1e-8
POLE_EPS = 1e-6
LAMBDA_RS = 1j * np.pi


class BridgeError(ValueError):
    pass


class CoincidentPositions(BridgeError):
    pass


@dataclass(frozen=True)
class PhasePoint:
    p: tuple
    q: tuple
    c: complex = 1.0
    eta: complex | None = None
    nu: complex | None = None
    floor: float = DISTINCT_FLOOR

    def __post_init__(self):
        p = tuple(complex(v) for v in self.p)
        q = tuple(complex(v) for v in self.q)
        if len(p) != len(q) or len(p) < 2:
            raise BridgeError("p and q must have equal length >= 2")
        if self.c == 0:
            raise BridgeError("c must be nonzero")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        x = np.exp(-self.qbar)
        gap = min(abs(x[i] - x[j]) for i in range(self.n) for j in range(i))
        if gap < self.floor:
            raise CoincidentPositions(f"positions coincide: min |e^-qi - e^-qj| = {gap:.3g} < {self.floor}")

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def qbar(self) -> np.ndarray:
        q = np.array(self.q)
        return q - q.mean()

    @property
    def pvec(self) -> np.ndarray:
        return np.array(self.p)

    def require_eta(self) -> complex:
        if self.eta is None:
            raise BridgeError("phase point carries no eta")
        return self.eta

    def require_nu(self) -> complex:
        if self.nu is None:
            raise BridgeError("phase point carries no nu")
        return self.nu

    def with_(self, **kw) -> "PhasePoint":
        data = dict(p=self.p, q=self.q, c=self.c, eta=self.eta, nu=self.nu, floor=self.floor)
        data.update(kw)
        return PhasePoint(**data)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "p": [[z.real, z.imag] for z in self.p],
            "q": [[z.real, z.imag] for z in self.q],
            "c": [complex(self.c).real, complex(self.c).imag],
        }
        if self.eta is not None:
            out["eta"] = [complex(self.eta).real, complex(self.eta).imag]
        if self.nu is not None:
            out["nu"] = [complex(self.nu).real, complex(self.nu).imag]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PhasePoint":
        def cx(v):
            if isinstance(v, (list, tuple)):
                return complex(v[0], v[1])
            return complex(v)

        p = [cx(v) for v in data["p"]]
        q = [cx(v) for v in data["q"]]
        if "n" in data and int(data["n"]) != len(q):
            raise BridgeError("n does not match the length of q")
        return cls(
            tuple(p),
            tuple(q),
            cx(data.get("c", 1.0)),
            cx(data["eta"]) if data.get("eta") is not None else None,
            cx(data["nu"]) if data.get("nu") is not None else None,
        )


def _elementary(xs: np.ndarray) -> np.ndarray:
    """e_0..e_M of xs by incremental polynomial multiplication."""
    e = np.array([1.0 + 0j])
    for x in xs:
        e = np.convolve(e, [1.0, x])
    return e


def _sigma_from(xs: np.ndarray, size: int) -> np.ndarray:
    m = len(xs)
    e = _elementary(xs)
    out = np.zeros(size, dtype=complex)
    for k in range(min(size, m + 1)):
        out[k] = (-1) ** m * e[m - k]
    return out


@dataclass(frozen=True, eq=False)
class SymmPolyCache:
    x: np.ndarray  # e^{-qbar_k}

    @classmethod
    def of(cls, point: PhasePoint) -> "SymmPolyCache":
        return cls(np.exp(-point.qbar))

    @property
    def n(self) -> int:
        return len(self.x)

    @cached_property
    def sigma(self) -> np.ndarray:
        """sigma_0..sigma_{N+1} (the last entry is 0, for index convenience)."""
        return _sigma_from(self.x, self.n + 2)

    @cached_property
    def sigma_hat(self) -> np.ndarray:
        """sigma_hat[i, k] = sigma-check_{k, i+1} for k = 0..N+1."""
        return np.array([_sigma_from(np.delete(self.x, i), self.n + 2) for i in range(self.n)])

    @cached_property
    def denominators(self) -> np.ndarray:
        """prod_{k != i} (x_i - x_k)."""
        x = self.x
        return np.array([np.prod([x[i] - x[k] for k in range(self.n) if k != i]) for i in range(self.n)])

    def expansion_residual(self, zetas) -> float:
        worst = 0.0
        for zeta in zetas:
            lhs = np.prod(zeta - self.x)
            rhs = sum((-1) ** k * self.sigma[k] * zeta**k for k in range(self.n + 1))
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
        return worst


def _check_z(z: complex, n: int) -> None:
    # det Xi vanishes where e^{Nz} = 1
    w = n * z / (2j * np.pi)
    if abs(n * z - 2j * np.pi * round(w.real)) < POLE_EPS:
        raise BridgeError(f"z = {z} is a zero of det Xi")


def build_xi(z: complex, point: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """(Xi(z, q), D(q))."""
    n = point.n
    _check_z(z, n)
    qb = point.qbar
    i = np.arange(1, n + 1)[:, None]
    xi = np.exp((i - 1) * (z - qb[None, :])) + np.where(i == n, (-1) ** n * np.exp(-(z - qb[None, :])), 0)
    d = np.diag(SymmPolyCache.of(point).denominators)
    return xi, d


def det_xi_closed(z: complex, point: PhasePoint) -> complex:
    n = point.n
    x = np.exp(-point.qbar)
    prod = np.prod([x[i] - x[j] for i in range(n) for j in range(i)])
    return np.exp(z * n * (n - 1) / 2) * (1 - np.exp(-n * z)) * prod


def xi_inverse(z: complex, point: PhasePoint) -> np.ndarray:
    n = point.n
    _check_z(z, n)
    cache = SymmPolyCache.of(point)
    x, sh, den = cache.x, cache.sigma_hat, cache.denominators
    out = np.zeros((n, n), dtype=complex)
    pre = 1 / (np.exp(n * z) - 1)
    for i in range(n):
        for j in range(1, n + 1):
            num = sh[i, j - 1] + x[i] * sh[i, j] * np.exp(-n * z)
            out[i, j - 1] = (-1) ** (j - 1) * np.exp((n - j + 1) * z) * pre * num / den[i]
    return out


def gauge_g(z: complex, point: PhasePoint) -> np.ndarray:
    xi, d = build_xi(z, point)
    return xi / np.diag(d)[None, :]


def gauge_g_inv(z: complex, point: PhasePoint) -> np.ndarray:
    d = SymmPolyCache.of(point).denominators
    return d[:, None] * xi_inverse(z, point)


def _exp_p(point: PhasePoint) -> np.ndarray:
    return np.diag(np.exp(point.pvec / point.c))


def rs_lax(z: complex, point: PhasePoint) -> np.ndarray:
    """Factorized g^-1(z) g(z + eta) e^{P/c}."""
    eta = point.require_eta()
    return gauge_g_inv(z, point) @ gauge_g(z + eta, point) @ _exp_p(point)


def rs_lax_components(z: complex, point: PhasePoint) -> np.ndarray:
    eta = point.require_eta()
    n = point.n
    q = np.array(point.q)
    out = np.zeros((n, n), dtype=complex)
    pre = np.exp((n - 2) * eta / 2) * np.sinh(eta / 2)
    cz = 1 / np.tanh(n * z / 2)
    for j in range(n):
        prod = np.prod([np.sinh((q[j] - q[k] - eta) / 2) / np.sinh((q[j] - q[k]) / 2) for k in range(n) if k != j])
        col = pre * np.exp(point.p[j] / point.c) * prod
        for i in range(n):
            out[i, j] = col * (cz + 1 / np.tanh((q[i] - q[j] + eta) / 2))
    return out


def top_lax_gauged(z: complex, point: PhasePoint) -> np.ndarray:
    """g(z + eta) e^{P/c} g^-1(z)."""
    eta = point.require_eta()
    return gauge_g(z + eta, point) @ _exp_p(point) @ gauge_g_inv(z, point)


def spin_factors(point: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """(a, b) with S_ij = a_i b_j for the relativistic change of variables."""
    eta = point.require_eta()
    n = point.n
    cache = SymmPolyCache.of(point)
    qb = point.qbar
    w = np.exp(point.pvec / point.c) / cache.denominators
    a = np.zeros(n, dtype=complex)
    for i in range(1, n + 1):
        terms = np.exp(-(i - 1) * qb)
        if i == n:
            terms = terms + (-1) ** n * np.exp(-(n * eta - qb))
        a[i - 1] = np.exp((i - 1) * eta) / n * np.sum(w * terms)
    b = np.array([(-1) ** j * cache.sigma[j] for j in range(1, n + 1)])
    return a, b


def spin_from_phase(point: PhasePoint) -> np.ndarray:
    a, b = spin_factors(point)
    return np.outer(a, b)


def rank1_residual(s: np.ndarray) -> float:
    """max |S_ij S_kl - S_il S_kj| / max|S|^2."""
    t = np.einsum("ij,kl->ijkl", s, s) - np.einsum("il,kj->ijkl", s, s)
    scale = float(np.max(np.abs(s))) ** 2
    return float(np.max(np.abs(t))) / scale if scale else 0.0


def nonstandard_spec(n: int):
    return non_standard(n, LAMBDA_RS)


def top_lax_from_spin(z: complex, point: PhasePoint) -> np.ndarray:
    """tr_2(R^eta_12(z) S_2(p, q)) with the NonStandard R-matrix at Lambda = i pi."""
    return trace2_with(eval_R(nonstandard_spec(point.n), point.require_eta(), z), spin_from_phase(point))


# Calogero-Moser-Sutherland limit


def qdot(point: PhasePoint) -> np.ndarray:
    """p_i + (nu/2)(N - 2) - (nu/2) sum_{k != i} coth((q_i - q_k)/2)."""
    nu = point.require_nu()
    n = point.n
    q = np.array(point.q)
    out = np.array(point.p, dtype=complex) + nu / 2 * (n - 2)
    for i in range(n):
        out[i] -= nu / 2 * sum(1 / np.tanh((q[i] - q[k]) / 2) for k in range(n) if k != i)
    return out


def cms_lax(z: complex, point: PhasePoint) -> np.ndarray:
    """First-order term of the RS Lax matrix at eta = nu/c, c -> infinity.

    L_ij = delta_ij (qdot_i + (nu/2) coth(Nz/2)) + (nu/2)(1 - delta_ij)(coth((q_i - q_j)/2) + coth(Nz/2)).
    """
    nu = point.require_nu()
    n = point.n
    _check_z(z, n)
    q = np.array(point.q)
    cz = 1 / np.tanh(n * z / 2)
    out = np.zeros((n, n), dtype=complex)
    v = qdot(point)
    for i in range(n):
        for j in range(n):
            if i == j:
                out[i, i] = v[i] + nu / 2 * cz
            else:
                out[i, j] = nu / 2 * (1 / np.tanh((q[i] - q[j]) / 2) + cz)
    return out


def cms_scalar_shift(point: PhasePoint) -> complex:
    """tr_2(r_12 S_2) = g (L^CM - shift 1) g^-1 with shift = mean(p) + nu (N - 2)/2."""
    return complex(np.mean(point.pvec) + point.require_nu() * (point.n - 2) / 2)


def cms_lax_printed(z: complex, point: PhasePoint) -> np.ndarray:
    """The display with full nu, coth(Nz) and qdot_i = p_i + nu(N-2) - nu sum_k coth((q_i - q_k)/2).

    Kept for comparison only; it is not gauge equivalent to the top.
    """
    nu = point.require_nu()
    n = point.n
    q = np.array(point.q)
    cz = 1 / np.tanh(n * z)
    v = np.array(point.p, dtype=complex) + nu * (n - 2)
    for i in range(n):
        v[i] -= nu * sum(1 / np.tanh((q[i] - q[k]) / 2) for k in range(n) if k != i)
    out = nu * (1 / np.tanh((q[:, None] - q[None, :] + np.eye(n)) / 2) + cz)
    out[np.diag_indices(n)] = v + nu * cz
    return out


def rs_large_c_residual(z: complex, point: PhasePoint, c: float = 1e6) -> float:
    """max |c (L^RS - 1) - L^CM| with eta = nu/c at large c."""
    nu = point.require_nu()
    pt = point.with_(c=c, eta=nu / c)
    n = point.n
    return float(np.max(np.abs(c * (rs_lax(z, pt) - np.eye(n)) - cms_lax(z, point))))


def cms_spin(point: PhasePoint) -> np.ndarray:
    nu = point.require_nu()
    n = point.n
    cache = SymmPolyCache.of(point)
    qb = point.qbar
    p = point.pvec
    a = np.zeros(n, dtype=complex)
    for i in range(1, n + 1):
        extra = (-1) ** n * np.exp(qb) if i == n else 0.0
        num = (p + (i - 1) * nu) * (np.exp(-(i - 1) * qb) + extra) - (n * nu * extra if i == n else 0.0)
        a[i - 1] = np.sum(num / cache.denominators) / n
    b = np.array([(-1) ** j * cache.sigma[j] for j in range(1, n + 1)])
    return np.outer(a, b)


def cms_limit(point: PhasePoint, z: complex) -> tuple[np.ndarray, np.ndarray]:
    """(L^CM(z), S(p, q))."""
    return cms_lax(z, point), cms_spin(point)


def cms_top_lax(z: complex, point: PhasePoint) -> np.ndarray:
    """tr_2(r_12(z) S_2(p, q)) with the NonStandard r-matrix at Lambda = i pi."""
    bundle = expansion(nonstandard_spec(point.n))
    return trace2_with(bundle.r(z), cms_spin(point))


def casimirs(s: np.ndarray) -> np.ndarray:
    out = []
    p = np.eye(s.shape[0], dtype=complex)
    for _ in range(s.shape[0]):
        p = p @ s
        out.append(np.trace(p))
    return np.array(out)


def canonical_map_check(point: PhasePoint, step: float = 1e-6) -> float:
    """max |{qdot_i, q_j} - delta_ij|; the bracket is d qdot_i / d p_j by central differences."""
    n = point.n
    jac = np.zeros((n, n), dtype=complex)
    for j in range(n):
        dp = np.zeros(n)
        dp[j] = step
        plus = qdot(point.with_(p=tuple(point.pvec + dp)))
        minus = qdot(point.with_(p=tuple(point.pvec - dp)))
        jac[:, j] = (plus - minus) / (2 * step)
    return float(np.max(np.abs(jac - np.eye(n))))


def push_forward(spin_fn, point: PhasePoint, step: float = 1e-3, levels: int = 3) -> np.ndarray:
    """{S_ij, S_kl} from {p_m, q_m'} = delta_mm', using Richardson-extrapolated central differences."""
    n = point.n
    p0 = point.pvec
    q0 = np.array(point.q)
    dsp = []
    dsq = []
    for m in range(n):
        e = np.zeros(n)
        e[m] = 1.0
        dsp.append(derivative(lambda h: spin_fn(point.with_(p=tuple(p0 + h * e))), 0.0, step, levels))
        dsq.append(derivative(lambda h: spin_fn(point.with_(q=tuple(q0 + h * e))), 0.0, step, levels))
    dsp = np.array(dsp)
    dsq = np.array(dsq)
    return np.einsum("mij,mkl->ijkl", dsp, dsq) - np.einsum("mij,mkl->ijkl", dsq, dsp)


# --------------------------------------------------------------------------
# check suite


MIN_SPACING = 0.4


def random_point(rng: np.random.Generator, n: int, c: float = 1.0, eta: complex | None = 0.3,
                 nu: complex | None = 0.5, spacing: float = MIN_SPACING) -> PhasePoint:
    """Seeded point with real positions at least ``spacing`` apart (keeps g well conditioned)."""
    for _ in range(1000):
        q = rng.uniform(-0.6 * n, 0.6 * n, size=n)
        if min(abs(q[i] - q[j]) for i in range(n) for j in range(i)) < spacing:
            continue
        p = rng.normal(scale=0.5, size=n)
        return PhasePoint(tuple(p), tuple(q), c, eta, nu)
    raise BridgeError("could not draw a point with separated positions")


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale if scale else 0.0


def bridge_checks(point: PhasePoint, samples: int = 5, seed: int = 0, pushforward: bool = True) -> list:
    """Checks of the RS / CMS correspondence at ``point``; returns verify.CheckReport objects."""
    from .verify import CheckReport, draw, stream

    n = point.n
    spec = nonstandard_spec(n)
    rng = stream(seed, "bridge", n)
    shift = point.eta if point.eta is not None else 0.0
    zs = [draw(rng, n, 1, lambda p: (p[0] + shift,))[0] for _ in range(samples)]
    reports = []

    def add(name, fn, tol, params, extra=None):
        worst, wz = -1.0, zs[0]
        for z in zs:
            res = fn(z)
            if res > worst:
                worst, wz = res, z
        reports.append(CheckReport(name, spec, len(zs), float(worst), tol, {"zs": [wz], "etas": params}, seed,
                                   extra=extra or {}))

    def once(name, value, tol, params, extra=None):
        reports.append(CheckReport(name, spec, 1, float(value), tol, {"zs": [], "etas": params}, seed,
                                   extra=extra or {}))

    add("xi-determinant", lambda z: abs(np.linalg.det(build_xi(z, point)[0]) / det_xi_closed(z, point) - 1), 1e-10, [])
    add("xi-inverse", lambda z: float(np.max(np.abs(build_xi(z, point)[0] @ xi_inverse(z, point) - np.eye(n)))),
        1e-10, [])
    cache = SymmPolyCache.of(point)
    once("symmetric-polynomials", cache.expansion_residual(zs[:3]), 1e-12, [])

    if point.eta is not None:
        eta = point.eta
        add("rs-lax-forms", lambda z: _rel(rs_lax(z, point), rs_lax_components(z, point)), 1e-9, [eta])
        add("rs-gauge-equivalence", lambda z: _rel(top_lax_from_spin(z, point), top_lax_gauged(z, point)), 1e-8, [eta])
        add("rs-spectral-match",
            lambda z: _rel(np.poly(rs_lax(z, point)), np.poly(top_lax_from_spin(z, point))), 1e-7, [eta])
        once("rank-one", rank1_residual(spin_from_phase(point)), 1e-10, [eta])
        if pushforward:
            from .tops import RELATIVISTIC, TopModel, bracket_quadratic

            model = TopModel(spec, RELATIVISTIC, eta=eta, c=n * point.c)
            pf = push_forward(spin_from_phase, point)
            bq = bracket_quadratic(model, spin_from_phase(point))
            once("rs-bracket-pushforward", float(np.max(np.abs(pf - bq))), 1e-7, [eta])

    if point.nu is not None:
        nu = point.nu
        s = cms_spin(point)
        traces = casimirs(s)
        powers = np.array([nu**k for k in range(1, n + 1)])
        once("cms-casimir", float(np.max(np.abs(traces - powers))), 1e-8, [nu],
             {"traces": [[complex(t).real, complex(t).imag] for t in traces]})
        once("rank-one-cms", rank1_residual(s), 1e-10, [nu])

        def cms_gauge(z):
            g, gi = gauge_g(z, point), gauge_g_inv(z, point)
            target = g @ (cms_lax(z, point) - cms_scalar_shift(point) * np.eye(n)) @ gi
            return _rel(cms_top_lax(z, point), target)

        add("cms-gauge-equivalence", cms_gauge, 1e-8, [nu])
        add("cms-large-c", lambda z: rs_large_c_residual(z, point), 1e-4, [nu])
        once("canonical-map", canonical_map_check(point), 1e-8, [nu])
        if pushforward:
            from .tops import NONRELATIVISTIC, TopModel, bracket_linear

            model = TopModel(spec, NONRELATIVISTIC, c=n)
            pf = push_forward(cms_spin, point)
            once("cms-bracket-pushforward", float(np.max(np.abs(pf - bracket_linear(model, s)))), 1e-7, [nu])
    return reports
