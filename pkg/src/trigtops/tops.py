"""Relativistic and non-relativistic tops built from an R-matrix.

The dynamical variable is a matrix ``S``; the equations of motion are
S' = [S, J(S)] with a linear inverse inertia tensor J.  Lax matrices,
inertia tensors and both Poisson structures are partial traces of the
R-matrix or of its classical-limit coefficients.

Poisson bracket tables are explicit arrays ``B[i, j, k, l] = {S_ij, S_kl}``
with 0-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rmatrix import ExpansionBundle, RMatrixSpec, UnsupportedFamily, eval_R, expansion
from .tensor import TensorOperator, permutation_op, trace2_with

RELATIVISTIC = "relativistic"
NONRELATIVISTIC = "nonrelativistic"


class ModelError(ValueError):
    pass


class StepOverflow(RuntimeError):
    pass


@dataclass(frozen=True)
class SpinState:
    s: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=complex)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ModelError(f"S must be square, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ModelError("S has non-finite entries")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @property
    def s0(self) -> complex:
        return complex(np.trace(self.s)) / self.n


@dataclass(frozen=True)
class TopModel:
    spec: RMatrixSpec
    kind: str = RELATIVISTIC
    eta: complex | None = None
    c: complex = 1.0  # c_2 (relativistic) or c_1 (non-relativistic)
    bundle: ExpansionBundle = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in (RELATIVISTIC, NONRELATIVISTIC):
            raise ModelError(f"unknown kind {self.kind!r}")
        if self.kind == RELATIVISTIC and self.eta is None:
            raise ModelError("relativistic top needs eta")
        if self.c == 0:
            raise ModelError("bracket constant must be nonzero")
        if self.spec.family == "Combination" and self.spec.a0 == 0 and self.spec.a1 == 0:
            raise UnsupportedFamily("A0 = A1 = 0: unitarity degenerates, no top is built")
        if self.bundle is None:
            object.__setattr__(self, "bundle", expansion(self.spec))
        if self.eta is not None:
            # triggers the pole check once at construction
            self.bundle.R_eta0(self.eta)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def relativistic(self) -> bool:
        return self.kind == RELATIVISTIC


def _mat(state) -> np.ndarray:
    return state.s if isinstance(state, SpinState) else np.asarray(state, dtype=complex)


def lax_L(model: TopModel, z: complex, state) -> np.ndarray:
    s = _mat(state)
    if model.relativistic:
        return trace2_with(eval_R(model.spec, model.eta, z), s)
    return trace2_with(model.bundle.r(z), s)


def nonstandard_lax_components(n: int, lam: complex, eta: complex, z: complex, state) -> np.ndarray:
    """Relativistic NonStandard Lax matrix written entrywise (diagonal, upper and lower cases)."""
    s = _mat(state)
    out = np.zeros((n, n), dtype=complex)
    big = n * np.exp(-n * lam)
    S = lambda a, b: s[a - 1, b - 1]  # noqa: E731  1-based
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                v = n / 2 * (1 / np.tanh(n * z / 2) + 1 / np.tanh(n * eta / 2)) * S(i, i)
                lo = sum(np.exp((i - k) * eta) * S(k, k) for k in range(1, i))
                hi = sum(np.exp((i - k) * eta) * S(k, k) for k in range(i + 1, n + 1))
                v += n / (2 * np.sinh(n * eta / 2)) * (np.exp(-n * eta / 2) * lo + np.exp(n * eta / 2) * hi)
            elif i < j:
                v = n * np.exp(n * z / 2 + (i - j) * z) / (2 * np.sinh(n * z / 2)) * S(i, j)
                v += n * sum(np.exp((i - j) * z + (j - k) * eta) * S(i - j + k, k) for k in range(j + 1, n + 1))
            else:
                v = n * np.exp(-n * z / 2 + (i - j) * z) / (2 * np.sinh(n * z / 2)) * S(i, j)
                v -= n * sum(np.exp((i - j) * z + (j - k) * eta) * S(i - j + k, k) for k in range(1, j))
                v -= big * np.exp((i - j) * z + j * eta) * S(i - j, n)
                if i == n:
                    v += big * sum(np.exp(-j * z + (j - k) * eta) * S(k - j, k) for k in range(j + 1, n + 1))
            out[i - 1, j - 1] = v
    return out


def lax_M(model: TopModel, z: complex, state) -> np.ndarray:
    s = _mat(state)
    if model.relativistic:
        return -trace2_with(model.bundle.r(z), s)
    return trace2_with(model.bundle.m(z), s)


def inertia_operator(model: TopModel) -> TensorOperator:
    if model.relativistic:
        return model.bundle.R_eta0(model.eta) - model.bundle.r0
    return model.bundle.m0


def inertia_J(model: TopModel, state) -> np.ndarray:
    return trace2_with(inertia_operator(model), _mat(state))


def eom_rhs(model: TopModel, state) -> np.ndarray:
    s = _mat(state)
    j = inertia_J(model, s)
    return s @ j - j @ s


def lax_consistency(model: TopModel, state, zs) -> float:
    """max over ``zs`` of max|L(z, S') - [L(z, S), M(z, S)]|, with S' from the equations of motion."""
    s = _mat(state)
    sdot = eom_rhs(model, s)
    worst = 0.0
    for z in np.atleast_1d(zs):
        lz = lax_L(model, z, s)
        mz = lax_M(model, z, s)
        res = lax_L(model, z, sdot) - (lz @ mz - mz @ lz)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def lax_flow(model: TopModel, state, z) -> np.ndarray:
    """The S' implied by L' = [L, M] (L is linear in S).

    ``z`` may be one spectral parameter or several; with several the stacked
    system is solved by least squares, which stays well conditioned where the
    map S -> L(z, S) is nearly singular at a single z.
    """
    s = _mat(state)
    n = model.n
    rows, rhs = [], []
    for zz in np.atleast_1d(z):
        lz = lax_L(model, zz, s)
        mz = lax_M(model, zz, s)
        rhs.append((lz @ mz - mz @ lz).ravel())
        cols = []
        for a in range(n):
            for b in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[a, b] = 1.0
                cols.append(lax_L(model, zz, e).ravel())
        rows.append(np.array(cols).T)
    lin = np.vstack(rows)
    target = np.concatenate(rhs)
    if lin.shape[0] == lin.shape[1]:
        return np.linalg.solve(lin, target).reshape(n, n)
    return np.linalg.lstsq(lin, target, rcond=None)[0].reshape(n, n)


def hamiltonian(model: TopModel, state) -> complex:
    s = _mat(state)
    if model.relativistic:
        return complex(np.trace(s)) / model.c
    return complex(np.trace(s @ inertia_J(model, s))) / (2 * model.c)


def hamiltonian_gradient(model: TopModel, state) -> np.ndarray:
    """dH/dS_ab as an (n, n) array."""
    s = _mat(state)
    n = model.n
    if model.relativistic:
        return np.eye(n, dtype=complex) / model.c
    grad = np.zeros((n, n), dtype=complex)
    js = inertia_J(model, s)
    for a in range(n):
        for b in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = 1.0
            grad[a, b] = (np.trace(e @ js) + np.trace(s @ inertia_J(model, e))) / (2 * model.c)
    return grad


def bracket_quadratic(model: TopModel, state) -> np.ndarray:
    """Sklyanin-type table c_2 {S_ij, S_kl} divided through by c_2."""
    if not model.relativistic:
        raise ModelError("quadratic bracket belongs to the relativistic top")
    s = _mat(state)
    r0 = model.bundle.r0.components
    l0 = trace2_with(model.bundle.R_eta0(model.eta), s)
    t = np.einsum("il,kj->ijkl", l0, s) - np.einsum("kj,il->ijkl", l0, s)
    t = t + np.einsum("ia,kb,ajbl->ijkl", s, s, r0) - np.einsum("iakb,aj,bl->ijkl", r0, s, s)
    return t / model.c


def bracket_linear(model: TopModel, state) -> np.ndarray:
    """Poisson-Lie table {S_ij, S_kl} = (S_kj d_il - S_il d_kj) / c_1."""
    s = _mat(state)
    eye = np.eye(s.shape[0])
    t = np.einsum("kj,il->ijkl", s, eye) - np.einsum("il,kj->ijkl", s, eye)
    return t / model.c


def bracket_tilde(model: TopModel, state) -> np.ndarray:
    """Quadratic bracket defined by c_2{L~_1(z), L~_2(w)} = [L~_1(z) L~_2(w), r_12(z - w)].

    With A = S - s0 1 and B = s0 1 + T - tr(T)/N 1, T = tr_2(r0_12 S_2), the double
    residue at z = w = 0 gives c_2{A_1, A_2} = [A_1 A_2, r0] + [B_1 A_2, P], and the
    trace part has c_2{s0, S} = [S, J(S)] with the non-relativistic J.
    """
    s = _mat(state)
    n = s.shape[0]
    eye = np.eye(n)
    s0 = np.trace(s) / n
    a = s - s0 * eye
    t = trace2_with(model.bundle.r0, s)
    b = s0 * eye + t - np.trace(t) / n * eye
    p = permutation_op(n).matrix
    r0 = model.bundle.r0.matrix
    aa = np.kron(a, a)
    ba = np.kron(b, a)
    g = TensorOperator(n, 2, aa @ r0 - r0 @ aa + ba @ p - p @ ba).components
    j = trace2_with(model.bundle.m0, s)
    f = s @ j - j @ s
    table = g + np.einsum("ij,kl->ijkl", eye, f) - np.einsum("kl,ij->ijkl", eye, f)
    return table / model.c


def bracket_tilde_printed(model: TopModel, state) -> np.ndarray:
    """The component display s0[S_2,P] + [S_1 S_2, r0] + [tr_3(r0_13 S_3) S_2, P], over c_2.

    Agrees with ``bracket_tilde`` only on the traceless block at tr S = 0.
    """
    s = _mat(state)
    n = s.shape[0]
    s0 = np.trace(s) / n
    eye = np.eye(n)
    p = permutation_op(n).matrix
    r0 = model.bundle.r0.matrix
    s2 = np.kron(eye, s)
    s1s2 = np.kron(s, s)
    t1s2 = np.kron(trace2_with(model.bundle.r0, s), s)
    op = s0 * (s2 @ p - p @ s2) + (s1s2 @ r0 - r0 @ s1s2) + (t1s2 @ p - p @ t1s2)
    return TensorOperator(n, 2, op / model.c).components.copy()


def bracket(model: TopModel, state) -> np.ndarray:
    return bracket_quadratic(model, state) if model.relativistic else bracket_linear(model, state)


def hamiltonian_flow(model: TopModel, state, table: np.ndarray | None = None, grad: np.ndarray | None = None) -> np.ndarray:
    """S'_ij = {H, S_ij} = sum_ab dH/dS_ab {S_ab, S_ij}."""
    if table is None:
        table = bracket(model, state)
    if grad is None:
        grad = hamiltonian_gradient(model, state)
    return np.einsum("ab,abij->ij", grad, table)


def tilde_flow(model: TopModel, state) -> np.ndarray:
    """Flow generated by s0 = tr S / N under ``bracket_tilde``."""
    s = _mat(state)
    return hamiltonian_flow(model, s, bracket_tilde(model, s), np.eye(s.shape[0]) / s.shape[0])


def jacobi_residual(table_fn, s: np.ndarray) -> float:
    """max |{S_a,{S_b,S_c}} + cyclic| for a bracket table polynomial of degree <= 2 in S.

    The S-derivative of the table is taken by polarization,
    dT[E] = (T(S + E) - T(S - E)) / 2, which is exact for quadratic tables.
    """
    n = s.shape[0]
    base = table_fn(s)
    # dtab[a, b, i, j, k, l] = d{S_ij, S_kl} / dS_ab
    dtab = np.zeros((n, n) + base.shape, dtype=complex)
    for a in range(n):
        for b in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = 1.0
            dtab[a, b] = (table_fn(s + e) - table_fn(s - e)) / 2
    # {S_x, {S_y, S_w}} = sum_ab {S_x, S_ab} d{S_y,S_w}/dS_ab
    nested = np.einsum("xyab,abijkl->xyijkl", base, dtab)
    # nested[x0,x1, y0,y1, w0,w1] ; cyclic sum over (x, y, w)
    jac = nested + np.transpose(nested, (2, 3, 4, 5, 0, 1)) + np.transpose(nested, (4, 5, 0, 1, 2, 3))
    return float(np.max(np.abs(jac)))


def lax_coefficients(lax, n: int) -> np.ndarray:
    """K[i, j, a, b] = L(E_ab)_ij for a map S -> L(S) linear in S."""
    k = np.zeros((n, n, n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = 1.0
            k[:, :, a, b] = lax(e)
    return k


def pairwise_bracket(kz: np.ndarray, kw: np.ndarray, table: np.ndarray) -> np.ndarray:
    """{L_1(z), L_2(w)} as an n^2 x n^2 matrix from Lax coefficients and a bracket table."""
    comp = np.einsum("ijab,klcd,abcd->ijkl", kz, kw, table)
    return TensorOperator.from_components(comp).matrix


def pairwise_lax_bracket(model: TopModel, state, z: complex, w: complex, table: np.ndarray | None = None) -> np.ndarray:
    s = _mat(state)
    if table is None:
        table = bracket(model, s)
    n = model.n
    kz = lax_coefficients(lambda e: lax_L(model, z, e), n)
    kw = lax_coefficients(lambda e: lax_L(model, w, e), n)
    return pairwise_bracket(kz, kw, table)


def rmatrix_form_residual(model: TopModel, state, z: complex, w: complex) -> float:
    """Relativistic: c{L1(z),L2(w)} - [L1(z) L2(w), r(z-w)];
    non-relativistic: c{L1,L2} - [L1(z) + L2(w), r(z-w)]."""
    s = _mat(state)
    n = model.n
    lhs = model.c * pairwise_lax_bracket(model, s, z, w)
    lz = lax_L(model, z, s)
    lw = lax_L(model, w, s)
    eye = np.eye(n)
    l1 = np.kron(lz, eye)
    l2 = np.kron(eye, lw)
    r = model.bundle.r(z - w).matrix
    op = l1 @ l2 if model.relativistic else l1 + l2
    rhs = op @ r - r @ op
    return float(np.max(np.abs(lhs - rhs)))


def tilde_L(model: TopModel, state, z: complex) -> np.ndarray:
    """s0 1 + L(z, S) - (1/N) tr L(z, S) 1 with the non-relativistic L."""
    s = _mat(state)
    n = s.shape[0]
    lz = trace2_with(model.bundle.r(z), s)
    return (np.trace(s) / n) * np.eye(n) + lz - np.trace(lz) / n * np.eye(n)


def rk4_step(f, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


MAX_STEPS = 10_000_000


def evolve(model: TopModel, state, t_final: float, dt: float) -> tuple[np.ndarray, list[SpinState]]:
    """Fixed-step classical RK4 for S' = [S, J(S)]; returns (times, states)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    steps = int(round(t_final / dt))
    if steps > MAX_STEPS:
        raise StepOverflow(f"{steps} steps exceeds the limit {MAX_STEPS}")
    if abs(steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError("t_final must be an integer multiple of dt")
    s = _mat(state).copy()
    times = [0.0]
    traj = [SpinState(s)]
    rhs = lambda y: eom_rhs(model, y)  # noqa: E731
    for step in range(1, steps + 1):
        s = rk4_step(rhs, s, dt)
        times.append(step * dt)
        traj.append(SpinState(s))
    return np.array(times), traj


def spectral_invariants(model: TopModel, state, z: complex) -> np.ndarray:
    """tr L(z)^k for k = 1..n."""
    lz = lax_L(model, z, state)
    out = []
    p = np.eye(model.n, dtype=complex)
    for _ in range(model.n):
        p = p @ lz
        out.append(np.trace(p))
    return np.array(out)


def charpoly(model: TopModel, state, z: complex) -> np.ndarray:
    """Characteristic-polynomial coefficients of L(z), leading 1 dropped."""
    return np.poly(lax_L(model, z, state))[1:]
