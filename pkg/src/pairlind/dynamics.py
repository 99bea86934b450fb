"""Liouvillian generators, time evolution, steady states and observables.

Density matrices are vectorized by column stacking, vec(A rho B) =
(B^T kron A) vec(rho).  Superoperators are scipy sparse CSR matrices.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.sparse.csgraph import connected_components

from .algebra import (
    Basis,
    Operator,
    check_j,
    J_EVEN,
    identity,
    parity_mask,
    qubit_ops,
    su11_from_mode,
    su11_sector,
    tensor,
)
from .errors import (
    InvalidArgument,
    NonUniqueSteadyState,
    NotNormalizable,
    StiffnessError,
    TruncationError,
)
from .model import DerivedRates, ModelParams

log = logging.getLogger(__name__)

__all__ = [
    "DensityMatrix",
    "Generator",
    "Moments",
    "cross_dissipator",
    "hamiltonian_super",
    "build_full_generator",
    "build_reduced_generator",
    "evolve",
    "evolve_series",
    "steady_state",
    "steady_populations_birth_death",
    "moments",
    "solve_reduced_steady",
    "solve_full_steady",
    "thermal_pair_state",
]

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix on a tagged basis.

    ``check=True`` enforces Hermiticity, unit trace and positivity at the
    module tolerances.  Solver outputs carry diagnostics in ``info``.
    """

    matrix: np.ndarray
    basis: Basis
    info: dict = field(default_factory=dict)
    check: bool = True

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidArgument(f"density matrix must be square, got {mat.shape}")
        if self.basis.kind != "generic" and self.basis.dim != mat.shape[0]:
            raise InvalidArgument(f"matrix side {mat.shape[0]} does not match basis {self.basis}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if self.check:
            self.validate()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, hermitian_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, positivity_tol=POSITIVITY_TOL):
        herm = np.max(np.abs(self.matrix - self.matrix.conj().T))
        if herm > hermitian_tol:
            raise InvalidArgument(f"density matrix not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > trace_tol:
            raise InvalidArgument(f"density matrix trace {tr.real:.15g} != 1")
        lam = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0]
        if lam < -positivity_tol:
            raise InvalidArgument(f"density matrix has negative eigenvalue {lam:.3g}")

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def oscillator(self) -> "DensityMatrix":
        """Reduced state of the oscillator (partial trace over the qubit)."""
        if not self.basis.has_qubit:
            return self
        c = self.basis.cutoff
        r = np.einsum("aiak->ik", self.matrix.reshape(2, c, 2, c))
        return DensityMatrix(r, self.basis.oscillator(), check=False)

    def qubit(self) -> np.ndarray:
        if not self.basis.has_qubit:
            raise InvalidArgument("no qubit factor in this basis")
        c = self.basis.cutoff
        return np.einsum("aibi->ab", self.matrix.reshape(2, c, 2, c))

    @classmethod
    def from_populations(cls, p, basis: Basis) -> "DensityMatrix":
        return cls(np.diag(np.asarray(p, dtype=float)), basis)

    @classmethod
    def pure(cls, psi, basis: Basis) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), basis)


def hamiltonian_super(H: Operator) -> sp.csr_matrix:
    """rho -> -i [H, rho]."""
    h = sp.csr_matrix(H.matrix)
    eye = sp.identity(H.dim, dtype=complex, format="csr")
    return (-1j * (sp.kron(eye, h) - sp.kron(h.T, eye))).tocsr()


def cross_dissipator(A: Operator, B: Operator, rate: float) -> sp.csr_matrix:
    """rho -> -rate ([A, B rho] + [rho A, B]) = -rate ({AB, rho} - 2 B rho A)."""
    if A.dim != B.dim:
        raise InvalidArgument(f"dimension mismatch: {A.dim} vs {B.dim}")
    if rate < 0:
        raise InvalidArgument(f"rate must be nonnegative, got {rate!r}")
    a = sp.csr_matrix(A.matrix)
    b = sp.csr_matrix(B.matrix)
    ab = (a @ b).tocsr()
    eye = sp.identity(A.dim, dtype=complex, format="csr")
    out = sp.kron(eye, ab) + sp.kron(ab.T, eye) - 2.0 * sp.kron(a.T, b)
    return (-rate * out).tocsr()


@dataclass(frozen=True, eq=False)
class Generator:
    """Liouvillian ``rho -> -i[H, rho] + sum cross_dissipator(A, B, rate)``."""

    hamiltonian: Operator
    dissipators: tuple = ()
    basis: Basis | None = None
    matrix: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        dissipators = tuple(self.dissipators)
        object.__setattr__(self, "dissipators", dissipators)
        if self.basis is None:
            object.__setattr__(self, "basis", self.hamiltonian.basis)
        L = hamiltonian_super(self.hamiltonian)
        for A, B, rate in dissipators:
            if A.dim != self.dim or B.dim != self.dim:
                raise InvalidArgument("dissipator dimension does not match the Hamiltonian")
            if rate:
                L = L + cross_dissipator(A, B, rate)
        L = L.tocsr()
        L.eliminate_zeros()
        object.__setattr__(self, "matrix", L)

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def apply(self, rho) -> np.ndarray:
        r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return unvec(self.matrix @ vec(r), self.dim)

    def fastest_rate(self) -> float:
        """Rough upper scale of the generator's eigenvalues (rad/s)."""
        ev = np.linalg.eigvalsh(self.hamiltonian.matrix)
        fastest = float(ev[-1] - ev[0])
        for A, B, rate in self.dissipators:
            fastest = max(fastest, 2.0 * rate * np.linalg.norm(A.matrix, 2) * np.linalg.norm(B.matrix, 2))
        return fastest


def _full_space_ops(cutoff, j):
    if j is None:
        if cutoff < 8:
            raise InvalidArgument(f"full model needs cutoff >= 8, got {cutoff}")
        bp, bm, bz = su11_from_mode(cutoff)
    else:
        bp, bm, bz = su11_sector(j, cutoff)
    return bp, bm, bz


def build_full_generator(p: ModelParams, r: DerivedRates, cutoff: int, j=None,
                         rotating_frame: bool = False) -> Generator:
    """Qubit (x) oscillator generator.

    With ``j=None`` the oscillator is the Fock space with ``cutoff`` levels.
    With ``j`` given it is the photon-parity sector of that Bargmann index
    with ``cutoff`` m-levels; the model never couples the two parities.

    ``rotating_frame`` removes 2(omega_c + chi_bar n_bar)(beta_z + sz/2),
    which commutes with the exchange term and leaves every dissipator
    unchanged, so populations and diagonal observables are unaffected.
    """
    bp, bm, bz = _full_space_ops(cutoff, j)
    q = qubit_ops()
    osc_id = identity(bp.basis)
    sz = tensor(q["sz"], osc_id)
    sp_ = tensor(q["sp"], osc_id)
    sm = tensor(q["sm"], osc_id)
    BP = tensor(q["id"], bp)
    BM = tensor(q["id"], bm)
    BZ = tensor(q["id"], bz)

    frame = 2.0 * (p.omega_c + p.chi_bar * p.n_bar)
    qubit_split = r.omega_r - (frame if rotating_frame else 0.0)
    H = (
        -p.chi_bar * (BP @ BM)
        + 0.5 * ((qubit_split * sz) - 2.0 * r.g0 * (BZ @ sz))
        + r.g2 * (sm @ BP + BM @ sp_)
    )
    if not rotating_frame:
        H = H + frame * BZ
    dissipators = (
        (sz, sz, r.gamma_0deph),
        (sp_, sm, r.gamma_plus),
        (sm, sp_, r.gamma_minus),
        (BP, BM, p.kappa * (1.0 + p.n_bar)),
        (BM, BP, p.kappa * p.n_bar),
    )
    return Generator(H, dissipators, sz.basis)


def build_reduced_generator(r: DerivedRates, p: ModelParams, j, m_cutoff: int,
                            much_less: float = 10.0) -> Generator:
    """Oscillator-only generator in the sector of Bargmann index ``j``."""
    j = check_j(j)
    if not (p.kappa * (1.0 + p.n_bar) < r.g2 / much_less and r.g2 < p.gamma0):
        warnings.warn("good-cavity condition violated; reduced model may be inaccurate", stacklevel=2)
    bp, bm, _ = su11_sector(j, m_cutoff)
    H = -p.chi_bar * (bp @ bm)
    dissipators = ((bp, bm, r.decay), (bm, bp, r.pump))
    return Generator(H, dissipators, bp.basis)


def _null_dim_estimate(L: sp.spmatrix) -> int | None:
    if L.shape[0] > 4096:
        return None
    s = np.linalg.svd(L.toarray(), compute_uv=False)
    return int(np.sum(s <= 1e-10 * max(s[0], 1e-300)))


def steady_state(G: Generator, residual_tol: float = 1e-10) -> DensityMatrix:
    """Unique stationary state of ``G`` via a sparse linear solve.

    The Liouvillian is split into weakly connected blocks.  Exactly one block
    may contain diagonal elements; its first equation is replaced by the
    trace condition.  Every other block must be nonsingular and therefore
    carries zero weight.
    """
    d = G.dim
    L = G.matrix.tocsr()
    pattern = sp.csr_matrix((np.ones(L.nnz), L.indices, L.indptr), shape=L.shape)
    n_comp, labels = connected_components(pattern, directed=True, connection="weak")
    diag_idx = np.arange(d) * (d + 1)
    trace_comps = np.unique(labels[diag_idx])
    if len(trace_comps) > 1:
        raise NonUniqueSteadyState(
            f"{len(trace_comps)} independently trace-conserving blocks", null_dim=len(trace_comps)
        )
    in_trace = labels == trace_comps[0]
    idx = np.flatnonzero(in_trace)
    block = L[idx][:, idx].tolil()
    local_diag = np.flatnonzero(np.isin(idx, diag_idx))
    block[0, :] = 0.0
    block[0, local_diag] = 1.0
    rhs = np.zeros(len(idx), dtype=complex)
    rhs[0] = 1.0
    try:
        sol = spla.splu(block.tocsc()).solve(rhs)
    except RuntimeError:
        raise NonUniqueSteadyState(
            "stationary subspace is degenerate", null_dim=_null_dim_estimate(L[idx][:, idx])
        ) from None
    if not np.all(np.isfinite(sol)):
        raise NonUniqueSteadyState("stationary subspace is degenerate")
    x = np.zeros(d * d, dtype=complex)
    x[idx] = sol

    # remaining blocks hold coherences; they may carry weight only if singular
    rest = np.flatnonzero(~in_trace)
    if n_comp > 1 and len(rest):
        coh = L[rest][:, rest].tocsc()
        try:
            spla.splu(coh)
        except RuntimeError:
            raise NonUniqueSteadyState(
                "a coherence block is singular", null_dim=_null_dim_estimate(coh)
            ) from None

    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    norm_L = spla.norm(L, 1)
    residual = float(np.linalg.norm(L @ vec(rho)))
    rel = residual / (norm_L * np.linalg.norm(rho))
    if rel > 1e-6:
        raise NonUniqueSteadyState(f"linear solve residual too large ({rel:.3g})")
    if rel > residual_tol:
        log.warning("steady-state residual %.3g exceeds %.3g relative", rel, residual_tol)
    return DensityMatrix(rho, G.basis, info={"residual": residual, "relative_residual": rel},
                         check=False)


def steady_populations_birth_death(eta: float, j, m_cutoff: int, truncated: bool = False):
    """Geometric populations p_m = (1 - 1/eta) eta**-m on ``m_cutoff`` levels.

    Returns ``(p, tail)`` where ``tail = eta**-m_cutoff`` is the mass beyond
    the cutoff.  With ``truncated=True`` the stationary law of the chain cut
    at ``m_cutoff`` (renormalized) is returned instead and no tail bound is
    enforced.
    """
    check_j(j)
    if not eta > 1.0:
        raise NotNormalizable(f"eta = {eta!r} <= 1: populations not normalizable")
    if m_cutoff < 1:
        raise InvalidArgument("m_cutoff must be >= 1")
    m = np.arange(m_cutoff, dtype=float)
    if math.isinf(eta):
        p = (m == 0).astype(float)
        return p, 0.0
    with np.errstate(under="ignore"):
        geo = np.exp(-m * math.log(eta))
        tail = float(math.exp(-m_cutoff * math.log(eta)))
    if truncated:
        return geo / geo.sum(), tail
    if tail >= 1e-15:
        raise InvalidArgument(f"m_cutoff={m_cutoff} leaves tail {tail:.3g} >= 1e-15")
    return (1.0 - 1.0 / eta) * geo, tail


@dataclass(frozen=True)
class Moments:
    n_mean: float
    b2: float
    b4: float
    g2: float | None
    g4: float | None
    parity_even: float
    parity_odd: float
    sz: float | None = None


def _pair_ops(basis: Basis):
    if basis.kind == "fock":
        bp, bm, bz = su11_from_mode(basis.cutoff)
    elif basis.kind == "sector":
        bp, bm, bz = su11_sector(basis.j, basis.cutoff)
    else:
        raise InvalidArgument(f"no oscillator operators for basis {basis}")
    n_op = 2.0 * bz - 0.5 * identity(basis)
    return n_op, bp @ bm, bp @ bp @ bm @ bm


def moments(rho: DensityMatrix, ops=None, vacuum_tol: float = 1e-14) -> Moments:
    """Photon-number statistics of ``rho`` (oscillator part).

    ``ops`` may supply ``(n, beta+ beta-, beta+^2 beta-^2)`` built on the
    oscillator basis; otherwise they are constructed from it.
    """
    osc = rho.oscillator()
    if ops is None:
        ops = _pair_ops(osc.basis)
    n_op, b2_op, b4_op = ops
    if n_op.dim != osc.dim:
        raise InvalidArgument("observable dimension does not match the state")
    n_mean = float(np.real(np.trace(osc.matrix @ n_op.matrix)))
    b2 = float(np.real(np.trace(osc.matrix @ b2_op.matrix)))
    b4 = float(np.real(np.trace(osc.matrix @ b4_op.matrix)))
    g2 = 4.0 * b2 / n_mean**2 if n_mean > vacuum_tol else None
    g4 = b4 / b2**2 if b2 > vacuum_tol else None
    pops = np.real(np.diag(osc.matrix))
    even = parity_mask(osc.basis)
    total = pops.sum()
    parity_even = float(pops[even].sum() / total)
    parity_odd = float(pops[~even].sum() / total)
    sz = None
    if rho.basis.has_qubit:
        q = rho.qubit()
        sz = float(np.real(q[0, 0] - q[1, 1]))
    return Moments(n_mean, b2, b4, g2, g4, parity_even, parity_odd, sz)


class _StepBudget(Exception):
    pass


def evolve_series(G: Generator, rho0: DensityMatrix, times, tol: float = 1e-8,
                  max_steps: int = 200_000, method: str = "DOP853") -> list[DensityMatrix]:
    """States at each of ``times`` (ascending, starting at or after 0).

    Adaptive explicit Runge-Kutta on the vectorized equation.  Trace drift is
    recorded in ``info['trace_deviation']`` and not corrected.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise InvalidArgument("times must be a nonempty ascending array of t >= 0")
    if rho0.dim != G.dim:
        raise InvalidArgument("initial state dimension does not match the generator")
    t_final = float(times[-1])
    y0 = vec(rho0.matrix).astype(complex)
    if t_final == 0.0:
        return [rho0 for _ in times]

    L = G.matrix
    # ~12 right-hand-side evaluations per DOP853 step
    budget = 13 * max_steps
    calls = [0]

    def rhs(_t, y):
        calls[0] += 1
        if calls[0] > budget:
            raise _StepBudget
        return L @ y

    try:
        sol = solve_ivp(rhs, (0.0, t_final), y0, method=method, t_eval=times,
                        rtol=tol, atol=tol)
    except _StepBudget:
        fastest = G.fastest_rate()
        raise StiffnessError(
            f"step budget ({max_steps}) exhausted before t={t_final:g}; "
            f"fastest generator rate ~ {fastest:.3g} rad/s", fastest_rate=fastest,
        ) from None
    if sol.status != 0:
        fastest = G.fastest_rate()
        raise StiffnessError(f"integration failed: {sol.message}; fastest rate ~ {fastest:.3g} rad/s",
                             fastest_rate=fastest)
    out = []
    for k, t in enumerate(sol.t):
        if t == 0.0:
            out.append(rho0)
            continue
        m = unvec(sol.y[:, k], G.dim)
        drift = float(abs(np.trace(m) - 1.0))
        out.append(DensityMatrix(m, rho0.basis, info={"t": float(t), "trace_deviation": drift},
                                 check=False))
    return out


def evolve(G: Generator, rho0: DensityMatrix, t_final: float, tol: float = 1e-8,
           max_steps: int = 200_000) -> DensityMatrix:
    if t_final < 0:
        raise InvalidArgument("t_final must be >= 0")
    if t_final == 0:
        return rho0
    return evolve_series(G, rho0, [t_final], tol=tol, max_steps=max_steps)[-1]


def thermal_pair_state(n_bar: float, j, m_cutoff: int) -> np.ndarray:
    """Sector populations left by the bath alone (eta = (1 + n_bar)/n_bar)."""
    if n_bar == 0:
        p = np.zeros(m_cutoff)
        p[0] = 1.0
        return p
    p, _ = steady_populations_birth_death((1.0 + n_bar) / n_bar, j, m_cutoff, truncated=True)
    return p


def _top_mass(rho: DensityMatrix, levels: int = 4) -> float:
    pops = rho.oscillator().populations()
    return float(pops[-levels:].sum())


def _doubling(start: int, cap: int):
    c = start
    while c <= cap:
        yield c
        c *= 2


def solve_reduced_steady(r: DerivedRates, p: ModelParams, j, tail: float = 1e-10,
                         start: int = 32, cap: int = 512, residual_tol: float = 1e-10) -> DensityMatrix:
    """Reduced-model steady state with automatic truncation.

    ``start`` and ``cap`` count Fock levels; a sector holds half as many
    m-levels.  The cutoff doubles until the top four levels hold < ``tail``.
    """
    j = check_j(j)
    if not r.eta > 1.0:
        raise NotNormalizable(f"eta = {r.eta!r} <= 1")
    candidates = list(_doubling(start, cap))
    # the truncated chain is geometric, so its top-level mass is known up front
    first = next((k for k, fock in enumerate(candidates)
                  if _geometric_top_mass(r.eta, fock // 2) < tail), None)
    if first is None:
        raise TruncationError(
            f"eta={r.eta:.6g} needs more than {cap} Fock levels for top-level mass < {tail:g}"
        )
    for fock in candidates[first:]:
        m_cut = fock // 2
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            G = build_reduced_generator(r, p, j, m_cut)
        rho = steady_state(G, residual_tol)
        if _top_mass(rho) < tail:
            rho.info["m_cutoff"] = m_cut
            return rho
    raise TruncationError(f"top-level population above {tail:g} at cap {cap} Fock levels (eta={r.eta:.6g})")


def _geometric_top_mass(eta, m_cut, levels=4):
    if math.isinf(eta):
        return 0.0
    p, _ = steady_populations_birth_death(eta, J_EVEN, m_cut, truncated=True)
    return float(p[-levels:].sum())


def solve_full_steady(p: ModelParams, r: DerivedRates, j, tail: float = 1e-10,
                      start: int = 32, cap: int = 512, rotating_frame: bool = True,
                      residual_tol: float = 1e-10) -> DensityMatrix:
    """Full-model steady state restricted to the parity sector of ``j``."""
    j = check_j(j)
    for fock in _doubling(start, cap):
        m_cut = fock // 2
        G = build_full_generator(p, r, m_cut, j=j, rotating_frame=rotating_frame)
        rho = steady_state(G, residual_tol)
        if _top_mass(rho) < tail:
            rho.info["m_cutoff"] = m_cut
            return rho
    raise TruncationError(f"top-level population above {tail:g} at cap {cap} Fock levels")
