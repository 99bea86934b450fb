"""Truncated Fock-space and su(1,1) operators.

Operators are small dense complex matrices wrapped with a basis tag so that
products of mismatched spaces fail loudly.  Conventions fixed here and used
everywhere else:

* Fock basis ascending in photon number n.
* Qubit basis ordered (excited, ground), so ``sz = diag(+1, -1)`` and
  ``sp = |e><g|``.
* Composite spaces are ``qubit (x) oscillator`` in that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidArgument

__all__ = [
    "Basis",
    "Operator",
    "SectorIndex",
    "check_j",
    "ladder_ops",
    "su11_from_mode",
    "su11_sector",
    "qubit_ops",
    "identity",
    "tensor",
    "fock_to_sector",
    "sector_to_fock",
    "parity_mask",
    "J_EVEN",
    "J_ODD",
]

J_EVEN = 0.25
J_ODD = 0.75


def check_j(j) -> float:
    """Return the Bargmann index as a float, rejecting anything but 1/4, 3/4."""
    try:
        value = float(Fraction(str(j))) if isinstance(j, str) else float(j)
    except (TypeError, ValueError):
        raise InvalidArgument(f"Bargmann index must be 1/4 or 3/4, got {j!r}") from None
    if value not in (J_EVEN, J_ODD):
        raise InvalidArgument(f"Bargmann index must be 1/4 or 3/4, got {j!r}")
    return value


@dataclass(frozen=True)
class Basis:
    """Tag describing which truncated space a matrix acts on.

    ``kind`` is one of ``fock``, ``sector``, ``qubit``, ``qubit_fock``,
    ``qubit_sector`` or ``generic``.  ``cutoff`` counts oscillator levels
    (Fock levels, or m-levels for a sector).
    """

    kind: str
    cutoff: int = 0
    j: float | None = None

    @classmethod
    def fock(cls, cutoff):
        return cls("fock", int(cutoff))

    @classmethod
    def sector(cls, j, cutoff):
        return cls("sector", int(cutoff), check_j(j))

    @classmethod
    def qubit(cls):
        return cls("qubit", 0)

    @property
    def dim(self) -> int:
        if self.kind == "qubit":
            return 2
        if self.kind in ("fock", "sector"):
            return self.cutoff
        if self.kind in ("qubit_fock", "qubit_sector"):
            return 2 * self.cutoff
        raise ValueError("generic basis has no intrinsic dimension")

    @property
    def has_qubit(self) -> bool:
        return self.kind in ("qubit_fock", "qubit_sector")

    def oscillator(self) -> "Basis":
        """Oscillator factor of a composite basis (or the basis itself)."""
        if self.kind == "qubit_fock":
            return Basis("fock", self.cutoff)
        if self.kind == "qubit_sector":
            return Basis("sector", self.cutoff, self.j)
        return self


GENERIC = Basis("generic")


@dataclass(frozen=True, eq=False)
class Operator:
    """Immutable dense operator on a tagged basis."""

    matrix: np.ndarray
    basis: Basis = GENERIC

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidArgument(f"operator matrix must be square, got shape {mat.shape}")
        if self.basis.kind != "generic" and self.basis.dim != mat.shape[0]:
            raise InvalidArgument(
                f"matrix side {mat.shape[0]} does not match basis {self.basis}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.basis)

    def _basis_with(self, other: "Operator") -> Basis:
        if self.dim != other.dim:
            raise InvalidArgument(f"dimension mismatch: {self.dim} vs {other.dim}")
        return self.basis if self.basis == other.basis else GENERIC

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.matrix @ other.matrix, self._basis_with(other))
        return self.matrix @ other

    def __add__(self, other):
        return Operator(self.matrix + other.matrix, self._basis_with(other))

    def __sub__(self, other):
        return Operator(self.matrix - other.matrix, self._basis_with(other))

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(scalar * self.matrix, self.basis)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(-self.matrix, self.basis)

    def __truediv__(self, scalar):
        return Operator(self.matrix / scalar, self.basis)

    def comm(self, other: "Operator") -> "Operator":
        return self @ other - other @ self

    def __repr__(self):
        return f"Operator(dim={self.dim}, basis={self.basis})"


@dataclass(frozen=True)
class SectorIndex:
    """Label |j, m> of an su(1,1) basis state."""

    j: float
    m: int

    def __post_init__(self):
        object.__setattr__(self, "j", check_j(self.j))
        if int(self.m) != self.m or self.m < 0:
            raise InvalidArgument(f"m must be a nonnegative integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))


def fock_to_sector(n: int) -> SectorIndex:
    if int(n) != n or n < 0:
        raise InvalidArgument(f"photon number must be a nonnegative integer, got {n!r}")
    n = int(n)
    return SectorIndex(J_EVEN if n % 2 == 0 else J_ODD, n // 2)


def sector_to_fock(s: SectorIndex) -> int:
    # n = 2(m + j) - 1/2
    return 2 * s.m + (0 if s.j == J_EVEN else 1)


def ladder_ops(cutoff: int) -> tuple[Operator, Operator]:
    """Annihilation and creation operators on ``cutoff`` Fock levels."""
    if int(cutoff) != cutoff or cutoff < 2:
        raise InvalidArgument(f"cutoff must be an integer >= 2, got {cutoff!r}")
    cutoff = int(cutoff)
    basis = Basis.fock(cutoff)
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1)
    return Operator(a, basis), Operator(a.T, basis)


def su11_from_mode(cutoff: int) -> tuple[Operator, Operator, Operator]:
    """Pair operators (beta+, beta-, beta_z) built from the single mode.

    Only states with n <= cutoff - 3 see the exact algebra; the top two
    levels are corrupted by truncation.
    """
    if int(cutoff) != cutoff or cutoff < 4:
        raise InvalidArgument(f"cutoff must be an integer >= 4, got {cutoff!r}")
    a, ad = ladder_ops(cutoff)
    bp = (ad @ ad) * 0.5
    bm = (a @ a) * 0.5
    bz = (ad @ a + Operator(0.5 * np.eye(a.dim), a.basis)) * 0.5
    return bp, bm, bz


def su11_sector(j, m_cutoff: int) -> tuple[Operator, Operator, Operator]:
    """(beta+, beta-, beta_z) on the basis {|j,0>, ..., |j,m_cutoff-1>}."""
    j = check_j(j)
    if int(m_cutoff) != m_cutoff or m_cutoff < 2:
        raise InvalidArgument(f"m_cutoff must be an integer >= 2, got {m_cutoff!r}")
    m_cutoff = int(m_cutoff)
    basis = Basis.sector(j, m_cutoff)
    m = np.arange(m_cutoff - 1, dtype=float)
    bp = np.diag(np.sqrt((m + 1) * (m + 2 * j)), -1)
    bz = np.diag(np.arange(m_cutoff) + j)
    return Operator(bp, basis), Operator(bp.T, basis), Operator(bz, basis)


def qubit_ops() -> dict[str, Operator]:
    """Pauli operators in the (excited, ground) ordering."""
    q = Basis.qubit()
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    return {
        "sx": Operator([[0, 1], [1, 0]], q),
        "sy": Operator([[0, -1j], [1j, 0]], q),
        "sz": Operator([[1, 0], [0, -1]], q),
        "sp": Operator(sp, q),
        "sm": Operator(sp.T, q),
        "id": Operator(np.eye(2), q),
    }


def identity(basis: Basis) -> Operator:
    return Operator(np.eye(basis.dim), basis)


def tensor(A: Operator, B: Operator) -> Operator:
    """Kronecker product ``A (x) B``."""
    if A.basis.kind == "qubit" and B.basis.kind == "fock":
        basis = Basis("qubit_fock", B.basis.cutoff)
    elif A.basis.kind == "qubit" and B.basis.kind == "sector":
        basis = Basis("qubit_sector", B.basis.cutoff, B.basis.j)
    else:
        basis = GENERIC
    return Operator(np.kron(A.matrix, B.matrix), basis)


def parity_mask(basis: Basis) -> np.ndarray:
    """Boolean mask over oscillator levels selecting even photon numbers."""
    osc = basis.oscillator()
    if osc.kind == "fock":
        return np.arange(osc.cutoff) % 2 == 0
    if osc.kind == "sector":
        return np.full(osc.cutoff, osc.j == J_EVEN)
    raise InvalidArgument(f"no photon parity defined on basis {basis}")
