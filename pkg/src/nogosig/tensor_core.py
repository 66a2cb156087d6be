"""Dense complex linear algebra over explicitly factored Hilbert spaces.

Composite basis indices are lexicographic with the first listed factor most
significant, i.e. the usual ``np.kron`` / C-order reshape convention. All
values are immutable once built; every operation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadPermutation,
    DimMismatch,
    InvalidState,
    LayoutLabelClash,
    UnknownFactor,
    ZeroState,
)

# Single global comparison tolerance (Hermiticity, PSD, trace, equality).
TOLERANCE = 1e-10
# Below this norm (or trace) a state is treated as the zero vector.
ZERO_NORM = 1e-12


class Party(str, Enum):
    ALICE = "ALICE"
    BOB = "BOB"
    NONE = "NONE"


class Role(str, Enum):
    ORIGINAL = "ORIGINAL"
    PROGRAM = "PROGRAM"
    BLANK = "BLANK"
    CONTROL = "CONTROL"
    GENERIC = "GENERIC"


class Convention(str, Enum):
    RAW = "RAW"
    NORMALIZED = "NORMALIZED"


@dataclass(frozen=True)
class Factor:
    label: str
    dim: int
    party: Party = Party.NONE
    role: Role = Role.GENERIC

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"factor {self.label!r}: dim must be an integer >= 1, got {self.dim}")


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered list of tensor factors; the first factor is most significant."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        labels = [f.label for f in self.factors]
        if len(set(labels)) != len(labels):
            dup = sorted({x for x in labels if labels.count(x) > 1})
            raise LayoutLabelClash(f"duplicate labels {dup}")

    @classmethod
    def single(cls, label: str, dim: int, party: Party = Party.NONE,
               role: Role = Role.GENERIC) -> "SubsystemLayout":
        return cls((Factor(label, dim, party, role),))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.factors)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownFactor(f"no factor labelled {label!r} in {list(self.labels)}") from None

    def party_positions(self, party: Party) -> list[int]:
        return [i for i, f in enumerate(self.factors) if f.party == party]

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LayoutLabelClash(f"labels present in both layouts: {sorted(clash)}")
        return SubsystemLayout(self.factors + other.factors)

    def permuted(self, perm: Sequence[int]) -> "SubsystemLayout":
        return SubsystemLayout(tuple(self.factors[i] for i in perm))


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Ket:
    """Complex amplitude vector over a layout. Not required to be unit norm."""

    layout: SubsystemLayout
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape[0] != self.layout.total_dim:
            raise DimMismatch(
                f"{amps.shape[0]} amplitudes for layout of total_dim {self.layout.total_dim}")
        if not np.all(np.isfinite(amps)):
            raise InvalidState("non-finite amplitude")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, label: str = "q", party: Party = Party.NONE,
                        role: Role = Role.GENERIC) -> "Ket":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(SubsystemLayout.single(label, amps.shape[0], party, role), amps)

    @classmethod
    def basis(cls, dim: int, index: int, label: str = "q", party: Party = Party.NONE,
              role: Role = Role.GENERIC) -> "Ket":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(SubsystemLayout.single(label, dim, party, role), amps)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def relabel(self, label: str, party: Party = Party.NONE,
                role: Role = Role.GENERIC) -> "Ket":
        """Collapse onto a single factor with the given metadata."""
        return Ket(SubsystemLayout.single(label, self.dim, party, role), self.amplitudes)

    def with_layout(self, layout: SubsystemLayout) -> "Ket":
        if layout.total_dim != self.dim:
            raise DimMismatch(f"layout total_dim {layout.total_dim} != ket dim {self.dim}")
        return Ket(layout, self.amplitudes)

    def scaled(self, factor: complex) -> "Ket":
        return Ket(self.layout, self.amplitudes * factor)

    def __add__(self, other: "Ket") -> "Ket":
        _require_same_dim(self.dim, other.dim)
        return Ket(self.layout, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "Ket") -> "Ket":
        _require_same_dim(self.dim, other.dim)
        return Ket(self.layout, self.amplitudes - other.amplitudes)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian PSD matrix over a layout, RAW (any trace) or NORMALIZED."""

    layout: SubsystemLayout
    entries: np.ndarray = field(repr=False)
    convention: Convention = Convention.RAW
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = _frozen(self.entries)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise DimMismatch(f"entries shape {m.shape} for layout of total_dim {d}")
        object.__setattr__(self, "entries", m)
        if self.validate:
            self.check()

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermitian_defect(self) -> float:
        m = self.entries
        return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues of the explicitly Hermitized matrix."""
        return np.linalg.eigvalsh(hermitize(self.entries))

    def check(self, tol: float | None = None) -> None:
        tol = TOLERANCE if tol is None else tol
        if not np.all(np.isfinite(self.entries)):
            raise InvalidState("non-finite density entry")
        if self.hermitian_defect() > tol:
            raise InvalidState(f"not Hermitian (defect {self.hermitian_defect():.3e})")
        if self.eigenvalues()[0] < -tol:
            raise InvalidState(f"not PSD (min eigenvalue {self.eigenvalues()[0]:.3e})")
        tr = self.trace
        if abs(tr.imag) > tol:
            raise InvalidState(f"trace not real ({tr})")
        if self.convention is Convention.NORMALIZED and abs(tr.real - 1.0) > tol:
            raise InvalidState(f"NORMALIZED density has trace {tr.real}")


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _require_same_dim(a: int, b: int) -> None:
    if a != b:
        raise DimMismatch(f"dimensions differ: {a} vs {b}")


def tensor_product(a: Ket, b: Ket) -> Ket:
    layout = a.layout.concat(b.layout)
    return Ket(layout, np.kron(a.amplitudes, b.amplitudes))


def tensor_all(kets: Iterable[Ket]) -> Ket:
    kets = list(kets)
    if not kets:
        raise ValueError("tensor_all needs at least one ket")
    out = kets[0]
    for k in kets[1:]:
        out = tensor_product(out, k)
    return out


def inner_product(a: Ket, b: Ket) -> complex:
    """<a|b>, antilinear in the first argument."""
    _require_same_dim(a.dim, b.dim)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def density_from_ket(k: Ket) -> DensityMatrix:
    if k.norm <= ZERO_NORM:
        raise ZeroState("cannot form a density from the zero vector")
    v = k.amplitudes
    # rank one and PSD by construction
    return DensityMatrix(k.layout, np.outer(v, v.conj()), Convention.RAW, validate=False)


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Trace out every factor whose label is not in ``keep``.

    Kept factors retain their original relative order.
    """
    keep = set(keep)
    layout = rho.layout
    for label in keep:
        layout.index(label)
    dims = layout.dims
    nf = len(dims)
    kept_pos = [i for i, f in enumerate(layout.factors) if f.label in keep]
    # row axes 0..nf-1, column axes nf..2nf-1; traced axes share an index
    row_idx = list(range(nf))
    col_idx = [nf + i if i in kept_pos else i for i in range(nf)]
    out_idx = [row_idx[i] for i in kept_pos] + [col_idx[i] for i in kept_pos]
    tensor = rho.entries.reshape(dims + dims)
    reduced = np.einsum(tensor, row_idx + col_idx, out_idx)
    new_layout = SubsystemLayout(tuple(layout.factors[i] for i in kept_pos))
    d = new_layout.total_dim
    return DensityMatrix(new_layout, reduced.reshape(d, d), Convention.RAW)


def partial_trace_pure(k: Ket, keep: Iterable[str]) -> DensityMatrix:
    """Same result as ``partial_trace(density_from_ket(k), keep)`` without
    materializing the full density matrix."""
    if k.norm <= ZERO_NORM:
        raise ZeroState("cannot form a density from the zero vector")
    keep = set(keep)
    for label in keep:
        k.layout.index(label)
    kept = [f.label for f in k.layout.factors if f.label in keep]
    rest = [f.label for f in k.layout.factors if f.label not in keep]
    arranged = reorder_to(k, kept + rest)
    new_layout = SubsystemLayout(arranged.layout.factors[:len(kept)])
    block = arranged.amplitudes.reshape(new_layout.total_dim, -1)
    return DensityMatrix(new_layout, block @ block.conj().T, Convention.RAW)


def _check_perm(perm: Sequence[int], n: int) -> list[int]:
    try:
        perm = [int(i) for i in perm]
    except (TypeError, ValueError):
        raise BadPermutation(f"not a sequence of integers: {perm!r}") from None
    if sorted(perm) != list(range(n)):
        raise BadPermutation(f"{perm} is not a bijection on {n} factor positions")
    return perm


def permute_factors(k: Ket, perm: Sequence[int]) -> Ket:
    """Reorder factors so that new position ``i`` holds old factor ``perm[i]``."""
    perm = _check_perm(perm, len(k.layout))
    if not perm:
        return k
    tensor = k.amplitudes.reshape(k.layout.dims)
    return Ket(k.layout.permuted(perm), np.transpose(tensor, perm).reshape(-1))


def permute_density(rho: DensityMatrix, perm: Sequence[int]) -> DensityMatrix:
    perm = _check_perm(perm, len(rho.layout))
    n = len(perm)
    dims = rho.layout.dims
    tensor = rho.entries.reshape(dims + dims)
    axes = perm + [n + i for i in perm]
    d = rho.dim
    return DensityMatrix(rho.layout.permuted(perm),
                         np.transpose(tensor, axes).reshape(d, d), rho.convention,
                         validate=rho.validate)


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for new, old in enumerate(perm):
        inv[old] = new
    return inv


def reorder_to(k: Ket, labels: Sequence[str]) -> Ket:
    """Permute ``k`` so its factor labels appear in the given order."""
    return permute_factors(k, [k.layout.index(lbl) for lbl in labels])


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    _require_same_dim(rho.dim, sigma.dim)
    diff = hermitize(rho.entries - sigma.entries)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def frobenius_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    _require_same_dim(rho.dim, sigma.dim)
    return float(np.linalg.norm(rho.entries - sigma.entries))


def gram_matrix(kets: Sequence[Ket]) -> np.ndarray:
    if not kets:
        return np.zeros((0, 0), dtype=np.complex128)
    for k in kets[1:]:
        _require_same_dim(kets[0].dim, k.dim)
    vs = np.stack([k.amplitudes for k in kets])
    return vs.conj() @ vs.T


def normalize(k: Ket) -> Ket:
    n = k.norm
    if n <= ZERO_NORM:
        raise ZeroState(f"norm {n:.3e} too small to normalize")
    return Ket(k.layout, k.amplitudes / n)


def normalize_density(rho: DensityMatrix) -> DensityMatrix:
    tr = rho.trace.real
    if tr <= ZERO_NORM:
        raise ZeroState(f"trace {tr:.3e} too small to normalize")
    return DensityMatrix(rho.layout, rho.entries / tr, Convention.NORMALIZED)


def projector(k: Ket) -> np.ndarray:
    """|k><k| as a bare matrix."""
    return np.outer(k.amplitudes, k.amplitudes.conj())


def outer(a: Ket, b: Ket) -> np.ndarray:
    """|a><b| as a bare matrix."""
    return np.outer(a.amplitudes, b.amplitudes.conj())
