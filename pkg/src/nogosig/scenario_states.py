"""Shared entangled states and the constructor register layout.

Two singlet-like pairs are shared between Alice and Bob: one built from the
non-orthogonal originals psi1, psi2 and one from the non-orthogonal program
states P1, P2. Bob's constructor registers (copy targets, control, spare
blanks) are appended to his side as a product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BadOverlap, DegeneratePair, DimMismatch
from .tensor_core import (
    Convention,
    DensityMatrix,
    Ket,
    Party,
    Role,
    inner_product,
    normalize,
    outer,
    projector,
    reorder_to,
    tensor_all,
    tensor_product,
)

# |<v1|v2>| at or above this (for unit inputs) counts as parallel.
DEGENERACY_THRESHOLD = 1.0 - 1e-9

PSI_A, PROG_A, PSI_B, PROG_B = "psi_A", "prog_A", "psi_B", "prog_B"
BLANK_ORIG, BLANK_PROG, CONTROL = "blank_orig", "blank_prog", "control"
ALICE_LABELS = (PSI_A, PROG_A)


def spare_label(i: int) -> str:
    return f"spare_{i}"


class ControlPolicy(str, Enum):
    """Which output control state a replication of (psi_i, P_j) ends in."""

    BY_PROGRAM = "BY_PROGRAM"  # C_j
    BY_ORIGINAL = "BY_ORIGINAL"  # C_i
    FIXED = "FIXED"  # always C1


@dataclass(frozen=True)
class OverlapParameters:
    s: complex = 0.0  # <psi1|psi2>
    p: complex = 0.0  # <P1|P2>

    def __post_init__(self):
        for name in ("s", "p"):
            value = getattr(self, name)
            if not np.isfinite(complex(value)) or abs(value) > 1.0:
                raise BadOverlap(f"|{name}| = {abs(value)} exceeds 1")


@dataclass(frozen=True, eq=False)
class ControlStates:
    c_in: Ket
    c_out_1: Ket
    c_out_2: Ket
    policy: ControlPolicy = ControlPolicy.BY_PROGRAM

    def __post_init__(self):
        dims = {self.c_in.dim, self.c_out_1.dim, self.c_out_2.dim}
        if len(dims) != 1:
            raise DimMismatch(f"control kets have differing dims {sorted(dims)}")
        if self.control_dim < 2:
            raise ValueError("control_dim must be >= 2")
        for k in (self.c_in, self.c_out_1, self.c_out_2):
            if abs(k.norm - 1.0) > 1e-12:
                raise ValueError(f"control kets must be unit norm (got {k.norm})")
        object.__setattr__(self, "policy", ControlPolicy(self.policy))

    @classmethod
    def standard(cls, c: complex = 0.0, control_dim: int = 3,
                 policy: ControlPolicy | str = ControlPolicy.BY_PROGRAM) -> "ControlStates":
        """C = e0, C1 = e1, C2 = c*e1 + sqrt(1-|c|^2)*e2."""
        if control_dim < 3:
            raise ValueError("standard controls need control_dim >= 3")
        if abs(c) > 1.0:
            raise BadOverlap(f"|c| = {abs(c)} exceeds 1")
        e = np.eye(control_dim, dtype=np.complex128)
        c2 = c * e[1] + math.sqrt(max(0.0, 1.0 - abs(c) ** 2)) * e[2]
        return cls(Ket.from_amplitudes(e[0]), Ket.from_amplitudes(e[1]),
                   Ket.from_amplitudes(c2), ControlPolicy(policy))

    @property
    def control_dim(self) -> int:
        return self.c_in.dim

    @property
    def c(self) -> complex:
        """<C1|C2>."""
        return inner_product(self.c_out_1, self.c_out_2)

    def output_for(self, i: int, j: int) -> Ket:
        """Output control for the replication of (psi_i, P_j), i, j in {1, 2}."""
        if self.policy is ControlPolicy.BY_PROGRAM:
            pick = j
        elif self.policy is ControlPolicy.BY_ORIGINAL:
            pick = i
        else:
            pick = 1
        return self.c_out_1 if pick == 1 else self.c_out_2


@dataclass(frozen=True, eq=False)
class ConstructorConfig:
    """Universal-constructor setup: qudit dim N, m program blanks, n blanks total.

    The m program blanks are modelled as a single register of dim K = N**m.
    """

    N: int = 2
    m: int = 1
    n: int = 4
    controls: ControlStates = field(default_factory=ControlStates.standard)
    overlaps: OverlapParameters = field(default_factory=OverlapParameters)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"qudit dim N must be >= 2, got {self.N}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.n < 2 * (self.m + 1):
            raise ValueError(f"need n >= 2(m+1) = {2 * (self.m + 1)} blanks, got n={self.n}")

    @classmethod
    def desk(cls, s: complex = 0.0, p: complex = 0.0, c: complex = 0.0,
             policy: ControlPolicy | str = ControlPolicy.BY_PROGRAM,
             N: int = 2, m: int = 1, n: int = 4) -> "ConstructorConfig":
        return cls(N=N, m=m, n=n, controls=ControlStates.standard(c, policy=policy),
                   overlaps=OverlapParameters(s, p))

    @property
    def K(self) -> int:
        return self.N ** self.m

    @property
    def M(self) -> int:
        return self.N ** self.n

    @property
    def spare_blanks(self) -> int:
        """Blanks left untouched in the input configuration."""
        return self.n - (self.m + 1)

    @property
    def blanks_after_replication(self) -> int:
        return self.n - 2 * (self.m + 1)

    @property
    def s(self) -> complex:
        return self.overlaps.s

    @property
    def p(self) -> complex:
        return self.overlaps.p

    @property
    def c(self) -> complex:
        return self.controls.c

    @property
    def policy(self) -> ControlPolicy:
        return self.controls.policy

    def original_pair(self) -> tuple[Ket, Ket]:
        return make_nonorthogonal_pair(self.N, self.s)

    def program_pair(self) -> tuple[Ket, Ket]:
        return make_nonorthogonal_pair(self.K, self.p)


def make_nonorthogonal_pair(dim: int, overlap: complex) -> tuple[Ket, Ket]:
    """Unit kets v1 = e0 and v2 = overlap*e0 + sqrt(1-|overlap|^2)*e1."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if not np.isfinite(complex(overlap)) or abs(overlap) > 1.0:
        raise BadOverlap(f"|overlap| = {abs(overlap)} exceeds 1")
    v1 = np.zeros(dim, dtype=np.complex128)
    v1[0] = 1.0
    v2 = np.zeros(dim, dtype=np.complex128)
    v2[0] = overlap
    v2[1] = math.sqrt(max(0.0, 1.0 - abs(overlap) ** 2))
    return Ket.from_amplitudes(v1), Ket.from_amplitudes(v2)


def build_singlet_like(v1: Ket, v2: Ket, labels: tuple[str, str] = ("a", "b"),
                       role: Role = Role.GENERIC) -> Ket:
    """(v1 v2 - v2 v1)/sqrt(2) with the first factor Alice's, the second Bob's.

    Left unnormalized: the squared norm is 1 - |<v1|v2>|^2 for unit inputs.
    """
    if v1.dim != v2.dim:
        raise DimMismatch(f"pair dims differ: {v1.dim} vs {v2.dim}")
    n1, n2 = v1.norm, v2.norm
    if n1 == 0 or n2 == 0 or abs(inner_product(v1, v2)) / (n1 * n2) >= DEGENERACY_THRESHOLD:
        raise DegeneratePair("antisymmetrizing parallel states gives the zero vector")
    a = v1.relabel(labels[0], Party.ALICE, role)
    b = v2.relabel(labels[1], Party.BOB, role)
    a2 = v2.relabel(labels[0], Party.ALICE, role)
    b1 = v1.relabel(labels[1], Party.BOB, role)
    return (tensor_product(a, b) - tensor_product(a2, b1)).scaled(1 / math.sqrt(2))


def build_joint_state(cfg: ConstructorConfig, normalized: bool = False) -> Ket:
    """chi1 (x) chi2 with factors ordered [psi_A, prog_A, psi_B, prog_B]."""
    psi1, psi2 = cfg.original_pair()
    p1, p2 = cfg.program_pair()
    chi1 = build_singlet_like(psi1, psi2, (PSI_A, PSI_B), Role.ORIGINAL)
    chi2 = build_singlet_like(p1, p2, (PROG_A, PROG_B), Role.PROGRAM)
    if normalized:
        chi1, chi2 = normalize(chi1), normalize(chi2)
    joint = tensor_product(chi1, chi2)
    return reorder_to(joint, (PSI_A, PROG_A, PSI_B, PROG_B))


def ancilla_kets(cfg: ConstructorConfig) -> list[Ket]:
    """Bob's registers appended after the shared pairs, in input order."""
    zero_n = np.eye(cfg.N, dtype=np.complex128)[0]
    zero_k = np.eye(cfg.K, dtype=np.complex128)[0]
    kets = [
        Ket.from_amplitudes(zero_n, BLANK_ORIG, Party.BOB, Role.BLANK),
        Ket.from_amplitudes(zero_k, BLANK_PROG, Party.BOB, Role.BLANK),
        cfg.controls.c_in.relabel(CONTROL, Party.BOB, Role.CONTROL),
    ]
    kets += [Ket.from_amplitudes(zero_n, spare_label(i + 1), Party.BOB, Role.BLANK)
             for i in range(cfg.spare_blanks)]
    return kets


def attach_ancilla(joint: Ket, cfg: ConstructorConfig) -> Ket:
    expected = (PSI_A, PROG_A, PSI_B, PROG_B)
    if joint.layout.labels != expected:
        raise DimMismatch(f"expected factors {expected}, got {joint.layout.labels}")
    return tensor_all([joint, *ancilla_kets(cfg)])


def _alice_product(a: Ket, b: Ket) -> Ket:
    return tensor_product(a.relabel(PSI_A, Party.ALICE, Role.ORIGINAL),
                          b.relabel(PROG_A, Party.ALICE, Role.PROGRAM))


def alice_reduced_reference(cfg: ConstructorConfig) -> DensityMatrix:
    """Alice's RAW reduced state assembled term by term (16 terms, prefactor 1/4)."""
    psi = dict(zip((1, 2), cfg.original_pair()))
    prog = dict(zip((1, 2), cfg.program_pair()))
    A = {(i, j): _alice_product(psi[i], prog[j]) for i in (1, 2) for j in (1, 2)}

    def s(i, j):
        return inner_product(psi[i], psi[j])

    def p(i, j):
        return inner_product(prog[i], prog[j])

    # (coefficient, ket index, bra index)
    terms = [
        (1, (1, 1), (1, 1)),
        (1, (2, 1), (2, 1)),
        (1, (1, 2), (1, 2)),
        (1, (2, 2), (2, 2)),
        (-s(2, 1), (2, 1), (1, 1)),
        (-p(2, 1), (1, 2), (1, 1)),
        (s(2, 1) * p(2, 1), (2, 2), (1, 1)),
        (-s(1, 2), (1, 1), (2, 1)),
        (s(1, 2) * p(2, 1), (1, 2), (2, 1)),
        (-p(2, 1), (2, 2), (2, 1)),
        (-p(1, 2), (1, 1), (1, 2)),
        (s(2, 1) * p(1, 2), (2, 1), (1, 2)),
        # printed with <psi1|psi2>; the conjugate keeps the sum Hermitian
        (-s(2, 1), (2, 2), (1, 2)),
        (s(1, 2) * p(1, 2), (1, 1), (2, 2)),
        (-p(1, 2), (2, 1), (2, 2)),
        (-s(1, 2), (1, 2), (2, 2)),
    ]
    assert len(terms) == 16
    rho = sum(coef * outer(A[ket], A[bra]) for coef, ket, bra in terms) / 4
    layout = A[1, 1].layout
    return DensityMatrix(layout, rho, Convention.RAW)


def alice_mixture(cfg: ConstructorConfig) -> DensityMatrix:
    """(1/4) sum_ij |psi_i P_j><psi_i P_j|, the cross-term-free mixture."""
    psi = cfg.original_pair()
    prog = cfg.program_pair()
    prods = [_alice_product(a, b) for a in psi for b in prog]
    return DensityMatrix(prods[0].layout, sum(projector(k) for k in prods) / 4)
