"""Extensional replication maps, local application, and the signalling gap.

A map is given only by how it acts on a finite family of input kets; it is
extended linearly to their span. Applying the perfect self-replication map on
Bob's registers and comparing Alice's reduced state before and after gives
the signalling gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    BadOverlap,
    DegeneratePair,
    DegenerateSpec,
    DimMismatch,
    NoGoSigError,
    OutsideSpan,
)
from .scenario_states import (
    ALICE_LABELS,
    BLANK_ORIG,
    BLANK_PROG,
    CONTROL,
    PROG_A,
    PROG_B,
    PSI_A,
    PSI_B,
    ConstructorConfig,
    alice_reduced_reference,
    attach_ancilla,
    build_joint_state,
    build_singlet_like,
    make_nonorthogonal_pair,
    spare_label,
)
from .tensor_core import (
    TOLERANCE,
    Convention,
    DensityMatrix,
    Factor,
    Ket,
    Party,
    Role,
    SubsystemLayout,
    density_from_ket,
    frobenius_distance,
    gram_matrix,
    inner_product,
    normalize_density,
    outer,
    partial_trace,
    partial_trace_pure,
    reorder_to,
    tensor_all,
    tensor_product,
    trace_distance,
)

SIGNALLING_THRESHOLD = 1e-8
# Above this joint dimension Alice's marginal is traced from the ket directly.
DENSE_TRACE_LIMIT = 2048


class Verdict(str, Enum):
    NO_SIGNALLING = "NO_SIGNALLING"
    SIGNALLING = "SIGNALLING"
    DEGENERATE = "DEGENERATE"


class CrossCheckFailed(NoGoSigError, AssertionError):
    code = "CROSS_CHECK_FAILED"


@dataclass(frozen=True, eq=False)
class LinearMapSpec:
    """A linear map known only through input -> output pairs."""

    input_layout: SubsystemLayout
    output_layout: SubsystemLayout
    pairs: tuple[tuple[Ket, Ket], ...]
    span_tolerance: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((i, o) for i, o in self.pairs))
        if not self.pairs:
            raise DegenerateSpec("a map spec needs at least one pair")
        for k_in, k_out in self.pairs:
            if k_in.dim != self.input_layout.total_dim:
                raise DimMismatch(f"input dim {k_in.dim} != {self.input_layout.total_dim}")
            if k_out.dim != self.output_layout.total_dim:
                raise DimMismatch(f"output dim {k_out.dim} != {self.output_layout.total_dim}")
        lowest = np.linalg.eigvalsh(self.input_gram())[0]
        if lowest <= self.span_tolerance:
            raise DegenerateSpec(f"inputs are linearly dependent (min Gram eigenvalue {lowest:.3e})")

    @property
    def inputs(self) -> list[Ket]:
        return [k for k, _ in self.pairs]

    @property
    def outputs(self) -> list[Ket]:
        return [k for _, k in self.pairs]

    def input_gram(self) -> np.ndarray:
        return gram_matrix(self.inputs)

    def output_gram(self) -> np.ndarray:
        return gram_matrix(self.outputs)

    def _solve(self, columns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Expansion coefficients over the inputs, and the relative residuals."""
        V = np.stack([k.amplitudes for k in self.inputs], axis=1)
        alpha = np.linalg.solve(self.input_gram(), V.conj().T @ columns)
        residual = np.linalg.norm(columns - V @ alpha, axis=0)
        scale = np.linalg.norm(columns, axis=0)
        rel = np.where(scale > 0, residual / np.where(scale > 0, scale, 1.0), 0.0)
        return alpha, rel

    def _image(self, alpha: np.ndarray) -> np.ndarray:
        W = np.stack([k.amplitudes for k in self.outputs], axis=1)
        return W @ alpha


def apply_map_spec(spec: LinearMapSpec, k: Ket) -> Ket:
    if k.dim != spec.input_layout.total_dim:
        raise DimMismatch(f"ket dim {k.dim} != map input dim {spec.input_layout.total_dim}")
    alpha, rel = spec._solve(k.amplitudes[:, None])
    if rel[0] > spec.span_tolerance:
        raise OutsideSpan(f"relative residual {rel[0]:.3e} outside the map's domain",
                          component=k)
    return Ket(spec.output_layout, spec._image(alpha)[:, 0])


def apply_local_map(joint: Ket, spec: LinearMapSpec, party: Party | str) -> Ket:
    """Apply ``spec`` to ``party``'s factors of ``joint``, identity elsewhere.

    Factors are matched by label. If the map keeps the register labels the
    result has the same factor order as ``joint``; otherwise the other
    party's factors come first, followed by ``spec.output_layout``.
    """
    party = Party(party)
    layout = joint.layout
    local = [f.label for f in layout.factors if f.party == party]
    if sorted(local) != sorted(spec.input_layout.labels):
        raise DimMismatch(f"{party.value} holds {local}, map acts on {list(spec.input_layout.labels)}")
    for lbl in spec.input_layout.labels:
        if layout.factors[layout.index(lbl)].dim != spec.input_layout.factors[spec.input_layout.index(lbl)].dim:
            raise DimMismatch(f"factor {lbl!r} dims differ between joint and map")
    others = [f.label for f in layout.factors if f.party != party]
    arranged = reorder_to(joint, others + list(spec.input_layout.labels))
    other_layout = SubsystemLayout(arranged.layout.factors[:len(others)])
    d_other = other_layout.total_dim
    d_in = spec.input_layout.total_dim
    block = arranged.amplitudes.reshape(d_other, d_in)
    alpha, rel = spec._solve(block.T)
    bad = int(np.argmax(rel))
    if rel[bad] > spec.span_tolerance:
        raise OutsideSpan(
            f"{party.value} component conditional on other-party basis index {bad} lies "
            f"outside the map's domain (relative residual {rel[bad]:.3e})",
            component=Ket(spec.input_layout, block[bad]))
    image = spec._image(alpha).T.reshape(-1)
    result = Ket(other_layout.concat(spec.output_layout), image)
    if set(spec.output_layout.labels) == set(spec.input_layout.labels):
        result = reorder_to(result, layout.labels)
    return result


def isometry_defect(spec: LinearMapSpec) -> np.ndarray:
    """Entrywise |G_out - G_in|; all zero iff the map extends to an isometry."""
    return np.abs(spec.output_gram() - spec.input_gram())


@dataclass(frozen=True, eq=False)
class ReplicationOutputs:
    """Bob-side results for inputs (psi_i, P_j), keyed out_ij."""

    out_11: Ket
    out_21: Ket
    out_12: Ket
    out_22: Ket

    def get(self, i: int, j: int) -> Ket:
        return getattr(self, f"out_{i}{j}")


def bob_input_layout(cfg: ConstructorConfig) -> SubsystemLayout:
    """Bob's registers in the order the constructor consumes them."""
    factors = [
        (PSI_B, cfg.N, Role.ORIGINAL),
        (BLANK_ORIG, cfg.N, Role.BLANK),
        (PROG_B, cfg.K, Role.PROGRAM),
        (BLANK_PROG, cfg.K, Role.BLANK),
        (CONTROL, cfg.controls.control_dim, Role.CONTROL),
    ] + [(spare_label(i + 1), cfg.N, Role.BLANK) for i in range(cfg.spare_blanks)]
    return SubsystemLayout(tuple(Factor(lbl, d, Party.BOB, r) for lbl, d, r in factors))


def _bob(k: Ket, label: str, role: Role) -> Ket:
    return k.relabel(label, Party.BOB, role)


def _zero(dim: int, label: str) -> Ket:
    return Ket.basis(dim, 0, label, Party.BOB, Role.BLANK)


def replication_outputs(cfg: ConstructorConfig) -> tuple[list[Ket], ReplicationOutputs]:
    """Constructor inputs (ordered 11, 21, 12, 22) and their perfect outputs."""
    psi = dict(zip((1, 2), cfg.original_pair()))
    prog = dict(zip((1, 2), cfg.program_pair()))
    spares = [spare_label(i + 1) for i in range(cfg.spare_blanks)]
    in_order = bob_input_layout(cfg).labels
    inputs, outputs = [], {}
    for j in (1, 2):
        for i in (1, 2):
            k_in = tensor_all([
                _bob(psi[i], PSI_B, Role.ORIGINAL),
                _zero(cfg.N, BLANK_ORIG),
                _bob(prog[j], PROG_B, Role.PROGRAM),
                _zero(cfg.K, BLANK_PROG),
                _bob(cfg.controls.c_in, CONTROL, Role.CONTROL),
                *[_zero(cfg.N, lbl) for lbl in spares],
            ])
            # written in the printed order: psi P (psi 0 P 0^m C_out) 0^{n-2(m+1)};
            # the replica's own blanks are the first m+1 spares
            k_out = tensor_all([
                _bob(psi[i], PSI_B, Role.ORIGINAL),
                _bob(prog[j], PROG_B, Role.PROGRAM),
                _bob(psi[i], BLANK_ORIG, Role.ORIGINAL),
                *[_zero(cfg.N, lbl) for lbl in spares[:1]],
                _bob(prog[j], BLANK_PROG, Role.PROGRAM),
                *[_zero(cfg.N, lbl) for lbl in spares[1:cfg.m + 1]],
                _bob(cfg.controls.output_for(i, j), CONTROL, Role.CONTROL),
                *[_zero(cfg.N, lbl) for lbl in spares[cfg.m + 1:]],
            ])
            inputs.append(k_in)
            outputs[i, j] = reorder_to(k_out, in_order)
    return inputs, ReplicationOutputs(outputs[1, 1], outputs[2, 1],
                                      outputs[1, 2], outputs[2, 2])


def perfect_replication_map(cfg: ConstructorConfig) -> LinearMapSpec:
    layout = bob_input_layout(cfg)
    inputs, outs = replication_outputs(cfg)
    pairs = [(k_in, outs.get(i, j)) for k_in, (i, j) in
             zip(inputs, [(1, 1), (2, 1), (1, 2), (2, 2)])]
    return LinearMapSpec(layout, layout, tuple(pairs))


def post_replication_joint(cfg: ConstructorConfig, normalized: bool = False) -> Ket:
    joint = attach_ancilla(build_joint_state(cfg, normalized), cfg)
    return apply_local_map(joint, perfect_replication_map(cfg), Party.BOB)


def _alice_ket(a: Ket, b: Ket) -> Ket:
    return tensor_product(a.relabel(PSI_A, Party.ALICE, Role.ORIGINAL),
                          b.relabel(PROG_A, Party.ALICE, Role.PROGRAM))


def alice_reduced_after_terms(cfg: ConstructorConfig) -> DensityMatrix:
    """Alice's RAW post-replication state assembled term by term.

    Bob's partner of each Alice term follows the tensor expansion of the
    shared pairs: (psi1 P1)_A with Y = out_22, (psi2 P2)_A with X = out_11,
    (psi2 P1)_A with Phi1 := out_12 and (psi1 P2)_A with Phi2 := out_21.
    """
    psi = dict(zip((1, 2), cfg.original_pair()))
    prog = dict(zip((1, 2), cfg.program_pair()))
    A = {(i, j): _alice_ket(psi[i], prog[j]) for i in (1, 2) for j in (1, 2)}
    _, outs = replication_outputs(cfg)
    Y, X = outs.out_22, outs.out_11
    Phi1, Phi2 = outs.out_12, outs.out_21

    def ov(a, b):
        return inner_product(a, b)

    terms = [
        (1, (1, 1), (1, 1)),
        (1, (1, 2), (1, 2)),
        (1, (2, 1), (2, 1)),
        (1, (2, 2), (2, 2)),
        (ov(Y, X), (2, 2), (1, 1)),
        (-ov(Y, Phi1), (2, 1), (1, 1)),
        (-ov(Y, Phi2), (1, 2), (1, 1)),
        (-ov(Phi1, Y), (1, 1), (2, 1)),
        (ov(Phi1, Phi2), (1, 2), (2, 1)),
        (-ov(Phi1, X), (2, 2), (2, 1)),
        (-ov(Phi2, Y), (1, 1), (1, 2)),
        (ov(Phi2, Phi1), (2, 1), (1, 2)),
        (-ov(Phi2, X), (2, 2), (1, 2)),
        (-ov(X, Phi1), (2, 1), (2, 2)),
        (-ov(X, Phi2), (1, 2), (2, 2)),
        (ov(X, Y), (1, 1), (2, 2)),
    ]
    rho = sum(coef * outer(A[ket], A[bra]) for coef, ket, bra in terms) / 4
    return DensityMatrix(A[1, 1].layout, rho, Convention.RAW)


def _alice_marginal(k: Ket) -> DensityMatrix:
    if k.dim > DENSE_TRACE_LIMIT:
        return partial_trace_pure(k, ALICE_LABELS)
    return partial_trace(density_from_ket(k), ALICE_LABELS)


def alice_reduced_after(cfg: ConstructorConfig, cross_check: bool = True) -> DensityMatrix:
    """Alice's RAW reduced state after Bob's replication, via partial trace."""
    rho = _alice_marginal(post_replication_joint(cfg))
    if cross_check:
        dist = frobenius_distance(rho, alice_reduced_after_terms(cfg))
        if dist > TOLERANCE:
            raise CrossCheckFailed(f"partial-trace and term paths differ by {dist:.3e}")
    return rho


def alice_reduced_before(cfg: ConstructorConfig) -> DensityMatrix:
    return _alice_marginal(build_joint_state(cfg))


@dataclass(frozen=True, eq=False)
class SignallingReport:
    s: complex
    p: complex
    c: complex
    rho_before_raw: DensityMatrix | None
    rho_before_norm: DensityMatrix | None
    rho_after_raw: DensityMatrix | None
    rho_after_norm: DensityMatrix | None
    gap_raw: float
    gap_norm: float
    gram_defect_max: float
    verdict: Verdict
    policy: str = ""
    blanks_remaining: int | None = None


def _verdict(gap_norm: float) -> Verdict:
    return Verdict.SIGNALLING if gap_norm > SIGNALLING_THRESHOLD else Verdict.NO_SIGNALLING


def _degenerate(s, p, c, policy="", blanks=None) -> SignallingReport:
    nan = float("nan")
    return SignallingReport(s, p, c, None, None, None, None, nan, nan, nan,
                            Verdict.DEGENERATE, policy, blanks)


def _compare(before: DensityMatrix, after: DensityMatrix):
    before_n, after_n = normalize_density(before), normalize_density(after)
    return (before_n, after_n, trace_distance(before, after),
            trace_distance(before_n, after_n))


def signalling_gap(cfg: ConstructorConfig) -> SignallingReport:
    """Compare Alice's reduced state before and after Bob self-replicates."""
    policy = cfg.policy.value
    try:
        spec = perfect_replication_map(cfg)
        before = alice_reduced_reference(cfg)
        after = alice_reduced_after(cfg)
    except (DegeneratePair, DegenerateSpec):
        return _degenerate(cfg.s, cfg.p, cfg.c, policy, cfg.blanks_after_replication)
    before_n, after_n, gap_raw, gap_norm = _compare(before, after)
    return SignallingReport(
        cfg.s, cfg.p, cfg.c, before, before_n, after, after_n, gap_raw, gap_norm,
        float(np.max(isometry_defect(spec))), _verdict(gap_norm), policy,
        cfg.blanks_after_replication)


def cloning_map(psi1: Ket, psi2: Ket) -> LinearMapSpec:
    """Perfect cloner on Bob's (original, blank): psi_i 0 -> psi_i psi_i."""
    dim = psi1.dim
    layout = SubsystemLayout.single(PSI_B, dim, Party.BOB, Role.ORIGINAL).concat(
        SubsystemLayout.single(BLANK_ORIG, dim, Party.BOB, Role.BLANK))
    pairs = []
    for v in (psi1, psi2):
        orig = _bob(v, PSI_B, Role.ORIGINAL)
        pairs.append((tensor_product(orig, _zero(dim, BLANK_ORIG)),
                      tensor_product(orig, _bob(v, BLANK_ORIG, Role.ORIGINAL))))
    return LinearMapSpec(layout, layout, tuple(pairs))


def no_cloning_gap(s: complex, N: int = 2) -> SignallingReport:
    """Signalling gap when Bob perfectly clones his half of one singlet-like pair."""
    if abs(s) > 1.0:
        raise BadOverlap(f"|s| = {abs(s)} exceeds 1")
    try:
        psi1, psi2 = make_nonorthogonal_pair(N, s)
        chi = build_singlet_like(psi1, psi2, (PSI_A, PSI_B), Role.ORIGINAL)
        spec = cloning_map(psi1, psi2)
    except (DegeneratePair, DegenerateSpec):
        return _degenerate(s, 0.0, 0.0, "CLONE")
    joint = tensor_product(chi, _zero(N, BLANK_ORIG))
    after_ket = apply_local_map(joint, spec, Party.BOB)
    before = partial_trace(density_from_ket(chi), [PSI_A])
    after = partial_trace(density_from_ket(after_ket), [PSI_A])
    before_n, after_n, gap_raw, gap_norm = _compare(before, after)
    return SignallingReport(s, 0.0, 0.0, before, before_n, after, after_n, gap_raw,
                            gap_norm, float(np.max(isometry_defect(spec))),
                            _verdict(gap_norm), "CLONE")


def _effective_visibility(a: float, b: float) -> float:
    """Normalized Bloch length of (|v1><v1| + |v2><v2| - b(|v1><v2| + h.c.))/2."""
    return (a - b) / (1.0 - a * b)


def closed_form_gap_norm(s: float, p: float, c: float, policy: str) -> float | None:
    """Closed-form normalized gap for the qubit desk scenario with real overlaps.

    Bob's output Gram factorizes into an original part (s^2 times a control
    overlap) and a program part (p^2 times a control overlap), so Alice's
    normalized state is a product with spectra (1 +- x)/2 and (1 +- y)/2,
    while before replication it is I/4. Returns None outside that regime.
    """
    if any(complex(v).imag != 0 for v in (s, p, c)):
        return None
    s, p, c = (complex(v).real for v in (s, p, c))
    if not (0 <= s < 1 and 0 <= p < 1):
        return None
    kappa = {"BY_PROGRAM": (1.0, c), "BY_ORIGINAL": (c, 1.0), "FIXED": (1.0, 1.0)}.get(policy)
    if kappa is None:
        return None
    x = _effective_visibility(s, s * s * kappa[0])
    y = _effective_visibility(p, p * p * kappa[1])
    return product_gap(x, y)


def product_gap(x: float, y: float) -> float:
    """Trace distance between I/4 and a product state with spectra (1+-x)/2, (1+-y)/2."""
    return 0.5 * sum(abs((1 + a * x) * (1 + b * y) / 4 - 0.25)
                     for a in (1, -1) for b in (1, -1))


def closed_form_cloning_gap(s: float) -> float:
    """Normalized gap for perfect cloning of a qubit singlet-like pair, real s."""
    return abs(_effective_visibility(s, s * s)) / 2


__all__ = [
    "CrossCheckFailed", "LinearMapSpec", "ReplicationOutputs", "SignallingReport", "Verdict",
    "alice_reduced_after", "alice_reduced_after_terms", "alice_reduced_before",
    "apply_local_map", "apply_map_spec", "bob_input_layout", "closed_form_cloning_gap",
    "closed_form_gap_norm", "cloning_map", "isometry_defect", "no_cloning_gap",
    "perfect_replication_map", "post_replication_joint", "product_gap",
    "replication_outputs", "signalling_gap",
]
