"""Acceptance criteria, one test per criterion, each at its pinned tolerance.

Every test records a PASS/FAIL line that is repeated in the pytest terminal
summary under "acceptance criteria".
"""

import resource
import sys
import time

import numpy as np

from nogosig.replication_maps import (
    LinearMapSpec,
    alice_reduced_after,
    alice_reduced_after_terms,
    apply_local_map,
    isometry_defect,
    no_cloning_gap,
    perfect_replication_map,
    signalling_gap,
)
from nogosig.scenario_states import (
    ALICE_LABELS,
    ConstructorConfig,
    alice_reduced_reference,
    build_joint_state,
)
from nogosig.tensor_core import (
    DensityMatrix,
    Factor,
    Ket,
    Party,
    SubsystemLayout,
    density_from_ket,
    frobenius_distance,
    inverse_permutation,
    normalize_density,
    partial_trace,
    permute_factors,
    trace_distance,
)

import conftest
from oracles import random_ket, random_unitary

GRID = [0.0, 0.3, 0.5, 0.70711, 0.9]
POINTS = [(s, p) for s in GRID for p in GRID]
CASES = 1000


def closed_form_orthonormal_outputs(s, p):
    return 0.5 * sum(abs((1 + a * s) * (1 + b * p) / 4 - 0.25) for a in (1, -1) for b in (1, -1))


def test_c1_reference_vs_partial_trace(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for s, p in POINTS:
        cfg = ConstructorConfig.desk(s, p)
        traced = partial_trace(density_from_ket(build_joint_state(cfg)), ALICE_LABELS)
        worst = max(worst, frobenius_distance(alice_reduced_reference(cfg), traced))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 5
    criterion("C1 Alice-before two-path", ok, f"max frobenius {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_c2_after_partial_trace_vs_terms(criterion):
    worst = 0.0
    for s, p in POINTS:
        cfg = ConstructorConfig.desk(s, p, 0.0, "BY_PROGRAM")
        numeric = alice_reduced_after(cfg, cross_check=False)
        worst = max(worst, frobenius_distance(numeric, alice_reduced_after_terms(cfg)))
    ok = worst <= 1e-10
    criterion("C2 Alice-after two-path", ok, f"max frobenius {worst:.2e}")
    assert ok


def test_c3_reductio_dichotomy(criterion):
    zero = signalling_gap(ConstructorConfig.desk(0, 0)).gap_norm
    smallest = min(signalling_gap(ConstructorConfig.desk(s, p)).gap_norm
                   for s, p in POINTS if s >= 0.3 and p >= 0.3)
    ok = zero <= 1e-12 and smallest > 1e-3
    criterion("C3a reductio dichotomy", ok,
              f"gap(0,0)={zero:.2e}, min gap over s,p>=0.3 = {smallest:.5f}")
    assert ok


def test_c3_gap_at_symmetric_point(criterion):
    gap = signalling_gap(ConstructorConfig.desk(0.70711, 0.70711, 0.0)).gap_norm
    ok = abs(gap - 0.47855) <= 1e-5
    criterion("C3b gap_norm(1/sqrt2, 1/sqrt2) = 0.47855", ok, f"got {gap:.5f}")
    assert ok


def test_c4_closed_form_gap_law(criterion):
    worst = 0.0
    for s, p in POINTS:
        gap = signalling_gap(ConstructorConfig.desk(s, p, 0.0)).gap_norm
        worst = max(worst, abs(gap - closed_form_orthonormal_outputs(s, p)))
    ok = worst <= 1e-10
    criterion("C4 closed-form gap law", ok, f"max deviation {worst:.2e}")
    assert ok


def test_c5_gram_defect_law(criterion):
    worst = 0.0
    for c in (0.0, 0.4):
        for s, p in POINTS:
            d = isometry_defect(perfect_replication_map(ConstructorConfig.desk(s, p, c)))
            same_prog, same_orig = abs(s - s * s), abs(p - p * p * c)
            both = abs(s * p - s * s * p * p * c)
            # order 11, 21, 12, 22
            want = np.array([[0, same_prog, same_orig, both],
                             [same_prog, 0, both, same_orig],
                             [same_orig, both, 0, same_prog],
                             [both, same_orig, same_prog, 0]])
            worst = max(worst, float(np.max(np.abs(d - want))))
    top = isometry_defect(perfect_replication_map(ConstructorConfig.desk(0.70711, 0.70711))).max()
    ok = worst <= 1e-10 and abs(top - 0.70711) <= 1e-10
    criterion("C5 Gram-defect law", ok, f"max deviation {worst:.2e}, max defect {top:.5f}")
    assert ok


def test_c6_no_cloning_gap(criterion):
    worst = 0.0
    detail = []
    for s in (0.0, 0.25, 0.5, 0.70711):
        gap = no_cloning_gap(s).gap_norm
        worst = max(worst, abs(gap - s / 2))
        detail.append(f"{s}:{gap:.5f}")
    ok = worst <= 1e-10
    criterion("C6 no-cloning gap = s/2", ok, f"max deviation {worst:.2e} ({', '.join(detail)})")
    assert ok


def _random_density(rng, layout):
    d = layout.total_dim
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return DensityMatrix(layout, m / np.trace(m))


def test_c7_property_suite(criterion):
    rng = np.random.default_rng(2024)
    layout = SubsystemLayout(tuple(Factor(l, d) for l, d in zip("abc", (2, 2, 3))))
    failures = []

    # trace preservation of partial_trace
    worst = 0.0
    for _ in range(CASES):
        rho = _random_density(rng, layout)
        keep = [l for l in "abc" if rng.random() < 0.5]
        worst = max(worst, abs(partial_trace(rho, keep).trace - rho.trace))
    if worst > 1e-12:
        failures.append(f"trace preservation {worst:.2e}")

    # Hermiticity / PSD of produced densities
    worst_h, worst_neg = 0.0, 0.0
    produced = []
    for _ in range(CASES):
        k = Ket(layout, random_ket(rng, 12) * rng.uniform(0.1, 3))
        rho = density_from_ket(k)
        keep = [l for l in "abc" if rng.random() < 0.5]
        produced += [rho, partial_trace(rho, keep), normalize_density(partial_trace(rho, keep))]
    for policy in ("BY_PROGRAM", "BY_ORIGINAL", "FIXED"):
        for s, p in POINTS:
            rep = signalling_gap(ConstructorConfig.desk(s, p, 0.0, policy))
            produced += [rep.rho_before_raw, rep.rho_before_norm, rep.rho_after_raw,
                         rep.rho_after_norm]
    for rho in produced:
        worst_h = max(worst_h, rho.hermitian_defect())
        worst_neg = max(worst_neg, -rho.eigenvalues()[0])
    if worst_h > 1e-10 or worst_neg > 1e-10:
        failures.append(f"hermitian {worst_h:.2e} / negativity {worst_neg:.2e}")

    # trace distance metric axioms
    small = SubsystemLayout.single("a", 3)
    for _ in range(CASES):
        a, b, c = (_random_density(rng, small) for _ in range(3))
        dab, dba = trace_distance(a, b), trace_distance(b, a)
        if (dab < 0 or abs(dab - dba) > 1e-10 or trace_distance(a, a) > 1e-10
                or trace_distance(a, c) > dab + trace_distance(b, c) + 1e-10):
            failures.append("metric axioms")
            break

    # permutation round trips
    for _ in range(CASES):
        n = int(rng.integers(1, 5))
        dims = rng.integers(1, 4, size=n)
        lay = SubsystemLayout(tuple(Factor(f"f{i}", int(d)) for i, d in enumerate(dims)))
        k = Ket(lay, random_ket(rng, lay.total_dim))
        perm = list(rng.permutation(n))
        back = permute_factors(permute_factors(k, perm), inverse_permutation(perm))
        if not np.array_equal(back.amplitudes, k.amplitudes):
            failures.append("permutation round trip")
            break

    # isometric local maps leave the remote normalized marginal unchanged
    worst_iso = 0.0
    for _ in range(CASES):
        da, db = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        extra = int(rng.integers(0, 2))
        lay = SubsystemLayout((Factor("a", da, Party.ALICE), Factor("b", db, Party.BOB)))
        joint = Ket(lay, random_ket(rng, da * db))
        src = SubsystemLayout.single("b", db, Party.BOB)
        dst = SubsystemLayout.single("b", db, Party.BOB) if not extra else \
            SubsystemLayout.single("b_out", db + extra, Party.BOB)
        basis = np.linalg.qr(rng.normal(size=(db, db)) + 1j * rng.normal(size=(db, db)))[0]
        # random basis inputs mapped by a random isometry
        u = random_unitary(rng, dst.total_dim)[:, :db]
        pairs = tuple((Ket(src, basis[:, i]), Ket(dst, u @ basis[:, i])) for i in range(db))
        out = apply_local_map(joint, LinearMapSpec(src, dst, pairs), Party.BOB)
        before = normalize_density(partial_trace(density_from_ket(joint), {"a"}))
        after = normalize_density(partial_trace(density_from_ket(out), {"a"}))
        worst_iso = max(worst_iso, trace_distance(before, after))
    if worst_iso > 1e-10:
        failures.append(f"isometric local map moved remote marginal by {worst_iso:.2e}")

    ok = not failures
    criterion("C7 property suite", ok, "; ".join(failures) or f"{CASES} cases per property")
    assert ok


def test_c8_resource_envelope(criterion):
    elapsed = time.perf_counter() - conftest.SESSION_START
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    peak_mb = peak / (1024 * 1024) if sys.platform == "darwin" else peak / 1024
    ok = elapsed < 60 and peak_mb < 500
    criterion("C8 resource envelope", ok, f"{elapsed:.1f}s elapsed, peak RSS {peak_mb:.0f} MB")
    assert ok
