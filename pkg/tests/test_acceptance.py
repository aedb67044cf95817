"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible even under output
capture) and then asserts.
"""
import numpy as np
import pytest

from tristeer.analysis import scan
from tristeer.assemblages import (
    box_from_assemblage_1sdi,
    box_from_assemblage_2sdi,
    make_assemblage_1sdi,
    make_assemblage_2sdi,
)
from tristeer.boxes import (
    born_bipartite,
    born_tripartite,
    check_no_signaling,
    max_abs_diff,
    mermin_family,
    svetlichny_family,
)
from tristeer.inequalities import (
    bisect_crossing,
    biseparable_sampling,
    fully_product_sampling,
    max_chsh_value,
    mermin_value,
    steering_two_setting_value,
    svetlichny_chsh_identity_check,
    svetlichny_value,
)
from tristeer.lhv import (
    mf_steering_model,
    reconstruct,
    reduced_family_check,
    svf_steering_model,
    verify_tables_from_states,
)
from tristeer.linalg import partial_trace
from tristeer.states import (
    SINGLET,
    DensityMatrix,
    DichotomicObservable,
    MeasurementSettings,
    ghz_witness_value,
    mermin_ab_observables,
    mermin_settings,
    noisy_ghz,
    svetlichny_ab_observables,
    svetlichny_settings,
)

SQ2 = np.sqrt(2)
GRID = np.linspace(0, 1, 101)
MODEL_GRID = np.linspace(1 / SQ2 / 50, 1 / SQ2, 50)


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail

    return _report


def _random_rho(rng):
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    r = g @ g.conj().T
    return DensityMatrix(r / np.trace(r), (2, 2, 2))


def _random_settings(rng):
    obs = [DichotomicObservable.from_bloch(rng.normal(size=3)) for _ in range(6)]
    return MeasurementSettings(tuple(obs[:2]), tuple(obs[2:4]), tuple(obs[4:]))


def test_criterion_1_family_state_agreement(report):
    err = max(
        max(
            max_abs_diff(born_tripartite(noisy_ghz(v), svetlichny_settings()), svetlichny_family(v)),
            max_abs_diff(born_tripartite(noisy_ghz(v), mermin_settings()), mermin_family(v)),
        )
        for v in GRID
    )
    report(1, err <= 1e-10, f"family/state agreement, max entry error {err:.2e} (tol 1e-10)")


def test_criterion_2_inequality_values(report):
    err = max(
        max(
            abs(svetlichny_value(svetlichny_family(v)) - 4 * SQ2 * v),
            abs(mermin_value(mermin_family(v)) - 4 * v),
        )
        for v in GRID
    )
    top = svetlichny_value(svetlichny_family(1.0))
    ok = err <= 1e-12 and abs(top - 4 * SQ2) <= 1e-12
    report(2, ok, f"S = 4*sqrt2*V and M = 4V, max error {err:.2e}; S(V=1) = {top:.12f}")


THRESHOLDS = {
    "svetlichny": {
        "svetlichny-1sdi-fully-lhs": 1 / (2 * SQ2),
        "svetlichny-2sdi-steering": 0.5,
        "svetlichny": 1 / SQ2,
    },
    "mermin": {
        "mermin-1sdi-fully-lhs": 1 / (2 * SQ2),
        "mermin": 0.5,
        "mermin-2sdi-steering": 0.5,
        "mermin-genuine-di": 1 / SQ2,
    },
}


def test_criterion_3_threshold_suite(report):
    worst, missing = 0.0, []
    for family, expected in THRESHOLDS.items():
        found = scan(family, steps=201).thresholds
        for name, v in expected.items():
            if name not in found:
                missing.append(name)
                continue
            worst = max(worst, abs(found[name] - v))
    ok = not missing and worst <= 1e-9
    report(3, ok, f"threshold crossings, max error {worst:.2e} (tol 1e-9), missing {missing or 'none'}")


def test_criterion_4_witness_threshold(report):
    root = bisect_crossing(lambda v: ghz_witness_value(noisy_ghz(v)) < 0, 0.0, 1.0, 1e-14)
    err = abs(root - 3 / 7)
    report(4, err <= 1e-12, f"witness root {root:.14f}, error {err:.2e} vs 3/7 (tol 1e-12)")


def test_criterion_5_decomposition_verification(report):
    recon = max(
        max(
            max_abs_diff(reconstruct(svf_steering_model(v)), svetlichny_family(v)),
            max_abs_diff(reconstruct(mf_steering_model(v)), mermin_family(v)),
        )
        for v in MODEL_GRID
    )
    tables = max(verify_tables_from_states(f, v) for f in ("svetlichny", "mermin") for v in MODEL_GRID)
    witnesses = [w for f in ("svetlichny", "mermin") for v in MODEL_GRID for w in (reduced_family_check(f, v) or [None])]
    found = sum(w is not None for w in witnesses)
    ok = recon <= 1e-12 and tables <= 1e-10 and found == len(witnesses) == 8 * len(MODEL_GRID)
    report(
        5,
        ok,
        f"reconstruction error {recon:.2e}, table error {tables:.2e}, LRO witnesses {found}/{len(witnesses)}",
    )


def test_criterion_6_operator_identity(report):
    rng = np.random.default_rng(6)
    err = max(
        svetlichny_chsh_identity_check(born_tripartite(_random_rho(rng), _random_settings(rng)))
        for _ in range(50)
    )
    report(6, err <= 1e-12, f"S = CHSH*C0 - CHSH'*C1 on 50 random boxes, max error {err:.2e}")


def test_criterion_7_sampling_bounds(report):
    n, seed = 10_000, 7
    runs = [
        biseparable_sampling("S", svetlichny_settings(), n, seed),
        biseparable_sampling("M", mermin_settings(), n, seed),
        fully_product_sampling("S", svetlichny_settings(), n, seed),
        fully_product_sampling("M", mermin_settings(), n, seed),
    ]
    ok = all(r.within_bound for r in runs) and all(r.samples >= 10_000 for r in runs)
    detail = ", ".join(f"{r.model} {r.operator} max {r.max_value:.4f} <= {r.bound:.4f}" for r in runs)
    report(7, ok, detail)


def test_criterion_8_scenario_premises(report):
    chsh_svet = max_chsh_value(born_bipartite(SINGLET, *svetlichny_ab_observables()))
    box_m = born_bipartite(SINGLET, *mermin_ab_observables())
    chsh_m = max_chsh_value(box_m)
    steer = steering_two_setting_value(box_m)
    ok = abs(chsh_svet - 2 * SQ2) <= 1e-10 and chsh_m <= 2 + 1e-10 and abs(steer - 2) <= 1e-10 and steer > SQ2
    report(8, ok, f"singlet CHSH {chsh_svet:.12f}, Mermin-setting max CHSH {chsh_m:.12f}, steering {steer:.12f}")


def test_criterion_9_structural_invariants(report):
    rng = np.random.default_rng(9)
    ns, pos, red, two_path = 0.0, 0.0, 0.0, 0.0
    cases = [(noisy_ghz(v), s) for v in GRID[::5] for s in (svetlichny_settings(), mermin_settings())]
    cases += [(_random_rho(rng), _random_settings(rng)) for _ in range(20)]
    for v in GRID:
        for box in (svetlichny_family(v), mermin_family(v)):
            ns = max(ns, check_no_signaling(box).max_violation, abs(box.p.sum(axis=(3, 4, 5)) - 1).max())
    for rho, s in cases:
        direct = born_tripartite(rho, s)
        ns = max(ns, check_no_signaling(direct).max_violation)
        a1 = make_assemblage_1sdi(rho, s.charlie)
        a2 = make_assemblage_2sdi(rho, s.bob, s.charlie)
        for chk in (a1.check(), a2.check()):
            pos = max(pos, -chk["min_eigenvalue"])
        for z in (0, 1):
            red = max(red, np.abs(a1.reduced(z) - partial_trace(rho.matrix, (2, 2, 2), [2])).max())
            for y in (0, 1):
                red = max(red, np.abs(a2.reduced(y, z) - partial_trace(rho.matrix, (2, 2, 2), [1, 2])).max())
        two_path = max(
            two_path,
            max_abs_diff(direct, box_from_assemblage_1sdi(a1, s.alice, s.bob)),
            max_abs_diff(direct, box_from_assemblage_2sdi(a2, s.alice)),
        )
    ok = ns <= 1e-10 and pos <= 1e-10 and red <= 1e-10 and two_path <= 1e-12
    report(
        9,
        ok,
        f"no-signaling {ns:.2e}, negativity {max(pos, 0):.2e}, reduction {red:.2e}, two-path {two_path:.2e}",
    )
