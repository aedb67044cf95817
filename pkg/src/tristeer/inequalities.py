"""Bell, steering and biseparability inequalities evaluated on boxes."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .boxes import (
    BipartiteBox,
    TripartiteBox,
    bipartite_correlator_table,
    born_tripartite_pure,
    correlator_table,
)
from .states import SQRT2, SX, SY, SZ, MeasurementSettings

TOL_VIOLATION = 1e-10

_PAULIS = (SX, SY, SZ)

# (x, y, z, sign) terms
MERMIN_TERMS = ((0, 0, 1, 1), (0, 1, 0, 1), (1, 0, 0, 1), (1, 1, 1, -1))
MERMIN_PRIME_TERMS = ((0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (0, 0, 0, -1))
# Svetlichny operator with signs (-1)^(xy+yz+xz), the form maximized by the
# Svetlichny family. The M + M' form below is the same inequality after
# Charlie relabels z -> z+1 and c -> c+z.
SVETLICHNY_TERMS = tuple(
    (x, y, z, -1 if (x * y + y * z + x * z) % 2 else 1)
    for x in (0, 1) for y in (0, 1) for z in (0, 1)
)
SVETLICHNY_MM_TERMS = MERMIN_TERMS + MERMIN_PRIME_TERMS

CHSH_COEFFS = np.array([[1, 1], [1, -1]], dtype=float)
CHSH_PRIME_COEFFS = np.array([[-1, 1], [1, 1]], dtype=float)

SCENARIOS = ("fully-DI", "1SDI", "2SDI", "biseparable", "quantum-max")

# name, operator, scenario, bound
BOUNDS = (
    ("svetlichny", "S", "fully-DI", 4.0),
    ("svetlichny-2sdi-steering", "S", "2SDI", 2 * SQRT2),
    ("svetlichny-1sdi-fully-lhs", "S", "1SDI", 2.0),
    ("svetlichny-biseparability", "S", "biseparable", 2 * SQRT2),
    ("mermin", "M", "fully-DI", 2.0),
    ("mermin-2sdi-steering", "M", "2SDI", 2.0),
    ("mermin-1sdi-fully-lhs", "M", "1SDI", SQRT2),
    ("mermin-biseparability", "M", "biseparable", 2.0),
    ("mermin-genuine-di", "M", "quantum-max", 2 * SQRT2),
)
BOUND_BY_NAME = {name: (op, scen, bound) for name, op, scen, bound in BOUNDS}


def _terms_value(corr: np.ndarray, terms) -> np.ndarray:
    return sum(s * corr[..., x, y, z] for x, y, z, s in terms)


def mermin_value(box) -> float:
    """<A0B0C1> + <A0B1C0> + <A1B0C0> - <A1B1C1>."""
    return float(_terms_value(correlator_table(box), MERMIN_TERMS))


def svetlichny_value(box) -> float:
    """sum over x, y, z of (-1)^(xy+yz+xz) <A_x B_y C_z>."""
    return float(_terms_value(correlator_table(box), SVETLICHNY_TERMS))


def svetlichny_mm_value(box) -> float:
    """Mermin terms plus <A0B1C1> + <A1B0C1> + <A1B1C0> - <A0B0C0>."""
    return float(_terms_value(correlator_table(box), SVETLICHNY_MM_TERMS))


def mermin_values(p) -> np.ndarray:
    """Vectorized Mermin value over a batch of raw probability arrays."""
    return _terms_value(correlator_table(p), MERMIN_TERMS)


def svetlichny_values(p) -> np.ndarray:
    return _terms_value(correlator_table(p), SVETLICHNY_TERMS)


def chsh_value(box: BipartiteBox) -> float:
    """<A0B0> + <A0B1> + <A1B0> - <A1B1>."""
    return float(np.sum(CHSH_COEFFS * bipartite_correlator_table(box)))


def chsh_prime_value(box: BipartiteBox) -> float:
    """-<A0B0> + <A0B1> + <A1B0> + <A1B1>."""
    return float(np.sum(CHSH_PRIME_COEFFS * bipartite_correlator_table(box)))


def max_chsh_value(box: BipartiteBox) -> float:
    """Largest |CHSH| over the four placements of the minus sign."""
    e = bipartite_correlator_table(box)
    total = e.sum()
    return float(max(abs(total - 2 * e[x, y]) for x in (0, 1) for y in (0, 1)))


def steering_two_setting_value(box: BipartiteBox) -> float:
    """|<A0B0> + <A1B1>|; hidden-state models obey <= sqrt2."""
    e = bipartite_correlator_table(box)
    return float(abs(e[0, 0] + e[1, 1]))


STEERING_TWO_SETTING_BOUND = SQRT2


def svetlichny_chsh_identity_check(box: TripartiteBox) -> float:
    """|S - (CHSH_AB * C0 - CHSH'_AB * C1)| from the box's correlators.

    This is the CHSH decomposition S = CHSH_AB C1 + CHSH'_AB C0 written for
    Charlie's relabeled pair (C1 -> C0, C0 -> -C1); see
    :func:`svetlichny_mm_chsh_identity_check` for the unrelabeled form.
    """
    e = correlator_table(box)
    contracted = np.sum(CHSH_COEFFS * e[:, :, 0]) - np.sum(CHSH_PRIME_COEFFS * e[:, :, 1])
    return float(abs(svetlichny_value(box) - contracted))


def svetlichny_mm_chsh_identity_check(box: TripartiteBox) -> float:
    """|S_MM - (CHSH_AB * C1 + CHSH'_AB * C0)| for the M + M' operator."""
    e = correlator_table(box)
    contracted = np.sum(CHSH_COEFFS * e[:, :, 1]) + np.sum(CHSH_PRIME_COEFFS * e[:, :, 0])
    return float(abs(svetlichny_mm_value(box) - contracted))


@dataclass(frozen=True)
class InequalityReport:
    name: str
    scenario: str
    value: float
    bound: float
    violated: bool
    margin: float

    def to_dict(self) -> dict:
        return asdict(self)


def make_report(name: str, value: float, tol: float = TOL_VIOLATION) -> InequalityReport:
    _, scenario, bound = BOUND_BY_NAME[name]
    margin = value - bound
    return InequalityReport(name, scenario, float(value), float(bound), bool(margin > tol), float(margin))


def classify(box: TripartiteBox, tol: float = TOL_VIOLATION) -> list[InequalityReport]:
    """One report per (operator, bound) pair, nine in total."""
    values = {"S": svetlichny_value(box), "M": mermin_value(box)}
    return [make_report(name, values[op], tol) for name, op, _, _ in BOUNDS]


def operator_value(name: str, box: TripartiteBox) -> float:
    op = BOUND_BY_NAME[name][0]
    return svetlichny_value(box) if op == "S" else mermin_value(box)


# ---------------------------------------------------------------- thresholds

def bisect_crossing(pred: Callable[[float], bool], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Boundary between pred(lo) and pred(hi), which must differ, to within tol."""
    plo, phi = pred(lo), pred(hi)
    if plo == phi:
        raise ValueError(f"predicate does not change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid) == plo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- sampling

def _haar_kets(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    z = rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_biseparable_kets(n: int, rng: np.random.Generator) -> np.ndarray:
    """Pure product states across A|BC, B|AC and AB|C, cycling the cut."""
    pair = _haar_kets(rng, n, 4).reshape(n, 2, 2)
    single = _haar_kets(rng, n, 2)
    kets = np.empty((n, 2, 2, 2), dtype=complex)
    cut = np.arange(n) % 3
    # A|BC
    m = cut == 0
    kets[m] = np.einsum("na,nbc->nabc", single[m], pair[m])
    # B|AC
    m = cut == 1
    kets[m] = np.einsum("nb,nac->nabc", single[m], pair[m])
    # AB|C
    m = cut == 2
    kets[m] = np.einsum("nab,nc->nabc", pair[m], single[m])
    return kets.reshape(n, 8)


@dataclass(frozen=True)
class SamplingResult:
    operator: str
    model: str
    samples: int
    seed: int
    max_value: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.max_value <= self.bound + 1e-9

    def to_dict(self) -> dict:
        d = asdict(self)
        d["within_bound"] = self.within_bound
        return d


def _op_values(op: str, p) -> np.ndarray:
    return svetlichny_values(p) if op == "S" else mermin_values(p)


def biseparable_sampling(
    op: str, settings: MeasurementSettings, n: int = 10_000, seed: int = 0, batch: int = 2_000
) -> SamplingResult:
    """Largest operator value over random biseparable pure three-qubit states."""
    rng = np.random.default_rng(seed)
    best = -np.inf
    done = 0
    while done < n:
        k = min(batch, n - done)
        p = born_tripartite_pure(random_biseparable_kets(k, rng), settings)
        best = max(best, float(np.max(_op_values(op, p))))
        done += k
    bound = 2 * SQRT2 if op == "S" else 2.0
    return SamplingResult(op, "biseparable", n, seed, best, float(bound))


def _qubit_outcome_probs(bloch: np.ndarray, observables) -> np.ndarray:
    """P(a|x) for qubit states with Bloch vectors (n, 3); shape (n, 2, 2) indexed [x, a]."""
    # <obs> = r . n_obs for traceless observables
    axes = np.array([
        [np.trace(o.matrix @ s).real / 2 for s in _PAULIS] for o in observables
    ])  # (2, 3)
    mean = bloch @ axes.T  # (n, 2)
    return np.stack([(1 + mean) / 2, (1 - mean) / 2], axis=-1)


def _random_bloch(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(size=(n, 1)) ** (1 / 3)


def fully_product_sampling(
    op: str, settings: MeasurementSettings, n: int = 10_000, seed: int = 0
) -> SamplingResult:
    """Largest operator value over qubit states for Alice and Bob times a deterministic Charlie."""
    rng = np.random.default_rng(seed)
    pa = _qubit_outcome_probs(_random_bloch(rng, n), settings.alice)
    pb = _qubit_outcome_probs(_random_bloch(rng, n), settings.bob)
    alpha = rng.integers(0, 2, size=n)
    beta = rng.integers(0, 2, size=n)
    pc = np.zeros((n, 2, 2))  # [z, c]
    for z in (0, 1):
        c = (alpha * z) ^ beta
        pc[np.arange(n), z, c] = 1.0
    p = np.einsum("nxa,nyb,nzc->nxyzabc", pa, pb, pc)
    bound = 2.0 if op == "S" else SQRT2
    return SamplingResult(op, "fully-product", n, seed, float(np.max(_op_values(op, p))), float(bound))

