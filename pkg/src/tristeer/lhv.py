"""Explicit steering LHS-LHV decompositions of the Svetlichny and Mermin families.

Each family with 0 < V <= 1/sqrt2 is written as an equal-weight mixture of four
two-qubit tables for Alice and Bob, each paired with a deterministic response
c = alpha*z + beta for Charlie. Tables are entered as sign patterns so every V
is exact: entry = (1 + sign * w) / 4, with w = sqrt2*V (Svetlichny) or V (Mermin).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .boxes import (
    BITS,
    BipartiteBox,
    TripartiteBox,
    bb84_family,
    born_bipartite,
    chsh_family,
    family_box,
    lro_equivalent,
    max_abs_diff,
)
from .linalg import TOL_CONSTRUCT
from .states import SQRT2, mermin_ab_observables, psi_lambda, svetlichny_ab_observables

V_MAX = 1 / SQRT2
# two-qubit BB84/CHSH tables certify entanglement iff W > 1/2, with W = sqrt2*V
W_ENTANGLEMENT_THRESHOLD = 0.5
FULLY_LHS_LHV_THRESHOLD = W_ENTANGLEMENT_THRESHOLD / SQRT2

_E = (1, -1, -1, 1)  # correlated outcomes favoured
_O = (-1, 1, 1, -1)  # anticorrelated outcomes favoured
_Z = (0, 0, 0, 0)

# rows xy = 00, 01, 10, 11; columns ab = 00, 01, 10, 11
SVETLICHNY_PATTERNS = (
    (_E, _Z, _Z, _O),
    (_O, _Z, _Z, _E),
    (_Z, _E, _E, _Z),
    (_Z, _O, _O, _Z),
)
MERMIN_PATTERNS = (
    (_E, _E, _E, _O),
    (_O, _O, _O, _E),
    (_O, _E, _E, _E),
    (_E, _O, _O, _O),
)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Charlie outputs c = alpha*z XOR beta."""

    alpha: int
    beta: int

    def __post_init__(self):
        if self.alpha not in BITS or self.beta not in BITS:
            raise ValueError("alpha and beta must be bits")

    def output(self, z: int) -> int:
        return (self.alpha & z) ^ self.beta

    def distribution(self, z: int) -> np.ndarray:
        d = np.zeros(2)
        d[self.output(z)] = 1.0
        return d


def strategy_eval(s: DeterministicStrategy, z: int) -> np.ndarray:
    return s.distribution(z)


@dataclass(frozen=True)
class LhvTerm:
    weight: float
    table: BipartiteBox
    charlie: DeterministicStrategy
    state: np.ndarray | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SteeringLhsLhvModel:
    family: str
    v: float
    terms: tuple

    def __post_init__(self):
        w = np.array([t.weight for t in self.terms])
        if np.any(w < 0) or abs(w.sum() - 1) > TOL_CONSTRUCT:
            raise ValueError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")

    @property
    def weights(self) -> tuple:
        return tuple(t.weight for t in self.terms)


def _check_v(v: float):
    if not (0.0 < v <= V_MAX + TOL_CONSTRUCT):
        raise ValueError(f"model out of stated range: v must lie in (0, 1/sqrt2], got {v}")


def _table(pattern, w: float) -> BipartiteBox:
    return BipartiteBox.from_table((1 + np.asarray(pattern, dtype=float) * w) / 4)


def _strategies():
    # lambda = 0..3 -> P_D^{00}, P_D^{01}, P_D^{10}, P_D^{11}
    return [DeterministicStrategy(a, b) for a, b in itertools.product(BITS, BITS)]


def _model(family: str, v: float, patterns, w: float) -> SteeringLhsLhvModel:
    _check_v(v)
    v = min(v, V_MAX)
    w = min(w, 1.0)
    terms = tuple(
        LhvTerm(0.25, _table(pat, w), strat, psi_lambda(family, lam, v))
        for lam, (pat, strat) in enumerate(zip(patterns, _strategies()))
    )
    return SteeringLhsLhvModel(family, v, terms)


def svf_steering_model(v: float) -> SteeringLhsLhvModel:
    """Four-term decomposition of the Svetlichny family; entries (1 +- sqrt2 V)/4 and 1/4."""
    return _model("svetlichny", v, SVETLICHNY_PATTERNS, SQRT2 * v)


def mf_steering_model(v: float) -> SteeringLhsLhvModel:
    """Four-term decomposition of the Mermin family; entries (1 +- V)/4."""
    return _model("mermin", v, MERMIN_PATTERNS, v)


def steering_model(family: str, v: float) -> SteeringLhsLhvModel:
    if family == "svetlichny":
        return svf_steering_model(v)
    if family == "mermin":
        return mf_steering_model(v)
    raise ValueError(f"unknown family {family!r}")


def reconstruct(model: SteeringLhsLhvModel) -> TripartiteBox:
    """p(abc|xyz) = sum_l r_l * table_l(ab|xy) * strategy_l(c|z)."""
    p = np.zeros((2,) * 6)
    for t in model.terms:
        pc = np.array([t.charlie.distribution(z) for z in BITS])  # [z, c]
        p += t.weight * np.einsum("xyab,zc->xyzabc", t.table.p, pc)
    return TripartiteBox(p)


def _ab_observables(family: str):
    if family == "svetlichny":
        return svetlichny_ab_observables()
    if family == "mermin":
        return mermin_ab_observables()
    raise ValueError(f"unknown family {family!r}")


def table_errors_from_states(family: str, v: float, model: SteeringLhsLhvModel | None = None) -> list[float]:
    """Per-term max deviation between the Born table of |psi_lambda> and the stored table."""
    model = model or steering_model(family, v)
    alice, bob = _ab_observables(family)
    errs = []
    for lam, t in enumerate(model.terms):
        born = born_bipartite(psi_lambda(family, lam, v), alice, bob)
        errs.append(max_abs_diff(born, t.table))
    return errs


def verify_tables_from_states(family: str, v: float) -> float:
    return max(table_errors_from_states(family, v))


def reference_family(family: str, v: float) -> BipartiteBox:
    """BB84 (Svetlichny) or CHSH (Mermin) table at W = sqrt2*V."""
    w = min(SQRT2 * v, 1.0)
    return bb84_family(w) if family == "svetlichny" else chsh_family(w)


def reduced_family_check(family: str, v: float, model: SteeringLhsLhvModel | None = None, tol: float = 1e-10):
    """LRO witness (or None) mapping each term's table onto the reference family."""
    model = model or steering_model(family, v)
    ref = reference_family(family, v)
    return [lro_equivalent(t.table, ref, tol) for t in model.terms]


def has_fully_lhs_lhv_model(v: float) -> bool:
    """True iff every reduced table is separable, i.e. sqrt2*V <= 1/2."""
    return SQRT2 * v <= W_ENTANGLEMENT_THRESHOLD + 1e-15


@dataclass
class VerifyResult:
    family: str
    v: float
    reconstruction_error: float
    table_errors: list
    lro_witnesses: list
    tol_reconstruction: float = 1e-12
    tol_tables: float = 1e-10

    @property
    def passed(self) -> bool:
        return (
            self.reconstruction_error <= self.tol_reconstruction
            and all(e <= self.tol_tables for e in self.table_errors)
            and all(w is not None for w in self.lro_witnesses)
        )

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "v": self.v,
            "reconstruction_error": self.reconstruction_error,
            "table_errors": list(self.table_errors),
            "lro_witnesses": [None if w is None else w.to_dict() for w in self.lro_witnesses],
            "pass": self.passed,
        }


def verify_model(family: str, v: float) -> VerifyResult:
    """Run reconstruction, Born-table and LRO checks for one (family, V)."""
    model = steering_model(family, v)
    recon = max_abs_diff(reconstruct(model), family_box(family, model.v))
    return VerifyResult(
        family=family,
        v=v,
        reconstruction_error=recon,
        table_errors=table_errors_from_states(family, model.v, model),
        lro_witnesses=reduced_family_check(family, model.v, model),
    )
