"""Conditional probability tables for two and three parties.

A tripartite box is stored as a real array ``p[x, y, z, a, b, c]``; a bipartite
box as ``p[x, y, a, b]``. Outcome ``0`` corresponds to eigenvalue ``+1``.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .linalg import DimensionError, tensor
from .states import SQRT2, DensityMatrix, DichotomicObservable, MeasurementSettings, projector

TOL_BOX = 1e-10
TOL_ENTRY = 1e-12

BITS = (0, 1)


class BoxFormatError(ValueError):
    """Raised when a box file cannot be parsed."""


class BoxValidationError(ValueError):
    """Raised when a box violates normalization, range or no-signaling."""


def _parity_sign(*bits) -> int:
    return -1 if sum(bits) % 2 else 1


def _freeze(p) -> np.ndarray:
    p = np.array(p, dtype=float)
    p.setflags(write=False)
    return p


@dataclass(frozen=True, eq=False)
class TripartiteBox:
    """P(abc | A_x B_y C_z) for binary inputs and outputs.

    Construction checks shape, entry range and normalization. No-signaling is
    checked separately by :meth:`validate` so that signaling counterexamples
    can still be represented.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2,) * 6:
            raise DimensionError(f"tripartite box must have shape (2,)*6, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise BoxValidationError("box has non-finite entries")
        lo, hi = p.min(), p.max()
        if lo < -TOL_ENTRY or hi > 1 + TOL_ENTRY:
            raise BoxValidationError(f"entries must lie in [0, 1]; found range [{lo:.3g}, {hi:.3g}]")
        sums = p.sum(axis=(3, 4, 5))
        worst = np.max(np.abs(sums - 1))
        if worst > TOL_BOX:
            raise BoxValidationError(f"normalization off by {worst:.3g} for some setting")
        object.__setattr__(self, "p", _freeze(p))

    def __call__(self, a, b, c, x, y, z) -> float:
        return float(self.p[x, y, z, a, b, c])

    def validate(self, tol: float = TOL_BOX) -> "TripartiteBox":
        rep = check_no_signaling(self, tol)
        if not rep.passed:
            raise BoxValidationError(
                f"no-signaling violated: max discrepancy {rep.max_violation:.3g} "
                f"({rep.worst_marginal} marginal)"
            )
        return self

    def allclose(self, other: "TripartiteBox", tol: float = TOL_BOX) -> bool:
        return max_abs_diff(self, other) <= tol


@dataclass(frozen=True, eq=False)
class BipartiteBox:
    """P(ab | A_x B_y) for binary inputs and outputs, indexed ``p[x, y, a, b]``."""

    p: np.ndarray
    check: bool = True

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2,) * 4:
            raise DimensionError(f"bipartite box must have shape (2,)*4, got {p.shape}")
        if self.check:
            lo, hi = p.min(), p.max()
            if lo < -TOL_ENTRY or hi > 1 + TOL_ENTRY:
                raise BoxValidationError(f"entries must lie in [0, 1]; found [{lo:.3g}, {hi:.3g}]")
            worst = np.max(np.abs(p.sum(axis=(2, 3)) - 1))
            if worst > TOL_BOX:
                raise BoxValidationError(f"normalization off by {worst:.3g}")
        object.__setattr__(self, "p", _freeze(p))

    @classmethod
    def from_table(cls, rows, check: bool = True) -> "BipartiteBox":
        """Build from a 4x4 table: rows are settings xy, columns outcomes ab."""
        t = np.asarray(rows, dtype=float)
        if t.shape != (4, 4):
            raise DimensionError(f"table must be 4x4, got {t.shape}")
        return cls(t.reshape(2, 2, 2, 2), check=check)

    def table(self) -> np.ndarray:
        return self.p.reshape(4, 4)

    def __call__(self, a, b, x, y) -> float:
        return float(self.p[x, y, a, b])


def max_abs_diff(b1, b2) -> float:
    return float(np.max(np.abs(np.asarray(b1.p) - np.asarray(b2.p))))


# ---------------------------------------------------------------- generation

def _projector_stack(parties) -> np.ndarray:
    """Operators M_{a|x} x M_{b|y} x ... indexed [x, y, ..., a, b, ...]."""
    n = len(parties)
    dim = 2**n
    ops = np.empty((2,) * (2 * n) + (dim, dim), dtype=complex)
    for xs in itertools.product(BITS, repeat=n):
        for outs in itertools.product(BITS, repeat=n):
            ops[xs + outs] = tensor(*(projector(parties[k][xs[k]], outs[k]) for k in range(n)))
    return ops


def tripartite_projectors(settings: MeasurementSettings) -> np.ndarray:
    return _projector_stack(settings.parties())


def born_tripartite(rho: DensityMatrix, settings: MeasurementSettings) -> TripartiteBox:
    """P(abc|xyz) = Tr[(M_a|x x M_b|y x M_c|z) rho]."""
    if tuple(rho.subsystem_dims) != (2, 2, 2):
        raise DimensionError(f"born_tripartite needs dims (2, 2, 2), got {rho.subsystem_dims}")
    ops = tripartite_projectors(settings)
    p = np.einsum("...ij,ji->...", ops, rho.matrix).real
    return TripartiteBox(p)


def born_tripartite_pure(kets: np.ndarray, settings: MeasurementSettings) -> np.ndarray:
    """Batch Born rule for pure states; returns raw probabilities shaped (n, 2,2,2,2,2,2)."""
    kets = np.atleast_2d(np.asarray(kets, dtype=complex))
    if kets.shape[1] != 8:
        raise DimensionError(f"expected three-qubit kets of length 8, got {kets.shape}")
    ops = tripartite_projectors(settings).reshape(64, 8, 8)
    p = np.einsum("ni,kij,nj->nk", kets.conj(), ops, kets, optimize=True).real
    return p.reshape((-1,) + (2,) * 6)


def born_bipartite(rho, alice, bob) -> BipartiteBox:
    """P(ab|xy) for a two-qubit state (ket or density matrix)."""
    rho = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (4, 4):
        raise DimensionError(f"born_bipartite needs a two-qubit state, got shape {rho.shape}")
    ops = _projector_stack((tuple(alice), tuple(bob)))
    p = np.einsum("...ij,ji->...", ops, rho).real
    return BipartiteBox(p)


def _check_range(name, v, lo, hi, lo_open=False):
    ok = (lo < v if lo_open else lo <= v) and v <= hi
    if not ok:
        bracket = "(" if lo_open else "["
        raise ValueError(f"{name} must lie in {bracket}{lo}, {hi}], got {v}")


def svetlichny_family(v: float) -> TripartiteBox:
    """(2 + (-1)^(a+b+c+xy+yz+xz) sqrt2 V) / 16."""
    _check_range("v", v, 0.0, 1.0)
    p = np.empty((2,) * 6)
    for x, y, z, a, b, c in itertools.product(BITS, repeat=6):
        s = _parity_sign(a, b, c, x * y, y * z, x * z)
        p[x, y, z, a, b, c] = (2 + s * SQRT2 * v) / 16
    return TripartiteBox(p)


def mermin_family(v: float) -> TripartiteBox:
    """(1 + (-1)^(a+b+c+xy+yz+xz) [x+y+1 = z] V) / 8.

    v = 0 is accepted and gives the uniform box.
    """
    _check_range("v", v, 0.0, 1.0)
    p = np.empty((2,) * 6)
    for x, y, z, a, b, c in itertools.product(BITS, repeat=6):
        s = _parity_sign(a, b, c, x * y, y * z, x * z)
        active = 1 if (x ^ y ^ 1) == z else 0
        p[x, y, z, a, b, c] = (1 + s * active * v) / 8
    return TripartiteBox(p)


def bb84_family(w: float) -> BipartiteBox:
    """(1 + (-1)^(a+b+xy) [x = y] W) / 4."""
    _check_range("w", w, 0.0, 1.0, lo_open=True)
    p = np.empty((2,) * 4)
    for x, y, a, b in itertools.product(BITS, repeat=4):
        p[x, y, a, b] = (1 + _parity_sign(a, b, x * y) * (x == y) * w) / 4
    return BipartiteBox(p)


def chsh_family(w: float) -> BipartiteBox:
    """(2 + (-1)^(a+b+xy) sqrt2 W) / 8."""
    _check_range("w", w, 0.0, 1.0, lo_open=True)
    p = np.empty((2,) * 4)
    for x, y, a, b in itertools.product(BITS, repeat=4):
        p[x, y, a, b] = (2 + _parity_sign(a, b, x * y) * SQRT2 * w) / 8
    return BipartiteBox(p)


def uniform_tripartite() -> TripartiteBox:
    return TripartiteBox(np.full((2,) * 6, 1 / 8))


def family_box(family: str, v: float) -> TripartiteBox:
    if family == "svetlichny":
        return svetlichny_family(v)
    if family == "mermin":
        return mermin_family(v)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------- correlators

_SIGN3 = np.array([[[_parity_sign(a, b, c) for c in BITS] for b in BITS] for a in BITS], dtype=float)
_SIGN2 = np.array([[_parity_sign(a, b) for b in BITS] for a in BITS], dtype=float)


def correlator_table(p) -> np.ndarray:
    """All correlators <A_x B_y C_z> as an array [..., x, y, z]; accepts batched arrays."""
    p = np.asarray(p.p if isinstance(p, TripartiteBox) else p)
    return np.einsum("...abc,abc->...", p, _SIGN3)


def correlator(box: TripartiteBox, x: int, y: int, z: int) -> float:
    return float(np.sum(_SIGN3 * box.p[x, y, z]))


def bipartite_correlator_table(p) -> np.ndarray:
    p = np.asarray(p.p if isinstance(p, BipartiteBox) else p)
    return np.einsum("...ab,ab->...", p, _SIGN2)


def bipartite_correlator(box: BipartiteBox, x: int, y: int) -> float:
    return float(np.sum(_SIGN2 * box.p[x, y]))


# ---------------------------------------------------------------- no-signaling

@dataclass(frozen=True)
class NoSignalingReport:
    discrepancies: dict
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.discrepancies.values())

    @property
    def worst_marginal(self) -> str:
        return max(self.discrepancies, key=self.discrepancies.get)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def to_dict(self) -> dict:
        return {
            "discrepancies": dict(self.discrepancies),
            "max_violation": self.max_violation,
            "tol": self.tol,
            "passed": self.passed,
        }


def _spread(arr: np.ndarray, axis: int) -> float:
    return float(np.max(arr.max(axis=axis) - arr.min(axis=axis)))


def check_no_signaling(box: TripartiteBox, tol: float = TOL_BOX) -> NoSignalingReport:
    """Largest dependence of every one- and two-party marginal on the others' settings."""
    p = box.p
    # input axes 0..2 (x, y, z); output axes 3..5 (a, b, c)
    ab = p.sum(axis=5)  # [x,y,z,a,b]
    ac = p.sum(axis=4)  # [x,y,z,a,c]
    bc = p.sum(axis=3)  # [x,y,z,b,c]
    a = p.sum(axis=(4, 5))
    b = p.sum(axis=(3, 5))
    c = p.sum(axis=(3, 4))
    d = {
        "AB": _spread(ab, 2),
        "AC": _spread(ac, 1),
        "BC": _spread(bc, 0),
        "A": max(_spread(a, 1), _spread(a, 2)),
        "B": max(_spread(b, 0), _spread(b, 2)),
        "C": max(_spread(c, 0), _spread(c, 1)),
    }
    return NoSignalingReport(d, tol)


def bipartite_signaling(box: BipartiteBox) -> float:
    p = box.p
    return max(_spread(p.sum(axis=3), 1), _spread(p.sum(axis=2), 0))


# ---------------------------------------------------------------- relabelings

@dataclass(frozen=True)
class PartyRelabeling:
    """x -> x + flip, a -> a + alpha*x + beta (all mod 2)."""

    flip: int = 0
    alpha: int = 0
    beta: int = 0

    def __post_init__(self):
        for name in ("flip", "alpha", "beta"):
            if getattr(self, name) not in BITS:
                raise ValueError(f"{name} must be 0 or 1")

    def inverse(self) -> "PartyRelabeling":
        return PartyRelabeling(self.flip, self.alpha, self.beta ^ (self.alpha & self.flip))


@dataclass(frozen=True)
class Relabeling:
    alice: PartyRelabeling = PartyRelabeling()
    bob: PartyRelabeling = PartyRelabeling()

    def inverse(self) -> "Relabeling":
        return Relabeling(self.alice.inverse(), self.bob.inverse())

    def to_dict(self) -> dict:
        return {
            "alice": {"flip": self.alice.flip, "alpha": self.alice.alpha, "beta": self.alice.beta},
            "bob": {"flip": self.bob.flip, "alpha": self.bob.alpha, "beta": self.bob.beta},
        }


def lro_apply(box: BipartiteBox, r: Relabeling) -> BipartiteBox:
    """Q(ab|xy) = P(a + aA x + bA, b + aB y + bB | x + fA, y + fB)."""
    ra, rb = r.alice, r.bob
    q = np.empty((2,) * 4)
    for x, y, a, b in itertools.product(BITS, repeat=4):
        q[x, y, a, b] = box.p[
            x ^ ra.flip,
            y ^ rb.flip,
            a ^ (ra.alpha & x) ^ ra.beta,
            b ^ (rb.alpha & y) ^ rb.beta,
        ]
    return BipartiteBox(q, check=box.check)


def all_party_relabelings() -> Iterator[PartyRelabeling]:
    for f, al, be in itertools.product(BITS, repeat=3):
        yield PartyRelabeling(f, al, be)


def all_relabelings() -> Iterator[Relabeling]:
    """The 64 per-party relabeling pairs, identity first."""
    for ra in all_party_relabelings():
        for rb in all_party_relabelings():
            yield Relabeling(ra, rb)


def lro_equivalent(b1: BipartiteBox, b2: BipartiteBox, tol: float = TOL_BOX) -> Relabeling | None:
    """Relabeling r with lro_apply(b1, r) == b2 within tol, or None."""
    for r in all_relabelings():
        if max_abs_diff(lro_apply(b1, r), b2) <= tol:
            return r
    return None


# ---------------------------------------------------------------- serialization

def _settings_blocks(box: TripartiteBox):
    for x, y, z in itertools.product(BITS, repeat=3):
        yield [x, y, z], [float(v) for v in box.p[x, y, z].ravel()]


def box_to_json_obj(box: TripartiteBox) -> list:
    return [{"settings": s, "probs": probs} for s, probs in _settings_blocks(box)]


def box_to_json(box: TripartiteBox) -> str:
    return json.dumps(box_to_json_obj(box), indent=2)


def box_to_csv(box: TripartiteBox) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "y", "z", "a", "b", "c", "p"])
    for x, y, z, a, b, c in itertools.product(BITS, repeat=6):
        w.writerow([x, y, z, a, b, c, repr(float(box.p[x, y, z, a, b, c]))])
    return out.getvalue()


def _bit(value, where) -> int:
    if isinstance(value, bool) or value not in BITS:
        raise BoxFormatError(f"{where}: expected 0 or 1, got {value!r}")
    return int(value)


def box_from_json(text: str) -> TripartiteBox:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BoxFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(data, dict) and "blocks" in data:
        data = data["blocks"]
    if not isinstance(data, list) or len(data) != 8:
        raise BoxFormatError("top level must be a list of 8 setting blocks")
    p = np.full((2,) * 6, np.nan)
    for i, block in enumerate(data):
        where = f"block {i}"
        if not isinstance(block, dict):
            raise BoxFormatError(f"{where}: expected an object")
        for key in ("settings", "probs"):
            if key not in block:
                raise BoxFormatError(f"{where}: missing field {key!r}")
        s = block["settings"]
        if not isinstance(s, list) or len(s) != 3:
            raise BoxFormatError(f"{where}, field 'settings': expected [x, y, z]")
        x, y, z = (_bit(v, f"{where}, field 'settings'") for v in s)
        probs = block["probs"]
        if not isinstance(probs, list) or len(probs) != 8:
            raise BoxFormatError(f"{where}, field 'probs': expected 8 numbers")
        for j, v in enumerate(probs):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise BoxFormatError(f"{where}, field 'probs'[{j}]: not a number: {v!r}")
        if not np.all(np.isnan(p[x, y, z])):
            raise BoxFormatError(f"{where}: duplicate settings {s}")
        p[x, y, z] = np.asarray(probs, dtype=float).reshape(2, 2, 2)
    return TripartiteBox(p)


def box_from_csv(text: str) -> TripartiteBox:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise BoxFormatError("line 1: empty file") from None
    if [h.strip() for h in header] != ["x", "y", "z", "a", "b", "c", "p"]:
        raise BoxFormatError(f"line 1: expected header x,y,z,a,b,c,p, got {','.join(header)}")
    p = np.full((2,) * 6, np.nan)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 7:
            raise BoxFormatError(f"line {lineno}: expected 7 fields, got {len(row)}")
        idx = []
        for name, field in zip("xyzabc", row[:6]):
            try:
                idx.append(_bit(int(field), f"line {lineno}, field {name!r}"))
            except ValueError as exc:
                if isinstance(exc, BoxFormatError):
                    raise
                raise BoxFormatError(f"line {lineno}, field {name!r}: not an integer: {field!r}") from None
        try:
            val = float(row[6])
        except ValueError:
            raise BoxFormatError(f"line {lineno}, field 'p': not a number: {row[6]!r}") from None
        if not np.isnan(p[tuple(idx)]):
            raise BoxFormatError(f"line {lineno}: duplicate entry {row[:6]}")
        p[tuple(idx)] = val
    if np.any(np.isnan(p)):
        raise BoxFormatError(f"missing {int(np.isnan(p).sum())} of 64 entries")
    return TripartiteBox(p)


def load_box(path) -> TripartiteBox:
    with open(path) as fh:
        text = fh.read()
    if str(path).lower().endswith(".csv"):
        return box_from_csv(text)
    return box_from_json(text)


def dump_box(box: TripartiteBox, path, fmt: str = "json") -> None:
    text = box_to_csv(box) if fmt == "csv" else box_to_json(box) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
