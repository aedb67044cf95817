"""Assemblages left on the trusted parties after the untrusted parties measure.

One-sided (1SDI): Charlie is untrusted, elements sigma^AB_{c|z} are 4x4.
Two-sided (2SDI): Bob and Charlie are untrusted, elements sigma^A_{bc|yz} are 2x2.
Elements are stored unnormalized; their traces are outcome probabilities.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .boxes import BITS, TOL_BOX, TripartiteBox, _projector_stack
from .linalg import DimensionError, hermitian_min_eigenvalue, is_hermitian, partial_trace
from .states import I2, DensityMatrix, projector


class AssemblageError(ValueError):
    pass


def _check_state(rho: DensityMatrix):
    if tuple(rho.subsystem_dims) != (2, 2, 2):
        raise DimensionError(f"assemblages need a three-qubit state, got dims {rho.subsystem_dims}")


def _freeze(d: dict) -> dict:
    out = {}
    for k, m in d.items():
        m = np.array(m, dtype=complex)
        m.setflags(write=False)
        out[k] = m
    return out


@dataclass(frozen=True, eq=False)
class Assemblage1SDI:
    """Elements keyed by (c, z)."""

    elements: dict

    def __post_init__(self):
        keys = set(itertools.product(BITS, BITS))
        if set(self.elements) != keys:
            raise AssemblageError("1SDI assemblage needs elements for every (c, z)")
        for k, m in self.elements.items():
            if np.shape(m) != (4, 4):
                raise DimensionError(f"element {k} must be 4x4, got {np.shape(m)}")
        object.__setattr__(self, "elements", _freeze(self.elements))

    def reduced(self, z: int) -> np.ndarray:
        return self.elements[0, z] + self.elements[1, z]

    def check(self, tol: float = TOL_BOX) -> dict:
        """Invariant diagnostics; ``passed`` is False if any exceeds ``tol``."""
        min_eig = min(hermitian_min_eigenvalue(m, tol) for m in self.elements.values())
        herm = all(is_hermitian(m, tol) for m in self.elements.values())
        z_spread = float(np.max(np.abs(self.reduced(0) - self.reduced(1))))
        trace_err = max(abs(np.trace(self.reduced(z)) - 1) for z in BITS)
        passed = herm and min_eig >= -tol and z_spread <= tol and trace_err <= tol
        return {
            "hermitian": herm,
            "min_eigenvalue": min_eig,
            "no_signaling_error": z_spread,
            "trace_error": float(trace_err),
            "passed": bool(passed),
        }


@dataclass(frozen=True, eq=False)
class Assemblage2SDI:
    """Elements keyed by (b, c, y, z)."""

    elements: dict

    def __post_init__(self):
        keys = set(itertools.product(BITS, repeat=4))
        if set(self.elements) != keys:
            raise AssemblageError("2SDI assemblage needs elements for every (b, c, y, z)")
        for k, m in self.elements.items():
            if np.shape(m) != (2, 2):
                raise DimensionError(f"element {k} must be 2x2, got {np.shape(m)}")
        object.__setattr__(self, "elements", _freeze(self.elements))

    def reduced(self, y: int, z: int) -> np.ndarray:
        return sum(self.elements[b, c, y, z] for b in BITS for c in BITS)

    def check(self, tol: float = TOL_BOX) -> dict:
        min_eig = min(hermitian_min_eigenvalue(m, tol) for m in self.elements.values())
        herm = all(is_hermitian(m, tol) for m in self.elements.values())
        reds = [self.reduced(y, z) for y in BITS for z in BITS]
        spread = max(float(np.max(np.abs(r - reds[0]))) for r in reds)
        trace_err = max(abs(np.trace(r) - 1) for r in reds)
        # Bob's marginal must not depend on z, Charlie's not on y
        ns = 0.0
        for y, b in itertools.product(BITS, BITS):
            m0 = sum(self.elements[b, c, y, 0] for c in BITS)
            m1 = sum(self.elements[b, c, y, 1] for c in BITS)
            ns = max(ns, float(np.max(np.abs(m0 - m1))))
        for z, c in itertools.product(BITS, BITS):
            m0 = sum(self.elements[b, c, 0, z] for b in BITS)
            m1 = sum(self.elements[b, c, 1, z] for b in BITS)
            ns = max(ns, float(np.max(np.abs(m0 - m1))))
        passed = herm and min_eig >= -tol and spread <= tol and trace_err <= tol and ns <= tol
        return {
            "hermitian": herm,
            "min_eigenvalue": min_eig,
            "reduction_spread": spread,
            "no_signaling_error": ns,
            "trace_error": float(trace_err),
            "passed": bool(passed),
        }


def make_assemblage_1sdi(rho: DensityMatrix, charlie) -> Assemblage1SDI:
    """sigma^AB_{c|z} = Tr_C[(I x I x M_{c|z}) rho]."""
    _check_state(rho)
    elems = {}
    for c, z in itertools.product(BITS, BITS):
        op = np.kron(np.eye(4), projector(charlie[z], c))
        elems[c, z] = partial_trace(op @ rho.matrix, (2, 2, 2), [2])
    return Assemblage1SDI(elems)


def make_assemblage_2sdi(rho: DensityMatrix, bob, charlie) -> Assemblage2SDI:
    """sigma^A_{bc|yz} = Tr_BC[(I x M_{b|y} x M_{c|z}) rho]."""
    _check_state(rho)
    elems = {}
    for b, c, y, z in itertools.product(BITS, repeat=4):
        op = np.kron(I2, np.kron(projector(bob[y], b), projector(charlie[z], c)))
        elems[b, c, y, z] = partial_trace(op @ rho.matrix, (2, 2, 2), [1, 2])
    return Assemblage2SDI(elems)


def box_from_assemblage_1sdi(asm: Assemblage1SDI, alice, bob) -> TripartiteBox:
    """P(abc|xyz) = Tr[(M_{a|x} x M_{b|y}) sigma^AB_{c|z}]."""
    ops = _projector_stack((tuple(alice), tuple(bob)))  # [x,y,a,b,4,4]
    p = np.empty((2,) * 6)
    for c, z in itertools.product(BITS, BITS):
        p[:, :, z, :, :, c] = np.einsum("xyabij,ji->xyab", ops, asm.elements[c, z]).real
    return TripartiteBox(p)


def box_from_assemblage_2sdi(asm: Assemblage2SDI, alice) -> TripartiteBox:
    """P(abc|xyz) = Tr[M_{a|x} sigma^A_{bc|yz}]."""
    p = np.empty((2,) * 6)
    for x, a in itertools.product(BITS, BITS):
        m = projector(alice[x], a)
        for b, c, y, z in itertools.product(BITS, repeat=4):
            p[x, y, z, a, b, c] = np.trace(m @ asm.elements[b, c, y, z]).real
    return TripartiteBox(p)


def _entries(m: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(m).ravel()]


def assemblage_to_json_obj(asm) -> dict:
    if isinstance(asm, Assemblage1SDI):
        items = [
            {"settings": {"z": z}, "outcomes": {"c": c}, "entries": _entries(asm.elements[c, z])}
            for z in BITS for c in BITS
        ]
        return {"kind": "1SDI", "dim": 4, "elements": items}
    items = [
        {
            "settings": {"y": y, "z": z},
            "outcomes": {"b": b, "c": c},
            "entries": _entries(asm.elements[b, c, y, z]),
        }
        for y in BITS for z in BITS for b in BITS for c in BITS
    ]
    return {"kind": "2SDI", "dim": 2, "elements": items}


def assemblage_from_json_obj(obj: dict):
    kind = obj.get("kind")
    dim = int(obj.get("dim", 0))
    elems = {}
    for i, item in enumerate(obj.get("elements", [])):
        entries = np.asarray(item["entries"], dtype=float)
        if entries.shape != (dim * dim, 2):
            raise AssemblageError(f"element {i}: expected {dim * dim} [re, im] pairs")
        m = (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)
        s, o = item["settings"], item["outcomes"]
        if kind == "1SDI":
            elems[o["c"], s["z"]] = m
        elif kind == "2SDI":
            elems[o["b"], o["c"], s["y"], s["z"]] = m
        else:
            raise AssemblageError(f"unknown assemblage kind {kind!r}")
    return Assemblage1SDI(elems) if kind == "1SDI" else Assemblage2SDI(elems)


def assemblage_to_json(asm) -> str:
    return json.dumps(assemblage_to_json_obj(asm), indent=2)
