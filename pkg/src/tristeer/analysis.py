"""Parameter scans, single-point analyses and model verification.

These functions back the command-line subcommands and return plain,
JSON-ready structures.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import boxes, inequalities as ineq
from .assemblages import (
    box_from_assemblage_1sdi,
    box_from_assemblage_2sdi,
    make_assemblage_1sdi,
    make_assemblage_2sdi,
)
from .lhv import V_MAX, verify_model
from .linalg import partial_trace
from .states import FAMILIES, ghz_witness_value, noisy_ghz, settings_by_name, state_by_name

WITNESS_FLAG = "ghz-witness"


class ModelRangeError(ValueError):
    """Requested visibility lies outside the range where the explicit model exists."""


def flag_names() -> list[str]:
    return [name for name, *_ in ineq.BOUNDS] + [WITNESS_FLAG]


def _margin_fn(family: str, name: str):
    if name == WITNESS_FLAG:
        # witness < 0 certifies genuine entanglement; margin is its negation
        return lambda v: -ghz_witness_value(noisy_ghz(v))
    bound = ineq.BOUND_BY_NAME[name][2]
    return lambda v: ineq.operator_value(name, boxes.family_box(family, v)) - bound


def _refine(margin, lo: float, hi: float, tol_v: float) -> float:
    """Crossing of margin = 0 between lo (below) and hi (above)."""
    if margin(lo) > 0:
        return lo
    return ineq.bisect_crossing(lambda v: margin(v) > 0, lo, hi, tol_v)


@dataclass
class RegionReport:
    family: str
    grid: list
    rows: list
    thresholds: dict
    tol: float
    seed: int = 0
    sampling: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "family": self.family,
            "tol": self.tol,
            "seed": self.seed,
            "grid": list(self.grid),
            "thresholds": dict(sorted(self.thresholds.items())),
            "rows": self.rows,
        }
        if self.sampling:
            d["sampling"] = self.sampling
        return d

    def to_csv(self) -> str:
        names = flag_names()
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["v", "S", "M", "witness"] + names)
        for r in self.rows:
            w.writerow(
                [repr(r["v"]), repr(r["S"]), repr(r["M"]), repr(r["witness"])]
                + [int(r["flags"][n]) for n in names]
            )
        return out.getvalue()

    def strip(self, width: int = 64) -> str:
        """ASCII region diagram: one row per flag, '#' where violated or certified."""
        n = len(self.rows)
        cols = np.unique(np.linspace(0, n - 1, min(width, n)).round().astype(int))
        names = flag_names()
        pad = max(len(s) for s in names)
        lines = [f"{self.family} family, V from {self.grid[0]:g} to {self.grid[-1]:g}"]
        for name in names:
            cells = "".join("#" if self.rows[i]["flags"][name] else "." for i in cols)
            t = self.thresholds.get(name)
            tail = f"  V* = {t:.9f}" if t is not None else ""
            lines.append(f"{name:<{pad}} |{cells}|{tail}")
        return "\n".join(lines)


def _row(family: str, v: float, tol: float) -> dict:
    box = boxes.family_box(family, v)
    reports = ineq.classify(box, tol)
    witness = ghz_witness_value(noisy_ghz(v))
    flags = {r.name: r.violated for r in reports}
    flags[WITNESS_FLAG] = bool(witness < -tol)
    return {
        "v": float(v),
        "S": ineq.svetlichny_value(box),
        "M": ineq.mermin_value(box),
        "witness": witness,
        "flags": flags,
    }


def scan(
    family: str,
    v_min: float = 0.0,
    v_max: float = 1.0,
    steps: int = 1001,
    tol: float = ineq.TOL_VIOLATION,
    seed: int = 0,
    samples: int = 0,
) -> RegionReport:
    """Classify a grid of visibilities and refine every flag change by bisection."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if not (0.0 <= v_min < v_max <= 1.0):
        raise ValueError(f"need 0 <= v_min < v_max <= 1, got [{v_min}, {v_max}]")
    if steps < 2:
        raise ValueError(f"steps must be at least 2, got {steps}")
    grid = [float(v) for v in np.linspace(v_min, v_max, steps)]
    rows = [_row(family, v, tol) for v in grid]
    thresholds = {}
    for name in flag_names():
        flags = [r["flags"][name] for r in rows]
        for i in range(len(grid) - 1):
            if flags[i] != flags[i + 1]:
                lo, hi = grid[i], grid[i + 1]
                margin = _margin_fn(family, name)
                if flags[i]:
                    thresholds[name] = _refine(lambda v: -margin(v), lo, hi, 1e-13)
                else:
                    thresholds[name] = _refine(margin, lo, hi, 1e-13)
                break
    sampling = []
    if samples > 0:
        for op, sname in (("S", "svetlichny-optimal"), ("M", "ghz-paradox")):
            st = settings_by_name(sname)
            sampling.append(ineq.biseparable_sampling(op, st, samples, seed).to_dict())
            sampling.append(ineq.fully_product_sampling(op, st, samples, seed).to_dict())
    return RegionReport(family, grid, rows, thresholds, tol, seed, sampling)


def witness_root(tol: float = 1e-15) -> float:
    """Visibility where the GHZ witness on the noisy GHZ state changes sign."""
    return ineq.bisect_crossing(lambda v: ghz_witness_value(noisy_ghz(v)) < 0, 0.0, 1.0, tol)


def _assemblage_section(rho, settings, box) -> dict:
    a1 = make_assemblage_1sdi(rho, settings.charlie)
    a2 = make_assemblage_2sdi(rho, settings.bob, settings.charlie)
    red1 = partial_trace(rho.matrix, (2, 2, 2), [2])
    red2 = partial_trace(rho.matrix, (2, 2, 2), [1, 2])
    return {
        "one_sided": {
            **a1.check(),
            "reduction_error": max(float(np.max(np.abs(a1.reduced(z) - red1))) for z in (0, 1)),
            "two_path_error": boxes.max_abs_diff(box_from_assemblage_1sdi(a1, settings.alice, settings.bob), box),
        },
        "two_sided": {
            **a2.check(),
            "reduction_error": max(
                float(np.max(np.abs(a2.reduced(y, z) - red2))) for y in (0, 1) for z in (0, 1)
            ),
            "two_path_error": boxes.max_abs_diff(box_from_assemblage_2sdi(a2, settings.alice), box),
        },
    }


def analyze(
    family: str | None = None,
    v: float | None = None,
    state: str | None = None,
    settings: str | None = None,
    box_file: str | None = None,
    tol: float = ineq.TOL_VIOLATION,
) -> dict:
    """Full report for exactly one source: a family at V, a state with settings, or a box file."""
    given = [family is not None, state is not None, box_file is not None]
    if sum(given) != 1:
        raise ValueError("give exactly one of family, state or box file")

    out: dict = {}
    rho = st = None
    if family is not None:
        if v is None:
            raise ValueError("a family source needs v")
        box = boxes.family_box(family, v)
        out["source"] = {"family": family, "v": v}
    elif state is not None:
        v = 1.0 if v is None else v
        rho = state_by_name(state, v)
        st = settings_by_name(settings or "svetlichny-optimal")
        box = boxes.born_tripartite(rho, st)
        out["source"] = {"state": state, "v": v, "settings": st.name}
    else:
        box = boxes.load_box(box_file)
        out["source"] = {"box_file": str(box_file)}

    ns = boxes.check_no_signaling(box, tol)
    if not ns.passed:
        raise boxes.BoxValidationError(
            f"no-signaling violated: discrepancy {ns.max_violation:.3g} in the {ns.worst_marginal} marginal"
        )
    out["no_signaling"] = ns.to_dict()
    out["values"] = {"S": ineq.svetlichny_value(box), "M": ineq.mermin_value(box)}
    out["reports"] = [r.to_dict() for r in ineq.classify(box, tol)]
    out["svetlichny_chsh_identity_error"] = ineq.svetlichny_chsh_identity_check(box)
    if rho is not None:
        out["ghz_witness"] = ghz_witness_value(rho)
        out["assemblages"] = _assemblage_section(rho, st, box)
    if family is not None and 0 < v <= V_MAX + 1e-12:
        out["model_verification"] = verify_model(family, v).to_dict()
    out["box"] = boxes.box_to_json_obj(box)
    return out


def verify(family: str, v: float):
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if not (0 < v <= V_MAX + 1e-12):
        raise ModelRangeError(
            f"model out of stated range: the explicit {family} decomposition exists for 0 < V <= 1/sqrt2, got {v}"
        )
    return verify_model(family, v)
