"""States, dichotomic observables and measurement settings."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .linalg import (
    TOL_CONSTRUCT,
    TOL_EIG,
    DimensionError,
    as_matrix,
    hermitian_min_eigenvalue,
    is_hermitian,
    ketbra,
)

SQRT2 = np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

GHZ = np.zeros(8, dtype=complex)
GHZ[0] = GHZ[7] = 1 / SQRT2

# |psi^-> = (|01> - |10>)/sqrt2
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / SQRT2

Family = Literal["svetlichny", "mermin"]
FAMILIES = ("svetlichny", "mermin")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive, unit-trace Hermitian matrix on a product of subsystems."""

    matrix: np.ndarray
    subsystem_dims: tuple[int, ...]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.subsystem_dims)
        if m.shape[0] != m.shape[1] or m.shape[0] != int(np.prod(dims)):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        if not is_hermitian(m, TOL_CONSTRUCT):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1) > TOL_CONSTRUCT:
            raise ValueError(f"density matrix trace is {tr.real:.3g}, expected 1")
        lam = hermitian_min_eigenvalue(m)
        if lam < -TOL_EIG:
            raise ValueError(f"density matrix has negative eigenvalue {lam:.3g}")
        object.__setattr__(self, "matrix", _readonly(m))
        object.__setattr__(self, "subsystem_dims", dims)

    @classmethod
    def from_ket(cls, ket, dims) -> "DensityMatrix":
        return cls(ketbra(ket), tuple(dims))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class DichotomicObservable:
    """Hermitian qubit observable with eigenvalues +1 and -1."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (2, 2):
            raise DimensionError(f"dichotomic observables are 2x2, got {m.shape}")
        if not is_hermitian(m, TOL_CONSTRUCT):
            raise ValueError(f"observable {self.label!r} is not Hermitian")
        if np.max(np.abs(m @ m - I2)) > TOL_CONSTRUCT:
            raise ValueError(f"observable {self.label!r} does not square to identity")
        if abs(np.trace(m)) > TOL_CONSTRUCT:
            # +-I squares to identity but has a single outcome
            raise ValueError(f"observable {self.label!r} is not traceless")
        object.__setattr__(self, "matrix", _readonly(m))

    @classmethod
    def from_bloch(cls, n, label: str = "") -> "DichotomicObservable":
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        return cls(n[0] * SX + n[1] * SY + n[2] * SZ, label)

    def projector(self, outcome: int) -> np.ndarray:
        return projector(self, outcome)


@dataclass(frozen=True)
class MeasurementSettings:
    """Two dichotomic observables per party, indexed by setting 0/1."""

    alice: tuple[DichotomicObservable, DichotomicObservable]
    bob: tuple[DichotomicObservable, DichotomicObservable]
    charlie: tuple[DichotomicObservable, DichotomicObservable]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for party in (self.alice, self.bob, self.charlie):
            if len(party) != 2 or not all(isinstance(o, DichotomicObservable) for o in party):
                raise ValueError("each party needs exactly two DichotomicObservable entries")

    def parties(self):
        return (self.alice, self.bob, self.charlie)


def projector(obs: DichotomicObservable, outcome: int) -> np.ndarray:
    """(I + (-1)^outcome obs) / 2; outcome 0 is eigenvalue +1."""
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    m = obs.matrix if isinstance(obs, DichotomicObservable) else as_matrix(obs)
    return (I2 + (-1) ** outcome * m) / 2


def noisy_ghz(v: float) -> DensityMatrix:
    """V |GHZ><GHZ| + (1 - V) I/8."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    rho = v * ketbra(GHZ) + (1 - v) * np.eye(8) / 8
    return DensityMatrix(rho, (2, 2, 2))


def ghz_witness_value(rho: DensityMatrix) -> float:
    """Tr[(I/2 - |GHZ><GHZ|) rho]; negative values certify genuine tripartite entanglement.

    On the noisy GHZ state this equals 3/8 - 7V/8, vanishing at V = 3/7.
    """
    if tuple(rho.subsystem_dims) != (2, 2, 2):
        raise DimensionError(f"witness needs a three-qubit state, got dims {rho.subsystem_dims}")
    w = np.eye(8) / 2 - ketbra(GHZ)
    return float(np.trace(w @ rho.matrix).real)


def singlet_ext(v: float = 1.0) -> DensityMatrix:
    """Werner-noised singlet on AB with Charlie in |0>."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    ab = v * ketbra(SINGLET) + (1 - v) * np.eye(4) / 4
    c = np.diag([1.0, 0.0]).astype(complex)
    return DensityMatrix(np.kron(ab, c), (2, 2, 2))


def _obs(m, label):
    return DichotomicObservable(m, label)


def svetlichny_settings() -> MeasurementSettings:
    return MeasurementSettings(
        alice=(_obs(SX, "sx"), _obs(SY, "sy")),
        bob=(_obs((SX - SY) / SQRT2, "(sx-sy)/sqrt2"), _obs((SX + SY) / SQRT2, "(sx+sy)/sqrt2")),
        charlie=(_obs(SX, "sx"), _obs(SY, "sy")),
        name="svetlichny-optimal",
    )


def mermin_settings() -> MeasurementSettings:
    """GHZ-paradox settings producing the Mermin family from the noisy GHZ state.

    Charlie's pair is ordered (C0, C1) = (-sy, sx). With the opposite order the
    GHZ state yields the Mermin family only up to the relabeling z -> z + 1.
    """
    return MeasurementSettings(
        alice=(_obs(SX, "sx"), _obs(SY, "sy")),
        bob=(_obs(SX, "sx"), _obs(SY, "sy")),
        charlie=(_obs(-SY, "-sy"), _obs(SX, "sx")),
        name="ghz-paradox",
    )


def svetlichny_ab_observables():
    s = svetlichny_settings()
    return s.alice, s.bob


def mermin_ab_observables():
    s = mermin_settings()
    return s.alice, s.bob


def psi_lambda(family: Family, lam: int, v: float) -> np.ndarray:
    """Two-qubit state cos(t)|00> + phase sin(t)/sqrt2 |11> with sin(2t) = sqrt2 V.

    The phase per (family, lam) follows the states generating the hidden-state
    tables of the corresponding steering model.
    """
    phases = {
        "svetlichny": (1 - 1j, -(1 - 1j), 1 + 1j, -(1 + 1j)),
        "mermin": (1 + 1j, -(1 + 1j), -(1 - 1j), 1 - 1j),
    }
    if family not in phases:
        raise ValueError(f"unknown family {family!r}")
    if lam not in (0, 1, 2, 3):
        raise ValueError(f"lambda must be in 0..3, got {lam}")
    vmax = 1 / SQRT2
    if not (0.0 < v <= vmax + TOL_CONSTRUCT):
        raise ValueError(f"v must lie in (0, 1/sqrt2], got {v}")
    s2t = min(SQRT2 * v, 1.0)
    theta = 0.5 * np.arcsin(s2t)
    ket = np.zeros(4, dtype=complex)
    ket[0] = np.cos(theta)
    ket[3] = phases[family][lam] * np.sin(theta) / SQRT2
    return ket


STATES = ("noisy-ghz", "singlet-ext")
SETTINGS = {"svetlichny-optimal": svetlichny_settings, "ghz-paradox": mermin_settings}


def state_by_name(name: str, v: float = 1.0) -> DensityMatrix:
    if name == "noisy-ghz":
        return noisy_ghz(v)
    if name in ("singlet-ext", "singlet"):
        return singlet_ext(v)
    raise ValueError(f"unknown state {name!r}; choose from {STATES}")


def settings_by_name(name: str) -> MeasurementSettings:
    try:
        return SETTINGS[name]()
    except KeyError:
        raise ValueError(f"unknown settings {name!r}; choose from {tuple(SETTINGS)}") from None
