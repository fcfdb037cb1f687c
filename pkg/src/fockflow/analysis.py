"""Observables extracted from final states.

Coincidence tables post-select events with exactly one particle on each
party's side; the normalized correlation divides by the four-cell mass, not
by 1, so same-side and double-occupancy events drop out the way
post-selected detection does.

``closed_form_table`` is a deliberately separate code path from the
simulator: it evaluates the analytic cos^2/sin^2 patterns directly from the
phase settings, sharing no matrix or state machinery, so agreement between
the two is a genuine cross-check rather than a tautology.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    Mode,
    ModeBasis,
    Monomial,
    StateVector,
    Statistics,
    ZeroNorm,
    norm_squared,
    outcome_probability,
)

__all__ = [
    "MeasurementPartition",
    "CoincidenceTable",
    "ChshSettings",
    "DetectorDistribution",
    "SweepRecord",
    "OverlappingPartitions",
    "ZeroCoincidenceMass",
    "DEFAULT_SIGNS",
    "coincidence_table",
    "correlation",
    "chsh_value",
    "chsh_grid_search",
    "closed_form_table",
    "sweep",
    "factorization_residual",
    "all_two_particle_outcomes",
    "completeness",
]

# dichotomic outcome convention: one detector set per party counts as +1,
# the other as -1; recorded in CLI metadata
DEFAULT_SIGNS = {
    "L": +1, "U": +1, "up": +1, "V": +1,
    "D": -1, "R": -1, "down": -1, "H": -1,
}


class OverlappingPartitions(ValueError):
    """Measurement bins overlap within or across the two parties."""


class ZeroCoincidenceMass(ValueError):
    """Correlation requested from a table whose four cells are all zero."""


@dataclass(frozen=True)
class MeasurementPartition:
    """One party's detector binning: ordered (label, mode set) pairs."""

    party: str
    kind: str
    bins: tuple

    def __post_init__(self) -> None:
        seen: set = set()
        for label, modes in self.bins:
            if seen & set(modes):
                raise OverlappingPartitions(f"bin {label!r} overlaps an earlier bin")
            seen |= set(modes)

    def labels(self) -> tuple:
        return tuple(label for label, _ in self.bins)

    def mode_union(self) -> frozenset:
        return frozenset(m for _, modes in self.bins for m in modes)

    def bin_of(self, mode: Mode) -> int | None:
        for i, (_, modes) in enumerate(self.bins):
            if mode in modes:
                return i
        return None


@dataclass(frozen=True)
class CoincidenceTable:
    row_labels: tuple
    col_labels: tuple
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError(f"table shape {p.shape} does not match labels")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def total(self) -> float:
        return float(self.probs.sum())

    def cell(self, row, col) -> float:
        return float(self.probs[self.row_labels.index(row), self.col_labels.index(col)])


@dataclass(frozen=True)
class ChshSettings:
    """Two dial values per party plus the outcome sign convention."""

    phi_a0: float
    phi_a1: float
    phi_b0: float
    phi_b1: float
    sign_map: dict = field(default_factory=lambda: dict(DEFAULT_SIGNS))


@dataclass(frozen=True)
class DetectorDistribution:
    probs: dict

    def __post_init__(self) -> None:
        for d, p in self.probs.items():
            if p < -1e-15:
                raise ValueError(f"negative probability {p} for detector {d}")
        total = sum(self.probs.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"detector probabilities sum to {total}, not 1")

    def mass(self, detectors) -> float:
        return sum(self.probs.get(d, 0.0) for d in detectors)


@dataclass(frozen=True)
class SweepRecord:
    settings: object
    table: CoincidenceTable
    correlation: float


def _state_of(run_or_state) -> StateVector:
    return getattr(run_or_state, "final_state", run_or_state)


def coincidence_table(run_or_state, part_a: MeasurementPartition, part_b: MeasurementPartition):
    """2x2 (or NxM) table of one-particle-per-party detection probabilities.

    Entry (i, j) sums the Born weights of monomials with exactly one
    particle in bin i of party A and one in bin j of party B; anything else
    (same-side pairs, double occupancy) is excluded here and accounted for
    by the completeness check instead.
    """
    state = _state_of(run_or_state)
    if part_a.mode_union() & part_b.mode_union():
        raise OverlappingPartitions("party partitions share modes")
    n2 = norm_squared(state)
    if n2 <= 0.0:
        raise ZeroNorm("state has zero norm")
    probs = np.zeros((len(part_a.bins), len(part_b.bins)))
    for mono, amp in state.terms.items():
        units = mono.ops()
        a_hits = [part_a.bin_of(m) for m in units]
        b_hits = [part_b.bin_of(m) for m in units]
        a_idx = [i for i in a_hits if i is not None]
        b_idx = [j for j in b_hits if j is not None]
        if len(a_idx) == 1 and len(b_idx) == 1 and len(units) == 2:
            probs[a_idx[0], b_idx[0]] += abs(amp) ** 2 * mono.norm_factor() / n2
    return CoincidenceTable(part_a.labels(), part_b.labels(), probs)


def correlation(table: CoincidenceTable, signs: dict = DEFAULT_SIGNS) -> float:
    """Normalized expectation of the product of the two dichotomic outcomes."""
    missing = [x for x in (*table.row_labels, *table.col_labels) if x not in signs]
    if missing:
        raise ValueError(f"sign map lacks labels: {missing}")
    total = table.total()
    if total < 1e-15:
        raise ZeroCoincidenceMass("all four coincidence cells are zero")
    num = 0.0
    for i, r in enumerate(table.row_labels):
        for j, c in enumerate(table.col_labels):
            num += signs[r] * signs[c] * table.probs[i, j]
    return num / total


def chsh_value(runner, s: ChshSettings) -> float:
    """|E(a0,b0) + E(a1,b0) + E(a0,b1) - E(a1,b1)| for a dial-pair runner."""
    e = {
        (a, b): correlation(runner(a, b), s.sign_map)
        for a in (s.phi_a0, s.phi_a1)
        for b in (s.phi_b0, s.phi_b1)
    }
    return abs(
        e[(s.phi_a0, s.phi_b0)]
        + e[(s.phi_a1, s.phi_b0)]
        + e[(s.phi_a0, s.phi_b1)]
        - e[(s.phi_a1, s.phi_b1)]
    )


def chsh_grid_search(runner, dial_grid, sign_map: dict = DEFAULT_SIGNS):
    """Maximize the CHSH combination over all dial quadruples from one grid.

    Evaluates the correlation once per grid pair, then scans the quadruples
    by broadcasting, so an n-point grid costs n^2 circuit runs, not n^4.
    """
    dials = list(dial_grid)
    n = len(dials)
    if n == 0:
        raise ValueError("dial grid must be nonempty")
    g = np.empty((n, n))
    for i, a in enumerate(dials):
        for j, b in enumerate(dials):
            g[i, j] = correlation(runner(a, b), sign_map)
    combo = (
        g[:, None, :, None] + g[None, :, :, None] + g[:, None, None, :] - g[None, :, None, :]
    )
    flat = np.abs(combo).argmax()
    i0, i1, j0, j1 = np.unravel_index(flat, combo.shape)
    best = ChshSettings(dials[i0], dials[i1], dials[j0], dials[j1], dict(sign_map))
    return float(np.abs(combo[i0, i1, j0, j1])), best


_PATH_ROWS = ("D", "L")
_PATH_COLS = ("R", "U")
_SPIN = ("down", "up")


def closed_form_table(kind: str, statistics: Statistics, settings, row_labels=None, col_labels=None):
    """Analytic coincidence table, the simulator's independent cross-check.

    The analyzer angle is theta = (phi_D - phi_L)/2 - (phi_R - phi_U)/2 for
    fermions, shifted by +pi/2 for bosons (the exchange-phase difference
    between the two statistics).  Tables are the 1/4 cos^2 / sin^2 chequers
    over that single angle.
    """
    if statistics is Statistics.FERMION:
        half_b = (settings.phi_r - settings.phi_u) / 2.0
    elif statistics is Statistics.BOSON:
        half_b = (settings.phi_r - settings.phi_u) / 2.0 - math.pi / 2.0
    else:
        raise ValueError("closed form exists only for boson or fermion statistics")
    theta = (settings.phi_d - settings.phi_l) / 2.0 - half_b
    c = 0.25 * math.cos(theta) ** 2
    s = 0.25 * math.sin(theta) ** 2
    chequer = {
        "path-path": ([[c, s], [s, c]], _PATH_ROWS, _PATH_COLS),
        "spin-spin": ([[s, c], [c, s]], _SPIN, _SPIN),
        "spin-path": ([[s, c], [c, s]], _SPIN, _PATH_COLS),
        "path-spin": ([[c, s], [s, c]], _PATH_ROWS, _SPIN),
    }
    if kind not in chequer:
        raise ValueError(f"unknown table kind {kind!r}")
    cells, rows, cols = chequer[kind]
    return CoincidenceTable(
        tuple(row_labels or rows), tuple(col_labels or cols), np.array(cells)
    )


def sweep(table_fn, grid, signs: dict = DEFAULT_SIGNS):
    """One (settings, table, correlation) record per grid point, in order."""
    records = []
    for settings in grid:
        table = table_fn(settings)
        records.append(SweepRecord(settings, table, correlation(table, signs)))
    return records


def factorization_residual(table) -> float:
    """Distance of a joint table from the product of its own marginals.

    Zero means the two tabulated variables are statistically independent;
    for the swap circuit this is the witness that one party's internal and
    external readouts carry no mutual correlation.
    """
    m = np.asarray(getattr(table, "probs", table), dtype=float)
    total = m.sum()
    if total <= 0:
        raise ValueError("table has no mass")
    predicted = np.outer(m.sum(axis=1), m.sum(axis=0)) / total
    return float(np.max(np.abs(m - predicted)))


def all_two_particle_outcomes(basis: ModeBasis, statistics: Statistics):
    """Every canonical two-particle outcome monomial over the basis.

    For distinguishable species the detector pattern is species-blind, so
    one representative per unordered (internal, external) pair is returned,
    tagged with the two species in canonical order.
    """
    if statistics is Statistics.DISTINGUISHABLE:
        if len(basis.species) != 2:
            raise ValueError("two-particle distinguishable enumeration needs two species")
        sp1, sp2 = basis.species
        pairs = []
        flavors = [(i, e) for e in basis.externals for i in basis.internals]
        for x, y in itertools.combinations_with_replacement(flavors, 2):
            a = basis.mode(x[0], x[1], sp1)
            b = basis.mode(y[0], y[1], sp2)
            pairs.append(Monomial(tuple(sorted(((a, 1), (b, 1)), key=lambda kv: kv[0].order_key()))))
        return pairs
    out = []
    for a, b in itertools.combinations(basis.modes, 2):
        out.append(Monomial(((a, 1), (b, 1))))
    if statistics is Statistics.BOSON:
        for m in basis.modes:
            out.append(Monomial(((m, 2),)))
    return out


def completeness(run_or_state, basis: ModeBasis) -> float:
    """Total probability over every enumerable two-particle outcome."""
    state = _state_of(run_or_state)
    return sum(
        outcome_probability(state, m)
        for m in all_two_particle_outcomes(basis, state.statistics)
    )
