"""Unitary mode transforms for passive linear-optical elements.

Every element is a square complex matrix over a declared mode basis, with
matrix[n, m] the coefficient of output mode n for input mode m, so that a
creation operator rewrites as a_m^dag -> sum_n matrix[n, m] a_n^dag.

Conventions frozen here:
- Balanced splitters are symmetric: transmission amplitude 1/sqrt(2) real,
  reflection i/sqrt(2).
- The hybrid splitter preserves the internal label on transmission and
  flips it (with the i) on reflection; it requires a two-element internal
  label set.
- Elements act identically on every species: passive optics cannot address
  particle identity.
- Sorters and exchange wirings are permutation matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Mode, ModeBasis, UnknownMode

__all__ = [
    "ModeTransform",
    "DuplicatePort",
    "InternalSetNotBinary",
    "IncompleteRouting",
    "NotBijective",
    "BasisMismatch",
    "identity",
    "phase_shifter",
    "beam_splitter",
    "hybrid_beam_splitter",
    "dof_sorter",
    "exchange_wiring",
    "compose",
    "verify_unitary",
]

COLUMN_DROP_TOLERANCE = 1e-14


class DuplicatePort(ValueError):
    """A splitter was given coinciding or ambiguously overlapping ports."""


class InternalSetNotBinary(ValueError):
    """A hybrid splitter needs exactly two internal labels to flip between."""


class IncompleteRouting(ValueError):
    """A sorter's routing map does not cover the selected label set."""


class NotBijective(ValueError):
    """A relabeling could not be completed to a permutation."""


class BasisMismatch(ValueError):
    """Transforms could not be embedded into a common mode basis."""


@dataclass(frozen=True)
class ModeTransform:
    """A linear map on creation operators over a fixed mode basis.

    ``columns[m]`` caches the nonzero entries of column m as (mode, value)
    pairs; substitution iterates these instead of scanning the dense matrix.
    """

    basis: ModeBasis
    matrix: np.ndarray
    name: str = ""
    columns: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.basis)
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (n, n):
            raise ValueError(f"matrix shape {mat.shape} does not match basis size {n}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        cols = []
        for m in range(n):
            col = tuple(
                (self.basis.modes[k], mat[k, m])
                for k in np.flatnonzero(np.abs(mat[:, m]) > COLUMN_DROP_TOLERANCE)
            )
            cols.append(col)
        object.__setattr__(self, "columns", tuple(cols))


def identity(basis: ModeBasis, name: str = "identity") -> ModeTransform:
    return ModeTransform(basis, np.eye(len(basis), dtype=complex), name)


def _external(basis: ModeBasis, name: str) -> str:
    if name not in basis.externals:
        raise UnknownMode(f"external label {name!r} not declared (have {basis.externals})")
    return name


def phase_shifter(basis: ModeBasis, port: str, phase: float) -> ModeTransform:
    """e^{i phase} on every mode at the given external port, identity elsewhere."""
    _external(basis, port)
    mat = np.eye(len(basis), dtype=complex)
    factor = np.exp(1j * phase)
    for k, mode in enumerate(basis.modes):
        if mode.external.name == port:
            mat[k, k] = factor
    return ModeTransform(basis, mat, f"phase {port} {phase:g}")


def _splitter(basis, in_a, in_b, out_t, out_r, flip, name):
    out_t = in_a if out_t is None else out_t
    out_r = in_b if out_r is None else out_r
    for p in (in_a, in_b, out_t, out_r):
        _external(basis, p)
    if in_a == in_b or out_t == out_r:
        raise DuplicatePort(f"splitter ports must differ: in ({in_a},{in_b}) out ({out_t},{out_r})")
    ins, outs = {in_a, in_b}, {out_t, out_r}
    if ins != outs and ins & outs:
        raise DuplicatePort(
            f"output ports must reuse both input ports or neither: {sorted(ins)} vs {sorted(outs)}"
        )

    def image(label):
        return label if flip is None else flip[label]

    t, r = 1.0 / np.sqrt(2.0), 1j / np.sqrt(2.0)
    mat = np.eye(len(basis), dtype=complex)
    # (input port, transmitted port, reflected port); disjoint output pairs
    # get the reverse direction filled with the same mixer to stay unitary
    routes = [(in_a, out_t, out_r), (in_b, out_r, out_t)]
    if ins != outs:
        routes += [(out_t, in_a, in_b), (out_r, in_b, in_a)]
    for sp in basis.species:
        for il in basis.internals:
            for port, _, _ in routes:
                k = basis.index_of(basis.mode(il, port, sp))
                mat[k, k] = 0.0
            for port, p_t, p_r in routes:
                m = basis.index_of(basis.mode(il, port, sp))
                mat[basis.index_of(basis.mode(il, p_t, sp)), m] = t
                mat[basis.index_of(basis.mode(image(il), p_r, sp)), m] = r
    return ModeTransform(basis, mat, name)


def beam_splitter(basis, in_a, in_b, out_t=None, out_r=None):
    """Balanced splitter preserving the internal label.

    a(s, in_a) -> (a(s, out_t) + i a(s, out_r)) / sqrt(2)
    a(s, in_b) -> (a(s, out_r) + i a(s, out_t)) / sqrt(2)

    Output ports default to the input ports (the self-looped arm case).
    """
    return _splitter(
        basis, in_a, in_b, out_t, out_r, None, f"bs {in_a} {in_b} -> {out_t or in_a} {out_r or in_b}"
    )


def hybrid_beam_splitter(basis, in_a, in_b, out_t=None, out_r=None):
    """Balanced splitter flipping the internal label on the reflected arm.

    a(s, in_a) -> (a(s, out_t) + i a(flip s, out_r)) / sqrt(2)
    a(s, in_b) -> (a(s, out_r) + i a(flip s, out_t)) / sqrt(2)

    The flip entangles internal with external, which is what makes this the
    circuit's entangling element.
    """
    if len(basis.internals) != 2:
        raise InternalSetNotBinary(
            f"hybrid splitter needs exactly 2 internal labels, got {basis.internals}"
        )
    lo, hi = basis.internals
    return _splitter(
        basis,
        in_a,
        in_b,
        out_t,
        out_r,
        {lo: hi, hi: lo},
        f"hbs {in_a} {in_b} -> {out_t or in_a} {out_r or in_b}",
    )


def _permutation(basis: ModeBasis, port_map, name: str) -> ModeTransform:
    """Permutation matrix moving (s, e) -> (s, port_map[e]) for every species."""
    mat = np.zeros((len(basis), len(basis)), dtype=complex)
    for m, mode in enumerate(basis.modes):
        target = basis.mode(mode.internal.name, port_map[mode.external.name], mode.species)
        mat[basis.index_of(target), m] = 1.0
    return ModeTransform(basis, mat, name)


def dof_sorter(basis: ModeBasis, selector: str, routing: dict, port: str | None = None):
    """Route particles to output ports according to one degree of freedom.

    selector "internal" sorts the particles arriving at ``port``: a particle
    with internal label s is sent to external port routing[s].  The matrix
    is the product of the transpositions (s, port) <-> (s, routing[s]), so
    it is its own inverse; routed-to ports are expected to be unoccupied
    upstream, the way a fresh detector rail is.

    selector "external" relabels ports wholesale: routing must be a total
    permutation of the external label set.
    """
    if selector == "internal":
        if port is None:
            raise ValueError("internal sorter needs the input port it sorts")
        _external(basis, port)
        missing = [s for s in basis.internals if s not in routing]
        if missing:
            raise IncompleteRouting(f"internal labels without a route: {missing}")
        targets = [routing[s] for s in basis.internals]
        for tgt in targets:
            _external(basis, tgt)
        if len(set(targets)) != len(targets):
            raise NotBijective(f"internal sorter targets must be distinct: {targets}")
        port_map_per_internal = {s: routing[s] for s in basis.internals}
        mat = np.eye(len(basis), dtype=complex)
        for sp in basis.species:
            for s, tgt in port_map_per_internal.items():
                if tgt == port:
                    continue
                a = basis.index_of(basis.mode(s, port, sp))
                b = basis.index_of(basis.mode(s, tgt, sp))
                mat[a, a] = mat[b, b] = 0.0
                mat[b, a] = mat[a, b] = 1.0
        return ModeTransform(basis, mat, f"sorter internal {port}")
    if selector == "external":
        missing = [e for e in basis.externals if e not in routing]
        if missing:
            raise IncompleteRouting(f"external labels without a route: {missing}")
        for tgt in routing.values():
            _external(basis, tgt)
        if sorted(routing[e] for e in basis.externals) != sorted(basis.externals):
            raise NotBijective(f"external routing is not a permutation: {routing}")
        return ModeTransform(
            basis, _permutation(basis, routing, "").matrix, "sorter external"
        )
    raise ValueError(f"selector must be 'internal' or 'external', got {selector!r}")


def exchange_wiring(basis: ModeBasis, relabel: dict) -> ModeTransform:
    """Rename external ports by a partial bijection, internal labels untouched.

    Targets that are not themselves relabeled are sent back to the head of
    their chain, so a one-way map like {D: DA} completes to the swap
    {D: DA, DA: D}; unmentioned ports stay fixed.
    """
    for k, v in relabel.items():
        _external(basis, k)
        _external(basis, v)
    complete = dict(relabel)
    if len(set(complete.values())) != len(complete):
        raise NotBijective(f"relabel targets repeat: {relabel}")
    reverse = {v: k for k, v in complete.items()}
    for v in list(complete.values()):
        if v not in complete:
            head = v
            while head in reverse:
                head = reverse[head]
            complete[v] = head
    for e in basis.externals:
        complete.setdefault(e, e)
    if sorted(complete.values()) != sorted(basis.externals):
        raise NotBijective(f"completed relabel is not a permutation: {complete}")
    return _permutation(basis, complete, "exchange")


def _merge_labels(sequences):
    """Merge label tuples preserving each one's relative order."""
    merged: list = []
    for seq in sequences:
        positions = [merged.index(x) for x in seq if x in merged]
        if positions != sorted(positions):
            raise BasisMismatch(f"label order conflict merging {seq} into {tuple(merged)}")
        for x in seq:
            if x not in merged:
                merged.append(x)
    out = tuple(merged)
    for seq in sequences:
        it = iter(out)
        if not all(x in it for x in seq):
            raise BasisMismatch(f"cannot interleave {seq} into {out}")
    return out


def _union_basis(bases):
    first = bases[0]
    if all(b == first for b in bases):
        return first
    return ModeBasis(
        internals=_merge_labels([b.internals for b in bases]),
        externals=_merge_labels([b.externals for b in bases]),
        species=_merge_labels([b.species for b in bases]),
    )


def _embed(t: ModeTransform, basis: ModeBasis) -> ModeTransform:
    if t.basis == basis:
        return t
    mat = np.eye(len(basis), dtype=complex)
    idx = [basis.index_of(m) for m in t.basis.modes]
    for m_old, m_new in enumerate(idx):
        mat[:, m_new] = 0.0
        for n_old, n_new in enumerate(idx):
            mat[n_new, m_new] = t.matrix[n_old, m_old]
    return ModeTransform(basis, mat, t.name)


def compose(stages, basis: ModeBasis | None = None) -> ModeTransform:
    """Product of the stages in application order (first stage acts first).

    Stages over different bases are embedded into the merged basis, padded
    with identity on the modes they do not touch.
    """
    stages = list(stages)
    if not stages:
        if basis is None:
            raise ValueError("compose of no stages needs an explicit basis")
        return identity(basis, "composed")
    bases = [t.basis for t in stages] + ([basis] if basis is not None else [])
    union = _union_basis(bases)
    total = np.eye(len(union), dtype=complex)
    for t in stages:
        total = _embed(t, union).matrix @ total
    return ModeTransform(union, total, "composed")


def verify_unitary(t: ModeTransform, tol: float = 1e-12) -> bool:
    """True iff max |T^dag T - I| entry is below tol."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    gram = t.matrix.conj().T @ t.matrix
    return bool(np.max(np.abs(gram - np.eye(len(t.basis)))) < tol)
