"""Sparse state vectors over the labelled subsystems of the teleportation setup.

A :class:`StateVector` maps composite basis labels (one label per subsystem
kind) to complex amplitudes.  Every kind has a canonical basis plus a few
alternative bases (parity, linear polarisation, ...); a state records which
basis each of its kinds is currently written in, and operations convert on the
fly where two operands disagree.

The Hilbert space is tiny (at most 2*2*5*2*2 = 80 dimensions) so everything is
plain dictionaries; numpy is only used for the 2x2 basis-change matrices and
for Schmidt factorisation.
"""

from __future__ import annotations

import enum
import functools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

PRUNE_TOL = 1e-14
DEGENERACY_TOL = 1e-14


class Kind(str, enum.Enum):
    MOLECULE = "molecule"
    PHOTON1_POL = "photon1_pol"
    PHOTON1_PATH = "photon1_path"
    PHOTON2_POL = "photon2_pol"
    FLUOR = "fluor"


KIND_ORDER = (Kind.MOLECULE, Kind.PHOTON1_POL, Kind.PHOTON1_PATH, Kind.PHOTON2_POL, Kind.FLUOR)
_POL_KINDS = frozenset({Kind.PHOTON1_POL, Kind.PHOTON2_POL})

_S2 = 1 / math.sqrt(2)


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis of one subsystem.

    ``matrix[:, j]`` holds basis ket ``labels[j]`` in the kind's canonical
    coordinates.
    """

    name: str
    kinds: frozenset
    labels: tuple[str, ...]
    matrix: np.ndarray = field(repr=False, compare=False)


def _basis(name, kinds, labels, columns) -> Basis:
    mat = np.array(columns, dtype=complex).T
    mat.setflags(write=False)
    return Basis(name, frozenset(kinds), tuple(labels), mat)


BASES: dict[str, Basis] = {
    b.name: b
    for b in (
        _basis("chiral", {Kind.MOLECULE}, ("L", "R"), [[1, 0], [0, 1]]),
        _basis("parity", {Kind.MOLECULE}, ("+", "-"), [[_S2, _S2], [_S2, -_S2]]),
        _basis(
            "false_chirality",
            {Kind.MOLECULE},
            ("F+", "F-"),
            [[_S2, 1j * _S2], [_S2, -1j * _S2]],
        ),
        # Two arbitrary molecular states standing in for L/R (Faraday case).
        _basis("faraday", {Kind.MOLECULE}, ("A", "B"), [[1, 0], [0, 1]]),
        _basis("circular", _POL_KINDS, ("l", "r"), [[1, 0], [0, 1]]),
        # |y> carries the +i prefactor: |y> = i(|l> - |r>)/sqrt2.
        _basis("linear", _POL_KINDS, ("x", "y"), [[_S2, _S2], [1j * _S2, -1j * _S2]]),
        _basis(
            "path",
            {Kind.PHOTON1_PATH},
            ("source", "top", "bottom", "D2", "other"),
            np.eye(5).tolist(),
        ),
        _basis("fluor", {Kind.FLUOR}, ("nu0", "nu1"), [[1, 0], [0, 1]]),
    )
}

CANONICAL_BASIS = {
    Kind.MOLECULE: "chiral",
    Kind.PHOTON1_POL: "circular",
    Kind.PHOTON1_PATH: "path",
    Kind.PHOTON2_POL: "circular",
    Kind.FLUOR: "fluor",
}

_LABEL_BASIS: dict[tuple[Kind, str], str] = {
    (kind, label): b.name for b in BASES.values() for kind in b.kinds for label in b.labels
}


def _as_kind(kind) -> Kind:
    try:
        return Kind(kind)
    except ValueError:
        raise ValueError(f"unknown subsystem kind {kind!r}") from None


def basis_of(kind, label: str) -> str:
    """Name of the basis that owns ``label`` for ``kind``."""
    kind = _as_kind(kind)
    try:
        return _LABEL_BASIS[(kind, label)]
    except KeyError:
        raise ValueError(f"label {label!r} is not valid for {kind.value}") from None


def _check_basis(kind: Kind, basis: str) -> Basis:
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}")
    b = BASES[basis]
    if kind not in b.kinds:
        raise ValueError(f"basis {basis!r} does not apply to {kind.value}")
    return b


@dataclass(frozen=True)
class StateVector:
    """Immutable sparse ket.

    Build states with :func:`make_state` rather than the constructor; the
    helpers keep ``terms`` pruned.  Use :meth:`items` for the canonical
    (kind order, then basis label order) iteration used in serialisation.
    """

    kinds: tuple[Kind, ...]
    bases: tuple[str, ...]
    terms: Mapping[tuple[str, ...], complex]

    # -- scalar properties -------------------------------------------------
    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.terms.values()))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def normalized(self) -> StateVector:
        n = self.norm()
        if n < DEGENERACY_TOL:
            raise ValueError("cannot normalise a zero state")
        return self * (1.0 / n)

    def amplitude(self, labels: Mapping | Sequence[str]) -> complex:
        """Amplitude of one basis ket, written in this state's current bases."""
        if isinstance(labels, Mapping):
            by_kind = {_as_kind(k): v for k, v in labels.items()}
            labels = tuple(by_kind[k] for k in self.kinds)
        return self.terms.get(tuple(labels), 0j)

    def basis_for(self, kind) -> str:
        return self.bases[self.kinds.index(_as_kind(kind))]

    # -- arithmetic ----------------------------------------------------------
    def __mul__(self, scalar) -> StateVector:
        scalar = complex(scalar)
        return _build(self.kinds, self.bases, {k: c * scalar for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> StateVector:
        return self * (1.0 / complex(scalar))

    def __neg__(self) -> StateVector:
        return self * -1

    def __add__(self, other: StateVector) -> StateVector:
        if not isinstance(other, StateVector):
            return NotImplemented
        if set(self.kinds) != set(other.kinds):
            raise ValueError("cannot add states over different subsystems")
        other = match_bases(other, self)
        acc = dict(self.terms)
        for key, c in other.terms.items():
            acc[key] = acc.get(key, 0j) + c
        return _build(self.kinds, self.bases, acc)

    def __sub__(self, other: StateVector) -> StateVector:
        return self + (-other)

    # -- views ---------------------------------------------------------------
    def items(self) -> list[tuple[tuple[str, ...], complex]]:
        """Terms in canonical order."""
        key = _sort_key(self.bases) if self.kinds else None
        return sorted(self.terms.items(), key=(lambda kv: key(kv[0])) if key else None)

    def canonical(self) -> StateVector:
        """The same ket with every kind in its canonical basis."""
        out = self
        for kind in self.kinds:
            out = change_basis(out, kind, CANONICAL_BASIS[kind])
        return out

    def to_dict(self) -> dict:
        return {
            "subsystems": [k.value for k in self.kinds],
            "terms": [
                {
                    "labels": {k.value: lab for k, lab in zip(self.kinds, key)},
                    "re": c.real,
                    "im": c.imag,
                }
                for key, c in self.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> StateVector:
        kinds = [_as_kind(k) for k in data["subsystems"]]
        terms = []
        for t in data["terms"]:
            labels = {_as_kind(k): v for k, v in t["labels"].items()}
            if set(labels) != set(kinds):
                raise ValueError("term labels do not match the declared subsystems")
            terms.append((labels, complex(t["re"], t["im"])))
        if not terms:
            return zero_state({k: CANONICAL_BASIS[k] for k in kinds})
        return make_state(terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "StateVector(0)"
        parts = []
        for key, c in self.items():
            parts.append(f"({c.real:+.4g}{c.imag:+.4g}j)|{','.join(key)}>")
        return "StateVector(" + " ".join(parts) + ")"


_RANK = {name: {lab: chr(65 + i) for i, lab in enumerate(b.labels)} for name, b in BASES.items()}


@functools.lru_cache(maxsize=None)
def _sort_key(bases: tuple[str, ...]):
    ranks = [_RANK[b] for b in bases]
    if len(ranks) == 1:
        (r0,) = ranks
        return lambda key: r0[key[0]]
    return lambda key: "".join([r[lab] for r, lab in zip(ranks, key)])


def _build(kinds, bases, terms: Mapping) -> StateVector:
    kept = {}
    total = 0.0
    for k, c in terms.items():
        mag = abs(c)
        total += mag
        if mag >= PRUNE_TOL:
            kept[k] = complex(c)
    if not math.isfinite(total):
        raise ValueError("non-finite amplitude")
    return StateVector(tuple(kinds), tuple(bases), kept)


def _from_kind_map(kinds_bases: Mapping[Kind, str], terms: Mapping) -> StateVector:
    """Build from terms keyed by label tuples in ``KIND_ORDER``-sorted kind order."""
    kinds = tuple(k for k in KIND_ORDER if k in kinds_bases)
    return _build(kinds, tuple(kinds_bases[k] for k in kinds), terms)


def zero_state(kinds_bases: Mapping) -> StateVector:
    kb = {_as_kind(k): b for k, b in kinds_bases.items()}
    for k, b in kb.items():
        _check_basis(k, b)
    return _from_kind_map(kb, {})


def make_state(terms: Iterable[tuple[Mapping, complex]]) -> StateVector:
    """Build a (not normalised) state from ``(labels, amplitude)`` pairs.

    ``labels`` maps subsystem kind to label, e.g. ``{"molecule": "L",
    "photon1_pol": "r"}``.  Repeated labels accumulate.  The basis of each kind
    is inferred from its labels and must agree across terms.

    >>> make_state([({"molecule": "L"}, 1), ({"molecule": "L"}, 1)]).amplitude(["L"])
    (2+0j)
    """
    terms = list(terms)
    if not terms:
        raise ValueError("make_state needs at least one term")
    first = {_as_kind(k) for k in terms[0][0]}
    bases: dict[Kind, str] = {}
    acc: dict[tuple[str, ...], complex] = {}
    kinds = tuple(k for k in KIND_ORDER if k in first)
    for labels, amp in terms:
        lab = {_as_kind(k): v for k, v in labels.items()}
        if set(lab) != first:
            raise ValueError("all terms must cover the same subsystem kinds")
        for kind, value in lab.items():
            b = basis_of(kind, value)
            if bases.setdefault(kind, b) != b:
                raise ValueError(f"mixed bases for {kind.value}: {bases[kind]} and {b}")
        key = tuple(lab[k] for k in kinds)
        acc[key] = acc.get(key, 0j) + complex(amp)
    return _from_kind_map(bases, acc)


def ket(**labels: str) -> StateVector:
    """Single basis ket, e.g. ``ket(molecule="L", photon1_pol="l")``."""
    return make_state([(labels, 1.0)])


def tensor(s1: StateVector, s2: StateVector) -> StateVector:
    overlap = set(s1.kinds) & set(s2.kinds)
    if overlap:
        raise ValueError(f"overlapping subsystems: {sorted(k.value for k in overlap)}")
    kb = dict(zip(s1.kinds, s1.bases)) | dict(zip(s2.kinds, s2.bases))
    kinds = tuple(k for k in KIND_ORDER if k in kb)
    acc = {}
    for k1, c1 in s1.terms.items():
        lab1 = dict(zip(s1.kinds, k1))
        for k2, c2 in s2.terms.items():
            lab = lab1 | dict(zip(s2.kinds, k2))
            acc[tuple(lab[k] for k in kinds)] = c1 * c2
    return _from_kind_map(kb, acc)


def change_basis(s: StateVector, kind, basis: str) -> StateVector:
    """Rewrite one subsystem of ``s`` in another basis of the same kind.

    ``basis`` names the target: ``"parity"``/``"chiral"``/``"false_chirality"``
    for the molecule, ``"linear"``/``"circular"`` for either photon.
    """
    kind = _as_kind(kind)
    if kind not in s.kinds:
        raise ValueError(f"{kind.value} is not present in the state")
    target = _check_basis(kind, basis)
    pos = s.kinds.index(kind)
    current = s.bases[pos]
    if current == target.name:
        return s
    images = _overlap_images(current, target.name)
    acc: dict[tuple[str, ...], complex] = {}
    for key, c in s.terms.items():
        head, tail = key[:pos], key[pos + 1 :]
        for t_label, w in images[key[pos]]:
            new = head + (t_label,) + tail
            acc[new] = acc.get(new, 0j) + w * c
    bases = s.bases[:pos] + (target.name,) + s.bases[pos + 1 :]
    return _build(s.kinds, bases, acc)


@functools.lru_cache(maxsize=None)
def _overlap_images(current: str, target: str) -> dict[str, tuple[tuple[str, complex], ...]]:
    """For each label of ``current``, its nonzero components ``<target_j|current_i>``."""
    cur, tgt = BASES[current], BASES[target]
    overlap = tgt.matrix.conj().T @ cur.matrix
    return {
        c_label: tuple(
            (t_label, complex(overlap[j, i]))
            for j, t_label in enumerate(tgt.labels)
            if abs(overlap[j, i]) > 1e-15
        )
        for i, c_label in enumerate(cur.labels)
    }


def match_bases(s: StateVector, like: StateVector) -> StateVector:
    """Rewrite the kinds ``s`` shares with ``like`` in ``like``'s bases."""
    out = s
    for kind, b in zip(like.kinds, like.bases):
        if kind in out.kinds:
            out = change_basis(out, kind, b)
    return out


def inner(s1: StateVector, s2: StateVector) -> complex:
    """<s1|s2>, conjugate-linear in the first argument."""
    if set(s1.kinds) != set(s2.kinds):
        raise ValueError("inner product needs identical subsystems")
    s2 = match_bases(s2, s1)
    return sum((c.conjugate() * s2.terms.get(k, 0j) for k, c in s1.terms.items()), 0j)


def partial_inner(target: StateVector, s: StateVector) -> StateVector:
    """Contract ``<target|`` against the matching subsystems of ``s``.

    Returns the (unnormalised) state on the kinds of ``s`` not covered by
    ``target``.
    """
    if not set(target.kinds) <= set(s.kinds):
        raise ValueError("target subsystems must be a subset of the state's")
    s = match_bases(s, target)
    idx = [s.kinds.index(k) for k in target.kinds]
    rest = [i for i in range(len(s.kinds)) if i not in idx]
    acc: dict[tuple[str, ...], complex] = {}
    for key, c in s.terms.items():
        t = target.terms.get(tuple(key[i] for i in idx))
        if t is None:
            continue
        r = tuple(key[i] for i in rest)
        acc[r] = acc.get(r, 0j) + t.conjugate() * c
    return _build(tuple(s.kinds[i] for i in rest), tuple(s.bases[i] for i in rest), acc)


def project(s: StateVector, target: StateVector) -> tuple[float, StateVector | None]:
    """Born-rule projection of ``s`` onto a normalised ``target`` on some subsystems.

    Returns ``(probability, post)`` where ``post`` is the renormalised state of
    the remaining subsystems, or ``None`` when the probability is below
    :data:`DEGENERACY_TOL` and no meaningful post-state exists.
    """
    if not target.is_normalized(1e-9):
        raise ValueError("projection target must be normalised")
    resid = partial_inner(target, s)
    p = resid.norm() ** 2
    if p < DEGENERACY_TOL:
        return p, None
    return p, resid * (1.0 / math.sqrt(p))


def fidelity_up_to_global_phase(s1: StateVector, s2: StateVector) -> float:
    """|<s1|s2>|^2 for normalised states; 1 exactly when they differ by a phase."""
    f = abs(inner(s1, s2)) ** 2 / (s1.norm() ** 2 * s2.norm() ** 2)
    return min(f, 1.0)


def drop_kind(s: StateVector, kind) -> StateVector:
    """Remove a subsystem that carries a single label across all terms."""
    kind = _as_kind(kind)
    pos = s.kinds.index(kind)
    values = {key[pos] for key in s.terms}
    if len(values) > 1:
        raise ValueError(f"{kind.value} is not in a single basis state: {sorted(values)}")
    return _build(
        s.kinds[:pos] + s.kinds[pos + 1 :],
        s.bases[:pos] + s.bases[pos + 1 :],
        {key[:pos] + key[pos + 1 :]: c for key, c in s.terms.items()},
    )


def relabel(s: StateVector, kind, mapping: Mapping[str, str]) -> StateVector:
    """Rename labels of one kind within its current basis (not a basis change)."""
    kind = _as_kind(kind)
    pos = s.kinds.index(kind)
    labels = BASES[s.bases[pos]].labels
    for a, b in mapping.items():
        if a not in labels or b not in labels:
            raise ValueError(f"relabel {a!r}->{b!r} leaves basis {s.bases[pos]}")
    acc: dict[tuple[str, ...], complex] = {}
    for key, c in s.terms.items():
        new = key[:pos] + (mapping.get(key[pos], key[pos]),) + key[pos + 1 :]
        acc[new] = acc.get(new, 0j) + c
    return _build(s.kinds, s.bases, acc)


def factor_out(s: StateVector, kind, tol: float = 1e-9) -> StateVector:
    """Return the normalised factor of ``s`` on ``kind``; ``s`` must be a product.

    The factor's global phase is arbitrary.
    """
    kind = _as_kind(kind)
    s = change_basis(s, kind, CANONICAL_BASIS[kind])
    pos = s.kinds.index(kind)
    labels = BASES[s.bases[pos]].labels
    rest_keys = sorted({key[:pos] + key[pos + 1 :] for key in s.terms})
    if not rest_keys:
        raise ValueError("cannot factor a zero state")
    mat = np.zeros((len(labels), len(rest_keys)), dtype=complex)
    for key, c in s.terms.items():
        mat[labels.index(key[pos]), rest_keys.index(key[:pos] + key[pos + 1 :])] = c
    u, sv, _ = np.linalg.svd(mat)
    if len(sv) > 1 and sv[1] > tol * sv[0]:
        raise ValueError(f"{kind.value} is entangled with the rest (Schmidt {sv[1] / sv[0]:.3g})")
    vec = u[:, 0]
    return _build((kind,), (s.bases[pos],), {(lab,): vec[i] for i, lab in enumerate(labels)})


def from_vector(kind, vec: Sequence[complex], basis: str | None = None) -> StateVector:
    """Single-subsystem state from coefficients over ``basis`` labels."""
    kind = _as_kind(kind)
    b = _check_basis(kind, basis or CANONICAL_BASIS[kind])
    if len(vec) != len(b.labels):
        raise ValueError(f"expected {len(b.labels)} coefficients")
    return _build((kind,), (b.name,), {(lab,): complex(c) for lab, c in zip(b.labels, vec)})


def to_vector(s: StateVector, basis: str | None = None) -> np.ndarray:
    """Coefficients of a single-subsystem state over ``basis`` labels."""
    if len(s.kinds) != 1:
        raise ValueError("to_vector needs a single-subsystem state")
    kind = s.kinds[0]
    b = _check_basis(kind, basis or CANONICAL_BASIS[kind])
    s = change_basis(s, kind, b.name)
    return np.array([s.terms.get((lab,), 0j) for lab in b.labels], dtype=complex)


# -- linear operators --------------------------------------------------------


@dataclass(frozen=True)
class LinearOp:
    """Sparse operator on a subset of kinds.

    ``action`` maps an input label tuple (over ``scope``, written in ``bases``)
    to its image as ``((labels, amplitude), ...)``.  Inputs missing from
    ``action`` pass through unchanged; map an input to ``()`` to annihilate it.
    """

    scope: tuple[Kind, ...]
    bases: tuple[str, ...]
    action: Mapping[tuple[str, ...], tuple[tuple[tuple[str, ...], complex], ...]]
    unitary: bool = False
    name: str = ""

    @classmethod
    def from_matrix(cls, kind, matrix, basis: str | None = None, *, unitary=None, name=""):
        """Single-kind operator from a dense matrix over ``basis`` labels."""
        kind = _as_kind(kind)
        b = _check_basis(kind, basis or CANONICAL_BASIS[kind])
        m = np.asarray(matrix, dtype=complex)
        n = len(b.labels)
        if m.shape != (n, n):
            raise ValueError(f"matrix must be {n}x{n}")
        if unitary is None:
            unitary = bool(np.allclose(m.conj().T @ m, np.eye(n), atol=1e-12))
        action = {
            (b.labels[j],): tuple(
                ((b.labels[i],), complex(m[i, j])) for i in range(n) if m[i, j] != 0
            )
            for j in range(n)
        }
        return cls((kind,), (b.name,), action, unitary, name)

    def __post_init__(self):
        if len(self.scope) != len(self.bases):
            raise ValueError("scope and bases must align")
        for k, b in zip(self.scope, self.bases):
            _check_basis(_as_kind(k), b)


def identity_op(kind) -> LinearOp:
    kind = _as_kind(kind)
    return LinearOp((kind,), (CANONICAL_BASIS[kind],), {}, True, "I")


def apply(op: LinearOp, s: StateVector) -> StateVector:
    if not set(op.scope) <= set(s.kinds):
        raise ValueError(
            f"operator {op.name or ''} acts on {[k.value for k in op.scope]} "
            f"which the state lacks"
        )
    for kind, b in zip(op.scope, op.bases):
        s = change_basis(s, kind, b)
    idx = [s.kinds.index(k) for k in op.scope]
    acc: dict[tuple[str, ...], complex] = {}
    for key, c in s.terms.items():
        image = op.action.get(tuple(key[i] for i in idx))
        if image is None:
            acc[key] = acc.get(key, 0j) + c
            continue
        for out_labels, w in image:
            new = list(key)
            for i, lab in zip(idx, out_labels):
                new[i] = lab
            new = tuple(new)
            acc[new] = acc.get(new, 0j) + w * c
    return _build(s.kinds, s.bases, acc)


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli(kind, axis: str) -> LinearOp:
    mats = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}
    return LinearOp.from_matrix(kind, mats[axis], unitary=True, name=f"sigma_{axis}")
