"""Finite metric spaces, candidate distance functions and their axiom checkers.

Everything here works under finite-space semantics.  A convergent sequence in a
finite metric space is eventually constant, so

* (tau2) is vacuous: a limit of a sequence is one of its terms;
* (tau3) reduces to a statement about zeros of kappa: it fails exactly when some
  point ``a`` has ``kappa(a, a) == 0`` and ``kappa(a, b) == 0`` for a ``b != a``.

The second reduction is not taken on faith: :func:`sequence_oracle_tau3`
searches eventually-periodic sequence templates directly and the test-suite
checks that both agree.  The metric written rho in (tau3) is read as ``d``.

On a finite space every nonempty subset is closed and bounded, so nonempty,
closed, and closed-bounded subsets are all represented by one thing: a nonempty
collection of point indices.

Distances are float64.  Generated data lives on the 2**-6 grid below 2**10, so
all sums compared here are exact and every comparison is exact (no epsilon).
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, MalformedInputError

AXIOMS = (
    "metric",
    "tau1",
    "tau2",
    "tau3",
    "tau4",
    "tau4prime",
    "zero_diagonal",
    "is_e_distance",
    "is_e0_distance",
    "is_tau_function",
)


def _as_matrix(values, what: str) -> np.ndarray:
    try:
        m = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"{what}: not a numeric matrix ({exc})") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise MalformedInputError(f"{what}: expected a nonempty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise MalformedInputError(f"{what}: entries must be finite")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labelled points ``0..n-1`` with a full distance matrix ``d``.

    Construction only checks shape and finiteness; the metric axioms are
    reported by :func:`validate_metric` so that broken inputs can be diagnosed.
    """

    labels: tuple[str, ...]
    d: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = _as_matrix(self.d, "metric")
        labels = tuple(str(s) for s in self.labels)
        if len(labels) != d.shape[0]:
            raise MalformedInputError(f"{len(labels)} labels for a {d.shape[0]}x{d.shape[0]} metric")
        if len(set(labels)) != len(labels):
            raise MalformedInputError("point labels must be unique")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown point label {label!r}") from None

    @classmethod
    def from_matrix(cls, d, labels=None) -> FiniteMetricSpace:
        d = _as_matrix(d, "metric")
        if labels is None:
            labels = [f"p{i}" for i in range(len(d))]
        return cls(tuple(labels), d)

    @classmethod
    def on_line(cls, coords, labels=None) -> FiniteMetricSpace:
        """Points of the real line with ``d(x, y) = |x - y|``."""
        c = np.asarray(coords, dtype=np.float64)
        return cls.from_matrix(np.abs(c[:, None] - c[None, :]), labels)


@dataclass(frozen=True)
class DistanceFunction:
    """A candidate kappa: X x X -> [0, inf) stored as a matrix over ``space``."""

    space: FiniteMetricSpace
    kappa: np.ndarray = field(repr=False)

    def __post_init__(self):
        k = _as_matrix(self.kappa, "kappa")
        if k.shape[0] != self.space.n:
            raise MalformedInputError(f"kappa is {k.shape[0]}x{k.shape[0]} but the space has {self.space.n} points")
        if np.any(k < 0):
            raise MalformedInputError("kappa entries must be nonnegative")
        object.__setattr__(self, "kappa", k)

    @property
    def n(self) -> int:
        return self.space.n

    @classmethod
    def of_metric(cls, space: FiniteMetricSpace) -> DistanceFunction:
        return cls(space, space.d)


@dataclass
class AxiomReport:
    """Verdict per axiom name plus a witness for every failure.

    A witness is a dict with keys ``rule`` (what was violated), ``points``
    (the offending indices) and ``values`` (the numbers that show it).
    """

    verdicts: dict[str, bool] = field(default_factory=dict)
    witnesses: dict[str, dict] = field(default_factory=dict)

    def set(self, name: str, ok: bool, witness: dict | None = None) -> None:
        self.verdicts[name] = bool(ok)
        if not ok:
            assert witness is not None, f"failing verdict {name} needs a witness"
            self.witnesses[name] = witness
        else:
            self.witnesses.pop(name, None)

    def merge(self, other: AxiomReport) -> AxiomReport:
        for name, ok in other.verdicts.items():
            self.set(name, ok, other.witnesses.get(name))
        return self

    def __getitem__(self, name: str) -> bool:
        return self.verdicts[name]

    @property
    def all_pass(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "verdicts": {k: "pass" if v else "fail" for k, v in self.verdicts.items()},
            "witnesses": self.witnesses,
        }


def _first_triangle_violation(m: np.ndarray):
    """First (x, y, z) in lexicographic order with m[x,z] > m[x,y] + m[y,z]."""
    for x in range(m.shape[0]):
        # rows: y, columns: z
        bad = m[x][None, :] > m[x][:, None] + m
        if bad.any():
            y, z = (int(v) for v in np.argwhere(bad)[0])
            return x, y, z
    return None


def _triangle_witness(m, xyz, rule):
    x, y, z = xyz
    return {"rule": rule, "points": [x, y, z], "values": [float(m[x, z]), float(m[x, y]), float(m[y, z])]}


def validate_metric(space: FiniteMetricSpace) -> AxiomReport:
    d = space.d
    n = space.n
    report = AxiomReport()
    diag = np.flatnonzero(np.diag(d) != 0)
    if diag.size:
        i = int(diag[0])
        report.set("metric", False, {"rule": "zero_diagonal", "points": [i], "values": [float(d[i, i])]})
        return report
    asym = np.argwhere(d != d.T)
    if asym.size:
        i, j = (int(v) for v in asym[0])
        report.set("metric", False, {"rule": "symmetry", "points": [i, j], "values": [float(d[i, j]), float(d[j, i])]})
        return report
    nonpos = np.argwhere((d <= 0) & ~np.eye(n, dtype=bool))
    if nonpos.size:
        i, j = (int(v) for v in nonpos[0])
        report.set("metric", False, {"rule": "positivity", "points": [i, j], "values": [float(d[i, j])]})
        return report
    tri = _first_triangle_violation(d)
    if tri is not None:
        report.set("metric", False, _triangle_witness(d, tri, "triangle"))
        return report
    report.set("metric", True)
    return report


def check_tau1(kappa: DistanceFunction) -> AxiomReport:
    report = AxiomReport()
    tri = _first_triangle_violation(kappa.kappa)
    report.set("tau1", tri is None, tri and _triangle_witness(kappa.kappa, tri, "tau1"))
    return report


def check_zero_diagonal(kappa: DistanceFunction) -> AxiomReport:
    report = AxiomReport()
    bad = np.flatnonzero(np.diag(kappa.kappa) != 0)
    if bad.size:
        i = int(bad[0])
        report.set("zero_diagonal", False, {"rule": "zero_diagonal", "points": [i], "values": [float(kappa.kappa[i, i])]})
    else:
        report.set("zero_diagonal", True)
    return report


def _first_double_zero(zero: np.ndarray, rows):
    """First (x, y, z), y != z, with zero[x,y] and zero[x,z]; x restricted to ``rows``."""
    for x in rows:
        cols = np.flatnonzero(zero[x])
        if cols.size >= 2:
            return int(x), int(cols[0]), int(cols[1])
    return None


def check_zero_structure(kappa: DistanceFunction) -> AxiomReport:
    """Verdicts for tau2, tau3, tau4 and tau4prime under finite-space semantics."""
    k = kappa.kappa
    zero = k == 0
    n = kappa.n
    report = AxiomReport()
    report.set("tau2", True)

    diag_zero = np.flatnonzero(np.diag(zero))
    offender = None
    for a in diag_zero:
        bs = np.flatnonzero(zero[a] & (np.arange(n) != a))
        if bs.size:
            offender = int(a), int(bs[0])
            break
    if offender is None:
        report.set("tau3", True)
    else:
        a, b = offender
        report.set("tau3", False, {
            "rule": "tau3",
            "points": [a, b],
            "values": [float(k[a, a]), float(k[a, b]), float(kappa.space.d[a, b])],
        })

    for name, rows in (("tau4", range(n)), ("tau4prime", diag_zero)):
        hit = _first_double_zero(zero, rows)
        if hit is None:
            report.set(name, True)
        else:
            x, y, z = hit
            report.set(name, False, {"rule": name, "points": [x, y, z], "values": [float(k[x, x]), float(k[x, y]), float(k[x, z])]})
    return report


@dataclass
class OracleVerdict:
    passed: bool
    depth: int
    witness: dict | None = None


def _cycles(n: int, depth: int):
    for length in range(1, depth + 1):
        yield from itertools.product(range(n), repeat=length)


def sequence_oracle_tau3(kappa: DistanceFunction, depth: int) -> OracleVerdict:
    """Brute-force search for a (tau3) counterexample among periodic templates.

    Pairs ``x_n = xc[n % p]``, ``y_n = yc[n % q]`` with periods ``p, q <= depth``
    are materialised over three joint periods and the three limits in (tau3)
    are evaluated on the last stretch of the horizon.  Only the periodic tail
    of an eventually-periodic template affects a limit, so preperiods are not
    enumerated separately.  Returns ``passed=True`` when no template up to
    ``depth`` breaks (tau3) (a pass is only a pass at that depth).
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    k = kappa.kappa
    d = kappa.space.d
    n = kappa.n
    for xc in _cycles(n, depth):
        p = len(xc)
        # sup_{m>n} kappa(x_n, x_m) is eventually zero iff it is zero over a period of the tail
        xs = [xc[i % p] for i in range(3 * p)]
        if any(k[xs[i], xs[m]] != 0 for i in range(p, 2 * p) for m in range(i + 1, 3 * p)):
            continue
        for q in range(1, depth + 1):
            L = math.lcm(p, q)
            horizon = range(L, 2 * L)
            allowed = []
            for j in range(q):
                rows = {xc[i % p] for i in horizon if i % q == j}
                allowed.append([b for b in range(n) if all(k[a, b] == 0 for a in rows)])
            if any(not a for a in allowed):
                continue
            for yc in itertools.product(*allowed):
                if any(d[xc[i % p], yc[i % q]] > 0 for i in horizon):
                    return OracleVerdict(False, depth, {
                        "x_prefix": [], "x_cycle": list(xc),
                        "y_prefix": [], "y_cycle": list(yc),
                    })
    return OracleVerdict(True, depth)


def classify(kappa: DistanceFunction) -> AxiomReport:
    report = validate_metric(kappa.space)
    report.merge(check_tau1(kappa))
    report.merge(check_zero_structure(kappa))
    report.merge(check_zero_diagonal(kappa))

    def derived(name, parts):
        failed = [p for p in parts if not report[p]]
        report.set(name, not failed, {"rule": name, "failed": failed} if failed else None)

    derived("is_e_distance", ["tau1", "tau2", "tau3"])
    derived("is_e0_distance", ["is_e_distance", "zero_diagonal"])
    derived("is_tau_function", ["is_e_distance", "tau4"])
    return report


def as_index_set(C: Iterable[int], n: int | None = None) -> tuple[int, ...]:
    """Sorted tuple of distinct indices; raises DomainError on an empty set."""
    members = tuple(sorted({int(c) for c in C}))
    if not members:
        raise DomainError("point set must be nonempty")
    if n is not None and (members[0] < 0 or members[-1] >= n):
        raise DomainError(f"point index out of range 0..{n - 1}")
    return members


def point_to_set(kappa: DistanceFunction, x: int, C: Iterable[int]) -> float:
    """kappa(x, C) = min over y in C of kappa(x, y)."""
    members = as_index_set(C, kappa.n)
    return float(kappa.kappa[x, list(members)].min())


def witness_reproduces(matrix: np.ndarray, witness: dict) -> bool:
    """Re-evaluate a witness from validate_metric / check_* against ``matrix``.

    For tau3 witnesses ``matrix`` is kappa; the d-part (``a != b``) is implied.
    """
    rule = witness["rule"]
    pts = witness["points"]
    m = matrix
    if rule == "zero_diagonal":
        (i,) = pts
        return m[i, i] != 0
    if rule == "symmetry":
        i, j = pts
        return m[i, j] != m[j, i]
    if rule == "positivity":
        i, j = pts
        return i != j and m[i, j] <= 0
    if rule in ("triangle", "tau1"):
        x, y, z = pts
        return m[x, z] > m[x, y] + m[y, z]
    if rule == "tau3":
        a, b = pts
        return a != b and m[a, a] == 0 and m[a, b] == 0
    if rule in ("tau4", "tau4prime"):
        x, y, z = pts
        ok = y != z and m[x, y] == 0 and m[x, z] == 0
        return ok and (rule == "tau4" or m[x, x] == 0)
    raise ValueError(f"no reproducer for rule {rule!r}")
