"""Set-to-set distances on the hyperspace of nonempty subsets.

``xi(A, B)`` is the one-sided excess ``max_{x in A} min_{y in B} kappa(x, y)``
and ``dkappa`` its symmetrisation.  With ``kappa = d`` this is the Hausdorff
metric; :func:`hausdorff` is written separately from the metric's own formula
so that the coincidence is a checked fact rather than an alias.

The formulas are total: they evaluate on any nonnegative kappa.  Only
:func:`check_hyperspace_metric` insists on an e0-distance.
"""
from __future__ import annotations

import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .spaces import DistanceFunction, FiniteMetricSpace, as_index_set, classify

EXHAUSTIVE_LIMIT = 12


def xi(kappa: DistanceFunction, A: Iterable[int], B: Iterable[int]) -> float:
    a = list(as_index_set(A, kappa.n))
    b = list(as_index_set(B, kappa.n))
    return float(kappa.kappa[np.ix_(a, b)].min(axis=1).max())


def dkappa(kappa: DistanceFunction, A: Iterable[int], B: Iterable[int], *, check: bool = False) -> float:
    """max(xi(A, B), xi(B, A)); with ``check=True`` warns if kappa is not e0."""
    if check and not classify(kappa)["is_e0_distance"]:
        warnings.warn("dkappa evaluated for a kappa that is not an e0-distance", stacklevel=2)
    A, B = as_index_set(A, kappa.n), as_index_set(B, kappa.n)
    return max(xi(kappa, A, B), xi(kappa, B, A))


def hausdorff(space: FiniteMetricSpace, A: Iterable[int], B: Iterable[int]) -> float:
    """max(sup_{x in B} d(x, A), sup_{x in A} d(x, B))."""
    a = list(as_index_set(A, space.n))
    b = list(as_index_set(B, space.n))
    d = space.d
    b_to_a = d[np.ix_(b, a)].min(axis=1).max()
    a_to_b = d[np.ix_(a, b)].min(axis=1).max()
    return float(max(b_to_a, a_to_b))


def all_subsets(n: int) -> list[tuple[int, ...]]:
    """All nonempty subsets of range(n), ordered by bitmask."""
    return [tuple(i for i in range(n) if mask >> i & 1) for mask in range(1, 2**n)]


def xi_table(kappa: DistanceFunction, sets: Sequence[tuple[int, ...]]) -> np.ndarray:
    """Matrix ``X[i, j] = xi(sets[i], sets[j])``."""
    k = kappa.kappa
    # to_set[x, j] = kappa(x, sets[j])
    to_set = np.stack([k[:, list(s)].min(axis=1) for s in sets], axis=1)
    return np.stack([to_set[list(s), :].max(axis=0) for s in sets], axis=0)


@dataclass
class HyperspaceReport:
    verdicts: dict[str, bool] = field(default_factory=dict)
    witnesses: dict[str, dict] = field(default_factory=dict)
    n_sets: int = 0

    @property
    def all_pass(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "verdicts": {k: "pass" if v else "fail" for k, v in self.verdicts.items()},
            "witnesses": self.witnesses,
            "n_sets": self.n_sets,
        }


def _first_triangle(M: np.ndarray):
    """First (a, b, c) in lexicographic order with M[a,b] > M[a,c] + M[c,b]."""
    for a in range(M.shape[0]):
        # rows: b, columns: c
        bad = M[a][:, None] > M[a][None, :] + M.T
        if bad.any():
            b, c = (int(v) for v in np.argwhere(bad)[0])
            return a, b, c
    return None


def check_hyperspace_metric(kappa: DistanceFunction, sets: Sequence[Iterable[int]] | None = None) -> HyperspaceReport:
    """Verify the three hyperspace properties of an e0-distance.

    (i) ``xi(A, B) == 0`` iff ``A`` is a subset of ``B``; (ii) the excess
    triangle inequality; (iii) ``dkappa`` is a metric.  Every nonempty subset
    is used when the space has at most 12 points and ``sets`` is not given.
    The triple scans are cubic in the number of sets: nine points (511 sets)
    take about a second, while twelve points (4095 sets) take minutes.
    """
    cls = classify(kappa)
    if not cls["is_e0_distance"]:
        failed = [a for a in ("tau1", "tau2", "tau3", "zero_diagonal") if not cls[a]]
        raise PreconditionError(f"kappa is not an e0-distance: fails {', '.join(failed)}")
    if sets is None:
        if kappa.n > EXHAUSTIVE_LIMIT:
            raise DomainError(f"supply a subset sample for spaces with more than {EXHAUSTIVE_LIMIT} points")
        sets = all_subsets(kappa.n)
    sets = list(dict.fromkeys(as_index_set(s, kappa.n) for s in sets))
    S = len(sets)
    X = xi_table(kappa, sets)
    member = np.zeros((S, kappa.n), dtype=bool)
    for i, s in enumerate(sets):
        member[i, list(s)] = True

    report = HyperspaceReport(n_sets=S)
    for a in range(S):
        subset = ~np.any(member[a][None, :] & ~member, axis=1)
        bad = np.flatnonzero((X[a] == 0) != subset)
        if bad.size:
            b = int(bad[0])
            report.verdicts["i"] = False
            report.witnesses["i"] = {"A": list(sets[a]), "B": list(sets[b]), "xi": float(X[a, b]), "subset": bool(subset[b])}
            break
    else:
        report.verdicts["i"] = True

    tri = _first_triangle(X)
    report.verdicts["ii"] = tri is None
    if tri is not None:
        a, b, c = tri
        report.witnesses["ii"] = {
            "A": list(sets[a]), "B": list(sets[b]), "C": list(sets[c]),
            "values": [float(X[a, b]), float(X[a, c]), float(X[c, b])],
        }

    D = np.maximum(X, X.T)
    report.verdicts["iii"] = True
    off = ~np.eye(S, dtype=bool)
    checks = (
        ("identity", np.argwhere(np.diag(D) != 0), lambda i: {"A": list(sets[i[0]]), "value": float(D[i[0], i[0]])}),
        ("symmetry", np.argwhere(D != D.T), lambda i: {"A": list(sets[i[0]]), "B": list(sets[i[1]])}),
        ("positivity", np.argwhere((D <= 0) & off), lambda i: {"A": list(sets[i[0]]), "B": list(sets[i[1]]), "value": float(D[i[0], i[1]])}),
    )
    for rule, hits, describe in checks:
        if hits.size:
            report.verdicts["iii"] = False
            report.witnesses["iii"] = {"rule": rule, **describe([int(v) for v in hits[0]])}
            break
    else:
        tri = _first_triangle(D)
        if tri is not None:
            a, b, c = tri
            report.verdicts["iii"] = False
            report.witnesses["iii"] = {
                "rule": "triangle", "A": list(sets[a]), "B": list(sets[b]), "C": list(sets[c]),
                "values": [float(D[a, b]), float(D[a, c]), float(D[c, b])],
            }
    return report

