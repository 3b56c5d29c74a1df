"""Multivalued maps, hypothesis checkers, the greedy orbit and theorem runs.

Hypothesis checkers scan every relevant pair of points and compare exactly:
the contraction side ``mu(kappa(x, y)) * kappa(x, y)`` is formed in
:class:`~fractions.Fraction` arithmetic, so no tolerance enters a verdict.

On a finite space the topology is discrete.  Every multivalued map is closed
and every real function is lower semicontinuous, so the alternatives H1-H3 of
(S2) hold trivially; the checker still returns them, with a note.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, DomainError, GaugeValidationError, MalformedInputError
from .hyperspace import xi_table
from .mt import PiecewiseLinearGauge, is_mt
from .spaces import DistanceFunction, as_index_set, classify, validate_metric


@dataclass(frozen=True)
class MultivaluedMap:
    """T: X -> nonempty subsets, stored as sorted index tuples."""

    images: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.images)
        try:
            images = tuple(as_index_set(img, n) for img in self.images)
        except DomainError as exc:
            raise MalformedInputError(f"bad map image: {exc}") from None
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __getitem__(self, x: int) -> tuple[int, ...]:
        return self.images[x]

    def is_single_valued(self) -> bool:
        return all(len(img) == 1 for img in self.images)


@dataclass(frozen=True)
class SelfMap:
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        if any(not 0 <= v < len(images) for v in images):
            raise MalformedInputError("self-map value out of range")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> SelfMap:
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.images)

    def __getitem__(self, x: int) -> int:
        return self.images[x]


@dataclass
class Verdict:
    passed: bool
    witness: dict | None = None
    note: str | None = None

    def to_json(self) -> dict:
        out = {"verdict": "pass" if self.passed else "fail"}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


class _Bound:
    """Memoised exact ``mu(s) * s``."""

    def __init__(self, mu: PiecewiseLinearGauge):
        self.mu = mu
        self.cache: dict[float, Fraction] = {}

    def __call__(self, s: float) -> Fraction:
        try:
            return self.cache[s]
        except KeyError:
            q = Fraction(s)
            v = self.cache[s] = self.mu(q) * q
            return v


def fixed_points(T: MultivaluedMap) -> tuple[int, ...]:
    return tuple(x for x in range(T.n) if x in T[x])


def coincidence_points(phi: SelfMap, T: MultivaluedMap) -> tuple[int, ...]:
    return tuple(x for x in range(T.n) if phi[x] in T[x])


def self_gaps(kappa: DistanceFunction, T: MultivaluedMap) -> np.ndarray:
    """``kappa(x, Tx)`` for every x."""
    k = kappa.kappa
    return np.array([k[x, list(T[x])].min() for x in range(T.n)])


def _check_sizes(kappa, T, phi=None):
    if T.n != kappa.n or (phi is not None and phi.n != kappa.n):
        raise MalformedInputError("map and distance function disagree on the number of points")


def check_S1(kappa: DistanceFunction, T: MultivaluedMap, mu: PiecewiseLinearGauge) -> Verdict:
    _check_sizes(kappa, T)
    k = kappa.kappa
    f = self_gaps(kappa, T)
    bound = _Bound(mu)
    for x in range(T.n):
        for y in T[x]:
            if y == x:
                continue
            rhs = bound(k[x, y])
            # some z in Ty works iff the best one does
            if Fraction(f[y]) > rhs:
                return Verdict(False, {"x": x, "y": y, "best_gap": float(f[y]), "bound": float(rhs)})
    return Verdict(True)


def check_S3(kappa: DistanceFunction, T: MultivaluedMap, mu: PiecewiseLinearGauge) -> Verdict:
    _check_sizes(kappa, T)
    k = kappa.kappa
    f = self_gaps(kappa, T)
    bound = _Bound(mu)
    for x in range(T.n):
        for y in T[x]:
            rhs = bound(k[x, y])
            if Fraction(f[y]) > rhs:
                return Verdict(False, {"x": x, "y": y, "gap": float(f[y]), "bound": float(rhs)})
    return Verdict(True)


def check_S4(phi: SelfMap, T: MultivaluedMap) -> Verdict:
    for x in range(T.n):
        img = set(T[x])
        for y in T[x]:
            if phi[y] not in img:
                return Verdict(False, {"x": x, "y": y, "phi_y": phi[y]})
    return Verdict(True)


def _phi_gaps(kappa: DistanceFunction, T: MultivaluedMap, phi: SelfMap) -> np.ndarray:
    """``G[x, y] = kappa(phi(y), Tx)``."""
    k = kappa.kappa[list(phi.images), :]
    return np.stack([k[:, list(T[x])].min(axis=1) for x in range(T.n)])


def _set_gaps(kappa: DistanceFunction, T: MultivaluedMap) -> np.ndarray:
    """``H[x, y] = D_kappa(Tx, Ty)``."""
    X = xi_table(kappa, T.images)
    return np.maximum(X, X.T)


def _lhs(kappa, T, which):
    if which == "S5":
        f = self_gaps(kappa, T)
        return np.broadcast_to(f[None, :], (T.n, T.n))
    if which == "S6":
        return _set_gaps(kappa, T)
    raise ValueError(which)


def _check_with_slack(kappa, T, phi, mu, L, which) -> Verdict:
    _check_sizes(kappa, T, phi)
    k = kappa.kappa
    lhs = _lhs(kappa, T, which)
    G = _phi_gaps(kappa, T, phi)
    bound = _Bound(mu)
    Lq = Fraction(L)
    for x in range(T.n):
        for y in range(T.n):
            left = lhs[x, y]
            if left == 0:
                continue
            rhs = bound(k[x, y]) + Lq * Fraction(G[x, y])
            if Fraction(left) > rhs:
                return Verdict(False, {"x": x, "y": y, "lhs": float(left), "rhs": float(rhs)})
    return Verdict(True)


def check_S5(kappa: DistanceFunction, T: MultivaluedMap, phi: SelfMap, mu: PiecewiseLinearGauge, L) -> Verdict:
    return _check_with_slack(kappa, T, phi, mu, L, "S5")


def check_S6(kappa: DistanceFunction, T: MultivaluedMap, phi: SelfMap, mu: PiecewiseLinearGauge, L) -> Verdict:
    return _check_with_slack(kappa, T, phi, mu, L, "S6")


def minimal_L(kappa, T, phi, mu, which="S5") -> Fraction | None:
    """Least L >= 0 making (S5)/(S6) hold, or None when no L does.

    Pairs whose left side exceeds the contraction term need slack
    ``L * kappa(phi(y), Tx)``; when that distance is zero no L helps.
    """
    k = kappa.kappa
    lhs = _lhs(kappa, T, which)
    G = _phi_gaps(kappa, T, phi)
    bound = _Bound(mu)
    best = Fraction(0)
    for x in range(T.n):
        for y in range(T.n):
            if lhs[x, y] == 0:
                continue
            excess = Fraction(lhs[x, y]) - bound(k[x, y])
            if excess <= 0:
                continue
            if G[x, y] == 0:
                return None
            best = max(best, excess / Fraction(G[x, y]))
    return best


H_NOTES = {
    "H1": "finite space: the topology is discrete, so every multivalued map is closed",
    "H2": "finite space: the topology is discrete, so x -> kappa(x, Tx) is l.s.c.",
    "H3": "finite space: the topology is discrete, so x -> d(x, Tx) is l.s.c.",
}


def check_S2(kappa: DistanceFunction, T: MultivaluedMap, which: str) -> Verdict:
    if which in H_NOTES:
        return Verdict(True, note=H_NOTES[which])
    f = self_gaps(kappa, T)
    fix = fixed_points(T)
    if which == "H4":
        # convergent orbits are eventually constant at some v in Tv; non-constant
        # periodic orbits do not converge, so only those tails are quantified
        for v in fix:
            if f[v] != 0:
                return Verdict(False, {"v": v, "limit": float(f[v])})
        return Verdict(True, note="limits taken along eventually constant orbit tails at fixed points")
    if which == "H5":
        outside = [z for z in range(T.n) if z not in set(fix)]
        if not outside:
            return Verdict(True, note="every point is fixed; the condition is vacuous")
        k = kappa.kappa
        for z in outside:
            inf = (k[:, z] + f).min()
            if inf <= 0:
                return Verdict(False, {"z": z, "inf": float(inf)})
        return Verdict(True)
    raise DomainError(f"unknown (S2) alternative {which!r}")


def check_S2_any(kappa: DistanceFunction, T: MultivaluedMap) -> Verdict:
    parts = {h: check_S2(kappa, T, h) for h in ("H1", "H2", "H3", "H4", "H5")}
    passed = [h for h, v in parts.items() if v.passed]
    return Verdict(bool(passed), None if passed else {h: v.witness for h, v in parts.items()},
                   note="holds via " + ", ".join(passed) if passed else None)


@dataclass
class OrbitTrace:
    points: list[int]
    gaps: list[float]
    cauchy_bound: list[float]
    outcome: str  # "fixed-point" | "iteration-cap" | "stalled"

    @property
    def fixed_point(self) -> int | None:
        return self.points[-1] if self.outcome == "fixed-point" else None

    @property
    def steps(self) -> int:
        return len(self.points) - 1

    def to_json(self, labels: Sequence[str] | None = None) -> dict:
        name = (lambda i: labels[i]) if labels else (lambda i: i)
        out = {
            "points": [name(p) for p in self.points],
            "gaps": self.gaps,
            "cauchy_bound": self.cauchy_bound,
            "outcome": self.outcome,
        }
        if self.fixed_point is not None:
            out["fixed_point"] = name(self.fixed_point)
        return out


def iterate(kappa: DistanceFunction, T: MultivaluedMap, x0: int, max_iter: int | None = None,
            stop_on_cycle: bool = False) -> OrbitTrace:
    """Greedy Picard-type orbit ``x_{n+1} = argmin_{z in T x_n} kappa(x_n, z)``.

    Stops at the first state contained in its own image.  Ties go to the
    smallest index.  ``max_iter`` counts transitions and defaults to
    ``|X|**2 + 1``; with ``stop_on_cycle`` a revisited state ends the run as
    ``stalled`` since the deterministic rule would loop forever.
    """
    _check_sizes(kappa, T)
    if max_iter is None:
        max_iter = kappa.n ** 2 + 1
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    k = kappa.kappa
    points, gaps = [int(x0)], []
    seen = {int(x0)}
    outcome = "iteration-cap"
    for step in range(max_iter + 1):
        x = points[-1]
        if x in T[x]:
            outcome = "fixed-point"
            break
        if step == max_iter:
            break
        img = list(T[x])
        nxt = img[int(np.argmin(k[x, img]))]
        gaps.append(float(k[x, nxt]))
        points.append(nxt)
        if stop_on_cycle and nxt in seen:
            outcome = "stalled"
            break
        seen.add(nxt)
    trace = OrbitTrace(points, gaps, [], outcome)
    trace.cauchy_bound = cauchy_diagnostic(trace, kappa).bounds if len(points) > 1 or outcome == "fixed-point" else []
    return trace


@dataclass
class CauchyReport:
    bounds: list[float]
    reaches_zero: bool
    zero_from: int | None


def cauchy_diagnostic(trace: OrbitTrace, kappa: DistanceFunction) -> CauchyReport:
    """``b_n = max_{m > n} kappa(x_n, x_m)`` over the recorded orbit.

    A run that stopped at a fixed point v continues as the constant orbit
    ``v, v, ...`` (v is in Tv), and one such extra step is included, so the
    last bound is ``kappa(v, v)``.
    """
    pts = list(trace.points)
    if trace.outcome == "fixed-point":
        pts.append(pts[-1])
    if len(pts) < 2:
        raise DomainError("need at least two orbit points")
    k = kappa.kappa
    bounds = [float(k[pts[i], pts[i + 1:]].max()) for i in range(len(pts) - 1)]
    zero_from = None
    for i in range(len(bounds) - 1, -1, -1):
        if bounds[i] != 0:
            break
        zero_from = i
    return CauchyReport(bounds, zero_from is not None, zero_from)


THEOREMS = ("T2.1", "T2.2", "T2.3", "T2.4", "T1.1", "MT", "Nadler", "Banach")
_ALIASES = {
    "T1.1-BerindeBerinde": "T1.1",
    "BerindeBerinde": "T1.1",
    "MizoguchiTakahashi": "MT",
}


def theorem_id(which: str) -> str:
    which = _ALIASES.get(which, which)
    if which not in THEOREMS:
        raise ConfigurationError(f"unknown theorem {which!r}; choose from {', '.join(THEOREMS)}")
    return which


@dataclass
class TheoremReport:
    theorem: str
    hypotheses: dict[str, Verdict]
    conclusion: dict[str, bool] | None
    fixed_points: tuple[int, ...]
    coincidence_points: tuple[int, ...] | None
    orbit: dict | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def hypotheses_pass(self) -> bool:
        return all(v.passed for v in self.hypotheses.values())

    @property
    def status(self) -> str:
        if not self.hypotheses_pass:
            return "hypothesis-fail"
        return "pass" if all(self.conclusion.values()) else "theorem-violation"

    def to_json(self, labels: Sequence[str] | None = None) -> dict:
        name = (lambda i: labels[i]) if labels else (lambda i: i)
        return {
            "theorem": self.theorem,
            "status": self.status,
            "hypotheses": {k: v.to_json() for k, v in self.hypotheses.items()},
            "conclusion": None if self.conclusion is None else {k: "pass" if v else "fail" for k, v in self.conclusion.items()},
            "fixed_points": [name(i) for i in self.fixed_points],
            "coincidence_points": None if self.coincidence_points is None else [name(i) for i in self.coincidence_points],
            "orbit": self.orbit,
            "notes": self.notes,
        }


def _mt_function(mu: PiecewiseLinearGauge) -> Verdict:
    """Is mu an MT-function, i.e. valued in [0, 1) with right limsup < 1?"""
    if mu.lam != 1:
        try:
            mu = PiecewiseLinearGauge(1, mu.breakpoints, mu.point_values, mu.right_intercepts, mu.slopes)
        except GaugeValidationError as exc:
            return Verdict(False, {"reason": f"not valued in [0, 1): {exc}"})
    return Verdict(True) if is_mt(mu) else Verdict(False, {"reason": "right limsup reaches 1"})


def _is_constant(mu: PiecewiseLinearGauge) -> bool:
    vals = set(mu.point_values) | set(mu.right_intercepts)
    return len(vals) == 1 and all(m == 0 for m in mu.slopes)


def _require(instance, *names):
    for name in names:
        if getattr(instance, name, None) is None:
            raise ConfigurationError(f"instance has no {name!r}, which this theorem needs")


def verify_theorem(instance, which: str) -> TheoremReport:
    """Check a theorem's hypotheses on ``instance`` and, if they hold, its conclusion.

    ``instance`` needs attributes ``space``, ``kappa``, ``T``, ``phi``, ``mu``
    and ``L`` (see :class:`edfix.instance.Instance`).  The Berinde-Berinde
    family (``T1.1``, ``MT``, ``Nadler``, ``Banach``) always uses ``kappa = d``
    and ``phi = identity``; ``MT``, ``Nadler`` and ``Banach`` use ``L = 0``.
    """
    which = theorem_id(which)
    _require(instance, "mu")
    if which in ("T2.3", "T2.4", "T1.1"):
        _require(instance, "L")
    if which in ("T2.3", "T2.4"):
        _require(instance, "phi")
    T, mu = instance.T, instance.mu
    n = T.n
    hyp: dict[str, Verdict] = {}
    notes: list[str] = []

    hyp["mu_mt"] = _mt_function(mu)
    if which in ("T2.1", "T2.2", "T2.3", "T2.4"):
        kappa = instance.kappa
        cls = classify(kappa)
        hyp["kappa_e0"] = Verdict(cls["is_e0_distance"], cls.witnesses.get("is_e0_distance"))
        if which == "T2.1":
            hyp["S1"] = check_S1(kappa, T, mu)
        elif which == "T2.2":
            hyp["S3"] = check_S3(kappa, T, mu)
        else:
            phi = instance.phi
            hyp["L_nonneg"] = Verdict(instance.L >= 0, None if instance.L >= 0 else {"L": instance.L})
            hyp["S4"] = check_S4(phi, T)
            if which == "T2.3":
                hyp["S5"] = check_S5(kappa, T, phi, mu, instance.L)
            else:
                hyp["S6"] = check_S6(kappa, T, phi, mu, instance.L)
            notes.append("phi is continuous: every self-map of a finite discrete space is")
        hyp["S2"] = check_S2_any(kappa, T)
    else:
        kappa = DistanceFunction.of_metric(instance.space)
        phi = SelfMap.identity(n)
        metric = validate_metric(instance.space)
        hyp["metric"] = Verdict(metric["metric"], metric.witnesses.get("metric"))
        L = instance.L if which == "T1.1" else 0
        if which == "T1.1":
            hyp["L_nonneg"] = Verdict(L >= 0, None if L >= 0 else {"L": L})
        if which in ("Nadler", "Banach"):
            hyp["mu_constant"] = Verdict(_is_constant(mu), None if _is_constant(mu) else {"reason": "mu is not constant"})
        if which == "Banach":
            single = T.is_single_valued()
            hyp["single_valued"] = Verdict(single, None if single else {"x": next(x for x in range(n) if len(T[x]) != 1)})
        hyp["contraction"] = check_S6(kappa, T, phi, mu, L)
        notes.append("Hausdorff form: D_kappa with kappa = d, phi = identity")

    F = fixed_points(T)
    cop = coincidence_points(instance.phi, T) if which in ("T2.3", "T2.4") else None
    conclusion = None
    if all(v.passed for v in hyp.values()):
        if cop is not None:
            conclusion = {"cop_and_fix_nonempty": bool(set(cop) & set(F))}
        else:
            conclusion = {"fixed_point_exists": bool(F)}
    trace = iterate(kappa, T, 0)
    orbit = {"start": 0, "outcome": trace.outcome, "steps": trace.steps, "end": trace.points[-1]}
    return TheoremReport(which, hyp, conclusion, F, cop, orbit, notes)
