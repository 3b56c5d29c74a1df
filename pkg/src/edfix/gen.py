"""Seeded generation of spaces, distances, gauges, maps and whole instances.

Every random draw comes from ``numpy.random.default_rng([seed, attempt, stream])``
so an identical :class:`GenProfile` yields a bit-identical instance.  All
distances are multiples of ``GRID = 2**-6``; sums of such values are exact in
float64, which keeps the exact checkers honest.

Positive instances are built by repair-then-reject: draw a candidate map,
repair the pairs that break the targeted condition for up to
``REPAIR_ROUNDS`` full scans, and start over with the next ``attempt`` if that
budget runs out.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import DomainError, GenerationError, MutationSkipped
from .hyperspace import xi_table
from .instance import Instance
from .mt import PiecewiseLinearGauge
from .solver import (
    MultivaluedMap,
    SelfMap,
    _Bound,
    check_S1,
    check_S3,
    check_S4,
    check_S5,
    check_S6,
    minimal_L,
    self_gaps,
)
from .spaces import DistanceFunction, FiniteMetricSpace, classify

GRID = 2.0**-6
REPAIR_ROUNDS = 32
MAX_ATTEMPTS = 16

SPACE_KINDS = ("closure", "grid", "line")
KAPPA_KINDS = ("metric", "scaled-metric", "asymmetric-closure")
MAP_KINDS = ("constant-target", "funnel", "random-rejection", "cycle")
TARGETS = ("T2.1", "T2.2", "T2.3", "T2.4", "T1.1", "MT", "Nadler", "Banach")
MUTATIONS = ("drop-z", "raise-gap", "break-invariance", "zero-offdiagonal")
BERINDE_FAMILY = ("T1.1", "MT", "Nadler", "Banach")

# hypothesis checker each mutation is built to break
MUTATION_TARGET = {"drop-z": "S1", "raise-gap": "S3", "break-invariance": "S4", "zero-offdiagonal": "tau3"}

_STREAMS = {"space": 1, "kappa": 2, "mu": 3, "map": 4, "phi": 5, "mutate": 6}


@dataclass(frozen=True)
class GenProfile:
    seed: int = 0
    n_points: int = 8
    space_kind: str = "closure"
    kappa_kind: str = "metric"
    map_kind: str = "funnel"
    theorem_target: str | None = None
    mutation: str | None = None

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not 2 <= self.n_points <= 200:
            raise DomainError("n_points must be in 2..200")
        for value, allowed, name in (
            (self.space_kind, SPACE_KINDS, "space_kind"),
            (self.kappa_kind, KAPPA_KINDS, "kappa_kind"),
            (self.map_kind, MAP_KINDS, "map_kind"),
        ):
            if value not in allowed:
                raise DomainError(f"{name} must be one of {allowed}, got {value!r}")
        if self.theorem_target is not None and self.theorem_target not in TARGETS:
            raise DomainError(f"theorem_target must be one of {TARGETS}")
        if self.mutation is not None and self.mutation not in MUTATIONS:
            raise DomainError(f"mutation must be one of {MUTATIONS}")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> GenProfile:
        return dataclasses.replace(self, **changes)


def _rng(profile: GenProfile, stream: str, attempt: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(profile.seed), attempt, _STREAMS[stream]])


def _grid_weights(rng, n, symmetric):
    # multiples of 2**-6 in [1/8, 2]
    w = rng.integers(8, 129, size=(n, n)).astype(np.float64) * GRID
    if symmetric:
        w = np.triu(w, 1)
        w = w + w.T
    np.fill_diagonal(w, 0.0)
    return w


def _closure(w: np.ndarray) -> np.ndarray:
    d = shortest_path(w, method="FW", directed=True)
    np.fill_diagonal(d, 0.0)
    return d


def line_coordinates(n: int) -> list[int]:
    """0, 1, 3, 4, 6, 7, ...: gaps alternate 1 and 2."""
    coords = [0]
    for i in range(1, n):
        coords.append(coords[-1] + (1 if i % 2 else 2))
    return coords


def gen_space(profile: GenProfile, attempt: int = 0) -> FiniteMetricSpace:
    n = profile.n_points
    if n < 2:
        raise DomainError("need at least two points")
    labels = [f"p{i}" for i in range(n)]
    if profile.space_kind == "line":
        return FiniteMetricSpace.on_line(line_coordinates(n), labels)
    rng = _rng(profile, "space", attempt)
    if profile.space_kind == "grid":
        side = int(np.ceil(np.sqrt(n))) + 2
        cells = rng.choice(side * side, size=n, replace=False)
        xy = np.stack([cells // side, cells % side], axis=1).astype(np.float64)
        d = np.abs(xy[:, None, :] - xy[None, :, :]).sum(axis=2)
        return FiniteMetricSpace.from_matrix(d, labels)
    return FiniteMetricSpace.from_matrix(_closure(_grid_weights(rng, n, symmetric=True)), labels)


def gen_kappa(profile: GenProfile, space: FiniteMetricSpace, attempt: int = 0) -> DistanceFunction:
    if profile.theorem_target in BERINDE_FAMILY or profile.kappa_kind == "metric":
        return DistanceFunction.of_metric(space)
    rng = _rng(profile, "kappa", attempt)
    if profile.kappa_kind == "scaled-metric":
        beta = float(rng.choice([1, 2, 4]))
        return DistanceFunction(space, beta * space.d)
    return DistanceFunction(space, _closure(_grid_weights(rng, space.n, symmetric=False)))


def gen_mu(rng: np.random.Generator, lam=1, mt: bool = True, max_pieces: int = 4, low: int = 0) -> PiecewiseLinearGauge:
    """Random gauge on dyadic breakpoints with values on a lam/64 grid.

    Non-MT gauges (``mt=False``) get a finite piece whose right intercept is
    exactly lam.  MT gauges sometimes approach lam from the left at the end of
    a piece, which is harmless for the MT property.  ``low`` sets the least
    grid level used (in 64ths of lam).
    """
    lam = Fraction(lam)
    unit = lam / 64
    k = int(rng.integers(1 if not mt else 0, max_pieces + 1))
    widths = [Fraction(2) ** int(rng.integers(-2, 3)) for _ in range(k)]
    t = [Fraction(0)]
    for w in widths:
        t.append(t[-1] + w)
    c, m, ends = [], [], []
    bad_piece = int(rng.integers(0, k)) if not mt else -1
    for i in range(k):
        ci = int(rng.integers(low, 64))
        ei = int(rng.integers(low, 65))
        if i == bad_piece:
            ci, ei = 64, int(rng.integers(low, 64))
        if ci == ei == 64:
            ei = 63
        c.append(ci * unit)
        ends.append(ei * unit)
        m.append((ei - ci) * unit / widths[i])
    tail = int(rng.integers(low, 64)) * unit
    c.append(tail)
    m.append(Fraction(0))
    p = []
    for i in range(k + 1):
        r = rng.random()
        if r < 0.4:
            p.append(c[i] if c[i] < lam else 63 * unit)
        elif r < 0.7 and i > 0:
            p.append(ends[i - 1] if ends[i - 1] < lam else 63 * unit)
        else:
            p.append(int(rng.integers(low, 64)) * unit)
    return PiecewiseLinearGauge(lam, t, p, c, m)


def _pick(rng, options, size):
    size = min(size, len(options))
    return {int(v) for v in rng.choice(options, size=size, replace=False)}


@dataclass
class MapBundle:
    T: MultivaluedMap
    phi: SelfMap | None
    L: float | None


class _Draft:
    """Mutable map (and self-map) under repair."""

    def __init__(self, images, phi=None):
        self.images = [set(s) for s in images]
        self.phi = list(phi) if phi is not None else None

    def frozen(self) -> MultivaluedMap:
        return MultivaluedMap(tuple(tuple(sorted(s)) for s in self.images))

    def frozen_phi(self) -> SelfMap | None:
        return None if self.phi is None else SelfMap(tuple(self.phi))

    def drop(self, x: int, y: int, v: int) -> None:
        self.images[x].discard(y)
        if not self.images[x]:
            self.images[x] = {v}
        if self.phi is not None:
            for u in self.images[x]:
                if self.phi[u] not in self.images[x]:
                    self.phi[u] = u


def _attractor(rng, n):
    return int(rng.integers(0, n))


def _initial_images(rng, kappa: DistanceFunction, kind: str, v: int) -> list[set[int]]:
    n = kappa.n
    k = kappa.kappa
    if kind == "constant-target":
        return [{v} for _ in range(n)]
    if kind == "random-rejection":
        return [_pick(rng, np.arange(n), int(rng.integers(1, 4))) for _ in range(n)]
    if kind == "cycle":
        order = rng.permutation(n)
        succ = {int(order[i]): int(order[(i + 1) % n]) for i in range(n)}
        images = []
        for x in range(n):
            img = {succ[x]}
            if n > 2 and rng.random() < 0.3:
                img |= _pick(rng, np.array([w for w in range(n) if w != x]), 1)
            images.append(img)
        return images
    images = []
    for x in range(n):
        if x == v:
            images.append({v})
            continue
        closer = np.flatnonzero(k[:, v] < k[x, v])
        img = _pick(rng, closer, int(rng.integers(1, 4))) if closer.size else {v}
        if rng.random() < 0.15:
            img.add(x)
        images.append(img)
    return images


def _repair_self(kappa, draft: _Draft, mu, v, strict_diag: bool) -> bool:
    """Repair (S1) (``strict_diag=False``) or (S3) pairs y in Tx."""
    k = kappa.kappa
    bound = _Bound(mu)
    for _ in range(REPAIR_ROUNDS):
        changed = False
        for x in range(kappa.n):
            for y in sorted(draft.images[x]):
                if y == x and not strict_diag:
                    continue
                gap = min(k[y, z] for z in draft.images[y])
                if Fraction(gap) > bound(k[x, y]):
                    draft.drop(x, y, v)
                    changed = True
        if not changed:
            return True
    return False


def _repair_slack(kappa, draft: _Draft, mu, v, which) -> bool:
    """Repair pairs of (S5)/(S6) that no L can rescue (phi(y) in Tx, excess > 0)."""
    k = kappa.kappa
    bound = _Bound(mu)
    for _ in range(REPAIR_ROUNDS):
        changed = False
        for x in range(kappa.n):
            for y in range(kappa.n):
                if draft.phi[y] not in draft.images[x]:
                    continue
                if which == "S5":
                    left = min(k[y, z] for z in draft.images[y])
                else:
                    T = draft.frozen()
                    X = xi_table(kappa, [T[x], T[y]])
                    left = max(X[0, 1], X[1, 0])
                if left == 0 or Fraction(left) <= bound(k[x, y]):
                    continue
                if draft.phi[y] != y:
                    draft.phi[y] = y
                else:
                    draft.drop(x, y, v)
                changed = True
        if not changed:
            return True
    return False


def _gen_phi(rng, draft: _Draft, v: int, pin_attractor: bool) -> None:
    """phi respecting (S4): fixed points go to fixed points, images are closed under phi."""
    n = len(draft.images)
    fix = [x for x in range(n) if x in draft.images[x]]
    in_image = set().union(*draft.images)
    phi = list(range(n))
    if rng.random() >= 1 / 3:
        for x in range(n):
            if x in fix:
                phi[x] = int(rng.choice(fix))
            elif x not in in_image:
                phi[x] = int(rng.integers(0, n))
    if pin_attractor:
        phi[v] = v
    draft.phi = phi
    for img in draft.images:
        frontier = list(img)
        while frontier:
            w = phi[frontier.pop()]
            if w not in img:
                img.add(w)
                frontier.append(w)


def _above(value: Fraction) -> float:
    """Smallest grid multiple strictly above ``value``."""
    return (int(np.floor(value / Fraction(1, 64))) + 1) * GRID


def _halfway_images(kappa: DistanceFunction, v: int, rng, multi: bool) -> list[set[int]]:
    k = kappa.kappa
    n = kappa.n
    images = []
    for x in range(n):
        # points roughly halfway from x to v
        score = np.abs(k[:, v] - k[x, v] / 2) + np.abs(k[x, :] - k[x, v] / 2)
        order = np.argsort(score, kind="stable")
        img = {int(order[0])}
        if multi and rng.random() < 0.5:
            img.add(int(order[1]))
        images.append(img)
    images[v] = {v}
    return images


def _repair_all_pairs(kappa, draft: _Draft, mu, v) -> bool:
    """Repair D(Tx, Ty) <= mu(k(x,y)) k(x,y) over all pairs.

    A violating x is given the single-point image that satisfies all of its
    pairs against the current map, preferring points far from v; with no such
    point it falls back to {v}.
    """
    k = kappa.kappa
    n = kappa.n
    bound = _Bound(mu)

    def row_ok(x, img):
        sets = [tuple(sorted(img))] + [tuple(sorted(draft.images[y])) for y in range(n)]
        X = xi_table(kappa, sets)
        D = np.maximum(X[0, 1:], X[1:, 0])
        return all(y == x or D[y] == 0 or Fraction(D[y]) <= bound(k[x, y]) for y in range(n))

    for _ in range(REPAIR_ROUNDS):
        changed = False
        for x in range(n):
            if row_ok(x, draft.images[x]):
                continue
            order = sorted(range(n), key=lambda w: (-k[w, v], w))
            draft.images[x] = next(({w} for w in order if w != v and row_ok(x, {w})), {v})
            changed = True
        if not changed:
            return True
    return False


def _augment(kappa, draft: _Draft, mu, rng, tries: int) -> None:
    """Grow images one point at a time while the L = 0 contraction still holds."""
    n = kappa.n
    ident = SelfMap.identity(n)
    for _ in range(tries):
        x = int(rng.integers(0, n))
        w = int(rng.integers(0, n))
        if w in draft.images[x]:
            continue
        draft.images[x].add(w)
        if not check_S6(kappa, draft.frozen(), ident, mu, 0).passed:
            draft.images[x].discard(w)


def gen_map(profile: GenProfile, space: FiniteMetricSpace, kappa: DistanceFunction, mu: PiecewiseLinearGauge,
            attempt: int = 0) -> MapBundle:
    rng = _rng(profile, "map", attempt)
    n = space.n
    v = _attractor(rng, n)
    target = profile.theorem_target
    kind = profile.map_kind

    if kind == "cycle":
        return MapBundle(MultivaluedMap(tuple(tuple(sorted(s)) for s in _initial_images(rng, kappa, "cycle", v))),
                         SelfMap.identity(n) if target in ("T2.3", "T2.4") else None,
                         0.0 if target in ("T2.3", "T2.4", "T1.1") else None)

    if target in ("MT", "Nadler", "Banach"):
        if kind == "constant-target":
            draft = _Draft(_initial_images(rng, kappa, kind, v))
        else:
            draft = _Draft(_halfway_images(kappa, v, rng, multi=target != "Banach"))
        if not _repair_all_pairs(kappa, draft, mu, v):
            raise GenerationError("repair budget exhausted")
        if target != "Banach":
            _augment(kappa, draft, mu, rng, tries=2 * n)
        return MapBundle(draft.frozen(), None, 0.0)

    if kind == "random-rejection":
        checker = {"T2.1": check_S1, "T2.2": check_S3}.get(target, check_S3)
        images = _initial_images(rng, kappa, kind, v)
        for _ in range(8):
            if checker(kappa, _Draft(images).frozen(), mu).passed:
                break
            images = _initial_images(rng, kappa, kind, v)
        images[v].add(v)
        draft = _Draft(images)
    else:
        draft = _Draft(_initial_images(rng, kappa, kind, v))

    if target is None:
        return MapBundle(draft.frozen(), None, None)

    if target in ("T2.4", "T1.1"):
        draft.images[v] = {v}
    ok = _repair_self(kappa, draft, mu, v, strict_diag=target != "T2.1")
    if not ok:
        raise GenerationError("repair budget exhausted")
    if target in ("T2.1", "T2.2"):
        return MapBundle(draft.frozen(), None, None)

    which = "S5" if target == "T2.3" else "S6"
    if target == "T1.1":
        draft.phi = list(range(n))
    else:
        _gen_phi(_rng(profile, "phi", attempt), draft, v, pin_attractor=which == "S6")
    if not _repair_slack(kappa, draft, mu, v, which):
        raise GenerationError("repair budget exhausted")
    T, phi = draft.frozen(), draft.frozen_phi()
    L_min = minimal_L(kappa, T, phi, mu, which)
    if L_min is None:
        raise GenerationError("no finite L after repair")
    return MapBundle(T, None if target == "T1.1" else phi, _above(L_min))


def _gen_once(profile: GenProfile, attempt: int) -> Instance:
    space = gen_space(profile, attempt)
    kappa = gen_kappa(profile, space, attempt)
    mrng = _rng(profile, "mu", attempt)
    target = profile.theorem_target
    if target in ("Nadler", "Banach"):
        mu = PiecewiseLinearGauge.constant(Fraction(int(mrng.integers(32, 61)), 64))
    else:
        mu = gen_mu(mrng, 1, mt=True, low=24)
    bundle = gen_map(profile, space, kappa, mu, attempt)
    return Instance(space, kappa, bundle.T, bundle.phi, mu, bundle.L,
                    {"seed": int(profile.seed), "attempt": attempt, "profile": profile.to_json()})


def gen_instance(profile: GenProfile) -> Instance:
    """Build the instance for ``profile``, reseeding (attempt + 1) on repair failure."""
    for attempt in range(MAX_ATTEMPTS):
        try:
            inst = _gen_once(profile, attempt)
        except GenerationError:
            continue
        if profile.mutation is not None:
            inst, delta = mutate(inst, profile.mutation, profile.seed)
            inst = inst.replace(provenance={**inst.provenance, "mutation": delta})
        return inst
    raise GenerationError(f"no instance after {MAX_ATTEMPTS} attempts for {profile}")


def positive_checks(instance: Instance, target: str) -> dict[str, bool]:
    """The hypothesis checkers a positive instance for ``target`` must pass."""
    kappa, T, mu, phi, L = instance.kappa, instance.T, instance.mu, instance.phi, instance.L
    if target == "T2.1":
        return {"S1": check_S1(kappa, T, mu).passed}
    if target == "T2.2":
        return {"S3": check_S3(kappa, T, mu).passed}
    if target == "T2.3":
        return {"S4": check_S4(phi, T).passed, "S5": check_S5(kappa, T, phi, mu, L).passed}
    if target == "T2.4":
        return {"S4": check_S4(phi, T).passed, "S6": check_S6(kappa, T, phi, mu, L).passed}
    d = DistanceFunction.of_metric(instance.space)
    ident = SelfMap.identity(T.n)
    out = {"contraction": check_S6(d, T, ident, mu, L if target == "T1.1" else 0).passed}
    if target == "Banach":
        out["single_valued"] = T.is_single_valued()
    return out


def _row_raise(k: np.ndarray, y: int, delta: float) -> np.ndarray:
    """Add delta to kappa(y, .) off the diagonal; (tau1) and the zero structure survive."""
    k = k.copy()
    k[y, :] += delta
    k[y, y] = 0.0
    return k


def mutate(instance: Instance, mutation: str | None, seed: int):
    """Apply one structural edit; returns ``(instance, delta)``.

    Raises :class:`MutationSkipped` when the instance offers no place for the
    edit.  ``mutation=None`` returns the instance untouched with ``delta=None``.
    """
    if mutation is None:
        return instance, None
    if mutation not in MUTATIONS:
        raise DomainError(f"unknown mutation {mutation!r}")
    rng = np.random.default_rng([int(seed), _STREAMS["mutate"]])
    kappa, T, mu = instance.kappa, instance.T, instance.mu
    k = kappa.kappa
    n = T.n

    if mutation == "zero-offdiagonal":
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        kk = k.copy()
        kk[a, b] = 0.0
        new = instance.replace(kappa=DistanceFunction(instance.space, kk))
        return new, {"mutation": mutation, "target": "tau3", "cells": [[a, b]], "old": float(k[a, b])}

    if mutation == "break-invariance":
        phi = instance.phi
        if phi is None:
            raise MutationSkipped("instance has no phi")
        cands = [(x, y) for x in range(n) if len(T[x]) < n for y in T[x]]
        if not cands:
            raise MutationSkipped("every image is the whole space")
        x, y = cands[int(rng.integers(0, len(cands)))]
        outside = [w for w in range(n) if w not in T[x]]
        w = outside[int(rng.integers(0, len(outside)))]
        images = list(phi.images)
        images[y] = w
        new = instance.replace(phi=SelfMap(tuple(images)))
        return new, {"mutation": mutation, "target": "S4", "triple": [x, y, w]}

    if mu is None:
        raise MutationSkipped("instance has no mu")
    bound = _Bound(mu)
    f = self_gaps(kappa, T)

    if mutation == "drop-z":
        cands = []
        for x in range(n):
            for y in T[x]:
                if y == x:
                    continue
                rhs = bound(k[x, y])
                admissible = [z for z in T[y] if Fraction(k[y, z]) <= rhs]
                if admissible and len(admissible) < len(T[y]):
                    cands.append((x, y, admissible))
        if not cands:
            raise MutationSkipped("no image keeps a point after removing the admissible z")
        x, y, zs = cands[int(rng.integers(0, len(cands)))]
        images = list(T.images)
        images[y] = tuple(z for z in T[y] if z not in zs)
        new = instance.replace(T=MultivaluedMap(tuple(images)))
        return new, {"mutation": mutation, "target": "S1", "pair": [x, y], "removed": zs}

    # raise-gap
    phi = instance.phi
    cands = [(x, y) for x in range(n) for y in T[x] if y != x and y not in T[y]]
    if phi is not None:
        # a pair with phi(y) in Tx has no L slack, so (S5) breaks too
        cands = [(x, y) for x, y in cands if phi[y] in T[x]]
    if not cands:
        raise MutationSkipped("no pair with a positive self-gap")
    x, y = cands[int(rng.integers(0, len(cands)))]
    need = bound(k[x, y]) - Fraction(f[y])
    delta = _above(max(need, Fraction(0)))
    kk = _row_raise(k, y, delta)
    new = instance.replace(kappa=DistanceFunction(instance.space, kk))
    return new, {"mutation": mutation, "target": "S3", "pair": [x, y], "row": y, "delta": delta}


def targeted_check_fails(instance: Instance, delta: dict) -> bool:
    """Does the checker a mutation aimed at report failure?"""
    target = delta["target"]
    if target == "tau3":
        return not classify(instance.kappa)["tau3"]
    if target == "S4":
        return not check_S4(instance.phi, instance.T).passed
    if target == "S1":
        return not check_S1(instance.kappa, instance.T, instance.mu).passed
    if target == "S3":
        failed = not check_S3(instance.kappa, instance.T, instance.mu).passed
        if instance.phi is not None and instance.L is not None:
            failed = failed and not check_S5(instance.kappa, instance.T, instance.phi, instance.mu, instance.L).passed
        return failed
    raise ValueError(target)

