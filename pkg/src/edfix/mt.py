"""Piecewise-linear gauges mu: [0, inf) -> [0, lam) and MT(lam) deciders.

A gauge has breakpoints ``0 = t_0 < ... < t_k``.  At a breakpoint it takes the
point value ``p_i``; on the open piece ``(t_i, t_{i+1})`` (and on the tail
``(t_k, inf)`` for ``i = k``) it is ``c_i + m_i * (s - t_i)``.  The right
intercept ``c_i`` is the right limit at ``t_i`` and may differ from ``p_i``,
which is what makes gauges with an unattained right limit ``lam`` (the non-MT
ones) representable.

All arithmetic is done in :class:`fractions.Fraction`, so every verdict below
is exact.  The ten characterisations are numbered as in the classical list:

1. right limsup below lam everywhere
2. the same for ``mu / lam`` with bound 1
3. -- 6. a local bound ``xi_t < lam`` on ``(t, t+e)``, ``[t, t+e]``,
   ``(t, t+e]``, ``[t, t+e)``
7. -- 10. ``sup mu(x_n) < lam`` along nonincreasing, strictly decreasing,
   eventually nonincreasing, eventually strictly decreasing sequences
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, GaugeValidationError

SEQUENCE_KINDS = (
    "nonincreasing",
    "strictly-decreasing",
    "eventually-nonincreasing",
    "eventually-strictly-decreasing",
)

# statement number -> (left endpoint closed, right endpoint closed)
_INTERVALS = {3: (False, False), 4: (True, True), 5: (False, True), 6: (True, False)}
# statement number -> sequence kind
_SEQUENCES = {7: SEQUENCE_KINDS[0], 8: SEQUENCE_KINDS[1], 9: SEQUENCE_KINDS[2], 10: SEQUENCE_KINDS[3]}


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not np.isfinite(x):
            raise GaugeValidationError(f"non-finite gauge entry {x}")
        # the shortest repr is the decimal literal a JSON file would carry
        return Fraction(repr(float(x)))
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, np.floating):
        return _q(float(x))
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            raise GaugeValidationError(f"cannot read gauge entry {x!r}") from None
    raise GaugeValidationError(f"cannot read gauge entry {x!r}")


@dataclass(frozen=True)
class PiecewiseLinearGauge:
    lam: Fraction
    breakpoints: tuple[Fraction, ...]
    point_values: tuple[Fraction, ...]
    right_intercepts: tuple[Fraction, ...]
    slopes: tuple[Fraction, ...]

    def __post_init__(self):
        conv = lambda xs: tuple(_q(x) for x in xs)  # noqa: E731
        object.__setattr__(self, "lam", _q(self.lam))
        for name in ("breakpoints", "point_values", "right_intercepts", "slopes"):
            object.__setattr__(self, name, conv(getattr(self, name)))
        _validate(self)

    @property
    def k(self) -> int:
        """Index of the last breakpoint (the tail piece starts there)."""
        return len(self.breakpoints) - 1

    def piece_end(self, i: int) -> Fraction | None:
        """Value approached at the right end of piece i; None for the tail."""
        if i == self.k:
            return None
        return self.right_intercepts[i] + self.slopes[i] * (self.breakpoints[i + 1] - self.breakpoints[i])

    def __call__(self, s) -> Fraction:
        return value(self, s)

    @classmethod
    def constant(cls, v, lam=1) -> PiecewiseLinearGauge:
        return cls(lam, [0], [v], [v], [0])

    @classmethod
    def from_json(cls, obj: dict) -> PiecewiseLinearGauge:
        try:
            return cls(obj["lambda"], obj["breakpoints"], obj["point_values"], obj["right_intercepts"], obj["slopes"])
        except KeyError as exc:
            raise GaugeValidationError(f"gauge is missing field {exc}") from None

    def to_json(self) -> dict:
        f = lambda xs: [_dump(x) for x in xs]  # noqa: E731
        return {
            "lambda": _dump(self.lam),
            "breakpoints": f(self.breakpoints),
            "point_values": f(self.point_values),
            "right_intercepts": f(self.right_intercepts),
            "slopes": f(self.slopes),
        }


def _dump(x: Fraction):
    """A float when it reads back as ``x``, else the string ``"p/q"``."""
    f = float(x)
    return f if Fraction(repr(f)) == x else f"{x.numerator}/{x.denominator}"


def _validate(mu: PiecewiseLinearGauge) -> None:
    lam, t = mu.lam, mu.breakpoints
    if lam <= 0:
        raise GaugeValidationError("lambda must be positive")
    sizes = {len(t), len(mu.point_values), len(mu.right_intercepts), len(mu.slopes)}
    if len(sizes) != 1 or not t:
        raise GaugeValidationError("breakpoints, point_values, right_intercepts and slopes need equal nonzero length")
    if t[0] != 0:
        raise GaugeValidationError("first breakpoint must be 0")
    if any(b <= a for a, b in zip(t, t[1:])):
        raise GaugeValidationError("breakpoints must be strictly increasing")
    for i, p in enumerate(mu.point_values):
        if not 0 <= p < lam:
            raise GaugeValidationError(f"value {float(p)} at breakpoint {float(t[i])} is outside [0, lambda)")
    for i in range(mu.k):
        c, m, e = mu.right_intercepts[i], mu.slopes[i], mu.piece_end(i)
        if m == 0:
            if not 0 <= c < lam:
                raise GaugeValidationError(f"constant piece {i} has value {float(c)} outside [0, lambda)")
        elif min(c, e) < 0 or max(c, e) > lam:
            raise GaugeValidationError(f"piece {i} leaves [0, lambda]: runs from {float(c)} to {float(e)}")
    c, m = mu.right_intercepts[-1], mu.slopes[-1]
    if m != 0:
        raise GaugeValidationError("tail piece must be flat; insert an explicit breakpoint instead of clamping")
    if not 0 <= c < lam:
        raise GaugeValidationError(f"tail value {float(c)} is outside [0, lambda)")


def _piece(mu: PiecewiseLinearGauge, s: Fraction) -> int:
    return bisect.bisect_right(mu.breakpoints, s) - 1


def value(mu: PiecewiseLinearGauge, s) -> Fraction:
    s = _q(s)
    if s < 0:
        raise DomainError("gauge is defined on [0, inf)")
    i = _piece(mu, s)
    if s == mu.breakpoints[i]:
        return mu.point_values[i]
    return mu.right_intercepts[i] + mu.slopes[i] * (s - mu.breakpoints[i])


def right_limit(mu: PiecewiseLinearGauge, t) -> Fraction:
    """Exact right limit of mu at t (it exists, so it is also the right limsup)."""
    t = _q(t)
    if t < 0:
        raise DomainError("gauge is defined on [0, inf)")
    i = _piece(mu, t)
    return mu.right_intercepts[i] + mu.slopes[i] * (t - mu.breakpoints[i])


def right_limsup(mu: PiecewiseLinearGauge, t) -> float:
    return float(right_limit(mu, t))


def _probe_points(mu: PiecewiseLinearGauge):
    """Breakpoints plus one interior point per piece; every other t behaves like the latter."""
    t = mu.breakpoints
    for i in range(len(t)):
        yield t[i]
        yield (t[i] + t[i + 1]) / 2 if i < mu.k else t[i] + 1


def scale_to_unit(mu: PiecewiseLinearGauge) -> PiecewiseLinearGauge:
    if mu.lam == 1:
        return mu
    s = mu.lam
    return PiecewiseLinearGauge(
        1,
        mu.breakpoints,
        [p / s for p in mu.point_values],
        [c / s for c in mu.right_intercepts],
        [m / s for m in mu.slopes],
    )


@dataclass
class StatementResult:
    passed: bool
    witness: dict = field(default_factory=dict)


def _statement_limsup(mu: PiecewiseLinearGauge) -> StatementResult:
    for t in _probe_points(mu):
        r = right_limit(mu, t)
        if r >= mu.lam:
            return StatementResult(False, {"t": float(t), "right_limsup": float(r)})
    return StatementResult(True)


def _local_bound(mu: PiecewiseLinearGauge, t: Fraction, left_closed: bool, right_closed: bool):
    """(xi, eps) with mu <= xi < lam on the requested interval at t, or None."""
    i = _piece(mu, t)
    r = right_limit(mu, t)
    if r >= mu.lam:
        return None
    m = mu.slopes[i]
    gap = mu.breakpoints[i + 1] - t if i < mu.k else Fraction(1)
    eps = gap / 2
    if m > 0:
        eps = min(eps, (mu.lam - r) / (2 * m))
    # mu is linear on (t, t+eps], so the sup over the open part is the larger end limit
    candidates = [r, r + m * eps]
    if left_closed:
        candidates.append(value(mu, t))
    if right_closed:
        candidates.append(value(mu, t + eps))
    xi = max(candidates)
    return (xi, eps) if xi < mu.lam else None


def _statement_local(mu: PiecewiseLinearGauge, left_closed: bool, right_closed: bool) -> StatementResult:
    for t in _probe_points(mu):
        found = _local_bound(mu, t, left_closed, right_closed)
        if found is None:
            return StatementResult(False, {"t": float(t), "right_limsup": float(right_limit(mu, t))})
    return StatementResult(True)


def _statement_sequences(mu: PiecewiseLinearGauge, kind: str) -> StatementResult:
    """Exact sup analysis over monotone sequences of the given kind.

    A nonincreasing sequence is eventually constant or converges to some t
    from above.  Finitely many leading terms each stay below lam, so the sup
    reaches lam only through the limit of mu(x_n), which is mu(t) for an
    eventually constant tail (allowed unless the kind is strict) and the right
    limit at t for a strictly decreasing tail.  The worst strict tail at a
    breakpoint is ``x_n = t + gap * 2**-n``.
    """
    strict = "strictly" in kind
    for t in _probe_points(mu):
        i = _piece(mu, t)
        gap = mu.breakpoints[i + 1] - t if i < mu.k else Fraction(1)
        tail_limits = [right_limit(mu, t)]
        if not strict:
            tail_limits.append(value(mu, t))
        worst = max(tail_limits)
        if worst >= mu.lam:
            return StatementResult(False, {
                "t": float(t),
                "sup": float(worst),
                "sequence": {"start": float(t + gap), "limit": float(t), "ratio": 0.5},
            })
    return StatementResult(True)


def check_statement(mu: PiecewiseLinearGauge, k: int) -> StatementResult:
    if k == 1:
        return _statement_limsup(mu)
    if k == 2:
        return _statement_limsup(scale_to_unit(mu))
    if k in _INTERVALS:
        return _statement_local(mu, *_INTERVALS[k])
    if k in _SEQUENCES:
        return _statement_sequences(mu, _SEQUENCES[k])
    raise DomainError(f"statement number must be in 1..10, got {k}")


def is_mt(mu: PiecewiseLinearGauge) -> bool:
    return check_statement(mu, 1).passed


@dataclass
class MTReport:
    statement_verdicts: dict[int, bool]
    witnesses: dict[int, dict]

    @property
    def agree(self) -> bool:
        return len(set(self.statement_verdicts.values())) == 1

    @property
    def all_pass(self) -> bool:
        return all(self.statement_verdicts.values())

    def to_json(self) -> dict:
        return {
            "statement_verdicts": {str(k): "pass" if v else "fail" for k, v in self.statement_verdicts.items()},
            "witnesses": {str(k): w for k, w in self.witnesses.items()},
        }


def mt_report(mu: PiecewiseLinearGauge) -> MTReport:
    verdicts, witnesses = {}, {}
    for k in range(1, 11):
        res = check_statement(mu, k)
        verdicts[k] = res.passed
        if not res.passed:
            witnesses[k] = res.witness
    return MTReport(verdicts, witnesses)


@dataclass
class SampleResult:
    sup: Fraction
    sequence: list[Fraction]
    kind: str


def sequence_sampler(mu: PiecewiseLinearGauge, kind: str, seed: int, n: int, target=None, length: int = 64) -> SampleResult:
    """Sample ``n`` sequences of ``kind`` and return the largest sup of mu seen.

    Sequences halve their distance to a breakpoint (or to ``target``) from the
    right; non-strict kinds sometimes repeat terms or stay constant, eventual
    kinds get a short arbitrary prefix.  A semi-decision only: it can expose a
    failure but never certifies a pass.
    """
    if kind not in SEQUENCE_KINDS:
        raise DomainError(f"unknown sequence kind {kind!r}")
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.default_rng(seed)
    bps = mu.breakpoints
    span = bps[-1] + 1
    best_sup, best_seq = None, None
    for j in range(n):
        t = _q(target) if target is not None else bps[j % len(bps)]
        i = _piece(mu, t)
        gap = bps[i + 1] - t if i < mu.k else Fraction(1)
        h = gap * Fraction(1, 2 ** int(rng.integers(0, 4)))
        seq = [t + h / 2**e for e in range(length)]
        if not kind.endswith("strictly-decreasing"):
            if rng.random() < 0.25:
                seq = [seq[0]] * length
            else:
                seq = [x for x in seq for _ in range(1 + int(rng.random() < 0.3))][:length]
        if kind.startswith("eventually"):
            prefix = [span * Fraction(int(rng.integers(0, 1024)), 1024) for _ in range(int(rng.integers(1, 5)))]
            seq = prefix + seq
        sup = max(value(mu, x) for x in seq)
        if best_sup is None or sup > best_sup:
            best_sup, best_seq = sup, seq
    return SampleResult(best_sup, best_seq, kind)
