"""The Instance bundle and its canonical JSON form.

Canonical form: keys sorted, no whitespace, floats in Python's shortest
round-trip repr.  ``parse(canonical(x))`` re-serialises to the same bytes,
which makes :func:`instance_hash` meaningful.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GaugeValidationError, MalformedInputError
from .mt import PiecewiseLinearGauge
from .solver import MultivaluedMap, SelfMap
from .spaces import DistanceFunction, FiniteMetricSpace

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class Instance:
    space: FiniteMetricSpace
    kappa: DistanceFunction
    T: MultivaluedMap
    phi: SelfMap | None = None
    mu: PiecewiseLinearGauge | None = None
    L: float | None = None
    provenance: dict | None = None

    def __post_init__(self):
        ks = self.kappa.space
        if ks is not self.space and (ks.labels != self.space.labels or not np.array_equal(ks.d, self.space.d)):
            raise MalformedInputError("kappa is defined over a different space")
        if self.T.n != self.space.n:
            raise MalformedInputError("map_T does not cover the point set")
        if self.phi is not None and self.phi.n != self.space.n:
            raise MalformedInputError("phi does not cover the point set")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.space.labels

    def replace(self, **changes) -> Instance:
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict:
        lab = self.space.labels
        obj = {
            "schema_version": SCHEMA_VERSION,
            "points": list(lab),
            "metric": self.space.d.tolist(),
            "kappa": self.kappa.kappa.tolist(),
            "map_T": {lab[x]: [lab[y] for y in self.T[x]] for x in range(self.T.n)},
        }
        if self.phi is not None:
            obj["phi"] = {lab[x]: lab[self.phi[x]] for x in range(self.phi.n)}
        if self.mu is not None:
            obj["mu"] = self.mu.to_json()
        if self.L is not None:
            obj["L"] = float(self.L)
        if self.provenance is not None:
            obj["provenance"] = self.provenance
        return obj

    @classmethod
    def from_json(cls, obj) -> Instance:
        if not isinstance(obj, dict):
            raise MalformedInputError("instance must be a JSON object")
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise MalformedInputError(f"unsupported schema_version {obj.get('schema_version')!r}")
        for key in ("points", "metric", "kappa", "map_T"):
            if key not in obj:
                raise MalformedInputError(f"missing field {key!r}")
        labels = obj["points"]
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise MalformedInputError("points must be a list of strings")
        space = FiniteMetricSpace(tuple(labels), obj["metric"])
        kappa = DistanceFunction(space, obj["kappa"])
        where = {s: i for i, s in enumerate(labels)}

        def idx(label, field):
            try:
                return where[label]
            except (KeyError, TypeError):
                raise MalformedInputError(f"{field}: unknown point label {label!r}") from None

        raw_T = obj["map_T"]
        if not isinstance(raw_T, dict) or set(raw_T) != set(labels):
            raise MalformedInputError("map_T must map every point label to a label list")
        images = []
        for s in labels:
            img = raw_T[s]
            if not isinstance(img, list) or not img:
                raise MalformedInputError(f"map_T[{s!r}] must be a nonempty label list")
            images.append(tuple(idx(t, "map_T") for t in img))
        T = MultivaluedMap(tuple(images))

        phi = None
        if obj.get("phi") is not None:
            raw = obj["phi"]
            if not isinstance(raw, dict) or set(raw) != set(labels):
                raise MalformedInputError("phi must map every point label to a label")
            phi = SelfMap(tuple(idx(raw[s], "phi") for s in labels))
        mu = None
        if obj.get("mu") is not None:
            try:
                mu = PiecewiseLinearGauge.from_json(obj["mu"])
            except (GaugeValidationError, TypeError, ValueError) as exc:
                raise MalformedInputError(f"mu: {exc}") from None
        L = obj.get("L")
        if L is not None:
            if isinstance(L, bool) or not isinstance(L, (int, float)) or not np.isfinite(L):
                raise MalformedInputError("L must be a finite number")
            L = float(L)
        return cls(space, kappa, T, phi, mu, L, obj.get("provenance"))


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=False)


def canonical(instance: Instance) -> str:
    return canonical_dumps(instance.to_json())


def instance_hash(instance: Instance) -> str:
    return hashlib.sha256(canonical(instance).encode("utf-8")).hexdigest()


def parse_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return Instance.from_json(obj)


def load_instance(path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def save_instance(instance: Instance, path) -> str:
    text = canonical(instance)
    Path(path).write_text(text + "\n", encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
