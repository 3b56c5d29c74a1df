"""Generate positive instances per theorem target and tally verify_theorem statuses.

    python scripts/soundness_sweep.py --count 200 --max-n 12 --targets T2.1,T2.3
"""
import argparse
import json
import time
from collections import Counter
from dataclasses import asdict, dataclass

from edfix.gen import KAPPA_KINDS, SPACE_KINDS, TARGETS, GenProfile, gen_instance, positive_checks
from edfix.solver import verify_theorem

MAP_KINDS = ("funnel", "random-rejection", "constant-target")


@dataclass
class SweepConfig:
    targets: tuple = ("T2.1", "T2.2", "T2.3", "T2.4")
    count: int = 500
    min_n: int = 2
    max_n: int = 12
    seed0: int = 0


def run(cfg: SweepConfig) -> dict:
    out = {}
    for t_index, target in enumerate(cfg.targets):
        statuses, gen_fail = Counter(), 0
        start = time.perf_counter()
        for i in range(cfg.count):
            seed = cfg.seed0 + 1_000_000 * t_index + i
            p = GenProfile(
                seed=seed,
                n_points=cfg.min_n + i % (cfg.max_n - cfg.min_n + 1),
                space_kind=SPACE_KINDS[seed % 3],
                kappa_kind=KAPPA_KINDS[(seed // 3) % 3],
                map_kind=MAP_KINDS[(seed // 9) % 3],
                theorem_target=target,
            )
            inst = gen_instance(p)
            gen_fail += not all(positive_checks(inst, target).values())
            statuses[verify_theorem(inst, target).status] += 1
        out[target] = {"statuses": dict(statuses), "positive_check_failures": gen_fail,
                       "seconds": round(time.perf_counter() - start, 2)}
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--targets", default=",".join(SweepConfig.targets))
    ap.add_argument("--count", type=int, default=SweepConfig.count)
    ap.add_argument("--min-n", type=int, default=SweepConfig.min_n)
    ap.add_argument("--max-n", type=int, default=SweepConfig.max_n)
    ap.add_argument("--seed0", type=int, default=SweepConfig.seed0)
    a = ap.parse_args()
    targets = tuple(t for t in a.targets.split(",") if t)
    unknown = set(targets) - set(TARGETS)
    if unknown:
        ap.error(f"unknown targets {sorted(unknown)}")
    cfg = SweepConfig(targets, a.count, a.min_n, a.max_n, a.seed0)
    result = run(cfg)
    print(json.dumps({"config": asdict(cfg), "result": result}, indent=2))
    if any(r["statuses"].get("theorem-violation") for r in result.values()):
        raise SystemExit(3)


if __name__ == "__main__":
    main()
