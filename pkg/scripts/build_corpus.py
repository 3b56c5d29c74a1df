"""Write a seeded corpus of positive and mutated instance files.

The directory can then be checked in one go with ``edfix verify --dir``.

    python scripts/build_corpus.py corpus/ --per-target 50 --mutants 50
"""
import argparse
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from edfix.errors import MutationSkipped
from edfix.gen import KAPPA_KINDS, MUTATIONS, SPACE_KINDS, GenProfile, gen_instance, mutate
from edfix.instance import save_instance

TARGETS = ("T2.1", "T2.2", "T2.3", "T2.4")


@dataclass
class CorpusConfig:
    out: str = "corpus"
    per_target: int = 50
    mutants: int = 50
    max_n: int = 10
    seed0: int = 0


def build(cfg: CorpusConfig) -> dict:
    root = Path(cfg.out)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for t, target in enumerate(TARGETS):
        for i in range(cfg.per_target):
            seed = cfg.seed0 + 10_000 * t + i
            p = GenProfile(seed=seed, n_points=2 + i % (cfg.max_n - 1), space_kind=SPACE_KINDS[seed % 3],
                           kappa_kind=KAPPA_KINDS[(seed // 3) % 3], theorem_target=target)
            name = f"pos-{target}-{seed}.json"
            manifest[name] = save_instance(gen_instance(p), root / name)
    made = 0
    seed = cfg.seed0
    while made < cfg.mutants:
        target, mutation = TARGETS[seed % 4], MUTATIONS[(seed // 4) % 4]
        inst = gen_instance(GenProfile(seed=seed, n_points=3 + seed % (cfg.max_n - 2), theorem_target=target))
        seed += 1
        try:
            inst, delta = mutate(inst, mutation, seed)
        except MutationSkipped:
            continue
        inst = inst.replace(provenance={**inst.provenance, "mutation": delta})
        name = f"neg-{mutation}-{target}-{seed}.json"
        manifest[name] = save_instance(inst, root / name)
        made += 1
    return manifest


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--per-target", type=int, default=CorpusConfig.per_target)
    ap.add_argument("--mutants", type=int, default=CorpusConfig.mutants)
    ap.add_argument("--max-n", type=int, default=CorpusConfig.max_n)
    ap.add_argument("--seed0", type=int, default=CorpusConfig.seed0)
    a = ap.parse_args()
    cfg = CorpusConfig(a.out, a.per_target, a.mutants, max(a.max_n, 3), a.seed0)
    manifest = build(cfg)
    print(json.dumps({"config": asdict(cfg), "files": len(manifest)}, indent=2))


if __name__ == "__main__":
    main()
