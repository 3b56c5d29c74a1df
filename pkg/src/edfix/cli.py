"""Command-line front end.

Reports go to stdout as JSON; diagnostics go to stderr.  Exit codes:
0 all pass, 1 something failed (or an orbit hit its cap), 2 malformed input,
3 hypotheses passed but the conclusion failed (a theorem violation).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ConfigurationError, DomainError, GenerationError, MalformedInputError, MutationSkipped
from .gen import GenProfile, gen_instance
from .hyperspace import dkappa, hausdorff, xi
from .instance import Instance, canonical, instance_hash, load_instance, save_instance
from .mt import mt_report
from .solver import iterate, verify_theorem
from .spaces import classify

EXIT_OK, EXIT_FAIL, EXIT_MALFORMED, EXIT_VIOLATION = 0, 1, 2, 3
_STATUS_EXIT = {"pass": EXIT_OK, "hypothesis-fail": EXIT_FAIL, "theorem-violation": EXIT_VIOLATION}


class _Malformed(Exception):
    pass


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _load(path) -> Instance:
    try:
        return load_instance(path)
    except OSError as exc:
        raise _Malformed(f"cannot read {path}: {exc}") from None
    except (MalformedInputError, DomainError) as exc:
        raise _Malformed(f"{path}: {exc}") from None


def _labels(inst: Instance, spec: str) -> list[int]:
    names = [s for s in spec.split(",") if s]
    if not names:
        raise _Malformed("point set must be nonempty")
    try:
        return [inst.space.index(s) for s in names]
    except DomainError as exc:
        raise _Malformed(str(exc)) from None


def cmd_check(args, log):
    inst = _load(args.file)
    log["instance_hash"] = instance_hash(inst)
    what = "mt" if args.command == "check-mt" else args.what
    if what == "mt":
        if inst.mu is None:
            raise _Malformed("instance has no mu")
        report = mt_report(inst.mu)
    else:
        report = classify(inst.kappa)
    out = report.to_json()
    _emit(out)
    log["report"] = out
    return EXIT_OK if report.all_pass else EXIT_FAIL


def cmd_dist(args, log):
    inst = _load(args.file)
    log["instance_hash"] = instance_hash(inst)
    A, B = _labels(inst, args.A), _labels(inst, args.B)
    flavor = args.command if args.command in ("dkappa", "hausdorff") else args.flavor
    if flavor == "dkappa":
        value = dkappa(inst.kappa, A, B)
    elif flavor == "hausdorff":
        value = hausdorff(inst.space, A, B)
    else:
        value = xi(inst.kappa, A, B)
    out = {"flavor": flavor, "A": args.A.split(","), "B": args.B.split(","), "value": value}
    _emit(out)
    log["report"] = out
    return EXIT_OK


def cmd_solve(args, log):
    inst = _load(args.file)
    log["instance_hash"] = instance_hash(inst)
    (x0,) = _labels(inst, args.x0)
    try:
        trace = iterate(inst.kappa, inst.T, x0, args.max_iter)
    except DomainError as exc:
        raise _Malformed(str(exc)) from None
    out = trace.to_json(inst.labels)
    _emit(out)
    log["report"] = out
    return EXIT_OK if trace.outcome == "fixed-point" else EXIT_FAIL


def _theorem_for(inst: Instance, requested: str | None) -> str:
    if requested:
        return requested
    target = ((inst.provenance or {}).get("profile") or {}).get("theorem_target")
    if not target:
        raise _Malformed("no --theorem given and the instance records no theorem_target")
    return target


def _verify_one(inst: Instance, theorem: str):
    try:
        return verify_theorem(inst, theorem)
    except ConfigurationError as exc:
        raise _Malformed(str(exc)) from None


def cmd_verify(args, log):
    if args.dir is None:
        if args.file is None:
            raise _Malformed("give an instance file or --dir")
        inst = _load(args.file)
        log["instance_hash"] = instance_hash(inst)
        report = _verify_one(inst, _theorem_for(inst, args.theorem))
        out = report.to_json(inst.labels)
        _emit(out)
        log["report"] = {"theorem": report.theorem, "status": report.status}
        return _STATUS_EXIT[report.status]

    files = sorted(Path(args.dir).glob("*.json"))
    counts = {"pass": 0, "hypothesis-fail": 0, "theorem-violation": 0, "error": 0}
    results = []
    for path in files:
        try:
            inst = _load(path)
            report = _verify_one(inst, _theorem_for(inst, args.theorem))
            status = report.status
            results.append({"file": path.name, "theorem": report.theorem, "status": status})
        except _Malformed as exc:
            status = "error"
            results.append({"file": path.name, "status": status, "error": str(exc)})
            print(f"{path.name}: {exc}", file=sys.stderr)
        counts[status] += 1
    out = {"files": len(files), "counts": counts, "results": results}
    _emit(out)
    log["report"] = {"files": len(files), "counts": counts}
    if counts["theorem-violation"]:
        return EXIT_VIOLATION
    if counts["error"]:
        return EXIT_MALFORMED
    return EXIT_OK if counts["pass"] == len(files) else EXIT_FAIL


def _parse_profile(text: str | None) -> dict:
    out = {}
    for item in (text or "").split(","):
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise _Malformed(f"--profile entries look like key=value, got {item!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def cmd_gen(args, log):
    fields = _parse_profile(args.profile)
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.n is not None:
        fields["n_points"] = args.n
    if args.theorem is not None:
        fields["theorem_target"] = args.theorem
    for key in ("seed", "n_points"):
        if key in fields:
            try:
                fields[key] = int(fields[key])
            except ValueError:
                raise _Malformed(f"{key} must be an integer") from None
    try:
        profile = GenProfile(**fields)
        inst = gen_instance(profile)
    except TypeError as exc:
        raise _Malformed(f"bad profile: {exc}") from None
    except (DomainError, MutationSkipped, GenerationError) as exc:
        raise _Malformed(str(exc)) from None
    if args.out:
        digest = save_instance(inst, args.out)
        out = {"out": str(args.out), "hash": digest}
        _emit(out)
    else:
        print(canonical(inst))
        out = {"hash": instance_hash(inst)}
    log["instance_hash"] = out["hash"]
    log["report"] = out
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edfix", description="Fixed points for e0-distances on finite instances.")
    p.add_argument("--log", help="append one JSON run record per command to this file")
    p.add_argument("--version", action="version", version=f"edfix {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="classify kappa (axioms) or the gauge (mt)")
    c.add_argument("file")
    c.add_argument("--what", choices=("axioms", "mt"), default="axioms")
    c.set_defaults(func=cmd_check)
    c = sub.add_parser("check-mt", help="decide the ten MT statements for mu")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    for name in ("dist", "dkappa", "hausdorff"):
        c = sub.add_parser(name, help="distance between two label sets")
        c.add_argument("file")
        c.add_argument("A", help="comma-separated labels")
        c.add_argument("B", help="comma-separated labels")
        if name == "dist":
            c.add_argument("--flavor", choices=("dkappa", "hausdorff", "xi"), default="dkappa")
        c.set_defaults(func=cmd_dist)

    c = sub.add_parser("solve", help="run the greedy orbit from x0")
    c.add_argument("file")
    c.add_argument("--x0", required=True)
    c.add_argument("--max-iter", type=int, default=None)
    c.set_defaults(func=cmd_solve)

    c = sub.add_parser("verify", help="check a theorem's hypotheses and conclusion")
    c.add_argument("file", nargs="?")
    c.add_argument("--theorem")
    c.add_argument("--dir")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("gen", help="generate an instance file")
    c.add_argument("--seed", type=int)
    c.add_argument("--n", type=int)
    c.add_argument("--theorem")
    c.add_argument("--profile", help="key=value,... over seed, n_points, space_kind, kappa_kind, map_kind, theorem_target, mutation")
    c.add_argument("--out")
    c.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    log = {"command": args.command, "arguments": {k: v for k, v in vars(args).items() if k != "func"}, "version": __version__}
    start = time.perf_counter()
    try:
        code = args.func(args, log)
    except _Malformed as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_MALFORMED
    log["exit_code"] = code
    log["wall_time"] = time.perf_counter() - start
    if args.log:
        with open(args.log, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(log, sort_keys=True, default=str) + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
