"""Command-line interface.

Conventions shared by all subcommands:

- JSON outputs are written with sorted keys and a trailing newline, and embed
  a run manifest (tool, version, subcommand, argv, input digests) but never
  wall-clock time, so reruns with identical inputs are byte-identical.
  Timing goes to stderr.
- scales accept plain numbers, fractions, and pi expressions: "0.25", "1/6",
  "2pi/21", "pi/4".
- exit codes: 0 done, 2 usage, 3 validation (bad metric, bad action, bad
  arguments), 4 simplex budget exceeded.  The simplex budget defaults to
  10^7, or the ORBITRIPS_BUDGET environment variable, or --budget.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
import time

from . import __version__
from .actions import (GroupClosureError, antipodal_generator,
                      block_shift_generator, build_quotient,
                      circle_rotation_generator, close_group, load_action,
                      paired_swap_generator, torus_grid_shift_generators,
                      verify_isometric)
from .complexes import (DEFAULT_BUDGET, DEFAULT_DIM_CAP, BudgetExceededError,
                        cech_complex, vr_complex, vr_filtration)
from .persistence import betti_at, format_barcode_tsv, reduce_filtration
from .quotient_iso import iso_check
from .spaces import (ShapeSpec, SpaceValidationError, critical_values,
                     generate_space, load_space, space_from_csv, space_to_dict,
                     twelve_circles_action_generators, validate_metric)
from .thresholds import (ball_threshold, diameter_action_check,
                         distance_threshold, nerve_action_check,
                         threshold_scan)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4

_SHAPE_ALIASES = {
    "circle": "evenly-spaced-circle",
    "sphere": "geodesic-sphere",
    "torus-grid": "flat-torus-grid",
}

_SCALE_RE = re.compile(
    r"^\s*([0-9]*\.?[0-9]*(?:[eE][+-]?[0-9]+)?)\s*\*?\s*(pi|π)?"
    r"\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$", re.IGNORECASE)


def parse_scale(text: str) -> float:
    """Parse "0.25", "1/6", "2pi/21", "pi", "2*pi/21" into a float scale."""
    m = _SCALE_RE.match(str(text))
    if not m or (not m.group(1) and not m.group(2)):
        raise ValueError(f"cannot parse scale {text!r}")
    value = float(m.group(1)) if m.group(1) else 1.0
    if m.group(2):
        value *= math.pi
    if m.group(3):
        value /= float(m.group(3))
    if value < 0:
        raise ValueError(f"scale must be nonnegative, got {text!r}")
    return value


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest(args, inputs: list[str]) -> dict:
    return {
        "tool": "orbitrips",
        "version": __version__,
        "subcommand": args.command,
        "argv": list(args._argv),
        "inputs": {p: _sha256(p) for p in inputs},
    }


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _emit_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _load_space_arg(path: str):
    if path.endswith(".csv"):
        return space_from_csv(path)
    return load_space(path)


def _budget(args) -> int:
    if getattr(args, "budget", None) is not None:
        return int(args.budget)
    env = os.environ.get("ORBITRIPS_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"ORBITRIPS_BUDGET must be an integer, got {env!r}")
    return DEFAULT_BUDGET


def _parse_params(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--param expects KEY=VALUE, got {pair!r}")
        key, raw = pair.split("=", 1)
        if raw.lower() in ("true", "false"):
            val = raw.lower() == "true"
        else:
            try:
                val = int(raw)
            except ValueError:
                try:
                    val = float(raw)
                except ValueError:
                    val = raw
        out[key] = val
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    kind = _SHAPE_ALIASES.get(args.shape, args.shape)
    spec = ShapeSpec(kind, _parse_params(args.param), seed=args.seed)
    space = generate_space(spec)
    report = validate_metric(space)
    if not report.ok:
        raise SpaceValidationError(report)
    doc = space_to_dict(space)
    doc["manifest"] = _manifest(args, [])
    _emit_json(doc, args.out)
    print(f"{kind}: {space.n} points", file=sys.stderr)
    return EXIT_OK


def cmd_action(args) -> int:
    if args.space:
        space = _load_space_arg(args.space)
        n = space.n
    elif args.n:
        space, n = None, args.n
    else:
        raise ValueError("action: need --space or --n")

    kind = args.kind
    if kind == "rotation":
        if args.steps is None:
            raise ValueError("rotation action needs --steps")
        gens = [circle_rotation_generator(n, args.steps)]
    elif kind == "antipodal":
        gens = [antipodal_generator(n)]
    elif kind == "paired-swap":
        if n % 2:
            raise ValueError("paired-swap needs an even point count")
        gens = [paired_swap_generator(n // 2)]
    elif kind == "block-shift":
        if args.blocks is None:
            raise ValueError("block-shift needs --blocks")
        if n % args.blocks:
            raise ValueError(f"{args.blocks} blocks do not divide {n} points")
        gens = [block_shift_generator(args.blocks, n // args.blocks)]
    elif kind == "torus-z14":
        k = math.isqrt(n)
        if k * k != n:
            raise ValueError("torus-z14 needs a square point count")
        gens = torus_grid_shift_generators(k)
    elif kind == "twelve-circles":
        if n % 12:
            raise ValueError("twelve-circles action needs 12 | n")
        gens = twelve_circles_action_generators(n // 12)
    else:
        raise ValueError(f"unknown action kind {kind!r}")

    action = close_group(n, gens)
    if space is not None:
        iso = verify_isometric(space, action)
        if not iso.ok:
            raise ValueError(f"action is not isometric: {iso.counterexample}")
    doc = {"n": n,
           "generators": [list(action.elements[i]) for i in action.generator_indices],
           "group_order": len(action.elements),
           "manifest": _manifest(args, [args.space] if args.space else [])}
    _emit_json(doc, args.out)
    print(f"{kind}: group order {len(action.elements)}", file=sys.stderr)
    return EXIT_OK


def cmd_quotient(args) -> int:
    space = _load_space_arg(args.space)
    action = load_action(args.action)
    q = build_quotient(space, action)
    if not q.validation.ok:
        print(f"warning: quotient metric has {len(q.validation.violations)} "
              f"triangle violations beyond tolerance", file=sys.stderr)
    doc = space_to_dict(q.space)
    doc["reps"] = [int(i) for i in q.reps]
    doc["proj"] = [int(a) for a in q.proj]
    doc["manifest"] = _manifest(args, [args.space, args.action])
    _emit_json(doc, args.out)
    print(f"{space.n} points -> {q.n_orbits} orbits "
          f"(group order {len(action.elements)})", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    space = _load_space_arg(args.space)
    action = load_action(args.action)
    r = parse_scale(args.scale)
    if args.kind in ("distance", "ball"):
        rep = (distance_threshold if args.kind == "distance" else ball_threshold)(space, action)
        ok = rep.vacuous or r <= rep.passes_at
        doc = {"kind": args.kind, "r": r, "ok": ok, "k_max": 0,
               "convention": "lt", "witness": None if ok else rep.witness,
               "subsets_checked": 0}
    elif args.kind == "diameter":
        res = diameter_action_check(space, action, r, k_max=args.k_max,
                                    budget=_budget(args))
        doc = res.to_dict()
    else:
        res = nerve_action_check(space, action, r, k_max=args.k_max,
                                 convention=args.convention, budget=_budget(args))
        doc = res.to_dict()
    doc["manifest"] = _manifest(args, [args.space, args.action])
    _emit_json(doc, args.out)
    print(f"{args.kind} at r={r:g}: {'pass' if doc['ok'] else 'FAIL'}", file=sys.stderr)
    return EXIT_OK


def cmd_thresholds(args) -> int:
    space = _load_space_arg(args.space)
    action = load_action(args.action)
    rep = threshold_scan(space, action, args.kind, k_max=args.k_max,
                         convention=args.convention, budget=_budget(args))
    doc = rep.to_dict()
    doc["manifest"] = _manifest(args, [args.space, args.action])
    _emit_json(doc, args.out)
    fails = "inf" if math.isinf(rep.fails_at) else f"{rep.fails_at:g}"
    print(f"{args.kind}: passes at {rep.passes_at:g}, fails at {fails}", file=sys.stderr)
    return EXIT_OK


def cmd_complex(args) -> int:
    space = _load_space_arg(args.space)
    r = parse_scale(args.scale)
    build = vr_complex if args.kind == "vr" else cech_complex
    cx = build(space, r, convention=args.convention, dim_cap=args.dim_cap,
               budget=_budget(args))
    doc = cx.to_dict()
    if not args.full:
        del doc["simplices"]
    doc["total"] = cx.total
    doc["manifest"] = _manifest(args, [args.space])
    _emit_json(doc, args.out)
    counts = ", ".join(f"{d}:{len(s)}" for d, s in sorted(cx.simplices.items()))
    print(f"{args.kind} at r={r:g} ({args.convention}): {counts}", file=sys.stderr)
    return EXIT_OK


def cmd_iso_check(args) -> int:
    space = _load_space_arg(args.space)
    action = load_action(args.action)
    r = parse_scale(args.scale)
    cert = iso_check(space, action, r, kind=args.kind,
                     convention=args.convention, dim_cap=args.dim_cap,
                     budget=_budget(args))
    doc = cert.to_dict()
    doc["manifest"] = _manifest(args, [args.space, args.action])
    _emit_json(doc, args.out)
    print(f"iso-check {args.kind} at r={r:g} ({args.convention}): {cert.verdict}",
          file=sys.stderr)
    return EXIT_OK


def cmd_persistence(args) -> int:
    space = _load_space_arg(args.space)
    filt = vr_filtration(space, dim_cap=args.dim_cap, budget=_budget(args))
    if args.max_scale is not None:
        filt = filt.truncate(parse_scale(args.max_scale), convention="leq")
    barcode = reduce_filtration(filt)
    manifest_line = json.dumps(_manifest(args, [args.space]), sort_keys=True)
    _emit_text(format_barcode_tsv(barcode, header_lines=[manifest_line]), args.out)
    n_bars = sum(len(v) for v in barcode.intervals.values())
    print(f"{len(filt.entries)} simplices -> {n_bars} bars", file=sys.stderr)
    return EXIT_OK


def cmd_betti(args) -> int:
    space = _load_space_arg(args.space)
    r = parse_scale(args.scale)
    bv = betti_at(space, r, convention=args.convention, dim_cap=args.dim_cap,
                  budget=_budget(args))
    doc = {"r": bv.r, "convention": bv.convention, "dim_cap": bv.dim_cap,
           "betti": list(bv.values), "provenance": bv.provenance,
           "manifest": _manifest(args, [args.space])}
    _emit_json(doc, args.out)
    print(f"betti at r={r:g} ({args.convention}): {bv.values}", file=sys.stderr)
    return EXIT_OK


def cmd_report(args) -> int:
    lines: list[str] = []

    def say(text: str) -> None:
        lines.append(text)

    say(f"orbitrips {__version__} demonstration report")
    say("")

    circle6 = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 6}))
    say("evenly-spaced-circle n=6 (circumference 1):")
    for r in (0.1, 1 / 6, 1 / 3, 0.5):
        bv = betti_at(circle6, r, convention="leq", dim_cap=3)
        say(f"  betti at r={r:.4f} (leq): {bv.values}")
    say("")

    circle12 = generate_space(ShapeSpec("evenly-spaced-circle", {"n": 12}))
    act = close_group(12, [antipodal_generator(12)])
    say("evenly-spaced-circle n=12 with the antipodal involution:")
    darep = distance_threshold(circle12, act)
    barep = ball_threshold(circle12, act)
    say(f"  distance property holds up to r = {darep.passes_at:.6f}")
    say(f"  ball property holds up to r = {barep.passes_at:.6f}")
    scan = threshold_scan(circle12, act, "diameter")
    say(f"  diameter property: passes at {scan.passes_at:.6f}, "
        f"fails at {scan.fails_at:.6f} "
        f"({(scan.witness or {}).get('mode', '?')} on orbits "
        f"{(scan.witness or {}).get('orbits')})")
    for r, conv in ((0.16, "lt"), (1 / 6, "leq")):
        cert = iso_check(circle12, act, r, kind="vr", convention=conv)
        say(f"  iso-check vr at r={r:.6f} ({conv}): {cert.verdict}")
    say("")

    circ36 = generate_space(ShapeSpec("evenly-spaced-circle",
                                      {"n": 36, "circumference": 3.0}))
    act3 = close_group(36, [circle_rotation_generator(36, 12)])
    nscan = threshold_scan(circ36, act3, "nerve", convention="lt")
    say("evenly-spaced-circle n=36 (circumference 3) with Z/3 rotation:")
    say(f"  nerve property: passes at {nscan.passes_at:.6f}, "
        f"fails at {nscan.fails_at:.6f}")
    say("")

    six = generate_space(ShapeSpec("six-circles", {"m": 12}))
    act6 = close_group(72, [block_shift_generator(6, 12)])
    # keep clear of r=1.0: the 2-step chord inside each 12-gon is exactly 1
    # in real arithmetic, so the strict complex there is rounding-sensitive
    bv = betti_at(six, 0.9, convention="lt", dim_cap=2)
    cert = iso_check(six, act6, 0.9, kind="vr", convention="lt", dim_cap=2)
    say("six-circles m=12 at r=0.9 (lt):")
    say(f"  betti: {bv.values} (six components, each a loop)")
    say(f"  iso-check vr: {cert.verdict}")

    _emit_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    if "space" in names:
        p.add_argument("--space", required=True, help="space JSON (or lower-triangular CSV)")
    if "action" in names:
        p.add_argument("--action", required=True, help="action JSON ({n, generators})")
    if "scale" in names:
        p.add_argument("--scale", required=True,
                       help="scale r (accepts pi expressions like 2pi/21)")
    if "convention" in names:
        p.add_argument("--convention", choices=("lt", "leq"), default="lt",
                       help="strict (<) or closed (<=) scale comparison")
    if "dim-cap" in names:
        p.add_argument("--dim-cap", type=int, default=DEFAULT_DIM_CAP,
                       help="largest simplex dimension kept")
    if "k-max" in names:
        p.add_argument("--k-max", type=int, default=DEFAULT_DIM_CAP,
                       help="check orbit subsets of size 2..k_max+1")
    if "budget" in names:
        p.add_argument("--budget", type=int, default=None,
                       help="simplex budget (default ORBITRIPS_BUDGET or 10^7)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitrips",
        description="Vietoris-Rips and Cech complexes of quotients of finite "
                    "metric spaces by isometric group actions")
    parser.add_argument("--version", action="version", version=f"orbitrips {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a built-in sample space")
    p.add_argument("--shape", required=True,
                   help="circle | sphere | torus-grid | six-circles | twelve-circles "
                        "(or a full kind name)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="shape parameter, repeatable (e.g. n=12, count=150, paired=true)")
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("action", help="build a canonical action and save its generators")
    p.add_argument("--kind", required=True,
                   choices=("rotation", "antipodal", "paired-swap", "block-shift",
                            "torus-z14", "twelve-circles"))
    p.add_argument("--space", default=None, help="space to verify the action against")
    p.add_argument("--n", type=int, default=None, help="point count (if no --space)")
    p.add_argument("--steps", type=int, default=None, help="rotation step count")
    p.add_argument("--blocks", type=int, default=None, help="block count for block-shift")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_action)

    p = sub.add_parser("quotient", help="quotient metric space of an action")
    _add_common(p, "space", "action")
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("check", help="check one action property at one scale")
    p.add_argument("--kind", required=True,
                   choices=("distance", "ball", "diameter", "nerve"))
    _add_common(p, "space", "action", "scale", "convention", "k-max", "budget")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("thresholds", help="bracket the largest passing scale of a property")
    p.add_argument("--kind", required=True,
                   choices=("distance", "ball", "diameter", "nerve"))
    _add_common(p, "space", "action", "convention", "k-max", "budget")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("complex", help="build a VR or Cech complex at one scale")
    p.add_argument("--kind", choices=("vr", "cech"), default="vr")
    p.add_argument("--full", action="store_true", help="include the simplex lists")
    _add_common(p, "space", "scale", "convention", "dim-cap", "budget")
    p.set_defaults(func=cmd_complex)

    p = sub.add_parser("iso-check",
                       help="compare complex-of-quotient with quotient-of-complex")
    p.add_argument("--kind", choices=("vr", "cech"), default="vr")
    _add_common(p, "space", "action", "scale", "convention", "dim-cap", "budget")
    p.set_defaults(func=cmd_iso_check)

    p = sub.add_parser("persistence", help="VR persistence barcode as TSV")
    p.add_argument("--max-scale", default=None, help="truncate the filtration")
    _add_common(p, "space", "dim-cap", "budget")
    p.set_defaults(func=cmd_persistence)

    p = sub.add_parser("betti", help="Betti numbers of the VR complex at one scale")
    _add_common(p, "space", "scale", "convention", "dim-cap", "budget")
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("report", help="run a small demonstration suite")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    t0 = time.perf_counter()
    try:
        rc = args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SpaceValidationError, GroupClosureError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    finally:
        print(f"[orbitrips] completed in {time.perf_counter() - t0:.3f}s",
              file=sys.stderr)
    return rc


if __name__ == "__main__":
    sys.exit(main())
