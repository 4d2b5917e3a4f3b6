"""Command-line entry point. Exit codes: 0 ok, 1 rejected/infeasible/invalid, 2 usage error, 3 budget exceeded."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import EonError
from .exact import ExactBudget, solve_exact
from .experiments import sweep
from .orchestrator import (
    dumps_document,
    embed_vn,
    embedding_to_document,
    load_vn,
    random_vn,
    validate,
)
from .ordering import brute_force_order, build_aux_graph, get_vlink_order
from .reach import load_reach_table
from .spectrum import SpectrumState
from .topology import convert_sndlib, load_topology, precompute_candidates
from .vlink_embed import EmbedParams

DEFAULTS = {"k": 25, "q": 8, "sigma": 3, "seed": 0, "variant": "Flex-AT"}
BUDGET_KEYS = ("max_vlinks", "max_k", "max_q", "max_slices", "max_nodes", "max_seconds")

log = logging.getLogger("eonvne")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eonvne", description="Survivable VN embedding on elastic optical networks")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, reach=True):
        sp.add_argument("--config", help="JSON file with default values for k, q, sigma, seed, variant, budget")
        sp.add_argument("--topology")
        if reach:
            sp.add_argument("--reach", help="reach-table JSON (default: bundled table)")
            sp.add_argument("--variant", choices=("Fix-RT", "Fix-AT", "Flex-AT"))
        sp.add_argument("--vn")
        sp.add_argument("--k", type=int)
        sp.add_argument("--q", type=int)
        sp.add_argument("--sigma", type=int)
        sp.add_argument("--seed", type=int, help="generate a random VN when --vn is absent")
        sp.add_argument("--out")
        sp.add_argument("-v", "--verbose", action="count", default=0)

    common(sub.add_parser("solve", help="heuristic embedding of one VN"))
    ex = sub.add_parser("exact", help="exact optimum for a tiny VN")
    common(ex)
    for key in BUDGET_KEYS:
        ex.add_argument(f"--budget-{key.replace('max_', '').replace('_', '-')}", dest=key, type=float)
    order = sub.add_parser("order", help="VLink embedding order")
    common(order, reach=False)
    order.add_argument("--brute-force", action="store_true", help="also compute the factorial-search minimum")
    sw = sub.add_parser("sweep", help="run a scenario and write CSV")
    sw.add_argument("--scenario", required=True)
    sw.add_argument("--out")
    sw.add_argument("--timing", action="store_true", help="fill runtime_ms (output no longer reproducible)")
    sw.add_argument("-v", "--verbose", action="count", default=0)
    val = sub.add_parser("validate", help="check an embedding document against every constraint")
    common(val)
    val.add_argument("--embedding", required=True)
    conv = sub.add_parser("convert-topology", help="SNDlib native text to topology JSON")
    conv.add_argument("--sndlib", required=True)
    conv.add_argument("--slice-count", type=int, required=True)
    conv.add_argument("--name", default="")
    conv.add_argument("--length-scale", type=float, default=1.0)
    conv.add_argument("--out")
    conv.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _settings(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    for key in ("k", "q", "sigma", "seed", "variant"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    for key in ("k", "q", "sigma"):
        if int(cfg[key]) < 1:
            raise UsageError(f"--{key} must be positive")
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _require(args, *names) -> None:
    for n in names:
        if not getattr(args, n, None):
            raise UsageError(f"--{n} is required for {args.command}")


def _inputs(args, cfg):
    _require(args, "topology")
    topo = load_topology(Path(args.topology))
    reach = load_reach_table(Path(args.reach) if getattr(args, "reach", None) else None, cfg["variant"])
    if args.vn:
        vn = load_vn(Path(args.vn))
    else:
        vn = random_vn(topo, int(cfg["seed"]))
    return topo, reach, vn


def cmd_solve(args, cfg) -> int:
    topo, reach, vn = _inputs(args, cfg)
    params = EmbedParams(k=int(cfg["k"]), q=int(cfg["q"]), sigma=int(cfg["sigma"]))
    res = embed_vn(topo, reach, vn, SpectrumState.for_topology(topo), params)
    _emit(dumps_document(embedding_to_document(res)), args.out)
    if not res.accepted:
        print(f"rejected: VLink {res.vlink_id}: {res.reason}", file=sys.stderr)
        return 1
    print(f"accepted: objective {float(res.objective):.6f}, ssu {res.ssu}", file=sys.stderr)
    return 0


def cmd_exact(args, cfg) -> int:
    topo, reach, vn = _inputs(args, cfg)
    bcfg = dict(cfg.get("budget", {}))
    for key in BUDGET_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            bcfg[key] = value
    bcfg = {k: (float(v) if k == "max_seconds" else int(v)) for k, v in bcfg.items()}
    try:
        budget = ExactBudget(**bcfg)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad budget: {exc}") from exc
    # exact defaults are the tiny-instance ones unless given explicitly
    k = int(args.k if args.k is not None else cfg.get("exact_k", 4))
    q = int(args.q if args.q is not None else cfg.get("exact_q", 3))
    res = solve_exact(topo, reach, vn, budget, k=k, q=q)
    if res.status == "optimal":
        _emit(dumps_document(embedding_to_document(res.embedding)), args.out)
        print(f"optimal: objective {float(res.objective):.6f}, ssu {res.ssu}", file=sys.stderr)
        return 0
    _emit(dumps_document({"vn": vn.name, "status": res.status, "detail": res.detail}), args.out)
    print(f"{res.status}: {res.detail}", file=sys.stderr)
    return 3 if res.status == "budget_exceeded" else 1


def cmd_order(args, cfg) -> int:
    _require(args, "topology")
    topo = load_topology(Path(args.topology))
    vn = load_vn(Path(args.vn)) if args.vn else random_vn(topo, int(cfg["seed"]))
    reach = load_reach_table(None, cfg["variant"])
    cands = precompute_candidates(topo, vn, reach, int(cfg["k"]))
    aux = build_aux_graph({v.id: cands[v.id] for v in vn.vlinks})
    order = get_vlink_order(aux)
    doc = {"order": list(order.order), "commonality_index": order.commonality_index}
    if args.brute_force:
        bf = brute_force_order(aux)
        doc["brute_force_order"] = list(bf.order)
        doc["brute_force_index"] = bf.commonality_index
        doc["match"] = bf.commonality_index == order.commonality_index
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if args.brute_force and not doc["match"]:
        print("greedy index differs from the brute-force minimum", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args, cfg) -> int:
    text = sweep(Path(args.scenario), timing=args.timing or None)
    _emit(text, args.out)
    return 0


def cmd_validate(args, cfg) -> int:
    topo, reach, vn = _inputs(args, cfg)
    doc = json.loads(Path(args.embedding).read_text())
    if not doc.get("accepted", True):
        print("embedding document is a rejection; nothing to validate", file=sys.stderr)
        return 1
    report = validate(doc, topo, reach, vn, q=int(cfg["q"]))
    sys.stderr.write(report.render())
    if args.out:
        Path(args.out).write_text(json.dumps(report.failures, indent=2) + "\n")
    return 0 if report.ok else 1


def cmd_convert(args, cfg) -> int:
    doc = convert_sndlib(Path(args.sndlib).read_text(), args.slice_count, args.name, args.length_scale)
    load_topology(doc)  # validate before writing
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    print(f"{len(doc['nodes'])} nodes, {len(doc['links'])} links", file=sys.stderr)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "exact": cmd_exact,
    "order": cmd_order,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "convert-topology": cmd_convert,
}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose >= 2 else logging.INFO if args.verbose == 1 else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _settings(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EonError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
