"""Command-line front end.

Exit codes: 0 success or realizable, 1 negative result, 2 input error,
3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Any, Sequence

from . import builtins as bi
from . import graphmon as gm
from . import isystem as isy
from . import realize as rz

OK, NEGATIVE, INPUT_ERROR, INCONCLUSIVE = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    depth: int = gm.DEFAULT_DEPTH
    J_max: int = gm.DEFAULT_JMAX
    size_cap: int = gm.DEFAULT_SIZE_CAP
    ilp_bound: int | None = None
    format: str = "json"
    dot: str | None = None
    policy: str = rz.LITERAL


def dumps(data: Any) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _builtin_args(params: Sequence[str]) -> list[str]:
    """``r=3 s=2`` or ``3 2``; keys only document the position."""
    return [p.split("=", 1)[1] if "=" in p else p for p in params]


def load_system(source: str, params: Sequence[str] = ()) -> isy.ISystem:
    """A JSON file, or the name of a built-in example followed by its parameters."""
    if os.path.exists(source) or source.endswith(".json"):
        if params:
            raise InputError("parameters are only accepted for built-in examples")
        data = _read_json(source)
        try:
            return isy.from_json(data)
        except isy.ISystemError as exc:
            raise InputError(f"{source}: {exc}") from exc
    try:
        return bi.get(source, _builtin_args(params))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(str(exc).strip("'\"")) from exc


def load_graph(path: str) -> gm.GraphTemplate:
    data = _read_json(path)
    if isinstance(data, dict) and "template" in data:
        data = data["template"]
    try:
        return gm.template_from_json(data)
    except (gm.GraphError, AttributeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_map(path: str) -> rz.GeneratorMap:
    data = _read_json(path)
    if isinstance(data, dict) and "generator_map" in data:
        data = data["generator_map"]
    try:
        return rz.genmap_from_json(data)
    except (ValueError, gm.GraphError, AttributeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _emit(cfg: RunConfig, data: dict[str, Any], text: str) -> None:
    sys.stdout.write(dumps(data) if cfg.format == "json" else text.rstrip("\n") + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg: RunConfig, source: str, params: Sequence[str]) -> int:
    s = load_system(source, params)
    rep = isy.validate(s, cfg.ilp_bound)
    lines = ["valid" if rep.ok else "invalid"] + [f"  {i['condition']}: {i['message']}" for i in rep.issues]
    _emit(cfg, {"schema": 1, **rep.to_json()}, "\n".join(lines))
    return OK if rep.ok else NEGATIVE


def _decide(cfg: RunConfig, s: isy.ISystem) -> rz.Decision:
    try:
        return rz.decide(s, policy=cfg.policy, bound=cfg.ilp_bound)
    except rz.InvalidSystem as exc:
        raise InputError(f"invalid I-system: {exc}") from exc


def _decision_text(d: rz.Decision) -> str:
    lines = [d.overall]
    for c in d.certificates:
        lines.append(f"  {c.prime}: {c.verdict} (surjective={c.surjective}, kernel={c.kernel_structure}, "
                     f"cyclic={c.cyclic}, generator={c.positive_generator}) {c.note}".rstrip())
    return "\n".join(lines)


def cmd_decide(cfg: RunConfig, source: str, params: Sequence[str]) -> int:
    d = _decide(cfg, load_system(source, params))
    _emit(cfg, d.to_json(), _decision_text(d))
    return {rz.REALIZABLE: OK, rz.NOT_REALIZABLE: NEGATIVE}.get(d.overall, INCONCLUSIVE)


def cmd_synthesize(cfg: RunConfig, source: str, params: Sequence[str], out_graph: str | None,
                   out_map: str | None) -> int:
    s = load_system(source, params)
    d = _decide(cfg, s)
    if not d.realizable:
        _emit(cfg, d.to_json(), _decision_text(d))
        return NEGATIVE if d.overall == rz.NOT_REALIZABLE else INCONCLUSIVE
    try:
        syn = rz.synth(s, d, cfg.ilp_bound)
    except rz.SynthesisInconclusive as exc:
        sys.stderr.write(f"synthesis inconclusive: {exc}\n")
        return INCONCLUSIVE
    tj, mj = syn.template.to_json(), syn.genmap.to_json()
    for path, data in ((out_graph, tj), (out_map, mj)):
        if path:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(dumps(data))
    if cfg.dot:
        with open(cfg.dot, "w", encoding="utf-8") as fh:
            fh.write(gm.export_dot(syn.template, cfg.J_max))
    text = "\n".join(f"{v} -> {e}" for v, e in gm.relations_of(gm.instantiate(syn.template, cfg.J_max)))
    _emit(cfg, {"schema": 1, "template": tj, "generator_map": mj}, text)
    return OK


def cmd_verify(cfg: RunConfig, source: str, params: Sequence[str], graph: str, gmap: str) -> int:
    s = load_system(source, params)
    t = load_graph(graph)
    m = load_map(gmap)
    try:
        gm.instantiate(t, cfg.J_max)
    except gm.GraphError as exc:
        raise InputError(str(exc)) from exc
    rep = rz.verify(s, t, m, cfg.depth, cfg.J_max, cfg.size_cap, cfg.ilp_bound)
    lines = [f"{c.outcome:12s} {c.direction:14s} {c.relation}" for c in rep.checks]
    lines.append(f"passed {rep.count('pass')}, inconclusive {rep.count('inconclusive')}, failed {rep.count('fail')}")
    _emit(cfg, rep.to_json(), "\n".join(lines))
    if rep.count("fail"):
        return NEGATIVE
    return INCONCLUSIVE if rep.count("inconclusive") else OK


def _vertex_set(items: Sequence[str]) -> list[str]:
    out = []
    for it in items:
        out += [x for x in it.replace("{", " ").replace("}", " ").replace(",", " ").split() if x]
    return out


def _parse_element(g: gm.FiniteGraph, text: str) -> gm.FreeElement:
    try:
        x = gm.FreeElement.parse(text)
    except gm.GraphError as exc:
        raise InputError(str(exc)) from exc
    unknown = x.support - set(g.vertices)
    if unknown:
        raise InputError(f"unknown vertices: {', '.join(sorted(unknown))}")
    return x


def cmd_graph(cfg: RunConfig, args: argparse.Namespace) -> int:
    sub = args.graph_command
    if sub == "refine-probe" and not args.graph:
        import random

        rng = random.Random(args.seed)
        failures, unsure, runs = 0, 0, []
        for k in range(args.graphs):
            g = gm.random_graph(rng)
            rep = gm.refinement_probe(g, args.trials, cfg.depth, cfg.size_cap, seed=rng.randrange(1 << 30))
            failures += len(rep.failures)
            unsure += len(rep.inconclusive)
            runs.append({"graph": g.to_json(), "report": rep.to_json()})
        data = {"schema": 1, "graphs": args.graphs, "failures": failures, "inconclusive": unsure, "runs": runs}
        _emit(cfg, data, f"graphs {args.graphs}, failures {failures}, inconclusive {unsure}")
        return NEGATIVE if failures else OK
    if not args.graph:
        raise InputError("a graph file is required")
    t = load_graph(args.graph)
    try:
        g = gm.instantiate(t, cfg.J_max)
    except gm.GraphError as exc:
        raise InputError(str(exc)) from exc
    if sub == "eq":
        a, b = _parse_element(g, args.alpha), _parse_element(g, args.beta)
        r = gm.equal_bounded(g, a, b, cfg.depth, cfg.size_cap)
        data = {"schema": 1, "result": r.status, "witness": None if r.witness is None else str(r.witness),
                "left": list(r.left), "right": list(r.right), "stats": dict(r.stats)}
        text = r.status + (f" via {r.witness}" if r.witness is not None else "")
        _emit(cfg, data, text)
        return OK if r.equal else INCONCLUSIVE
    if sub == "closure":
        X = _vertex_set(args.vertices)
        unknown = set(X) - set(g.vertices)
        if unknown:
            raise InputError(f"unknown vertices: {', '.join(sorted(unknown))}")
        H = sorted(gm.hereditary_saturated_closure(g, X))
        _emit(cfg, {"schema": 1, "closure": H}, "{" + ", ".join(H) + "}")
        return OK
    if sub == "ideals":
        try:
            sets = gm.enumerate_hereditary_saturated(g, guard=args.guard)
        except gm.GraphError as exc:
            raise InputError(str(exc)) from exc
        out = [sorted(H) for H in sets]
        _emit(cfg, {"schema": 1, "count": len(out), "sets": out},
              "\n".join("{" + ", ".join(H) + "}" for H in out))
        return OK
    if sub == "refine-probe":
        rep = gm.refinement_probe(g, args.trials, cfg.depth, cfg.size_cap, seed=args.seed)
        _emit(cfg, {"schema": 1, **rep.to_json()},
              f"failures {len(rep.failures)}, inconclusive {len(rep.inconclusive)}")
        return NEGATIVE if rep.failures else OK
    if sub == "dot":
        sys.stdout.write(gm.export_dot(t, cfg.J_max, expand=args.expand))
        return OK
    raise InputError(f"unknown graph command {sub}")


def cmd_examples(cfg: RunConfig, args: argparse.Namespace) -> int:
    if args.examples_command == "list":
        rows = [{"name": n, "params": p, "description": d} for n, (_, p, d) in bi.BUILTINS.items()]
        _emit(cfg, {"schema": 1, "examples": rows},
              "\n".join(f"{r['name']:11s} {r['params']:9s} {r['description']}" for r in rows))
        return OK
    s = load_system(args.name, args.params)
    sys.stdout.write(dumps(isy.to_json(s)))
    return OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=gm.DEFAULT_DEPTH, help="rewrite steps per side")
    common.add_argument("--jmax", type=int, default=gm.DEFAULT_JMAX, help="ladder truncation (even, >= 4)")
    common.add_argument("--size-cap", type=int, default=gm.DEFAULT_SIZE_CAP, help="largest multiset searched")
    common.add_argument("--ilp-bound", type=int, default=None, help="coefficient bound for integer searches")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--dot", default=None, help="also write DOT output here")
    common.add_argument("--trivial-kernel-policy", choices=rz.POLICIES, default=rz.LITERAL)

    p = argparse.ArgumentParser(prog="graphmonoid", description="Graph monoid realizability for I-systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def system_cmd(name: str, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("system", help="I-system JSON file or built-in example name")
        sp.add_argument("params", nargs="*", help="built-in parameters, e.g. r=3 s=2")
        return sp

    system_cmd("validate", "check the I-system conditions")
    system_cmd("decide", "decide whether the monoid is a graph monoid")
    sp = system_cmd("synthesize", "build a realizing graph")
    sp.add_argument("--out-graph", default=None)
    sp.add_argument("--out-map", default=None)
    sp = system_cmd("verify", "check a graph and generator map against the system")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--map", required=True)

    gp = sub.add_parser("graph", help="graph utilities")
    gsub = gp.add_subparsers(dest="graph_command", required=True)
    e = gsub.add_parser("eq", parents=[common], help="bounded equality of two vertex multisets")
    e.add_argument("graph")
    e.add_argument("alpha")
    e.add_argument("beta")
    c = gsub.add_parser("closure", parents=[common], help="hereditary saturated closure")
    c.add_argument("graph")
    c.add_argument("vertices", nargs="+")
    i = gsub.add_parser("ideals", parents=[common], help="all hereditary saturated subsets")
    i.add_argument("graph")
    i.add_argument("--guard", type=int, default=20, help="largest graph (in vertices) enumerated")
    r = gsub.add_parser("refine-probe", parents=[common], help="sample refinement checks")
    r.add_argument("graph", nargs="?", default=None, help="graph file; random graphs when omitted")
    r.add_argument("--trials", type=int, default=20)
    r.add_argument("--graphs", type=int, default=10, help="number of random graphs without a file")
    r.add_argument("--seed", type=int, default=0)
    d = gsub.add_parser("dot", parents=[common], help="DOT export")
    d.add_argument("graph")
    d.add_argument("--expand", action="store_true", help="one DOT edge per parallel edge")

    xp = sub.add_parser("examples", help="built-in example systems")
    xsub = xp.add_subparsers(dest="examples_command", required=True)
    xsub.add_parser("list", parents=[common])
    em = xsub.add_parser("emit", parents=[common])
    em.add_argument("name")
    em.add_argument("params", nargs="*")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    cfg = RunConfig(args.command, args.depth, args.jmax, args.size_cap, args.ilp_bound, args.format, args.dot,
                    args.trivial_kernel_policy)
    try:
        if args.command == "validate":
            return cmd_validate(cfg, args.system, args.params)
        if args.command == "decide":
            return cmd_decide(cfg, args.system, args.params)
        if args.command == "synthesize":
            return cmd_synthesize(cfg, args.system, args.params, args.out_graph, args.out_map)
        if args.command == "verify":
            return cmd_verify(cfg, args.system, args.params, args.graph, args.map)
        if args.command == "graph":
            return cmd_graph(cfg, args)
        return cmd_examples(cfg, args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
