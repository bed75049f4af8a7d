"""Command line experiment runner.

Subcommands: ``run`` (config-driven experiments), ``preprocess``,
``verify``, ``lowerbound`` and ``bench``. Results are CSV with fixed
columns plus a JSON summary; identical configs and seeds give
byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable

from . import adversarial as adv
from .algorithms.coloring import IdColorReduction
from .algorithms.lcl import collapse_params, lcl_collapse_solve
from .algorithms.mis import cluster_optimal_mis, random_priority_mis
from .algorithms.slocal import (
    simulate_slocal_passive,
    simulate_slocal_supported,
    slocal_greedy_coloring,
    slocal_greedy_mis,
)
from .decompose import (
    ball_clustering_preprocessor,
    ball_growing,
    clustering_to_json,
    coloring_to_json,
    decomposition_preprocessor,
    distance_coloring_preprocessor,
    greedy_distance_coloring,
    network_decomposition,
)
from .engine import GlobalPreprocessor, NodeProgram, ProtocolViolation, preprocess, run
from .graphcore import (
    CapacityError,
    Graph,
    Mode,
    SupportedInstance,
    generate,
    read_edge_list,
    read_mask,
    subgraph,
    write_edge_list,
    write_mask,
)
from .verify import check_labeling, problem_by_key

log = logging.getLogger("supportsim")

CSV_COLUMNS = ["experiment_id", "n", "mode", "algorithm", "rounds", "quality", "accepted", "seed"]


class ConfigError(ValueError):
    """The experiment configuration references something that does not exist."""


# ---------------------------------------------------------------------------
# graph sources


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_graph_spec(spec: str) -> dict:
    """``"cycle:n=64"`` -> ``{"family": "cycle", "n": 64}``; anything else is a file path."""
    if ":" in spec and not Path(spec).exists():
        family, _, rest = spec.partition(":")
        params = {}
        for part in filter(None, rest.split(",")):
            key, _, val = part.partition("=")
            params[key.strip()] = _coerce(val.strip())
        return {"family": family, **params}
    if not Path(spec).exists() and spec.isidentifier():
        return {"family": spec}
    return {"path": spec}


def build_graph(src: dict, seed: int) -> Graph:
    src = dict(src)
    if "path" in src:
        return read_edge_list(src["path"])
    family = src.pop("family", None)
    if family is None:
        raise ConfigError("graph source needs 'family' or 'path'")
    if family == "random_regular":
        src.setdefault("seed", seed)
    try:
        return generate(family, **src)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for graph family {family!r}: {exc}") from None


def build_input_edges(h: Graph, src: dict | None, seed: int):
    """Input edges: all of ``E(H)``, a mask file, or a seeded random deletion."""
    if not src:
        return None
    if "mask" in src:
        return read_mask(src["mask"])
    frac = float(src.get("delete_fraction", 0.0))
    if not 0.0 <= frac <= 1.0:
        raise ConfigError("delete_fraction must lie in [0, 1]")
    rng = random.Random(src.get("seed", seed))
    edges = h.edges()
    drop = set(rng.sample(range(len(edges)), round(frac * len(edges))))
    return [e for i, e in enumerate(edges) if i not in drop]


# ---------------------------------------------------------------------------
# registries


def _support_neighbors_preprocessor():
    return GlobalPreprocessor(lambda h: {v: {"support_neighbors": h.adj[v]} for v in h.nodes}, "support_neighbors")


PREPROCESSORS: dict[str, Callable[..., Any]] = {
    "none": lambda **_: None,
    "degree": lambda **_: GlobalPreprocessor(lambda h: {v: {"max_degree": h.max_degree} for v in h.nodes}, "degree"),
    "network_size": lambda **_: GlobalPreprocessor(lambda h: {v: {"n": h.n} for v in h.nodes}, "network_size"),
    "distance_coloring": lambda k=3, **_: distance_coloring_preprocessor(int(k)),
    "ball_clustering": lambda eps=0.5, **_: ball_clustering_preprocessor(float(eps)),
    "network_decomposition": lambda t=1, **_: decomposition_preprocessor(int(t)),
    "support_neighbors": lambda **_: _support_neighbors_preprocessor(),
}


@dataclass
class Outcome:
    outputs: dict
    rounds: int
    quality: Any


def _mis_size(outputs):
    return sum(1 for o in outputs.values() if o == 1)


def _alg_slocal(make):
    def go(inst, memory, params, seed, max_rounds):
        alg = make()
        if inst.mode is Mode.PASSIVE:
            res = simulate_slocal_passive(inst, alg, memory, max_rounds=max_rounds)
        else:
            res = simulate_slocal_supported(inst, alg, memory, max_rounds=max_rounds)
        quality = _mis_size(res.outputs) if alg.name == "greedy_mis" else max(res.outputs.values(), default=0)
        return Outcome(res.outputs, res.trace.rounds_used, quality)

    return go


def _alg_collapse(inst, memory, params, seed, max_rounds):
    res = lcl_collapse_solve(inst, IdColorReduction(), problem_by_key("coloring", inst.support), memory)
    return Outcome(res.outputs, res.trace.rounds_used, res.report.quality)


def _alg_cluster_mis(inst, memory, params, seed, max_rounds):
    res = cluster_optimal_mis(inst, float(params.get("eps", 0.5)), memory, cap=int(params.get("cap", 128)))
    return Outcome(res.outputs, res.trace.rounds_used, len(res.members))


def _alg_random_priority(inst, memory, params, seed, max_rounds):
    res = random_priority_mis(inst, seed, depth=int(params.get("depth", 5)))
    return Outcome(res.outputs, res.trace.rounds_used, len(res.members))


def _alg_id_reduction(inst, memory, params, seed, max_rounds):
    h = inst.support
    base = IdColorReduction()
    trace = run(inst, base.program(max(h.nodes, default=1), max(h.max_degree, 1)), memory, max_rounds=max_rounds)
    if not trace.halted:
        raise RuntimeError("id colour reduction exceeded max_rounds")
    return Outcome(trace.outputs, trace.rounds_used, max(trace.outputs.values(), default=0))


class _SupportBroadcast(NodeProgram):
    """Sends one message over every support edge, then halts with output 0.

    Legal in SUPPORTED mode; a protocol violation in PASSIVE mode as soon
    as a support edge is missing from the input graph.
    """

    def initialize(self, ctx):
        return {u: "ping" for u in ctx.memory["support_neighbors"]}

    def step(self, ctx, r, inbox):
        ctx.halt(0)


def _alg_probe(inst, memory, params, seed, max_rounds):
    trace = run(inst, _SupportBroadcast, memory, max_rounds=max_rounds)
    return Outcome(trace.outputs, trace.rounds_used, trace.message_count)


@dataclass(frozen=True)
class AlgorithmEntry:
    fn: Callable
    preprocessor: Callable[[dict, Mode], tuple[str, dict]]
    verifier: str | None


def _default_slocal_pre(params, mode):
    if mode is Mode.PASSIVE:
        return "distance_coloring", {"k": 2 * int(params.get("t", 1)) + 1}
    return "network_decomposition", {"t": int(params.get("t", 1))}


def _collapse_pre(h: Graph):
    p = collapse_params(IdColorReduction(), h.max_degree)
    return "distance_coloring", {"k": p.distance}


ALGORITHMS: dict[str, AlgorithmEntry] = {
    "slocal.greedy_mis": AlgorithmEntry(_alg_slocal(slocal_greedy_mis), _default_slocal_pre, "mis"),
    "slocal.greedy_coloring": AlgorithmEntry(_alg_slocal(slocal_greedy_coloring), _default_slocal_pre, "coloring"),
    "lcl.collapse": AlgorithmEntry(_alg_collapse, lambda p, m: ("collapse", {}), "coloring"),
    "mis.cluster_optimal": AlgorithmEntry(
        _alg_cluster_mis, lambda p, m: ("ball_clustering", {"eps": p.get("eps", 0.5)}), "independent_set"
    ),
    "mis.random_priority": AlgorithmEntry(_alg_random_priority, lambda p, m: ("none", {}), "independent_set"),
    "coloring.id_reduction": AlgorithmEntry(_alg_id_reduction, lambda p, m: ("none", {}), "coloring"),
    "probe.support_broadcast": AlgorithmEntry(_alg_probe, lambda p, m: ("support_neighbors", {}), None),
}


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentConfig:
    experiment_id: str
    graph: dict
    algorithm: dict
    mode: str = "supported"
    input: dict | None = None
    preprocessor: dict | None = None
    verifier: str | None = "default"
    repetitions: int = 1
    seed: int = 0
    max_rounds: int = 100_000

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    def validate(self):
        key = self.algorithm.get("key") if isinstance(self.algorithm, dict) else None
        if key not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {key!r}; choose from {sorted(ALGORITHMS)}")
        try:
            Mode(self.mode)
        except ValueError:
            raise ConfigError(f"unknown mode {self.mode!r}") from None
        if self.preprocessor and self.preprocessor.get("key") not in PREPROCESSORS:
            raise ConfigError(f"unknown preprocessor {self.preprocessor.get('key')!r}; choose from {sorted(PREPROCESSORS)}")
        if self.verifier not in (None, "default", "none"):
            problem_by_key(self.verifier, generate("cycle", n=3))
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")


def _format_quality(q):
    if q is None:
        return ""
    if isinstance(q, float):
        return "inf" if math.isinf(q) else f"{q:.6g}"
    return str(q)


def run_repetition(cfg: ExperimentConfig, rep: int) -> dict:
    seed = cfg.seed + rep
    mode = Mode(cfg.mode)
    h = build_graph(cfg.graph, seed)
    edges = build_input_edges(h, cfg.input, seed)
    if mode is Mode.LOCAL and edges is not None and len(set(edges)) != h.m:
        raise ConfigError("LOCAL mode cannot delete input edges")
    inst = SupportedInstance(h, edges, mode)
    params = {k: v for k, v in cfg.algorithm.items() if k != "key"}
    entry = ALGORITHMS[cfg.algorithm["key"]]

    if cfg.preprocessor:
        pre_key = cfg.preprocessor["key"]
        pre_params = {k: v for k, v in cfg.preprocessor.items() if k != "key"}
    else:
        pre_key, pre_params = entry.preprocessor(params, mode)
        if pre_key == "collapse":
            pre_key, pre_params = _collapse_pre(h)
    pre = PREPROCESSORS[pre_key](**pre_params)
    memory = preprocess(h, pre) if pre is not None else None

    row = {
        "experiment_id": cfg.experiment_id,
        "n": h.n,
        "mode": mode.value,
        "algorithm": cfg.algorithm["key"],
        "seed": seed,
    }
    try:
        out = entry.fn(inst, memory, params, seed, cfg.max_rounds)
    except ProtocolViolation as exc:
        log.info("repetition %d: %s", rep, exc)
        row.update(rounds="", quality="protocol_violation", accepted=False)
        return row
    verifier = entry.verifier if cfg.verifier == "default" else cfg.verifier
    if verifier in (None, "none"):
        accepted = True
    else:
        g = subgraph(inst)
        # colouring palettes follow the support's degree
        problem = problem_by_key(verifier, h)
        accepted = check_labeling(g, problem, out.outputs, outputs_only=True).accepted
    row.update(rounds=out.rounds, quality=_format_quality(out.quality), accepted=accepted)
    return row


def _run_rep_args(args):
    return run_repetition(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[dict]:
    tasks = [(cfg, i) for i in range(cfg.repetitions)]
    if jobs > 1 and cfg.repetitions > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_rep_args, tasks))
    else:
        rows = [run_repetition(c, i) for c, i in tasks]
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("true" if r[k] is True else "false" if r[k] is False else r[k]) for k in CSV_COLUMNS})
    return buf.getvalue()


def summarize(cfg: ExperimentConfig, rows: list[dict]) -> dict:
    rounds = [r["rounds"] for r in rows if r["rounds"] != ""]
    return {
        "experiment_id": cfg.experiment_id,
        "repetitions": len(rows),
        "accepted": sum(1 for r in rows if r["accepted"]),
        "rounds": {
            "mean": sum(rounds) / len(rounds) if rounds else None,
            "min": min(rounds, default=None),
            "max": max(rounds, default=None),
        },
        "config": asdict(cfg),
    }


def _emit(out_dir: str | None, stem: str, csv_text: str, summary: dict | None):
    if out_dir is None:
        sys.stdout.write(csv_text)
        return
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    (d / f"{stem}.csv").write_text(csv_text, encoding="ascii")
    if summary is not None:
        (d / f"{stem}.summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="ascii")


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        data = json.load(fh)
    configs = data if isinstance(data, list) else [data]
    status = 0
    for raw in configs:
        raw = dict(raw)
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.mode is not None:
            raw["mode"] = args.mode
        if args.max_rounds is not None:
            raw["max_rounds"] = args.max_rounds
        cfg = ExperimentConfig.from_dict(raw)
        rows = run_experiment(cfg, jobs=args.jobs)
        _emit(args.out, cfg.experiment_id, rows_to_csv(rows), summarize(cfg, rows))
        if args.strict and not all(r["accepted"] for r in rows):
            status = 1
    return status


def cmd_preprocess(args) -> int:
    h = build_graph(parse_graph_spec(args.graph), args.seed or 0)
    if args.kind == "distance_coloring":
        text = coloring_to_json(greedy_distance_coloring(h, args.k).color)
    elif args.kind == "ball_clustering":
        text = clustering_to_json(ball_growing(h, args.eps))
    else:
        nd = network_decomposition(h)
        payload = {
            str(v): {"cluster": i, "color": nd.color[i], "leader": nd.leader[i]}
            for i, c in enumerate(nd.clusters)
            for v in sorted(c)
        }
        text = json.dumps(dict(sorted(payload.items(), key=lambda kv: int(kv[0]))), indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="ascii")
    else:
        print(text)
    return 0


def _decode_label(problem_key: str, value):
    if problem_key == "sinkless_orientation":
        return frozenset(value)
    if problem_key == "edge_coloring":
        return tuple(value)
    return value


def cmd_verify(args) -> int:
    h = build_graph(parse_graph_spec(args.graph), args.seed or 0)
    g = Graph.from_edges(h.nodes, read_mask(args.mask)) if args.mask else h
    with open(args.labels, encoding="utf-8") as fh:
        raw = json.load(fh)
    labels = {int(k): _decode_label(args.problem, v) for k, v in raw.items()}
    report = check_labeling(g, problem_by_key(args.problem, h), labels, outputs_only=True)
    print(report.to_json())
    return 0 if report.accepted else 1


def cmd_lowerbound(args) -> int:
    if args.family == "sinkless":
        fam = adv.build_sinkless_family(args.n)
        report = adv.sinkless_indistinguishability(fam, args.T)
        if args.out:
            d = Path(args.out)
            d.mkdir(parents=True, exist_ok=True)
            write_edge_list(fam.support, d / f"sinkless_n{args.n}.support.edges")
            write_mask(fam.g.input_edges, d / f"sinkless_n{args.n}.G.mask")
            write_mask(fam.g_prime.input_edges, d / f"sinkless_n{args.n}.Gprime.mask")
    else:
        fam = adv.build_double_cover(build_graph(parse_graph_spec(args.base), args.seed or 0))
        report = adv.view_distribution_equality(fam, fam.copy(1, 0), args.T)
        checked = 0
        for i in range(args.cuts):
            cut = adv.random_cut(fam.q, (args.seed or 0) * 1_000_003 + i)
            for which in ("G1", "G2"):
                adv.verify_cover_isomorphisms(fam, cut, which)
                checked += 1
        report.details["isomorphism_witnesses_checked"] = checked
        if args.out:
            d = Path(args.out)
            d.mkdir(parents=True, exist_ok=True)
            write_edge_list(fam.support, d / "double_cover.support.edges")
            write_mask(fam.lift(()).edges(), d / "double_cover.G1.mask")
            write_mask(fam.lift(fam.q.edges()).edges(), d / "double_cover.G2.mask")
    print(report.to_json())
    return 0 if report.accepted else 1


def cmd_bench(args) -> int:
    sizes = [int(x) for x in args.sizes.split(",")]
    rows = []
    seed = args.seed or 0
    for n in sizes:
        if args.claim == "collapse":
            graph = {"family": args.family, "n": n}
            if args.family == "random_regular":
                graph["d"] = 3
            cfg = ExperimentConfig(f"bench_collapse_{args.family}", graph, {"key": "lcl.collapse"}, mode=args.mode or "supported", seed=seed)
        else:
            graph = {"family": "random_regular", "n": n, "d": 3}
            cfg = ExperimentConfig(
                "bench_cluster_mis", graph, {"key": "mis.cluster_optimal", "eps": args.eps, "cap": 10_000},
                mode=args.mode or "supported", seed=seed,
            )
        cfg.validate()
        rows.extend(run_experiment(cfg))
    _emit(args.out, f"bench_{args.claim}", rows_to_csv(rows), None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supportsim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=False):
        if config:
            sp.add_argument("--config", required=True, help="experiment config (JSON object or list)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output directory (default: stdout)")
        sp.add_argument("--strict", action="store_true", help="exit 1 unless every repetition is accepted")
        sp.add_argument("--mode", choices=[m.value for m in Mode], default=None)
        sp.add_argument("--max-rounds", type=int, default=None)

    r = sub.add_parser("run", help="run experiments from a config file")
    common(r, config=True)
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_run)

    pp = sub.add_parser("preprocess", help="emit a colouring, clustering or decomposition as JSON")
    pp.add_argument("graph", help="edge-list path or family spec such as cycle:n=64")
    pp.add_argument("--kind", choices=["distance_coloring", "ball_clustering", "network_decomposition"], required=True)
    pp.add_argument("--k", type=int, default=3)
    pp.add_argument("--eps", type=float, default=0.5)
    pp.add_argument("--seed", type=int, default=None)
    pp.add_argument("--out", default=None, help="output file (default: stdout)")
    pp.set_defaults(func=cmd_preprocess)

    v = sub.add_parser("verify", help="check a labelling file; exit 1 on rejection")
    v.add_argument("graph")
    v.add_argument("labels", help="JSON object node -> output")
    v.add_argument("--problem", required=True)
    v.add_argument("--mask", default=None, help="input-edge mask; default is the whole graph")
    v.add_argument("--seed", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    lb = sub.add_parser("lowerbound", help="indistinguishability suites")
    lb.add_argument("family", choices=["sinkless", "double-cover"])
    lb.add_argument("--n", type=int, default=10)
    lb.add_argument("--T", type=int, default=1)
    lb.add_argument("--base", default="cycle:n=7")
    lb.add_argument("--cuts", type=int, default=50)
    lb.add_argument("--seed", type=int, default=None)
    lb.add_argument("--out", default=None)
    lb.set_defaults(func=cmd_lowerbound)

    b = sub.add_parser("bench", help="round-count scaling tables")
    b.add_argument("claim", choices=["collapse", "cluster-mis"])
    b.add_argument("--family", choices=["cycle", "random_regular"], default="cycle")
    b.add_argument("--sizes", default="32,64,128,256")
    b.add_argument("--eps", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, CapacityError, ProtocolViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
