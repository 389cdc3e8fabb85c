"""Command-line interface: ``okgd detect | synth | bench | plot``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import detector, evaluation, graph as graphs, io, synth
from .detector import DetectorConfig

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

log = logging.getLogger("okgd")


# -- shared helpers ---------------------------------------------------------------

def _scenario_kwargs(section: dict) -> dict:
    keys = {"n_clusters": int, "cluster_size": int, "p_intra": float, "p_inter": float,
            "tau": int, "horizon": int, "n_changed": int}
    out = {k: cast(section[k]) for k, cast in keys.items() if k in section}
    if "changed_clusters" in section:
        out["changed_clusters"] = _int_list(section["changed_clusters"])
    if "cluster_models" in section:
        out["cluster_models"] = [s.strip() for s in str(section["cluster_models"]).split(",")]
    return out


def _int_list(raw) -> list[int]:
    return [int(x) for x in str(raw).split(",") if str(x).strip()]


def build_scenario(kind: str, seed: int, **kwargs) -> synth.Scenario:
    if kind == "cluster-swap":
        kwargs.pop("n_changed", None)
        return synth.make_cluster_swap_scenario(seed, **kwargs)
    kwargs.pop("changed_clusters", None)
    if kind == "random-locations":
        return synth.make_random_location_scenario(seed=seed, **kwargs)
    if kind == "null":
        kwargs.pop("n_changed", None)
        return synth.make_null_scenario(seed, **kwargs)
    raise io.ConfigError(f"unknown scenario {kind!r}")


def load_graph(spec: dict, n_nodes: int | None = None) -> graphs.Graph:
    kind = spec.get("kind", "edges")
    try:
        if kind == "edges":
            if "path" not in spec:
                raise io.ConfigError("[graph] needs a path")
            return graphs.read_edge_list(spec["path"], n_nodes)
        if kind == "sbm":
            g, _ = graphs.sample_sbm(int(spec["n_clusters"]), int(spec["cluster_size"]),
                                     float(spec["p_intra"]), float(spec["p_inter"]), spec.get("seed"))
            return g
        if kind == "knn":
            points = np.loadtxt(spec["path"], ndmin=2, comments="#", delimiter=spec.get("delimiter"))
            return graphs.knn_graph(points, int(spec["k"]))
    except io.ConfigError:
        raise
    except KeyError as exc:
        raise io.ConfigError(f"[graph] missing key {exc}") from None
    except OSError as exc:
        raise io.DataError(f"cannot read graph {spec.get('path')}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise io.DataError(f"bad graph {spec.get('path', '')}: {exc}") from None
    raise io.ConfigError(f"unknown graph kind {kind!r}")


# -- detect ------------------------------------------------------------------------

def cmd_detect(args) -> int:
    cfg = io.load_config(args.config) if args.config else io.RunConfig()
    if args.stream:
        cfg.stream = {"kind": "csv", "path": args.stream}
    if args.graph:
        cfg.graph = {"kind": "edges", "path": args.graph}
    det_cfg = cfg.detector
    if args.seed is not None:
        det_cfg = det_cfg.with_(seed=args.seed)
    if not cfg.stream:
        raise io.ConfigError("no stream given (--stream or [stream] in the config)")
    if not cfg.graph:
        raise io.ConfigError("no graph given (--graph or [graph] in the config)")

    kind = cfg.stream.get("kind", "csv")
    if kind == "csv":
        if "path" not in cfg.stream:
            raise io.ConfigError("[stream] needs a path")
        streams, dims, _ = io.ingest_stream(cfg.stream["path"])
    else:
        scenario_seed = int(cfg.stream.get("seed", det_cfg.seed))
        sc = build_scenario(kind, scenario_seed, **_scenario_kwargs(cfg.stream))
        streams = synth.emit_frames(sc, seed=[scenario_seed, 2])
        dims = sc.dims
    g = load_graph(cfg.graph, n_nodes=len(dims))
    if g.n_nodes != len(dims):
        raise io.DataError(f"graph has {g.n_nodes} nodes but the stream has {len(dims)}")
    if args.ar1:
        try:
            streams = io.ar1_filter(streams, det_cfg.bp)
        except ValueError as exc:
            raise io.ConfigError(f"--ar1: {exc}") from None

    try:
        result = detector.run(streams, g, det_cfg, continue_after_alarm=args.continue_)
    except ValueError as exc:
        raise io.DataError(str(exc)) from None

    out = Path(args.out or cfg.output.get("dir", "okgd-out"))
    out.mkdir(parents=True, exist_ok=True)
    io.write_trace(out / "trace.csv", result)
    io.write_summary(out / "summary.txt", result,
                     {"lambda": repr(det_cfg.resolve_lambda(g)), "seed": det_cfg.seed})
    print(f"detected={str(result.detected).lower()} tau_hat={result.tau_hat if result.detected else ''} "
          f"-> {out}")
    return EXIT_OK


# -- synth -------------------------------------------------------------------------

def cmd_synth(args) -> int:
    kwargs = {k: getattr(args, k) for k in
              ("n_clusters", "cluster_size", "p_intra", "p_inter", "tau", "horizon") if getattr(args, k) is not None}
    if args.scenario == "random-locations":
        kwargs["n_changed"] = args.n_changed
    if args.cluster_models:
        kwargs["cluster_models"] = args.cluster_models.split(",")
    if args.changed_clusters and args.scenario == "cluster-swap":
        kwargs["changed_clusters"] = _int_list(args.changed_clusters)
    try:
        sc = build_scenario(args.scenario, args.seed, **kwargs)
    except ValueError as exc:
        raise io.ConfigError(str(exc)) from None
    streams = synth.emit_frames(sc, seed=[args.seed, 2])
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_stream(out / "stream.csv", streams)
    graphs.write_edge_list(sc.graph, out / "graph.edges")
    io.write_truth(out / "truth.txt", sc.tau, sc.changed)
    replay = io.RunConfig(
        DetectorConfig(seed=args.seed),
        graph={"kind": "edges", "path": str(out / "graph.edges")},
        stream={"kind": "csv", "path": str(out / "stream.csv")},
        output={"dir": str(out / "detect")},
    )
    io.save_config(replay, out / "config.ini")
    print(f"{sc.n_nodes} nodes, {streams[0].shape[0]} frames, tau={sc.tau} -> {out}")
    return EXIT_OK


# -- bench -------------------------------------------------------------------------

def cmd_bench(args) -> int:
    base = io.load_config(args.config).detector if args.config else DetectorConfig()
    overrides = {k: getattr(args, k) for k in ("bp", "n_pre", "n_post", "kappa") if getattr(args, k) is not None}
    try:
        base = base.with_(**overrides)
    except ValueError as exc:
        raise io.ConfigError(str(exc)) from None
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    for v in variants:
        if v not in evaluation.VARIANTS:
            raise io.ConfigError(f"unknown variant {v!r}; choose from {evaluation.VARIANTS}")
    kwargs = {k: getattr(args, k) for k in
              ("n_clusters", "cluster_size", "p_intra", "p_inter", "tau", "horizon") if getattr(args, k) is not None}
    if args.scenario == "random-locations":
        kwargs["n_changed"] = args.n_changed

    def factory(seed):
        return build_scenario(args.scenario, seed, **kwargs)

    seeds = range(args.first_seed, args.first_seed + args.seeds)
    try:
        reports = evaluation.run_experiment(factory, seeds, base, variants, workers=args.workers)
    except ValueError as exc:
        raise io.DataError(str(exc)) from None
    evaluation.write_report(args.out, reports, args.delay_budget)
    for v, reps in reports.items():
        a = evaluation.aggregate(reps, args.delay_budget)
        print(f"{v}: mean_delay={a.mean_delay:.2f} std={a.std_delay:.2f} "
              f"false_alarms={a.n_false_alarms}/{a.n_runs} precision@{a.delay_budget}={a.precision:.2f}")
    return EXIT_OK


# -- plot --------------------------------------------------------------------------

def cmd_plot(args) -> int:
    try:
        trace = io.read_trace(args.trace)
    except (OSError, ValueError, IndexError) as exc:
        raise io.DataError(f"cannot read trace {args.trace}: {exc}") from None
    n = trace["scores"].shape[1]
    out = Path(args.out)
    with open(out, "w") as fh:
        fh.write("# t norm eps alarm " + " ".join(f"g2_{v + 1}" for v in range(n)) + "\n")
        for i, t in enumerate(trace["t"]):
            row = [str(t), repr(float(trace["norm"][i])), repr(float(trace["eps"][i])), str(int(trace["alarm"][i]))]
            row += [repr(float(x) ** 2) for x in trace["scores"][i]]
            fh.write(" ".join(row) + "\n")
    script = out.with_suffix(".gp")
    script.write_text(
        f"set key left\nset xlabel 't'\n"
        f"plot '{out.name}' using 1:2 with lines title '||g||', '' using 1:3 with lines title 'eps'\n"
    )
    print(f"wrote {out} and {script}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------------

def _add_scenario_sizes(p):
    p.add_argument("--n-clusters", type=int)
    p.add_argument("--cluster-size", type=int)
    p.add_argument("--p-intra", type=float)
    p.add_argument("--p-inter", type=float)
    p.add_argument("--tau", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--n-changed", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="okgd", description="Online kernel graph change-point detection.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the detector on a stream")
    p.add_argument("--config")
    p.add_argument("--stream")
    p.add_argument("--graph")
    p.add_argument("--out", help="output directory (trace.csv, summary.txt)")
    p.add_argument("--seed", type=int)
    p.add_argument("--continue", dest="continue_", action="store_true", help="reset and keep going after alarms")
    p.add_argument("--ar1", action="store_true", help="AR(1) residuals fit on the burn-in segment")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="write a synthetic scenario")
    p.add_argument("--scenario", choices=sorted(evaluation.SCENARIOS), default="cluster-swap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--cluster-models", help="comma list such as C1,C2,C3,C4")
    p.add_argument("--changed-clusters", help="comma list of cluster indices (cluster-swap)")
    _add_scenario_sizes(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="multi-seed comparison of detector variants")
    p.add_argument("--scenario", choices=sorted(evaluation.SCENARIOS), default="random-locations")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--first-seed", type=int, default=0)
    p.add_argument("--variants", default="okgd,okgd-nograph")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--delay-budget", type=int, default=evaluation.DEFAULT_DELAY_BUDGET)
    p.add_argument("--bp", type=int)
    p.add_argument("--n-pre", type=int)
    p.add_argument("--n-post", type=int)
    p.add_argument("--kappa", type=float)
    _add_scenario_sizes(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot", help="gnuplot-friendly table with squared per-node scores")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except io.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except io.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
