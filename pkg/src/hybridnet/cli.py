"""Command-line experiment runner.

    hybridnet generate  --config exp.json   # graph files + construction log
    hybridnet simulate  --config exp.json   # replica-averaged trace
    hybridnet meanfield --config exp.json   # ODE trajectory + thresholds
    hybridnet analyze   --config exp.json   # degree histogram + tail fit
    hybridnet compare   --config exp.json   # rank mixtures against a curve

Every command writes deterministic data files into the output directory plus
a ``run_manifest.json`` holding the timestamps and the resolved config.
Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .analysis import (
    Curve,
    ba_degree_pdf,
    empirical_distribution,
    fit_tail_slope,
    hybrid_degree_pdf,
    similarity,
    total_variation,
    ws_degree_pmf,
)
from .config import ConfigError, DegreeSource, ExperimentConfig, load_config
from .generators import ConstructionLog, NetworkKind, generate
from .graph import GraphError, HybridGraph, assign_implicit_edges
from .io import (
    FormatError,
    read_curve_csv,
    read_graph,
    write_construction_log,
    write_curve_csv,
    write_edge_list,
    write_histogram_csv,
    write_json,
    write_node_metadata,
    write_trace_csv,
    write_trajectory_csv,
    write_trigger_json,
)
from .meanfield import (
    DegreeClassField,
    IntegrationError,
    integrate,
    normalize_pk,
    power_law_pk,
    solve_theta_fixed_point,
    steady_state_i_k,
    threshold,
)
from .propagation import PropagationError, SimulationTrace, run
from .rng import substream

log = logging.getLogger("hybridnet")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


# -- shared helpers -----------------------------------------------------------------


def build_graph(cfg: ExperimentConfig, glog: Optional[ConstructionLog] = None) -> HybridGraph:
    """Load the ``graph`` section if present, otherwise generate from ``generator``."""
    if cfg.graph is not None:
        meta = cfg.resolve(cfg.graph.node_metadata) if cfg.graph.node_metadata else None
        return read_graph(cfg.resolve(cfg.graph.edge_list), meta)
    if cfg.generator is None:
        raise ConfigError("this command needs a 'graph' or a 'generator' section")
    gen = cfg.generator
    try:
        g = generate(gen.kind, gen.params(cfg.seed), log=glog)
    except GraphError as exc:
        # size preconditions depend on the network kind, so they surface here
        raise ConfigError(f"[generator] {exc}") from exc
    if gen.delta is not None:
        assign_implicit_edges(g, gen.delta, substream(cfg.seed, "visibility"))
    return g


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _mixture_label(mix) -> str:
    u, w, q = mix
    return f"{round(100 * u):g}/{round(100 * q):g}/{round(100 * w):g} SIS/SIR/SIRS"


def _replica_trace(rep, horizon: int) -> SimulationTrace:
    return SimulationTrace(
        t=np.arange(horizon + 1),
        s_density=rep.s,
        i_density=rep.i,
        r_density=rep.r,
        phi=rep.phi,
        gamma=rep.gamma.astype(float),
        trigger_times=[rep.trigger_time],
    )


# -- commands --------------------------------------------------------------------------


def cmd_generate(cfg: ExperimentConfig) -> dict:
    if cfg.generator is None:
        raise ConfigError("generate needs a 'generator' section")
    glog = ConstructionLog()
    g = build_graph(_without_graph(cfg), glog)
    out = _outdir(cfg)
    write_edge_list(g, out / "graph.edges")
    write_node_metadata(g, out / "nodes.json")
    write_construction_log(glog, out / "construction_log.jsonl")
    summary = {
        "kind": cfg.generator.kind.value,
        "n": g.n,
        "edges": g.edge_count,
        "mean_degree": g.average_degree(),
        "max_degree": g.max_degree(),
        "bridge_edges": glog.bridge_edges(),
        "subnets": int(g.subnet.max()) + 1 if g.subnet is not None and g.n else 0,
        "implicit_edges": int(np.count_nonzero(g.visibility)),
        "connected": g.is_connected(),
    }
    write_json(summary, out / "summary.json")
    return summary


def _without_graph(cfg: ExperimentConfig) -> ExperimentConfig:
    stripped = dataclasses.replace(cfg, graph=None)
    stripped.base_dir = cfg.base_dir
    return stripped


def cmd_simulate(cfg: ExperimentConfig) -> dict:
    g = build_graph(cfg)
    pcfg = cfg.propagation.config(cfg.seed)
    keep = cfg.propagation.keep_replicas
    trace = run(g, pcfg, keep_replicas=keep)
    out = _outdir(cfg)
    write_trace_csv(trace, out / "trace.csv")
    write_trigger_json(trace, out / "triggers.json")
    if keep:
        rep_dir = out / "trace_replicas"
        rep_dir.mkdir(exist_ok=True)
        for k, rep in enumerate(trace.replicas):
            write_trace_csv(_replica_trace(rep, pcfg.horizon), rep_dir / f"replica_{k:03d}.csv")
    summary = {
        "n": g.n,
        "replicas": pcfg.replicas,
        "mixture": list(pcfg.mixture),
        "peak_i": trace.peak_i,
        "peak_round": trace.peak_round,
        "trigger_fraction": trace.trigger_fraction,
        "lambda_over_beta": pcfg.lam / pcfg.beta if pcfg.beta > 0 else math.inf,
    }
    write_json(summary, out / "summary.json")
    return summary


def degree_support(cfg: ExperimentConfig):
    """``(degrees, pk, ws_degrees, ws_pk, a)`` for the mean-field command."""
    sup, mf = cfg.meanfield.support, cfg.meanfield
    if sup.source is DegreeSource.POWER_LAW:
        k, pk = power_law_pk(sup.k_min, sup.k_max, sup.exponent)
        return k, pk, None, None, mf.a
    if sup.source is DegreeSource.EXPLICIT:
        k, pk = normalize_pk(sup.degrees, sup.weights, sup.k_min, sup.k_max)
        return k, pk, None, None, mf.a
    if sup.source is DegreeSource.GRAPH:
        hist = empirical_distribution(build_graph(cfg))
        k, pk = normalize_pk(hist.degrees, hist.counts, sup.k_min, sup.k_max)
        return k, pk, None, None, mf.a
    gen = cfg.generator
    if gen is None:
        raise ConfigError("meanfield.support.source='hybrid' needs a 'generator' section")
    ks = np.arange(sup.k_min, sup.k_max + 1)
    weights = hybrid_degree_pdf(ks, gen.k_ring, gen.p_rewire, gen.a, gen.n_total, gen.m_attach, sup.classical_ws)
    k, pk = normalize_pk(ks, weights)
    ws_w = ws_degree_pmf(ks, gen.k_ring, gen.p_rewire, gen.a, gen.n_total, sup.classical_ws)
    ws_k, ws_pk = normalize_pk(ks, ws_w)
    return k, pk, ws_k, ws_pk, gen.a


def cmd_meanfield(cfg: ExperimentConfig) -> dict:
    mf = cfg.meanfield
    params = mf.params()
    k, pk, ws_k, ws_pk, a = degree_support(cfg)
    traj = integrate(DegreeClassField.uniform_start(k, pk, mf.i0), params, mf.t_max, mf.dt, mf.record_every)
    report = threshold(k, pk, params.w, params.sigma, mf.m, mf.M, a, ws_k, ws_pk)
    theta_star = solve_theta_fixed_point(k, pk, params)
    predicted = float(np.dot(pk, steady_state_i_k(k, theta_star, params))) if theta_star > 0 else 0.0
    doc = report.to_dict()
    doc.update(
        {
            "lambda": params.lam,
            "theta_star": theta_star,
            "predicted_total_i": predicted,
            "terminal_total_i": float(traj.total_i()[-1]),
            "classes": int(k.size),
            "clamp_events": traj.clamp_events,
        }
    )
    log.info("closed-form / printed threshold ratio: %s", doc["closedform_over_printed"])
    out = _outdir(cfg)
    write_trajectory_csv(traj, out / "trajectory.csv")
    write_json(doc, out / "threshold.json")
    return {
        "lambda": params.lam,
        "lambda_c_empirical": doc["lambda_c_empirical"],
        "lambda_c_closedform": doc["lambda_c_closedform"],
        "terminal_total_i": doc["terminal_total_i"],
        "predicted_total_i": predicted,
    }


def _prediction(cfg: ExperimentConfig, support: np.ndarray) -> Optional[np.ndarray]:
    gen = cfg.generator
    if gen is None or cfg.graph is not None:
        return None
    classical = cfg.analysis.classical_ws
    if gen.kind is NetworkKind.WS:
        return ws_degree_pmf(support, gen.k_ring, gen.p_rewire, gen.a, gen.n_total, classical)
    if gen.kind is NetworkKind.BA:
        return ba_degree_pdf(support, gen.m_attach, 0.0)
    if gen.kind is NetworkKind.I and gen.k_ring == gen.m_attach:
        return hybrid_degree_pdf(support, gen.k_ring, gen.p_rewire, gen.a, gen.n_total, gen.m_attach, classical)
    return None


def cmd_analyze(cfg: ExperimentConfig) -> dict:
    an = cfg.analysis
    g = build_graph(cfg)
    hist = empirical_distribution(g, an.bins_per_decade)
    out = _outdir(cfg)
    write_histogram_csv(hist, out / "histogram.csv")
    centers, density, counts = hist.log_binned(an.bins_per_decade)
    lines = ["k,density,count"] + [f"{c!r},{d!r},{n}" for c, d, n in zip(centers.tolist(), density.tolist(), counts.tolist())]
    (out / "histogram_binned.csv").write_text("\n".join(lines) + "\n")
    try:
        slope: Optional[float] = fit_tail_slope(hist, an.tail_k_min, an.tail_k_max, an.bins_per_decade)
    except ValueError:
        slope = None
    deg = g.degrees()
    summary = {
        "n": g.n,
        "edges": g.edge_count,
        "mean_degree": g.average_degree(),
        "max_degree": g.max_degree(),
        "head_mass": float(np.mean(deg < an.head_k)),
        "tail_slope": slope,
        "tail_range": [an.tail_k_min, an.tail_k_max],
    }
    support = np.arange(1, max(g.max_degree(), 1) + 1)
    pred = _prediction(cfg, support)
    if pred is not None:
        emp = hist.pmf_on(support)
        rows = ["k,empirical,analytic"] + [f"{k},{e!r},{p!r}" for k, e, p in zip(support.tolist(), emp.tolist(), np.asarray(pred).tolist())]
        (out / "prediction.csv").write_text("\n".join(rows) + "\n")
        if cfg.generator.kind is NetworkKind.WS:
            summary["total_variation"] = total_variation(emp, pred)
    write_json(summary, out / "analysis.json")
    return summary


def cmd_compare(cfg: ExperimentConfig) -> dict:
    cmp = cfg.compare
    if cmp is None:
        raise ConfigError("compare needs a 'compare' section")
    external = read_curve_csv(cfg.resolve(cmp.curve), label="external")
    g = build_graph(cfg)
    out = _outdir(cfg)
    results = []
    for idx, mix in enumerate(cmp.mixtures):
        trace = run(g, cfg.propagation.config(cfg.seed, mixture=mix))
        values = {"s": trace.s_density, "i": trace.i_density, "r": trace.r_density, "phi": trace.phi}[cmp.quantity]
        t = trace.t.astype(float)
        keep = np.isfinite(values)  # phi is undefined at t = 0
        zeta = Curve(cmp.t_scale * t[keep] + cmp.t_offset, values[keep], _mixture_label(mix))
        write_curve_csv(zeta, out / f"simulated_{idx}.csv")
        rep = similarity(zeta, external)
        results.append({"mixture": list(mix), "label": zeta.label, "curve": f"simulated_{idx}.csv", **rep.to_dict()})
    order = sorted(range(len(results)), key=lambda j: (-results[j]["rho"], j))
    ranked = [{"rank": r + 1, **results[j]} for r, j in enumerate(order)]
    doc = {"external": cmp.curve, "quantity": cmp.quantity, "ranking": ranked}
    write_json(doc, out / "compare.json")
    best = ranked[0]
    return {"best": best["label"], "rho": best["rho"], "mixtures": len(ranked)}


COMMANDS: dict[str, Callable[[ExperimentConfig], dict]] = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "meanfield": cmd_meanfield,
    "analyze": cmd_analyze,
    "compare": cmd_compare,
}


# -- entry point --------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON experiment configuration")
    common.add_argument("--seed", type=int, help="override the global seed")
    common.add_argument("--out", help="override the output directory")
    common.add_argument("--replicas", type=int, help="override propagation.replicas")
    common.add_argument("--quiet", action="store_true", help="suppress the summary and progress logging")
    parser = argparse.ArgumentParser(prog="hybridnet", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().split("\n")[0])
    return parser


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    started = _dt.datetime.now(_dt.timezone.utc)
    try:
        cfg = load_config(args.config)
        if args.seed is not None and args.seed < 0:
            raise ConfigError(f"--seed must be non-negative, got {args.seed}")
        cfg = cfg.with_overrides(seed=args.seed, output_dir=args.out, replicas=args.replicas)
        if args.out is None and not Path(cfg.output_dir).is_absolute():
            cfg = cfg.with_overrides(output_dir=cfg.resolve(cfg.output_dir))
        summary = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"hybridnet: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, IntegrationError, PropagationError, OSError, ValueError, RuntimeError) as exc:
        print(f"hybridnet: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = Path(cfg.output_dir)
    write_json(
        {
            "command": args.command,
            "version": __version__,
            "started": started.isoformat(),
            "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "seed": cfg.seed,
            "config": cfg.to_dict(),
            "summary": summary,
            "outputs": sorted(p.name for p in out.iterdir() if p.name != "run_manifest.json"),
        },
        out / "run_manifest.json",
    )
    if not args.quiet:
        for key, value in summary.items():
            print(f"{key}: {_fmt(value)}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
