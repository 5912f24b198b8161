"""Command-line interface.

Subcommands: distance, cc-distance, all-pairs, mu, mcshane, amle,
verify, check-hamiltonian.  Everything except verify is driven by a
TOML/JSON run configuration; flags override selected fields.  Outputs
are CSV fields plus JSON sidecars/reports and are byte-identical across
reruns with the same config and seed (wall time goes to stdout only).

Exit codes: 0 success, 1 verification-suite failure, 2 configuration
error, 3 numerical contract violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import backend
from .amle import BallSampler, sandwich_check, solve_amle
from .config import RunConfig, load_config
from .domains import whole_domain
from .errors import ConfigError, ContractError
from .extension import energy, mcshane_lower, mcshane_upper, mu_threshold
from .fields import write_field_csv, write_matrix_csv, write_sidecar
from .graph import StencilSpec, build_graph
from .hamiltonians import SampleSpec, check_assumptions
from .metric import all_pairs, cc_distance, dist_from, dist_to
from .verify import (
    bound_suite,
    counterexample_floor,
    counterexample_halfdisk,
    oracle_suite,
    rademacher_report,
)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamlip", description=__doc__)
    p.add_argument("--threads", type=int, default=None, help="worker thread cap")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", required=True, help="TOML or JSON run configuration")
        sp.add_argument("--output-dir", default=None)
        sp.add_argument("--emit-plot", action="store_true")
        sp.add_argument("--seed", type=int, default=None)
        return sp

    d = with_config(sub.add_parser("distance", help="single-source/target distance field"))
    d.add_argument("--lambda", dest="lam", type=float, default=None)
    d.add_argument("--source", default=None, help="comma-separated coordinates")
    d.add_argument("--direction", choices=["from", "to"], default=None)
    c = with_config(sub.add_parser("cc-distance", help="Carnot-Caratheodory distance field"))
    c.add_argument("--source", default=None)
    a = with_config(sub.add_parser("all-pairs", help="distance matrix on a vertex subset"))
    a.add_argument("--lambda", dest="lam", type=float, default=None)
    a.add_argument("--subset", choices=["boundary", "interior", "all"], default=None)
    with_config(sub.add_parser("mu", help="boundary compatibility threshold"))
    with_config(sub.add_parser("mcshane", help="upper/lower McShane extensions"))
    m = with_config(sub.add_parser("amle", help="absolute-minimizer solve"))
    m.add_argument("--max-sweeps", type=int, default=None)
    m.add_argument("--radii", default=None, help="comma-separated ball radii in units of h")
    v = sub.add_parser("verify", help="verification suites")
    v.add_argument(
        "--suite",
        choices=["rademacher", "counterexamples", "bounds", "oracle"],
        required=True,
    )
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--output-dir", default="out")
    v.add_argument("--coarse", action="store_true", help="smaller grids for quick runs")
    with_config(sub.add_parser("check-hamiltonian", help="sampled assumption checks"))
    return p


def _apply_threads(flag_value, cfg_value) -> None:
    """Thread cap precedence: --threads flag, config, HAMLIP_THREADS env."""
    import os

    value = flag_value if flag_value is not None else cfg_value
    if value is None:
        env = os.environ.get("HAMLIP_THREADS")
        if env is not None:
            try:
                value = int(env)
            except ValueError as e:
                raise ConfigError(f"HAMLIP_THREADS must be an integer: {env!r}") from e
    if value is not None:
        backend.set_num_threads(value)


def _setup(args) -> tuple[RunConfig, dict]:
    cfg = load_config(args.config)
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "lam", None) is not None:
        cfg.lam = args.lam
    try:
        if getattr(args, "source", None):
            cfg.source = [float(v) for v in args.source.split(",")]
        if getattr(args, "radii", None):
            cfg.solver = dict(cfg.solver, radii=[float(r) for r in args.radii.split(",")])
    except ValueError as e:
        raise ConfigError(f"bad numeric flag value: {e}") from e
    if getattr(args, "direction", None):
        cfg.direction = args.direction
    if getattr(args, "subset", None):
        cfg.subset = args.subset
    if getattr(args, "max_sweeps", None) is not None:
        cfg.solver = dict(cfg.solver, max_sweeps=args.max_sweeps)
    _apply_threads(args.threads, cfg.threads)

    # setup-phase failures (bad matrix, unusable geometry, missing data
    # files) are configuration errors; contract violations during the
    # computation itself keep their own exit code
    try:
        frame = cfg.build_frame()
        ham = cfg.build_hamiltonian(frame.m)
        domain = cfg.build_domain(frame)
        graph = build_graph(domain, frame, StencilSpec(cfg.stencil_radius))
    except (ContractError, FileNotFoundError) as e:
        raise ConfigError(str(e)) from e
    return cfg, {"frame": frame, "ham": ham, "domain": domain, "graph": graph}


def _meta(cfg: RunConfig, ctx, **extra) -> dict:
    meta = {
        "h": cfg.domain["h"],
        "frame": ctx["frame"].name,
        "hamiltonian": ctx["ham"].name,
        "stencil_radius": cfg.stencil_radius,
        "quadrature": cfg.quadrature,
        "seed": cfg.seed,
        "version": "0.1.0",
    }
    meta.update(extra)
    return meta


def _outdir(cfg: RunConfig) -> Path:
    out = cfg.base_dir / cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit_plot(path: Path, coords, values) -> None:
    """gnuplot-friendly .dat: 1-D as two columns, 2-D blocked for pm3d."""
    coords = np.atleast_2d(coords)
    with open(path, "w") as f:
        if coords.shape[1] == 1:
            order = np.argsort(coords[:, 0])
            for i in order:
                f.write(f"{coords[i, 0]!r} {values[i]!r}\n")
            return
        order = np.lexsort((coords[:, 1], coords[:, 0]))
        last_x = None
        for i in order:
            x = coords[i, 0]
            if last_x is not None and x != last_x:
                f.write("\n")
            last_x = x
            cols = " ".join(repr(float(v)) for v in coords[i])
            f.write(f"{cols} {float(values[i])!r}\n")


def _source_vertex(cfg: RunConfig, ctx) -> int:
    if cfg.source is None:
        raise ConfigError("this subcommand needs a source (config key or --source)")
    return ctx["domain"].vertex_near(cfg.source)


def _cmd_distance(cfg, ctx, emit_plot: bool) -> int:
    if cfg.lam is None:
        raise ConfigError("distance needs lambda (config key or --lambda)")
    src = _source_vertex(cfg, ctx)
    graph = ctx["graph"]
    if cfg.direction == "from":
        fld = dist_from(graph, ctx["ham"], cfg.lam, src, cfg.quadrature)
    else:
        fld = dist_to(graph, ctx["ham"], cfg.lam, src, cfg.quadrature)
    out = _outdir(cfg)
    write_field_csv(out / "distance.csv", graph.coords, fld.values)
    write_sidecar(out / "distance.json", _meta(cfg, ctx, lam=cfg.lam, provenance=fld.provenance))
    if emit_plot:
        _emit_plot(out / "distance.dat", graph.coords, fld.values)
    print(f"distance field written to {out / 'distance.csv'}")
    return 0


def _cmd_cc(cfg, ctx, emit_plot: bool) -> int:
    src = _source_vertex(cfg, ctx)
    graph = ctx["graph"]
    fld = cc_distance(graph, src, cfg.quadrature)
    out = _outdir(cfg)
    write_field_csv(out / "cc_distance.csv", graph.coords, fld.values)
    write_sidecar(out / "cc_distance.json", _meta(cfg, ctx, provenance=fld.provenance))
    if emit_plot:
        _emit_plot(out / "cc_distance.dat", graph.coords, fld.values)
    print(f"cc-distance field written to {out / 'cc_distance.csv'}")
    return 0


def _cmd_all_pairs(cfg, ctx) -> int:
    if cfg.lam is None:
        raise ConfigError("all-pairs needs lambda")
    graph, domain = ctx["graph"], ctx["domain"]
    subset = {
        "boundary": domain.boundary_ids,
        "interior": domain.interior_ids,
        "all": np.arange(graph.num_vertices),
    }[cfg.subset]
    mat = all_pairs(graph, ctx["ham"], cfg.lam, subset, targets=subset, rule=cfg.quadrature)
    out = _outdir(cfg)
    write_matrix_csv(out / "all_pairs.csv", [int(v) for v in subset], mat)
    write_sidecar(out / "all_pairs.json", _meta(cfg, ctx, lam=cfg.lam, subset=cfg.subset))
    print(f"{mat.shape[0]}x{mat.shape[1]} distance matrix written to {out / 'all_pairs.csv'}")
    return 0


def _cmd_mu(cfg, ctx) -> int:
    sub = whole_domain(ctx["graph"])
    g = cfg.boundary_values(sub)
    res = mu_threshold(sub, ctx["ham"], g, rule=cfg.quadrature)
    out = _outdir(cfg)
    write_sidecar(out / "mu.json", _meta(cfg, ctx, compatibility=res.as_dict()))
    print(f"mu = {res.mu:.9g} (witness {res.witness}, report {out / 'mu.json'})")
    return 0


def _cmd_mcshane(cfg, ctx, emit_plot: bool) -> int:
    graph = ctx["graph"]
    sub = whole_domain(graph)
    g = cfg.boundary_values(sub)
    res = mu_threshold(sub, ctx["ham"], g, rule=cfg.quadrature)
    upper = mcshane_upper(sub, ctx["ham"], g, res.mu, cfg.quadrature)
    lower = mcshane_lower(sub, ctx["ham"], g, res.mu, cfg.quadrature)
    out = _outdir(cfg)
    dense_u = upper.dense(graph.num_vertices)
    dense_l = lower.dense(graph.num_vertices)
    write_field_csv(out / "mcshane_upper.csv", graph.coords, dense_u)
    write_field_csv(out / "mcshane_lower.csv", graph.coords, dense_l)
    e_up = energy(upper, sub, ctx["ham"])
    e_lo = energy(lower, sub, ctx["ham"])
    write_sidecar(
        out / "mcshane.json",
        _meta(cfg, ctx, compatibility=res.as_dict(),
              energy_upper=e_up.value, energy_lower=e_lo.value),
    )
    if emit_plot:
        _emit_plot(out / "mcshane_upper.dat", graph.coords, dense_u)
        _emit_plot(out / "mcshane_lower.dat", graph.coords, dense_l)
    print(f"mu = {res.mu:.9g}; energies (upper, lower) = ({e_up.value:.6g}, {e_lo.value:.6g})")
    return 0


def _cmd_amle(cfg, ctx, emit_plot: bool) -> int:
    graph = ctx["graph"]
    sub = whole_domain(graph)
    g = cfg.boundary_values(sub)
    params = cfg.build_solver_params()
    field, report = solve_amle(sub, ctx["ham"], g, params, cfg.quadrature)
    check = sandwich_check(
        field, sub, ctx["ham"],
        BallSampler(radii=params.radii, count=25, seed=cfg.seed),
        mu_tol=params.mu_tol, rule=cfg.quadrature,
    )
    out = _outdir(cfg)
    dense = field.dense(graph.num_vertices)
    write_field_csv(out / "amle.csv", graph.coords, dense)
    write_sidecar(
        out / "amle_report.json",
        _meta(cfg, ctx, solver=report.as_dict(),
              sandwich={k: v for k, v in check.items() if k != "balls"}),
    )
    if emit_plot:
        _emit_plot(out / "amle.dat", graph.coords, dense)
        with open(out / "energy_trace.dat", "w") as f:
            for i, e in enumerate(report.energy_trace):
                f.write(f"{i} {e!r}\n")
    status = "converged" if report.converged else "NOT converged"
    print(
        f"amle {status} after {report.sweeps} sweeps; residual {report.final_residual:.3g}; "
        f"energy {report.energy_trace[-1]:.6g} vs mu {report.mu:.6g}"
    )
    return 0


def _cmd_check_hamiltonian(cfg, ctx) -> int:
    box = [[float(lo), float(hi)] for lo, hi in cfg.domain["box"]]
    spec = SampleSpec(x_box=box, x_dim=len(box), seed=cfg.seed)
    report = check_assumptions(ctx["ham"], spec)
    out = _outdir(cfg)
    write_sidecar(
        out / "hamiltonian_check.json",
        _meta(cfg, ctx, lsc_flag=report.lsc_flag, ok=report.ok, violations=report.violations),
    )
    flag = (
        "declares lower semicontinuity in p"
        if report.lsc_flag
        else "does NOT declare lower semicontinuity in p"
    )
    print(f"{ctx['ham'].name}: {len(report.violations)} sampled violations; {flag}")
    return 0


def _cmd_verify(args) -> int:
    from .domains import build_domain
    from .frames import Euclidean
    from .hamiltonians import AnisotropicQuadratic, PNorm
    from .metric import dist_from as _dist_from

    h = 0.05 if args.coarse else 0.02
    seed = args.seed
    if args.suite == "counterexamples":
        report = {
            "floor": counterexample_floor(h=max(h, 0.05)),
            "halfdisk": counterexample_halfdisk(h=h),
        }
        report["ok"] = report["floor"]["ok"] and report["halfdisk"]["ok"]
    elif args.suite == "oracle":
        report = oracle_suite(n_configs=6, seed=seed)
    elif args.suite == "bounds":
        from .verify import floor_right_continuity_check

        frame = Euclidean(2)
        dom = build_domain("box", [[0.0, 1.0], [0.0, 1.0]], 1.0 / 15, frame=frame)
        graph = build_graph(dom, frame, StencilSpec(2))
        ham = AnisotropicQuadratic(np.diag([1.0, 4.0]))
        report = bound_suite(graph, ham, [0.5, 1.0, 2.0], seed=seed)
        jump = floor_right_continuity_check(graph)
        report["checks"].extend(jump["checks"])
        report["ok"] = report["ok"] and jump["ok"]
    else:  # rademacher
        frame = Euclidean(2)
        dom = build_domain("box", [[0.0, 1.0], [0.0, 1.0]], h, frame=frame)
        graph = build_graph(dom, frame, StencilSpec(3))
        sub = whole_domain(graph)
        report = {"ok": True, "cases": []}
        for ham in (PNorm(2.0, 1.0), AnisotropicQuadratic(np.diag([1.0, 4.0]))):
            a = np.array([1.0, 0.5])
            lin = np.asarray(graph.coords @ a)
            from .fields import ScalarField

            u = ScalarField(np.arange(graph.num_vertices), lin)
            z = dom.vertex_near([0.5, 0.5])
            cone = _dist_from(graph, ham, 1.0, z)
            for name, fld in (("linear", u), ("cone", cone)):
                rr = rademacher_report(fld, sub, ham, tol=0.05 + 4.0 * h, seed=seed)
                rr["field"] = name
                rr["hamiltonian"] = ham.name
                report["cases"].append(rr)
                report["ok"] &= rr["pass"]
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"verify_{args.suite}.json"
    path.write_text(json.dumps(report, sort_keys=True, indent=2, default=float) + "\n")
    print(f"suite {args.suite}: {'PASS' if report['ok'] else 'FAIL'} ({path})")
    return 0 if report["ok"] else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        if args.command == "verify":
            _apply_threads(args.threads, None)
            code = _cmd_verify(args)
        else:
            cfg, ctx = _setup(args)
            emit_plot = getattr(args, "emit_plot", False)
            if args.command == "distance":
                code = _cmd_distance(cfg, ctx, emit_plot)
            elif args.command == "cc-distance":
                code = _cmd_cc(cfg, ctx, emit_plot)
            elif args.command == "all-pairs":
                code = _cmd_all_pairs(cfg, ctx)
            elif args.command == "mu":
                code = _cmd_mu(cfg, ctx)
            elif args.command == "mcshane":
                code = _cmd_mcshane(cfg, ctx, emit_plot)
            elif args.command == "amle":
                code = _cmd_amle(cfg, ctx, emit_plot)
            elif args.command == "check-hamiltonian":
                code = _cmd_check_hamiltonian(cfg, ctx)
            else:  # pragma: no cover
                raise ConfigError(f"unknown command {args.command}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ContractError as e:
        print(f"contract violation: {e}", file=sys.stderr)
        return 3
    print(f"wall time: {time.perf_counter() - t0:.2f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
