"""Command-line interface: ``brgames analyze|solve|run|report``.

Exit codes: 0 success, 1 configuration error, 2 contraction gate failed
(``--require-contractive``), 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import Verdict, analyze, analyze_schedule, sampled_monotonicity
from .config import ConfigError, RunConfig, load_config
from .dynamics import run_dynamics
from .equilibrium import equilibrium_path, path_array, solve
from .errors import DomainError, SolverError
from .game import GameSchedule, QuadraticGame
from .metrics import compute_metrics
from .svg import line_chart

log = logging.getLogger("brgames")

EXIT_OK, EXIT_CONFIG, EXIT_GATE, EXIT_SOLVER = 0, 1, 2, 3
SAMPLED_PAIRS = 2000
REPORT_COLUMNS = (
    "run", "preset", "T", "rho", "verdict", "final_distance", "Err", "V", "DR_max", "SR_max", "bound", "bound_slack",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _jsonable(obj):
    """Plain-JSON copy; non-finite floats become ``null``."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, Verdict):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _dump_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _num(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def _parse_x1(s: Optional[str]):
    if s is None or s == "midpoint":
        return s
    try:
        return [float(v) for v in s.split(",")]
    except ValueError:
        raise ConfigError(f"--x1: expected 'midpoint' or a comma-separated list of numbers, got {s!r}") from None


def _parse_box(s: Optional[str]):
    if s is None:
        return None
    if s.strip() == "inf":
        return {"lower": "-inf", "upper": "inf"}
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"--box: expected 'lo,hi' or 'inf', got {s!r}")
    out = []
    for p in parts:
        if p in ("inf", "-inf"):
            out.append(p)
        else:
            try:
                out.append(float(p))
            except ValueError:
                raise ConfigError(f"--box: {p!r} is not a number") from None
    return {"lower": out[0], "upper": out[1]}


def _config(args) -> RunConfig:
    overrides = {
        "preset": args.preset,
        "T": args.T,
        "x1": _parse_x1(args.x1),
        "box": _parse_box(args.box),
        "tol": args.tol,
        "out": args.out,
        "emit": [e for e in args.emit.split(",") if e] if args.emit is not None else None,
        "require_contractive": True if args.require_contractive else None,
        "seed": args.seed,
    }
    return load_config(args.config, overrides)


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out) if cfg.out else Path("runs") / cfg.name
    path.mkdir(parents=True, exist_ok=True)
    return path


def _analysis_doc(cfg: RunConfig, obj) -> dict:
    if isinstance(obj, GameSchedule):
        sa = analyze_schedule(obj)
        return {
            "kind": "schedule", "rho": sa.rho_max, "rho_m": sa.rho_max, "verdict": sa.verdict,
            "m_min": float(sa.m.min()), "L_max": float(sa.L.max()), "L0": sa.L0, "D": sa.D,
        }
    rep = analyze(obj)
    doc = {"kind": "game", **rep.to_dict(), "verdict": rep.verdict}
    doc["m_sampled"] = (
        sampled_monotonicity(obj, SAMPLED_PAIRS, seed=cfg.seed) if obj.space.is_bounded else None
    )
    return doc


def _gate(cfg: RunConfig, doc: dict) -> bool:
    if cfg.require_contractive and doc["verdict"] is not Verdict.CONTRACTIVE:
        print(f"condition gate failed: verdict {doc['verdict'].value} (rho={doc['rho']:.6g})", file=sys.stderr)
        return False
    return True


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, Verdict):
        return v.value
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def cmd_analyze(cfg: RunConfig) -> int:
    obj = cfg.build()
    doc = _analysis_doc(cfg, obj)
    doc["name"] = cfg.name
    width = max(len(k) for k in doc)
    for k in sorted(doc):
        print(f"{k:<{width}}  {_fmt(doc[k])}")
    _dump_json(_out_dir(cfg) / "analysis.json", doc)
    return EXIT_OK if _gate(cfg, doc) else EXIT_GATE


def cmd_solve(cfg: RunConfig) -> int:
    obj = cfg.build()
    if not _gate(cfg, _analysis_doc(cfg, obj)):
        return EXIT_GATE
    if isinstance(obj, GameSchedule):
        path = equilibrium_path(obj, tol=cfg.tol)
        doc = {
            "name": cfg.name, "kind": "schedule",
            "equilibria": [{"t": t, "x": r.x, "residual": r.residual, "method": r.method} for t, r in enumerate(path, 1)],
        }
        print(f"x*_1 = {np.array2string(path[0].x, precision=10)}  x*_{len(path)} = {np.array2string(path[-1].x, precision=10)}")
    else:
        res = solve(obj, tol=cfg.tol)
        doc = {"name": cfg.name, "kind": "game", "x": res.x, "residual": res.residual, "method": res.method, "iterations": res.iterations}
        print(f"x*       {np.array2string(res.x, precision=10)}")
        print(f"residual {res.residual:.3e}")
        print(f"method   {res.method}")
    _dump_json(_out_dir(cfg) / "solution.json", doc)
    return EXIT_OK


def _schedule_columns(schedule: GameSchedule, T: int):
    g = schedule.game(1)
    if not isinstance(g, QuadraticGame):
        return None, None
    header = ["t"]
    for prefix, blocks in (("b", g.B), ("e", g.e)):
        for i, blk in enumerate(blocks, 1):
            n = np.asarray(blk).size
            header += [f"{prefix}{i}"] if n == 1 else [f"{prefix}{i}_{k}" for k in range(1, n + 1)]
    rows = []
    for t in range(1, T + 1):
        g = schedule.game(t)
        vals = [v for blk in g.B for v in np.ravel(blk)] + [v for blk in g.e for v in np.ravel(blk)]
        rows.append([t] + [_num(v) for v in vals])
    return header, rows


def cmd_run(cfg: RunConfig) -> int:
    obj = cfg.build()
    analysis = _analysis_doc(cfg, obj)
    if not _gate(cfg, analysis):
        return EXIT_GATE
    T = cfg.horizon
    schedule = obj if isinstance(obj, GameSchedule) else GameSchedule.constant(obj, T, name=cfg.name)
    x1 = cfg.initial_action(schedule.space)
    traj = run_dynamics(schedule, x1, T)
    path = equilibrium_path(schedule, T, tol=cfg.tol)
    P = path_array(path)
    met = compute_metrics(traj, path)
    N, n = schedule.n_agents, schedule.space.size
    out = _out_dir(cfg)
    written = []

    if "csv" in cfg.emit:
        header = ["t"] + [f"x_{k}" for k in range(1, n + 1)] + [f"xstar_{k}" for k in range(1, n + 1)] + ["distance"]
        rows = [
            [t] + [_num(v) for v in traj[t]] + [_num(v) for v in P[t - 1]] + [_num(met.distance[t - 1])]
            for t in range(1, T + 1)
        ]
        _write_csv(out / "trajectory.csv", header, rows)
        header = ["t", "Err", "V"]
        cols = [met.err, met.V]
        for label, arr in (("SR", met.SR), ("DR", met.DR), ("W", met.W)):
            if arr is not None:
                header += [f"{label}_{i}" for i in range(1, N + 1)]
                cols += [arr[:, i] for i in range(N)]
        rows = [[t] + [_num(c[t - 1]) for c in cols] for t in range(1, T + 1)]
        _write_csv(out / "metrics.csv", header, rows)
        written += ["trajectory.csv", "metrics.csv"]
        if not schedule.is_constant:
            sh, srows = _schedule_columns(schedule, T)
            if sh is not None:
                _write_csv(out / "schedule.csv", sh, srows)
                written.append("schedule.csv")

    if "svg" in cfg.emit:
        if schedule.is_constant:
            charts = {"distance.svg": line_chart({"|x_t - x*|": met.distance}, f"{cfg.name}: distance to equilibrium", ylabel="distance", log_y=True)}
        else:
            charts = {
                "tracking_error.svg": line_chart({"Err(t)": met.err}, f"{cfg.name}: equilibrium tracking error", ylabel="Err"),
                "dynamic_regret.svg": line_chart(
                    {f"DR_{i + 1}(t)": met.DR[:, i] for i in range(N)}, f"{cfg.name}: dynamic regret", ylabel="DR"
                ),
            }
        for fname, text in charts.items():
            (out / fname).write_text(text)
            written.append(fname)

    bounds: dict = {"prop2": met.prop2_bound, "thm1": None, "thm1_slack": None, "thm2_scale": met.thm2_scale}
    if met.thm1_bound is not None:
        bounds["thm1"] = met.thm1_bound[-1]
        bounds["thm1_slack"] = met.thm1_bound[-1] - met.err[-1]
        bounds["thm1_holds_all_prefixes"] = bool(np.all(met.err <= met.thm1_bound * (1 + 1e-9) + 1e-9))
    if met.prop2_bound is not None:
        bounds["prop2_slack"] = [b - float(np.max(met.SR[:, i])) for i, b in enumerate(met.prop2_bound)]
    report = {
        "name": cfg.name,
        "preset": cfg.preset,
        "kind": "game" if schedule.is_constant else "schedule",
        "T": T,
        "x1": x1,
        "box": {"lower": [_box_str(v) for v in schedule.space.lower], "upper": [_box_str(v) for v in schedule.space.upper]},
        "analysis": analysis,
        "rho": analysis["rho"],
        "verdict": analysis["verdict"],
        "equilibrium_1": P[0],
        "final": {
            "distance": met.distance[-1],
            "Err": met.err[-1],
            "V": met.V[-1],
            "DR": met.DR[-1],
            "SR": None if met.SR is None else met.SR[-1],
            "W": None if met.W is None else met.W[-1],
        },
        "bounds": bounds,
        "exponents": met.exponents,
        "outputs": sorted(written),
    }
    _dump_json(out / "report.json", report)
    print(f"{cfg.name}: T={T} verdict={analysis['verdict'].value} rho={analysis['rho']:.6g} "
          f"final distance={met.distance[-1]:.3e} Err={met.err[-1]:.6g} -> {out}")
    return EXIT_OK


def _box_str(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _report_row(name: str, doc: dict) -> list:
    final, bounds = doc["final"], doc.get("bounds", {})
    if bounds.get("prop2") is not None:
        bound, slack = "prop2", min(bounds["prop2_slack"])
    elif bounds.get("thm1") is not None:
        bound, slack = "thm1", bounds.get("thm1_slack")
    else:
        bound, slack = "", None

    def cell(v):
        return "" if v is None else _num(v) if isinstance(v, float) else str(v)

    return [
        name, doc.get("preset") or "", doc["T"], cell(doc.get("rho")), doc["verdict"], cell(final.get("distance")),
        cell(final.get("Err")), cell(final.get("V")), cell(max(final["DR"]) if final.get("DR") else None),
        cell(max(final["SR"]) if final.get("SR") else None), bound, cell(slack),
    ]


def cmd_report(directory: str, out: Optional[str] = None) -> int:
    root = Path(directory)
    if not root.is_dir():
        raise ConfigError(f"{directory} is not a directory")
    for f in sorted(p for p in root.iterdir() if p.is_file() and p.name != "report.json"):
        log.warning("ignoring non-report file %s", f)
    rows = []
    for path in sorted(root.rglob("report.json")):
        try:
            doc = json.loads(path.read_text())
            name = str(path.parent.relative_to(root)) if path.parent != root else root.name
            rows.append(_report_row(name, doc))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            log.warning("ignoring malformed report %s: %s", path, exc)
    if not rows:
        print(f"no run reports found under {directory}", file=sys.stderr)
        return EXIT_CONFIG
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    w.writerows(rows)
    text = buf.getvalue()
    sys.stdout.write(text)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "summary.csv").write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="brgames", description="Best-response dynamics for strongly monotone games.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("analyze", "monotonicity/Lipschitz constants and contraction verdict"),
        ("solve", "Nash equilibrium"),
        ("run", "simulate best-response dynamics and compute metrics"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", help="theta1|theta2|theta3|tv-cournot|remark1")
        p.add_argument("--T", type=int, help="horizon (episodes)")
        p.add_argument("--x1", help="initial action: comma-separated values or 'midpoint'")
        p.add_argument("--box", help="'lo,hi' applied to every coordinate, or 'inf'")
        p.add_argument("--require-contractive", action="store_true", help="exit 2 unless rho < 1")
        p.add_argument("--emit", help="comma-separated outputs: csv,svg")
        p.add_argument("--out", help="output directory (default runs/<name>)")
        p.add_argument("--seed", type=int, help="seed for sampled diagnostics")
        p.add_argument("--tol", type=float, help="equilibrium solver tolerance")
    p = sub.add_parser("report", help="merge run reports into one CSV table")
    p.add_argument("directory")
    p.add_argument("--out", help="also write summary.csv here")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.command == "report":
            return cmd_report(args.directory, args.out)
        cfg = _config(args)
        return {"analyze": cmd_analyze, "solve": cmd_solve, "run": cmd_run}[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
