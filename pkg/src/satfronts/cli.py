"""Command-line entry point: ``satfronts <command> [options]``.

Every command writes CSV (17 significant digits) plus a JSON sidecar into the
output directory, which defaults to ``$SATFRONTS_OUT`` or the working
directory.  Failures print one JSON object on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import diffusion, limits, profiles, reaction, shooting, svg
from .errors import (
    DomainError,
    IpofError,
    RegimeError,
    SatFrontsError,
    ValidationError,
    WindowError,
)

OUT_ENV = "SATFRONTS_OUT"

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_REGIME = 4
EXIT_NUMERICAL = 5

_DEFAULTS = {
    "out_dir": None,
    "plot": False,
    "tol": 1e-7,
    "kind": "bistable",
    "method": "closed",
    "critical": "bistable",
    "c": None,
    "turns": 6,
    "start": "auto",
    "q1": None,
    "q2": 1.0,
    "metric": "speed",
    "which": "bistable",
    "eps_grid": None,
    "i0": limits.DEFAULT_I0,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (DomainError, ValidationError, WindowError)):
        return EXIT_DOMAIN
    if isinstance(exc, (RegimeError, IpofError)):
        return EXIT_REGIME
    if isinstance(exc, SatFrontsError):
        return EXIT_NUMERICAL
    return EXIT_UNEXPECTED


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:log[:n]`` / ``start:stop:lin[:n]`` (n defaults to 12)."""
    if ":" not in text:
        return [float(t) for t in text.split(",") if t.strip()]
    parts = text.split(":")
    if len(parts) not in (3, 4) or parts[2] not in ("log", "lin"):
        raise DomainError(f"grid {text!r} is not start:stop:log[:n] or start:stop:lin[:n]")
    a, b = float(parts[0]), float(parts[1])
    n = int(parts[3]) if len(parts) == 4 else 12
    if n < 2:
        raise DomainError("a grid needs at least two points")
    if parts[2] == "log":
        if a <= 0.0 or b <= 0.0:
            raise DomainError("log grids need positive end points")
        return [float(x) for x in np.geomspace(a, b, n)]
    return [float(x) for x in np.linspace(a, b, n)]


def _tag(x: float) -> str:
    return f"{x:.6g}"


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with reaction, flux and option overrides")
    common.add_argument("--out-dir", dest="out_dir", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--plot", action="store_true", default=None, help="also write an SVG")
    common.add_argument("--a", type=float, default=None, help="alpha of the cubic reaction (default 0.4)")

    parser = argparse.ArgumentParser(prog="satfronts", description="Traveling fronts with saturating diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("speed", parents=[common], help="critical speed c* or c+")
    p.add_argument("--kind", choices=("bistable", "monostable"), default=None)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--tol", type=float, default=None, help="bisection tolerance for c*")
    p.add_argument("--method", choices=("closed", "shooting"), default=None, help="monostable only")

    p = sub.add_parser("front", parents=[common], help="critical or fixed-speed front profiles")
    p.add_argument("--eps", type=float, nargs="+", required=True)
    p.add_argument("--critical", choices=("bistable", "monostable"), default=None)
    p.add_argument("--c", type=float, default=None, help="fixed speed (monostable fronts only)")

    p = sub.add_parser("steady", parents=[common], help="discontinuous steady states for eps <= threshold")
    p.add_argument("--eps", type=float, nargs="+", required=True)

    p = sub.add_parser("nonmonotone", parents=[common], help="glued oscillating waves")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--turns", type=int, default=None)
    p.add_argument("--start", choices=("auto", "from_one", "from_zero"), default=None)

    p = sub.add_parser("inviscid", parents=[common], help="fronts of c v' = f(v)")
    p.add_argument("--c", type=float, nargs="+", required=True)
    p.add_argument("--q1", type=float, default=None)
    p.add_argument("--q2", type=float, default=None)

    p = sub.add_parser("sweep", parents=[common], help="convergence reports over an eps grid")
    p.add_argument("--metric", choices=("speed", "step", "pairing", "fixed"), default=None)
    p.add_argument("--which", choices=("bistable", "monostable"), default=None)
    p.add_argument("--eps-grid", dest="eps_grid", default=None, help="a,b,c or start:stop:log[:n]")
    p.add_argument("--i0", type=float, default=None, help="half-width of the excluded neighbourhood of 0")
    p.add_argument("--c", type=float, default=None, help="speed for --metric fixed (default 0.2)")
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    cfg: dict = {}
    if getattr(args, "config", None) is not None:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ValidationError("config must be a JSON object")
    opts = dict(_DEFAULTS)
    opts.update({k.replace("-", "_"): v for k, v in cfg.items()})
    opts.update({k: v for k, v in vars(args).items() if v is not None})
    react_cfg = dict(cfg.get("reaction", {"type": "cubic"}))
    if args.a is not None:
        react_cfg = {"type": "cubic", "a": args.a}
    opts["reaction"] = reaction.from_config(react_cfg)
    opts["flux"] = diffusion.from_config(dict(cfg.get("flux", {"type": "mean_curvature"})))
    out = opts["out_dir"] or os.environ.get(OUT_ENV) or "."
    opts["out"] = Path(out)
    opts["out"].mkdir(parents=True, exist_ok=True)
    return opts


def _y_curve(profile: profiles.WaveProfile, flux) -> list[tuple[np.ndarray, np.ndarray]]:
    """(v, eps Q(v')) per sampled piece, for the right-hand plot panel."""
    curves = []
    for piece in profile.pieces:
        if piece.s is None:
            continue
        single = profiles.WaveProfile(pieces=[piece], kind=profile.kind, speed_c=profile.speed_c,
                                      eps=profile.eps, normalization=profile.normalization)
        try:
            curves.append(profiles.slope_to_y(single, flux))
        except ValueError:
            continue
    return curves


def _plot_profiles(path: Path, items: list[tuple[str, profiles.WaveProfile]], flux, title: str) -> None:
    left = svg.Panel(title=title, xlabel="z", ylabel="v")
    right = svg.Panel(title="reduced variable", xlabel="v", ylabel="y")
    for i, (label, prof) in enumerate(items):
        color, dash = svg.PALETTE[i % len(svg.PALETTE)], svg.DASHES[i % len(svg.DASHES)]
        for j, piece in enumerate(prof.pieces):
            keep = np.abs(piece.z) <= 5.0
            left.add(piece.z[keep], piece.v[keep], label if j == 0 else "", color, dash)
        for j, (v, y) in enumerate(_y_curve(prof, flux)):
            right.add(v, y, label if j == 0 else "", color, dash)
    panels = [left, right] if right.series else [left]
    svg.write(path, panels)


def _write_profile(opts: dict, prof: profiles.WaveProfile, name: str) -> dict:
    path = opts["out"] / f"{name}.csv"
    prof.to_csv(path, opts["reaction"], opts["flux"])
    return {"csv": str(path), "kind": prof.kind, "speed": prof.speed_c, "eps": prof.eps,
            "jump": list(prof.jump) if prof.jump else None}


# --- commands ----------------------------------------------------------------


def cmd_speed(opts: dict) -> dict:
    r, fl, eps = opts["reaction"], opts["flux"], opts["eps"]
    if opts["kind"] == "bistable":
        res = shooting.critical_speed_bistable(r, fl, eps, tol=opts["tol"])
    elif opts["method"] == "shooting":
        res = shooting.monostable_speed_by_shooting(r, fl, eps)
    else:
        res = shooting.critical_speed_monostable(r, fl, eps)
    path = opts["out"] / f"speed_{opts['kind']}_eps{_tag(eps)}.json"
    path.write_text(res.to_json() + "\n", encoding="utf-8")
    return {"json": str(path), "value": res.value, "regime": res.regime, "bracket": list(res.bracket)}


def cmd_front(opts: dict) -> dict:
    r, fl, which, c = opts["reaction"], opts["flux"], opts["critical"], opts["c"]
    if which == "bistable" and c is not None:
        raise DomainError("bistable fronts exist only at the critical speed; drop --c")
    items, written = [], []
    for eps in opts["eps"]:
        if which == "monostable":
            prof = profiles.monostable_front(r, fl, eps, c=c)
        else:
            prof = profiles.bistable_front(r, fl, eps)
        name = f"front_{which}_eps{_tag(eps)}" + ("" if c is None else f"_c{_tag(c)}")
        written.append(_write_profile(opts, prof, name))
        items.append((f"eps={_tag(eps)}", prof))
    if opts["plot"]:
        path = opts["out"] / f"front_{which}.svg"
        _plot_profiles(path, items, fl, f"{which} fronts")
        written.append({"svg": str(path)})
    return {"outputs": written}


def cmd_steady(opts: dict) -> dict:
    r, fl = opts["reaction"], opts["flux"]
    items, written = [], []
    for eps in opts["eps"]:
        prof = profiles.build_discontinuous_steady(r, eps, fl)
        written.append(_write_profile(opts, prof, f"steady_eps{_tag(eps)}"))
        items.append((f"eps={_tag(eps)}", prof))
    if opts["plot"]:
        path = opts["out"] / "steady.svg"
        _plot_profiles(path, items, fl, "steady states")
        written.append({"svg": str(path)})
    return {"outputs": written}


def cmd_nonmonotone(opts: dict) -> dict:
    r, fl, eps, c = opts["reaction"], opts["flux"], opts["eps"], opts["c"]
    start = opts["start"]
    if start == "auto":
        start = "from_zero" if c == 0.0 else "from_one"
    prof = profiles.glue_nonmonotone(r, fl, eps, c, start=start, max_turns=int(opts["turns"]))
    name = f"nonmonotone_eps{_tag(eps)}_c{_tag(c)}"
    out = _write_profile(opts, prof, name)
    out["zeros"] = prof.meta["zeros"]
    if opts["plot"]:
        path = opts["out"] / f"{name}.svg"
        _plot_profiles(path, [(f"c={_tag(c)}", prof)], fl, "glued wave")
        out["svg"] = str(path)
    return out


def cmd_inviscid(opts: dict) -> dict:
    r = opts["reaction"]
    items, written = [], []
    for c in opts["c"]:
        prof = profiles.inviscid_front(r, c, q1=opts["q1"], q2=opts["q2"])
        written.append(_write_profile(opts, prof, f"inviscid_c{_tag(c)}"))
        items.append((f"c={_tag(c)}", prof))
    if opts["plot"]:
        path = opts["out"] / "inviscid.svg"
        _plot_profiles(path, items, opts["flux"], "inviscid fronts")
        written.append({"svg": str(path)})
    return {"outputs": written}


def cmd_sweep(opts: dict) -> dict:
    r, fl, metric, which = opts["reaction"], opts["flux"], opts["metric"], opts["which"]
    grid = parse_grid(opts["eps_grid"]) if isinstance(opts["eps_grid"], str) else opts["eps_grid"]
    out = opts["out"]
    written = []
    if metric == "speed":
        if grid is None:
            grid = parse_grid("0.5:0.009:log")
        star, plus = limits.speed_sweep(r, fl, grid)
        for tag, rep in (("cstar", star), ("cplus", plus)):
            path = out / f"sweep_speed_{tag}.csv"
            rep.to_csv(path)
            written.append(str(path))
        if opts["plot"]:
            panel = svg.Panel(title="critical speeds", xlabel="log10 eps", ylabel="speed")
            x = np.log10(star.eps_grid)
            panel.add(x, star.values, "c*")
            panel.add(x, plus.values, "c+")
            svg.write(out / "sweep_speed.svg", [panel])
            written.append(str(out / "sweep_speed.svg"))
        return {"outputs": written, "c_star": star.values, "c_plus": plus.values}

    if metric == "fixed":
        c = 0.2 if opts["c"] is None else opts["c"]
        rep = limits.fixed_speed_convergence(r, fl, c, grid or limits.FIXED_SPEED_GRID)
        path = out / f"sweep_fixed_c{_tag(c)}.csv"
        rep.to_csv(path)
        return {"outputs": [str(path)], "values": rep.values, "energy": rep.extra["energy"]}

    if grid is None:
        grid = limits.MONOSTABLE_GRID if which == "monostable" else limits.BISTABLE_GRID
    step = limits.critical_front_convergence(r, fl, which, grid, opts["i0"])
    if metric == "step":
        rep = step
    else:
        rep = limits.pairing_report(r, fl, which, grid, profiles=step.profiles)
    path = out / f"sweep_{metric}_{which}.csv"
    rep.to_csv(path)
    written.append(str(path))
    if metric == "step":
        for eps, prof in zip(step.eps_grid, step.profiles):
            written.append(_write_profile(opts, prof, f"front_{which}_eps{_tag(eps)}")["csv"])
    if opts["plot"]:
        spath = out / f"sweep_{metric}_{which}.svg"
        _plot_profiles(spath, [(f"eps={_tag(e)}", p) for e, p in zip(step.eps_grid, step.profiles)], fl,
                       f"{which} critical fronts")
        written.append(str(spath))
    return {"outputs": written, "values": rep.values, "target": rep.limit_target}


COMMANDS = {
    "speed": cmd_speed,
    "front": cmd_front,
    "steady": cmd_steady,
    "nonmonotone": cmd_nonmonotone,
    "inviscid": cmd_inviscid,
    "sweep": cmd_sweep,
}


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(type(o).__name__)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _resolve(args)
        summary = COMMANDS[args.command](opts)
    except Exception as exc:  # every failure becomes a JSON record and an exit code
        code = exit_code_for(exc)
        record = {"error": type(exc).__name__, "message": str(exc), "command": args.command, "exit_code": code}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return code
    print(json.dumps(summary, indent=2, sort_keys=True, default=_json_default))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
