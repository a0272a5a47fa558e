"""Command-line front end: sweeps, optimizations, thresholds, cross-checks and
figure data, written as CSV or JSON."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bell import optimize_bell, violation_threshold
from .correlators import correlation
from .errors import EcsBellError, UnknownFigure
from .oracle import oracle_correlation
from .scenario import Method, ScenarioConfig

CSV_FIELDS = ["alpha", "g", "eta", "bell_value", "theta_A1", "theta_A2",
              "theta_B1", "theta_B2", "method", "converged"]

DEFAULTS = {
    "alpha": 0.7,
    "alpha_grid": "0.05:2.0:0.05",
    "gain": "1.0",
    "eta": "1.0",
    "rotation": "ideal",
    "amplifier": "first-order",
    "ordering": "after",
    "method": "closed",
    "seed": 0,
    "workers": 1,
    "out": None,
    "bracket": "0.05:1.5",
    "tol": 1e-3,
    "starts": 100,
}

FIGURE_STEP = 0.02


# ---------------------------------------------------------------------------
# sweep machinery


@dataclass(frozen=True)
class SweepSpec:
    alphas: tuple
    gains: tuple
    etas: tuple
    rotation: str = "ideal"
    amplifier: str = "first-order"
    ordering: str = "after"
    method: str = "closed"
    seed: int = 0
    n_starts: int = 100

    def __post_init__(self):
        if not (self.alphas and self.gains and self.etas):
            raise ValueError("sweep grids must be non-empty")

    def points(self):
        return [(a, g, e) for g in self.gains for e in self.etas for a in self.alphas]


def parse_grid(text: str) -> tuple:
    """'start:stop:step' inclusive of stop, values rounded to 12 digits."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ValueError(f"alpha grid must be start:stop:step, got {text!r}") from None
    if not step > 0 or not start < stop:
        raise ValueError("alpha grid needs step > 0 and start < stop")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(n))


def parse_list(text) -> tuple:
    if isinstance(text, (int, float)):
        return (float(text),)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _fmt(v) -> str:
    return "{:.12g}".format(v)


def evaluate_point(args) -> dict:
    """One sweep row; failures become rows with converged=false."""
    alpha, g, eta, spec = args
    row = {"alpha": _fmt(alpha), "g": _fmt(g), "eta": _fmt(eta),
           "method": spec.method}
    try:
        cfg = ScenarioConfig.make(alpha, g, spec.amplifier, spec.rotation,
                                  spec.ordering, eta)
        res = optimize_bell(cfg, spec.method, spec.n_starts, spec.seed)
        th = res.angles.as_array()
        row.update(bell_value=_fmt(res.value), theta_A1=_fmt(th[0]), theta_A2=_fmt(th[1]),
                   theta_B1=_fmt(th[2]), theta_B2=_fmt(th[3]),
                   converged="true" if res.optimizer.converged else "false")
    except (EcsBellError, ValueError, FloatingPointError) as exc:
        print(f"warning: alpha={alpha} g={g} eta={eta}: {exc}", file=sys.stderr)
        row.update({k: "" for k in CSV_FIELDS[3:8]}, converged="false")
    return row


def _sort_key(row):
    return (float(row["g"]), float(row["eta"]), float(row["alpha"]), row["method"])


def run_sweep(spec: SweepSpec, workers: int = 1, extra_rows=()) -> list[dict]:
    tasks = [(a, g, e, spec) for a, g, e in spec.points()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_point, tasks))
    else:
        rows = [evaluate_point(t) for t in tasks]
    rows.extend(extra_rows)
    return sorted(rows, key=_sort_key)


def write_csv(rows, out) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    _emit(buf.getvalue(), out)


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# figures


def figure_specs(name: str, seed: int = 0, method: str | None = None):
    """Sweep specifications reproducing one figure."""
    grid = parse_grid(f"{FIGURE_STEP}:2.0:{FIGURE_STEP}")
    common = dict(seed=seed)
    if name == "fig1":
        return [SweepSpec(grid, (1.0, 2.0, 3.0), (1.0,), amplifier="full",
                          method=method or "closed", **common)]
    if name == "fig2":
        return [SweepSpec(grid, (1.0, 1.4), (1.0,), method=method or "closed", **common)]
    if name == "fig2-inset":
        return [SweepSpec(grid, (1.0, 1.1), (1.0,), method=method or "closed", **common)]
    if name == "fig3":
        return [SweepSpec(grid, (1.0, 1.4), (0.9,), method=method or "closed", **common)]
    if name == "fig4":
        # the amplified curve uses the expansion to first order in g - 1,
        # the same approximation level as the ideal-rotation closed form
        return [SweepSpec(grid, (1.0,), (1.0,), rotation="effective",
                          method=method or "quadrature", **common),
                SweepSpec(grid, (1.3,), (1.0,), rotation="effective",
                          method=method or "linearized", **common)]
    raise UnknownFigure(f"unknown figure {name!r}; choose from fig1, fig2, fig2-inset, fig3, fig4")


def figure_rows(name: str, seed: int = 0, method: str | None = None, workers: int = 1):
    specs = figure_specs(name, seed, method)
    rows = []
    for spec in specs:
        rows.extend(run_sweep(spec, workers))
    if name == "fig3":
        # reference point: threshold of the unamplified ideal-detector setup
        ref = violation_threshold(ScenarioConfig.make(0.7, 1.0), seed=seed)
        rows.append({"alpha": _fmt(ref.alpha_star), "g": _fmt(1.0), "eta": _fmt(1.0),
                     "bell_value": _fmt(2.0), "theta_A1": "", "theta_A2": "",
                     "theta_B1": "", "theta_B2": "", "method": "marker",
                     "converged": "true"})
    return sorted(rows, key=_sort_key)


# ---------------------------------------------------------------------------
# verification grid


def verify_report(n_points: int = 30, seed: int = 0, max_gain: float = 1.4) -> list[dict]:
    """Maximum deviations of every cross-check over a seeded random grid."""
    rng = np.random.default_rng(seed)
    exact_classes = {
        "ideal/first-order": dict(amplifier="first-order"),
        "ideal/full": dict(amplifier="full"),
        "ideal/first-order/eta": dict(amplifier="first-order", eta=None),
        "ideal/first-order/before": dict(amplifier="first-order", ordering="before"),
        "effective/first-order": dict(amplifier="first-order", rotation="effective"),
        "effective/full": dict(amplifier="full", rotation="effective"),
    }
    report = []
    samples = [(rng.uniform(0.3, 1.2), rng.uniform(1.0, max_gain), rng.uniform(0.7, 1.0),
                rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi, math.pi))
               for _ in range(n_points)]
    for name, kw in exact_classes.items():
        dev = 0.0
        for a, g, eta, ta, tb in samples:
            kw2 = dict(kw)
            kw2["eta"] = eta if "eta" in kw else 1.0
            cfg = ScenarioConfig.make(a, g, **kw2)
            dev = max(dev, abs(correlation(ta, tb, cfg, Method.QUADRATURE).value
                               - oracle_correlation(ta, tb, cfg)))
        report.append({"check": f"quadrature vs oracle [{name}]", "max_dev": dev,
                       "limit": 1e-6})
    for name, eta_on in (("first-order", False), ("first-order/eta", True)):
        dev = 0.0
        for a, g, eta, ta, tb in samples:
            cfg = ScenarioConfig.make(a, g, eta=eta if eta_on else 1.0)
            dev = max(dev, abs(correlation(ta, tb, cfg, Method.CLOSED).value
                               - correlation(ta, tb, cfg, Method.QUADRATURE).value))
        report.append({"check": f"closed form vs quadrature [{name}]", "max_dev": dev,
                       "limit": 5e-3})
    dev = 0.0
    for a, g, eta, ta, tb in samples:
        c1 = correlation(ta, tb, ScenarioConfig.make(a, g, "full")).value
        c2 = correlation(ta, tb, ScenarioConfig.make(a * math.exp(g - 1.0), 1.0, "none")).value
        dev = max(dev, abs(c1 - c2))
    report.append({"check": "full amplification vs rescaled amplitude", "max_dev": dev,
                   "limit": 1e-12})
    dev = 0.0
    for a, g, eta, ta, tb in samples:
        for kw in exact_classes.values():
            kw2 = dict(kw)
            kw2["eta"] = eta if "eta" in kw else 1.0
            amp = ScenarioConfig.make(a, 1.0, **kw2)
            kw2["amplifier"] = "none"
            ref = ScenarioConfig.make(a, 1.0, **kw2)
            dev = max(dev, abs(correlation(ta, tb, amp, Method.QUADRATURE).value
                               - correlation(ta, tb, ref, Method.QUADRATURE).value))
    report.append({"check": "g = 1 collapse", "max_dev": dev, "limit": 0.0})
    for r in report:
        r["ok"] = r["max_dev"] <= r["limit"]
    return report


# ---------------------------------------------------------------------------
# argument handling


def read_config(path: str) -> dict:
    """Plain key=value file; '#' starts a comment; dashes and underscores match."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _resolve(args) -> argparse.Namespace:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            val = cfg.get(key, default)
            if isinstance(default, bool):
                val = str(val).lower() in ("1", "true", "yes")
            elif isinstance(default, int) and val is not None:
                val = int(val)
            elif isinstance(default, float) and val is not None:
                val = float(val)
            setattr(args, key, val)
    return args


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float)
    p.add_argument("--alpha-grid", dest="alpha_grid", help="start:stop:step")
    p.add_argument("--gain", help="gain g >= 1 (comma list for sweeps)")
    p.add_argument("--eta", help="detector amplitude transmission in (0, 1] (comma list for sweeps)")
    p.add_argument("--rotation", choices=["ideal", "effective"])
    p.add_argument("--amplifier", choices=["none", "full", "first-order"])
    p.add_argument("--ordering", choices=["after", "before"])
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--seed", type=int)
    p.add_argument("--starts", type=int, help="optimizer starts (default 100)")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--config", help="key=value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecsbell",
        description="Bell-CHSH tests with amplified entangled coherent states.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("sweep", "optimized B over an alpha grid (CSV)"),
                       ("threshold", "alpha where the optimized |B| crosses 2 (JSON)"),
                       ("optimize", "optimized B at one alpha (JSON)"),
                       ("verify", "closed form / quadrature / oracle cross-checks")):
        p = sub.add_parser(name, help=text)
        _scenario_flags(p)
        if name == "threshold":
            p.add_argument("--bracket", help="lo:hi (default 0.05:1.5)")
            p.add_argument("--tol", type=float)
        if name == "verify":
            p.add_argument("--points", type=int, default=30)
            p.add_argument("--max-gain", dest="max_gain", type=float, default=1.4)
    p = sub.add_parser("figure", help="data for one figure (CSV)")
    p.add_argument("name")
    _scenario_flags(p)
    return parser


def _single_scenario(args, alpha=None) -> ScenarioConfig:
    return ScenarioConfig.make(args.alpha if alpha is None else alpha,
                               parse_list(args.gain)[0], args.amplifier, args.rotation,
                               args.ordering, parse_list(args.eta)[0])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    method_given = args.method is not None
    try:
        args = _resolve(args)
        if args.command == "sweep":
            spec = SweepSpec(parse_grid(args.alpha_grid), parse_list(args.gain),
                             parse_list(args.eta), args.rotation, args.amplifier,
                             args.ordering, args.method, args.seed, args.starts)
            write_csv(run_sweep(spec, args.workers), args.out)
        elif args.command == "figure":
            rows = figure_rows(args.name, args.seed, args.method if method_given else None,
                               args.workers)
            write_csv(rows, args.out)
        elif args.command == "optimize":
            res = optimize_bell(_single_scenario(args), args.method, args.starts, args.seed)
            rec = dict(res.scenario.as_dict(), bell_value=res.value,
                       signed_value=res.signed_value,
                       angles=[float(t) for t in res.angles.as_array()],
                       method=res.method.value, converged=res.optimizer.converged)
            _emit(json.dumps(rec) + "\n", args.out)
        elif args.command == "threshold":
            lo, hi = (float(v) for v in args.bracket.split(":"))
            res = violation_threshold(_single_scenario(args, alpha=lo), (lo, hi),
                                      args.method, args.tol, args.starts, args.seed)
            _emit(json.dumps(res.as_dict()) + "\n", args.out)
        elif args.command == "verify":
            report = verify_report(args.points, args.seed, args.max_gain)
            lines = [f"{'check':<48} {'max_dev':>12} {'limit':>9}  status"]
            for r in report:
                lines.append(f"{r['check']:<48} {r['max_dev']:>12.3e} {r['limit']:>9.1e}  "
                             f"{'ok' if r['ok'] else 'FAIL'}")
            _emit("\n".join(lines) + "\n", args.out)
            return 0 if all(r["ok"] for r in report) else 1
    except (EcsBellError, ValueError, OSError) as exc:
        print(f"ecsbell: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
