"""Command-line front end: evaluate bound families over grids and emit CSV, JSON or SVG."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__, code_bounds, code_sim, lattice_bounds, lattice_sim
from .errors import CapacityError, DomainError, NumericError, ValidityError, VorcdfError
from .results import BoundResult, evaluate
from .svg import Series, line_chart

EXIT_OK, EXIT_FAIL, EXIT_VALIDATION, EXIT_CAPACITY, EXIT_NUMERIC = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    """Everything that determines a run's output; echoed into the output metadata."""

    command: str
    n: list[int] = field(default_factory=list)
    sigma2: list[float] = field(default_factory=list)
    p: list[float] = field(default_factory=list)
    k: int | None = None
    k_ratio: float | None = None
    alpha: float | None = None
    lattices: list[str] = field(default_factory=list)
    radii: list[float] = field(default_factory=list)
    samples: int | None = None
    seed: int | None = None
    workers: int = 1
    format: str = "csv"
    out: str | None = None


@dataclass
class Plot:
    x: str
    ys: list[str]
    group_by: list[str]
    title: str
    xlabel: str
    ylabel: str
    log_y: bool = False


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any]
    plot: Plot | None = None
    failed: bool = False


def _cell(v: Any) -> Any:
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _csv_text(v: Any) -> str:
    v = _cell(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    for key, value in table.meta.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_csv_text(v) for v in row])
    return buf.getvalue()


def to_json(table: Table) -> str:
    def clean(v: Any) -> Any:
        v = _cell(v)
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    doc = {"meta": table.meta, "columns": table.columns, "rows": [[clean(v) for v in r] for r in table.rows]}
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def to_svg(table: Table) -> str:
    plot = table.plot
    if plot is None:
        raise ValidityError("this command has no plot; use --format csv or json")
    idx = {c: i for i, c in enumerate(table.columns)}
    groups: dict[tuple, list[list[Any]]] = {}
    for row in table.rows:
        groups.setdefault(tuple(row[idx[g]] for g in plot.group_by), []).append(row)
    series = []
    for key, rows in groups.items():
        prefix = ", ".join(f"{g}={_short(v)}" for g, v in zip(plot.group_by, key))
        for y in plot.ys:
            pts = [(float(r[idx[plot.x]]), _cell(r[idx[y]])) for r in rows if r[idx[y]] is not None]
            label = f"{y} ({prefix})" if prefix else y
            series.append(Series(label, [a for a, _ in pts], [float(b) for _, b in pts]))
    note = " [log scale]" if plot.log_y else ""
    return line_chart(series, plot.title, plot.xlabel, plot.ylabel + note, log_y=plot.log_y)


def _short(v: Any) -> str:
    v = _cell(v)
    return f"{v:.4g}" if isinstance(v, float) else str(v)


def _meta(cfg: RunConfig, **extra: Any) -> dict[str, Any]:
    meta = {"tool": "vorcdf", "version": __version__, "config": asdict(cfg), "seed": cfg.seed}
    meta.update(extra)
    return meta


def _value(res: BoundResult) -> float | None:
    return res.value if res.ok else None


def _notes(results: Sequence[BoundResult]) -> str:
    parts = [f"{r.name}: {r.reason}" for r in results if not r.valid]
    parts += [f"{r.name}: clamped" for r in results if r.clamped]
    return "; ".join(parts)


def cmd_nsm_table(cfg: RunConfig) -> Table:
    cols = ["n", "nsm_ball", "nsm_upper", "nsm_zador", "nsm_zador_lattice", "nsm_cs_lower",
            "upper_over_ball", "zador_over_ball", "ratio_cap_4_over_n", "notes"]
    rows = []
    for n in cfg.n:
        res = [
            evaluate("nsm_ball", lattice_bounds.nsm_ball, n=n),
            evaluate("nsm_upper", lattice_bounds.nsm_upper, n=n),
            evaluate("nsm_zador", lattice_bounds.nsm_zador, n=n),
            evaluate("nsm_zador_lattice", lattice_bounds.nsm_zador_lattice, n=n),
            evaluate("nsm_cs_lower", lattice_bounds.nsm_cs_lower, n=n),
        ]
        ball, upper, zador = (_value(r) for r in res[:3])
        ratio_u = upper / ball if upper is not None else None
        cap = 1 + 4 / n if n >= 8 else None
        rows.append([n, *(_value(r) for r in res), ratio_u, zador / ball, cap, _notes(res)])
    plot = Plot("n", ["nsm_ball", "nsm_upper", "nsm_zador", "nsm_zador_lattice", "nsm_cs_lower"], [],
                "Normalized second moment bounds", "n", "NSM")
    return Table(cols, rows, _meta(cfg), plot)


def cmd_awgn_pe(cfg: RunConfig) -> Table:
    cols = ["n", "sigma2", "pe_sphere_packing", "pe_new_awgn", "pe_mlb_awgn", "sp_le_new", "sp_le_mlb", "notes"]
    rows = []
    for s2 in cfg.sigma2:
        for n in cfg.n:
            params = lattice_bounds.AwgnParams(n, s2)
            sp = lattice_bounds.pe_sphere_packing(params)
            res = [
                evaluate("pe_new_awgn", lambda: lattice_bounds.pe_new_awgn(params, clamp=False), probability=True),
                evaluate("pe_mlb_awgn", lambda: lattice_bounds.pe_mlb_awgn(params, clamp=False), probability=True),
            ]
            new, mlb = (_value(r) for r in res)
            rows.append([n, s2, sp, new, mlb, _le(sp, new), _le(sp, mlb), _notes(res)])
    plot = Plot("n", ["pe_sphere_packing", "pe_new_awgn", "pe_mlb_awgn"], ["sigma2"],
                "AWGN error probability bounds", "n", "Pe", log_y=True)
    return Table(cols, rows, _meta(cfg, y_axis="log"), plot)


def _le(a: float | None, b: float | None) -> bool | None:
    return None if a is None or b is None else a <= b


def _k_for(cfg: RunConfig, n: int) -> int:
    if cfg.k is not None:
        if not 0 <= cfg.k <= n:
            raise ValidityError(f"--k {cfg.k} is outside [0, {n}]")
        return cfg.k
    kr = n * cfg.k_ratio
    if abs(kr - round(kr)) > 1e-9:
        raise ValidityError(f"k = {cfg.k_ratio} * {n} is not an integer; choose even n or set --k")
    return int(round(kr))


def cmd_bsc_pe(cfg: RunConfig) -> Table:
    cols = ["n", "k", "p", "pe_sp_bsc", "pe_new_bsc", "rcu", "sp_le_new", "new_le_rcu", "notes"]
    rows = []
    for p in cfg.p:
        for n in cfg.n:
            k = _k_for(cfg, n)
            res = [
                evaluate("pe_sp_bsc", code_bounds.pe_sp_bsc, probability=True, n=n, k=k, p=p),
                evaluate("pe_new_bsc", lambda: code_bounds.pe_new_bsc(n, k, p, clamp=False), probability=True),
                evaluate("rcu", code_bounds.rcu, probability=True, n=n, k=k, p=p),
            ]
            sp, new, r = (_value(x) for x in res)
            rows.append([n, k, p, sp, new, r, _le(sp, new), _le(new, r), _notes(res)])
    plot = Plot("n", ["pe_sp_bsc", "pe_new_bsc", "rcu"], ["p"], "BSC error probability bounds", "n", "Pe", log_y=True)
    return Table(cols, rows, _meta(cfg, y_axis="log"), plot)


def cmd_simulate_lattice(cfg: RunConfig) -> Table:
    cols = ["lattice", "n", "r", "g_mc", "se", "g_ball", "g_jensen"]
    rows = []
    nsm = {}
    for name in cfg.lattices:
        spec = lattice_sim.LatticeSpec.parse(name)
        radii = cfg.radii or list(np.linspace(0.0, lattice_sim.known_radii(spec)[1], 61))
        curve = lattice_sim.estimate_cdf(spec, radii, cfg.samples, cfg.seed, cfg.workers)
        gb = lattice_bounds.g_ball(spec.dim, curve.radii)
        gj = lattice_bounds.g_jensen(spec.dim, curve.radii)
        for i, r in enumerate(curve.radii):
            rows.append([spec.label, spec.dim, float(r), float(curve.values[i]), float(curve.se[i]), float(gb[i]), float(gj[i])])
        est = lattice_sim.estimate_nsm(spec, cfg.samples, cfg.seed, cfg.workers)
        nsm[spec.label] = {"nsm": est.mean, "se": est.std_error}
    plot = Plot("r", ["g_mc", "g_ball", "g_jensen"], ["lattice"], "Voronoi spherical CDF", "r", "CDF")
    return Table(cols, rows, _meta(cfg, nsm_estimates=nsm, method="monte carlo with binomial standard errors"), plot)


@dataclass
class OracleCheck:
    name: str
    lhs: Fraction
    rhs: Fraction
    relation: str = "<="

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs if self.relation == "<=" else self.lhs == self.rhs


def code_oracle_checks(n: int, k: int, ps: Sequence[Fraction], workers: int = 1) -> tuple[int, list[OracleCheck]]:
    """Exact ensemble inequalities for random codes over all of ``Gr(n, k)``."""
    ens = code_sim.grassmannian_histogram(n, k, workers)
    checks = []
    for r in range(n + 1):
        x = code_bounds.x_exact(n, k, r)
        checks.append(OracleCheck(f"cdf_lower r={r}", x / (1 + x), ens.mean_q(r)))
    ed = ens.mean_distortion()
    checks.append(OracleCheck("distortion_upper", ed, code_bounds.dc_upper_exact(n, k)))
    checks.append(OracleCheck("distortion_lower", code_bounds.d_star_exact(n, k), ed))
    checks.append(OracleCheck("gap_identity", n * (code_bounds.dc_upper_exact(n, k) - code_bounds.d_star_exact(n, k)),
                              code_bounds.delta_gap_exact(n, k), "=="))
    cosets = 1 << (n - k)
    for p in ps:
        q = 1 - p
        epe = ens.mean_pe(p)
        new = code_bounds.pe_new_bsc_exact(n, k, p)
        checks.append(OracleCheck(f"pe_upper p={p}", epe, new))
        checks.append(OracleCheck(f"pe_lower p={p}", code_bounds.pe_sp_bsc_exact(n, k, p), epe))
        mu_ball = code_bounds.quasi_ball_mass_exact(n, k, p)
        qball = [code_bounds.q_quasi_ball_exact(n, k, r) for r in range(n + 1)]
        checks.append(OracleCheck(f"ball_mass_identity p={p}", code_bounds.bsc_measure_from_cdf(n, cosets, qball, p), mu_ball, "=="))
        jensen = [code_bounds.x_exact(n, k, r) / (1 + code_bounds.x_exact(n, k, r)) for r in range(n + 1)]
        checks.append(OracleCheck(f"cell_mass_lower p={p}", code_bounds.bsc_measure_from_cdf(n, cosets, jensen, p), 1 - epe))
        gap = mu_ball - (1 - epe)
        mid = (1 - 2 * p) / q * cosets * sum(
            (p**w * q ** (n - w) * (min(code_bounds.x_exact(n, k, w), 1) - jensen[w]) for w in range(n + 1)), Fraction(0)
        )
        checks.append(OracleCheck(f"delta_chain_lower p={p}", gap, mid))
        checks.append(OracleCheck(f"delta_chain_equal p={p}", mid, code_bounds.pe_new_bsc_excess_exact(n, k, p), "=="))
    return ens.count, checks


def cmd_code_oracle(cfg: RunConfig) -> Table:
    if len(cfg.n) != 1 or cfg.k is None:
        raise ValidityError("code-oracle needs a single --n and --k")
    n, k = cfg.n[0], cfg.k
    ps = [Fraction(str(p)) for p in cfg.p]
    count, checks = code_oracle_checks(n, k, ps, cfg.workers)
    cols = ["check", "relation", "lhs", "rhs", "margin", "status", "lhs_exact", "rhs_exact"]
    rows = [
        [c.name, c.relation, c.lhs, c.rhs, c.rhs - c.lhs, "PASS" if c.passed else "FAIL", str(c.lhs), str(c.rhs)]
        for c in checks
    ]
    failed = not all(c.passed for c in checks)
    return Table(cols, rows, _meta(cfg, codes_enumerated=count, all_passed=not failed), None, failed)


def cmd_distortion(cfg: RunConfig) -> Table:
    cols = ["n", "k", "d_star", "dc_upper", "delta_gap", "d_rate", "proof_bound", "notes"]
    rows = []
    for n in cfg.n:
        exact_k = cfg.alpha * n
        k = int(round(exact_k))
        note = f"k rounded from {exact_k:g}" if abs(exact_k - k) > 1e-9 else ""
        pb = evaluate("proof_bound", code_bounds.delta_gap_proof_bound, n=n, alpha=cfg.alpha)
        notes = "; ".join(s for s in (note, _notes([pb])) if s)
        rows.append([n, k, code_bounds.d_star(n, k), code_bounds.dc_upper(n, k), code_bounds.delta_gap(n, k),
                     code_bounds.d_rate(k / n), _value(pb), notes])
    plot = Plot("n", ["d_star", "dc_upper", "d_rate"], [], "Hamming distortion bounds", "n", "distortion")
    return Table(cols, rows, _meta(cfg, delta_gap_max=max((r[4] for r in rows), default=None)), plot)


COMMANDS: dict[str, Callable[[RunConfig], Table]] = {
    "nsm-table": cmd_nsm_table,
    "awgn-pe": cmd_awgn_pe,
    "bsc-pe": cmd_bsc_pe,
    "simulate-lattice": cmd_simulate_lattice,
    "code-oracle": cmd_code_oracle,
    "distortion": cmd_distortion,
}

DEFAULT_N = {
    "nsm-table": "1:48",
    "awgn-pe": "4:256:4",
    "bsc-pe": "2:400:2",
    "distortion": "32:1024:32",
}


def parse_range(text: str) -> list[int]:
    """``a:b[:step]`` inclusive, or a comma-separated list."""
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            a, b = parts[0], parts[1]
            s = parts[2] if len(parts) == 3 else 1
            if s <= 0 or b < a:
                raise ValueError
            return list(range(a, b + 1, s))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidityError(f"bad integer range {text!r}; use a:b[:step] or a,b,c") from None


def parse_floats(values: Sequence[str]) -> list[float]:
    out = []
    for v in values:
        for part in v.split(","):
            part = part.strip()
            if part:
                try:
                    out.append(float(Fraction(part)) if "/" in part else float(part))
                except (ValueError, ZeroDivisionError):
                    raise ValidityError(f"not a number: {part!r}") from None
    return out


def parse_radii(text: str) -> list[float]:
    if text.count(":") == 2 and "," not in text:
        a, b, m = text.split(":")
        try:
            return list(np.linspace(float(a), float(b), int(m)))
        except ValueError:
            raise ValidityError(f"bad radii grid {text!r}; use start:stop:count") from None
    return parse_floats([text])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vorcdf", description=__doc__)
    ap.add_argument("--version", action="version", version=f"vorcdf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, formats=("csv", "json", "svg")) -> None:
        sp.add_argument("--format", choices=formats, default="csv")
        sp.add_argument("--out", metavar="PATH", help="write here instead of stdout")
        sp.add_argument("--workers", type=int, default=1)

    def grid(sp: argparse.ArgumentParser) -> None:
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--n", help="dimension(s), comma separated")
        g.add_argument("--n-range", help="inclusive range a:b[:step]")

    sp = sub.add_parser("nsm-table", help="NSM bounds and reference curves per dimension")
    grid(sp)
    common(sp)

    sp = sub.add_parser("awgn-pe", help="lattice error probability bounds under Gaussian noise")
    grid(sp)
    sp.add_argument("--sigma2", action="append", help="noise variance(s); default 0.95/(2 pi e), 0.98/(2 pi e)")
    common(sp)

    sp = sub.add_parser("bsc-pe", help="binary linear code error probability bounds on the BSC")
    grid(sp)
    sp.add_argument("--p", action="append", help="crossover probabilities; default 0.07, 0.1")
    kg = sp.add_mutually_exclusive_group()
    kg.add_argument("--k", type=int, help="fixed code dimension")
    kg.add_argument("--k-ratio", type=float, default=None, help="k = ratio * n (default 0.5)")
    common(sp)

    sp = sub.add_parser("simulate-lattice", help="Monte Carlo Voronoi spherical CDF of concrete lattices")
    sp.add_argument("--lattice", action="append", help="e.g. Z4, D4, E8, E8x5, D4+E8 (repeatable)")
    sp.add_argument("--radii", help="start:stop:count or comma list (default 0..covering radius)")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)

    sp = sub.add_parser("code-oracle", help="exact ensemble checks over all codes of Gr(n, k)")
    sp.add_argument("--n", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--p", action="append", help="crossover probabilities, exact decimals or a/b; default 1/20, 1/10, 1/5")
    common(sp, ("csv", "json"))

    sp = sub.add_parser("distortion", help="Hamming distortion bounds and the constant-gap quantity")
    grid(sp)
    sp.add_argument("--alpha", type=float, default=0.5, help="rate k/n (default 0.5)")
    common(sp)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    cfg = RunConfig(command=cmd, format=ns.format, out=ns.out, workers=ns.workers)
    if cfg.workers < 1:
        raise ValidityError("--workers must be >= 1")
    n_text = getattr(ns, "n", None) or getattr(ns, "n_range", None) or DEFAULT_N.get(cmd)
    cfg.n = parse_range(n_text) if n_text else []
    if any(n < 1 for n in cfg.n):
        raise ValidityError("dimensions must be >= 1")
    if cmd == "awgn-pe":
        cfg.sigma2 = parse_floats(ns.sigma2) if ns.sigma2 else list(lattice_bounds.SIGMA2_FIGURE)
        if any(not s > 0 for s in cfg.sigma2):
            raise ValidityError("--sigma2 values must be positive")
    if cmd in ("bsc-pe", "code-oracle"):
        default_p = list(code_bounds.P_FIGURE) if cmd == "bsc-pe" else [0.05, 0.1, 0.2]
        cfg.p = parse_floats(ns.p) if ns.p else default_p
        if any(not 0 < p < 0.5 for p in cfg.p):
            raise ValidityError("--p values must lie in (0, 1/2)")
        cfg.k = ns.k
    if cmd == "bsc-pe" and cfg.k is None:
        cfg.k_ratio = 0.5 if ns.k_ratio is None else ns.k_ratio
    if cmd == "simulate-lattice":
        cfg.lattices = ns.lattice or ["Z4"]
        for name in cfg.lattices:
            lattice_sim.LatticeSpec.parse(name)
        cfg.radii = parse_radii(ns.radii) if ns.radii else []
        if ns.samples < 1:
            raise ValidityError("--samples must be >= 1")
        cfg.samples, cfg.seed = ns.samples, ns.seed
    if cmd == "distortion":
        if not 0 < ns.alpha < 1:
            raise ValidityError("--alpha must lie in (0, 1)")
        cfg.alpha = ns.alpha
    return cfg


def run(cfg: RunConfig) -> tuple[str, bool]:
    table = COMMANDS[cfg.command](cfg)
    writer = {"csv": to_csv, "json": to_json, "svg": to_svg}[cfg.format]
    return writer(table), table.failed


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text, failed = run(cfg)
    except CapacityError as exc:
        print(f"vorcdf: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValidityError, DomainError) as exc:
        print(f"vorcdf: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"vorcdf: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except VorcdfError as exc:
        print(f"vorcdf: {exc}", file=sys.stderr)
        return exc.exit_code
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_FAIL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
