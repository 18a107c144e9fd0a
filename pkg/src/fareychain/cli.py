"""Command-line front end.

    fareychain --command partition --k 1:12:1 --x 0,1 --beta 0.5 --method brute,grid
    fareychain --command spectrum --beta 0:1:0.1
    fareychain --command expect --beta 0.5 --geometry "inf ^ r=0" --k 12:18:1
    fareychain --command verify --format json --out report.json
    fareychain --command table --beta 0.3,0.6,0.9 --k 0:4:1

Grids accept a single value, a comma list (fractions like 1/3 allowed), or an
inclusive ``start:stop:step``.
A config file of flat ``key=value`` lines may supply any flag; flags given
on the command line win. Exit codes: 0 ok, 1 verify failures, 2 cross-check
or tolerance failure, 3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

from fareychain import __version__
from fareychain.chain import ChainParams, Spin
from fareychain.errors import ResourceCapError, UnsupportedPatternError
from fareychain.expectations import closed_form_infinite_left, enumerate_infinite_left, expect_cluster
from fareychain.expectations import ClusterKind, expect_right_edge_infinite
from fareychain.partition import HARD_CAP, ConstraintPattern, Kind, PartitionSpec, z_brute, z_grid, z_recursive
from fareychain.spectral import DEFAULT_NODES, correlation_lengths, eigen_identities, free_energy, leading_eigen
from fareychain.verify import VerifySettings, run_checks

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_TOLERANCE, EXIT_CAP = 0, 1, 2, 3

COLUMNS = {
    "partition": ["k", "x", "beta", "method", "value", "seconds", "flag"],
    "spectrum": ["beta", "lambda", "free_energy", "xi_r", "lewis_residual", "a1_check", "iterations", "grade"],
    "expect": ["geometry", "x", "beta", "closed_form", "enumeration_extrapolated", "abs_diff"],
    "verify": ["name", "tag", "status", "error", "tolerance", "seconds", "detail"],
    "table": ["beta", "quantity", "n", "r", "value"],
}
DEFAULT_TOL = {"partition": 1e-10, "spectrum": 1e-8, "expect": 1e-3}
DEFAULT_GEOMETRIES = ("inf ^ r=0", "inf ^ r=1", "inf ^ n=1 ^ r=1", "inf v n=1 ^ r=1", "inf ^ n=1 v r=1", "inf v n=1 v r=1")


class PipelineError(RuntimeError):
    """A stage produced a non-finite number."""


@dataclass
class RunConfig:
    command: str
    k: list[int] = field(default_factory=list)
    x: list[float] = field(default_factory=lambda: [0.0])
    beta: list[float] = field(default_factory=lambda: [0.5])
    method: list[str] = field(default_factory=lambda: ["brute"])
    geometry: list[str] = field(default_factory=lambda: list(DEFAULT_GEOMETRIES))
    nodes: int = DEFAULT_NODES
    tol: float | None = None
    cap: int = 26
    format: str = "csv"
    out: str | None = None
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        if self.command not in COLUMNS:
            raise ValueError(f"unknown command {self.command!r}")
        for name in ("x", "beta"):
            if not getattr(self, name):
                raise ValueError(f"--{name} grid is empty")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not 0 <= self.cap <= HARD_CAP:
            raise ValueError(f"cap must be in [0, {HARD_CAP}] (log2 of the term count)")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")

    def tolerance(self) -> float:
        return self.tol if self.tol is not None else DEFAULT_TOL.get(self.command, 1e-10)


# ------------------------------------------------------------------ parsing


def parse_grid(text: str, kind=float) -> list:
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range {text!r} must be start:stop:step")
        start, stop, step = (Decimal(p) for p in parts)
        if step <= 0:
            raise ValueError("range step must be positive")
        out = []
        v = start
        while v <= stop:
            out.append(kind(v))
            v += step
        return out
    return [kind(Fraction(p.strip())) if kind is float else kind(Decimal(p)) for p in text.split(",") if p.strip()]


def parse_cap(text: str) -> int:
    """``'20'`` or ``'2^20'`` both mean 2**20 terms."""
    text = str(text).strip().replace("**", "^")
    if text.startswith("2^"):
        return int(text[2:])
    return int(text)


def parse_geometry(text: str) -> ConstraintPattern:
    """Right-edge geometry of a left-infinite chain.

    ``inf ^ r=2``        single spin with two free sites to its right
    ``inf ^ n=2 v r=1``  two spins, gap 2; the second opens a right-edge
                         block of r sites (the rest of the block is up)
    ``inf ^^^``          a fixed block at the right edge
    The ``inf`` prefix is optional.
    """
    tokens = text.replace("inf", " ").split()
    spins: list[str] = []
    n = r = None
    for tok in tokens:
        if tok.startswith("n="):
            n = int(tok[2:])
        elif tok.startswith("r="):
            r = int(tok[2:])
        else:
            spins.append(tok)
    table = {"^": Spin.UP, "u": Spin.UP, "v": Spin.DOWN, "d": Spin.DOWN}
    try:
        fixed = [[table[ch] for ch in tok] for tok in spins]
    except KeyError:
        raise ValueError(f"cannot parse geometry {text!r}") from None
    if len(fixed) == 1 and len(fixed[0]) == 1 and n is None:
        return ConstraintPattern.single(0, fixed[0][0], r or 0)
    if len(fixed) == 1 and n is None and r is None:
        return ConstraintPattern(0, tuple(fixed[0]), 0)
    if len(fixed) == 2 and len(fixed[0]) == 1 and len(fixed[1]) == 1:
        block = 1 if r is None else r
        if block < 1:
            raise ValueError("two-spin geometries need r >= 1")
        core = (fixed[0][0],) + (None,) * (n or 0) + (fixed[1][0],) + (Spin.UP,) * (block - 1)
        return ConstraintPattern(0, core, 0)
    raise ValueError(f"cannot parse geometry {text!r}")


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"config line without '=': {raw.rstrip()}")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fareychain", description="Farey-fraction spin chain toolkit")
    p.add_argument("--config", help="flat key=value file; command-line flags override it")
    p.add_argument("--command", choices=sorted(COLUMNS))
    p.add_argument("--k", help="chain lengths (partition) / left lengths to extrapolate from (expect) / r values (table)")
    p.add_argument("--x")
    p.add_argument("--beta")
    p.add_argument("--method", help="comma list of brute, recursive, grid")
    p.add_argument("--geometry", action="append", help="expect geometry, repeatable")
    p.add_argument("--nodes", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--cap", help="enumeration cap as log2 of the term count, e.g. 20 or 2^20")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.add_argument("--no-timing", dest="timing", action="store_false", default=None,
                   help="leave the seconds column empty so output is byte-for-byte reproducible")
    return p


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    merged = _read_config_file(args.config) if args.config else {}
    if "no_timing" in merged:
        merged["timing"] = str(merged.pop("no_timing")).lower() not in ("1", "true", "yes")
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            merged[key] = value
    if "command" not in merged:
        raise SystemExit("fareychain: --command is required")
    cfg = {"command": merged["command"]}
    if "k" in merged:
        cfg["k"] = parse_grid(merged["k"], int)
    for key in ("x", "beta"):
        if key in merged:
            cfg[key] = parse_grid(merged[key], float)
    if "method" in merged:
        cfg["method"] = [m.strip() for m in str(merged["method"]).split(",") if m.strip()]
    if "geometry" in merged:
        geo = merged["geometry"]
        cfg["geometry"] = geo if isinstance(geo, list) else [g.strip() for g in str(geo).split(";")]
    for key, conv in (("nodes", int), ("tol", float), ("format", str), ("out", str), ("workers", int)):
        if key in merged:
            cfg[key] = conv(merged[key])
    if "cap" in merged:
        cfg["cap"] = parse_cap(merged["cap"])
    if "timing" in merged:
        t = merged["timing"]
        cfg["timing"] = t if isinstance(t, bool) else str(t).lower() in ("1", "true", "yes")
    return RunConfig(**cfg)


# ---------------------------------------------------------------- commands


def _finite(value, op: str, tag: str):
    if value is not None and not math.isfinite(value):
        raise PipelineError(f"{op} produced a non-finite value ({tag})")
    return value


def cmd_partition(cfg: RunConfig) -> tuple[list[dict], int]:
    ks = cfg.k or list(range(0, 11))
    tol = cfg.tolerance()
    rows, status = [], EXIT_OK
    for k in ks:
        for x in cfg.x:
            for beta in cfg.beta:
                results = {}
                for method in cfg.method:
                    t0 = time.perf_counter()
                    spec = PartitionSpec(Kind.KNAUF, k, ChainParams(x, beta))
                    if method == "brute":
                        value = z_brute(spec, cap=cfg.cap, workers=cfg.workers)
                    elif method == "recursive":
                        value = z_recursive(spec, cap=min(cfg.cap, 24))
                    elif method == "grid":
                        value = z_grid(k + 1, beta, cfg.nodes)(x)
                    else:
                        raise ValueError(f"unknown method {method!r}")
                    seconds = time.perf_counter() - t0
                    results[method] = _finite(value, f"partition/{method}", "Z_k(x, beta)")
                    rows.append(dict(k=k, x=x, beta=beta, method=method, value=value,
                                     seconds=seconds if cfg.timing else None, flag=""))
                if len(results) > 1:
                    ref_name = next(iter(results))
                    ref = results[ref_name]
                    for row in rows[-len(results):]:
                        if abs(row["value"] - ref) > tol * abs(ref):
                            row["flag"] = f"mismatch-vs-{ref_name}"
                            status = EXIT_TOLERANCE
    return rows, status


def cmd_spectrum(cfg: RunConfig) -> tuple[list[dict], int]:
    tol = cfg.tolerance()
    rows, status = [], EXIT_OK
    for beta in cfg.beta:
        res = leading_eigen(beta, cfg.nodes)
        a1, _ = eigen_identities(res)
        fe = free_energy(res) if beta > 0 else None
        _, xi_r = correlation_lengths(res, strict=False)
        row = dict(
            beta=beta,
            lambda_=_finite(res.lam, "spectrum/leading_eigen", "lambda(beta)"),
            free_energy=_finite(fe, "spectrum/free_energy", "-ln(lambda)/beta"),
            xi_r=xi_r if math.isfinite(xi_r) else None,
            lewis_residual=_finite(res.lewis_residual, "spectrum/lewis_residual", "three-term equation"),
            a1_check=_finite(a1, "spectrum/eigen_identities", "a(1) = (lambda-1) a(0)"),
            iterations=res.iterations,
            grade=res.grade,
        )
        if res.grade == "converged" and max(res.lewis_residual, a1) > tol:
            status = EXIT_TOLERANCE
            row["grade"] = "residual-too-large"
        rows.append(row)
    return rows, status


def cmd_expect(cfg: RunConfig) -> tuple[list[dict], int]:
    lefts = cfg.k or list(range(10, 17))
    tol = cfg.tolerance()
    rows, status = [], EXIT_OK
    for geo in cfg.geometry:
        pattern = parse_geometry(geo)
        for x in cfg.x:
            for beta in cfg.beta:
                closed = None
                if beta < 1:
                    res = leading_eigen(beta, cfg.nodes)
                    try:
                        closed = closed_form_infinite_left(pattern, x, res)
                    except UnsupportedPatternError:
                        closed = None
                est, _, _ = enumerate_infinite_left(pattern, x, beta, lefts, cap=cfg.cap)
                _finite(est, "expect/extrapolate_infinite_left", "finite-l enumeration")
                diff = abs(closed - est) if closed is not None else None
                if diff is not None and diff > tol:
                    status = EXIT_TOLERANCE
                rows.append(dict(geometry=geo, x=x, beta=beta, closed_form=closed,
                                 enumeration_extrapolated=est, abs_diff=diff))
    return rows, status


def cmd_verify(cfg: RunConfig) -> tuple[list[dict], int, dict]:
    settings = VerifySettings(
        kmax=max(cfg.k) if cfg.k else 12,
        nodes=cfg.nodes,
        cap=cfg.cap,
        tol=cfg.tol,
    )
    report = run_checks(settings)
    status = EXIT_VERIFY if report["failures"] else EXIT_OK
    return report["checks"], status, {k: v for k, v in report.items() if k != "checks"}


def cmd_table(cfg: RunConfig) -> tuple[list[dict], int]:
    rs = cfg.k or [0, 1, 2, 3]
    rows = []
    for beta in cfg.beta:
        if beta >= 1:
            rows.append(dict(beta=beta, quantity="lambda", n=None, r=None, value=1.0))
            continue
        res = leading_eigen(beta, cfg.nodes)
        rows.append(dict(beta=beta, quantity="lambda", n=None, r=None, value=res.lam))
        if beta > 0:
            rows.append(dict(beta=beta, quantity="free_energy", n=None, r=None, value=free_energy(res)))
        rows.append(dict(beta=beta, quantity="xi_r", n=None, r=None, value=correlation_lengths(res)[1]))
        for r in rs:
            rows.append(dict(beta=beta, quantity="right_edge_up", n=None, r=r,
                             value=expect_right_edge_infinite(r, beta, res)))
        for kind in ClusterKind:
            for r in rs:
                if r < 1:
                    continue
                n = 0 if kind in (ClusterKind.UP_RUN, ClusterKind.DOWN_UP_RUN) else 1
                rows.append(dict(beta=beta, quantity=f"cluster_{kind.value}", n=n, r=r,
                                 value=expect_cluster(kind, n, r, beta, res)))
    for row in rows:
        _finite(row["value"], f"table/{row['quantity']}", row["quantity"])
    return rows, EXIT_OK


# ------------------------------------------------------------------ output


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(cfg: RunConfig, rows: list[dict], extra: dict | None = None) -> str:
    columns = COLUMNS[cfg.command]
    keyed = [{c: row.get(c, row.get(c + "_")) for c in columns} for row in rows]
    if cfg.format == "json":
        meta = {
            "tool": "fareychain",
            "version": __version__,
            "schema": SCHEMA_VERSION,
            "command": cfg.command,
            "precision_bits": 53,
            "nodes": cfg.nodes,
            "columns": columns,
        }
        if extra:
            meta.update(extra)
        return json.dumps({"metadata": meta, "rows": keyed}, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in keyed:
        w.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fareychain-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: RunConfig) -> int:
    extra = None
    try:
        if cfg.command == "verify":
            rows, status, extra = cmd_verify(cfg)
        else:
            handler = {"partition": cmd_partition, "spectrum": cmd_spectrum,
                       "expect": cmd_expect, "table": cmd_table}[cfg.command]
            rows, status = handler(cfg)
    except ResourceCapError as exc:
        print(f"fareychain: {exc}", file=sys.stderr)
        return EXIT_CAP
    except PipelineError as exc:
        print(f"fareychain: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    text = render(cfg, rows, extra)
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    if cfg.command == "verify" and status:
        print(f"fareychain: failing checks: {', '.join(extra['failures'])}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except ValueError as exc:
        print(f"fareychain: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
