"""Command line front end: deg, grid, covers, check, hurwitz.

Exit codes: 0 ok, 1 internal fault or failed check, 2 invalid input,
3 request outside the supported range.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from . import __version__
from .core import DomainError, InternalFault, Params, Profile, format_profiles, parse_profiles, sort_profiles, validate
from .covers import (build_covers, dilation_matrix, multiplicity_breakdown, to_dot,
                     validate_cover)
from .formulas import tev_ell, tev_general
from .grid import build_grid, build_grid_general, class_count, column_band, l2_scan
from .hurwitz import LocalHurwitzQuery, OracleRangeError, catalog_value, local_hurwitz, local_hurwitz_oracle
from .paths import enumerate_words

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RANGE = 0, 1, 2, 3

CSV_COLUMNS = ["word", "j", "delta", "joined_ends", "merge_size"]


class InputError(DomainError):
    """Bad command line input (reported with exit code 2)."""


@dataclass
class RunConfig:
    command: str
    g: Optional[int] = None
    ell: int = 0
    mu: Optional[str] = None
    fmt: str = "text"
    out: Optional[str] = None
    # hurwitz
    d: Optional[int] = None
    profiles: Optional[str] = None
    labels: Optional[str] = None
    unmarked: bool = False
    # check
    lemma: Optional[str] = None
    d_max: int = 30
    g_max: int = 12
    general_g_max: int = 6
    cover_g_max: int = 4
    oracle_d_max: int = 6
    warnings: list[str] = field(default_factory=list)


# ---------------------------------------------------------------- helpers

def _params(cfg: RunConfig) -> Params:
    if cfg.g is None:
        raise InputError("--g is required")
    if cfg.mu is None:
        params = Params.all_simple(cfg.g, cfg.ell)
    else:
        try:
            profiles = parse_profiles(cfg.mu)
        except DomainError as exc:
            raise InputError(f"cannot parse --mu: {exc}") from exc
        ordered, changed = sort_profiles(profiles)
        if changed:
            cfg.warnings.append(
                f"warning: profiles reordered by descending magnitude to {format_profiles(ordered)}")
        params = Params(cfg.g, cfg.ell, ordered)
    report = validate(params)
    if not report.ok:
        raise InputError(str(report))
    return params


def _degree(params: Params):
    if params.is_all_simple and params.profiles is None:
        return tev_ell(params.g, params.ell)
    return tev_general(params)


def _envelope(params: Params, result: dict, provenance: Optional[str]) -> str:
    doc = {
        "instance": {"g": params.g, "ell": params.ell, "mu": params.mu_text()},
        "result": result,
        "meta": {"version": __version__, "provenance": provenance},
    }
    return json.dumps(doc, indent=2) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def run_deg(cfg: RunConfig) -> int:
    params = _params(cfg)
    value = _degree(params)
    if cfg.fmt == "json":
        _emit(cfg, _envelope(params, {"value": value.value}, value.provenance.value))
    elif cfg.fmt == "text":
        _emit(cfg, f"{value.value}\nprovenance: {value.provenance.value}\n")
    else:
        raise InputError(f"deg does not support --format {cfg.fmt}")
    return EXIT_OK


def _grid_cells(params: Params):
    if params.g < 1:
        raise InputError("grids need g >= 1")
    if params.profiles is None:
        return build_grid(params.g, params.ell)
    return build_grid_general(params)


def run_grid(cfg: RunConfig) -> int:
    params = _params(cfg)
    cells = _grid_cells(params)
    value = _degree(params)
    total = class_count(cells)
    if total != value.value:
        raise InternalFault(f"grid has {total} classes but the degree is {value.value}")
    records = [c.record() for c in cells]
    if cfg.fmt == "json":
        _emit(cfg, _envelope(params, {"cells": records, "total": total}, value.provenance.value))
    elif cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
        _emit(cfg, buf.getvalue())
    elif cfg.fmt == "text":
        lines = [f"{'word':>8} {'j':>3} {'delta':>5} {'joined':>6} {'merge':>5}"]
        for r in records:
            lines.append(f"{r['word']:>8} {r['j']:>3} {r['delta']:>5} {r['joined_ends']:>6} {r['merge_size']:>5}")
        lines.append(f"total {total}")
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        raise InputError(f"grid does not support --format {cfg.fmt}")
    return EXIT_OK


def run_covers(cfg: RunConfig) -> int:
    if cfg.mu is not None:
        raise InputError("covers are built for all-simple profiles only; "
                         "use deg or grid for general ramification profiles")
    params = _params(cfg)
    if params.g < 1:
        raise InputError("covers need g >= 1")
    covers = build_covers(params.g, params.ell)
    if cfg.fmt == "dot":
        graphs = [to_dot(c) for c in covers]
        if cfg.out:
            out = Path(cfg.out)
            for i, text in enumerate(graphs, start=1):
                out.with_name(f"{out.stem}_{i}{out.suffix or '.dot'}").write_text(text)
        else:
            sys.stdout.write("".join(graphs))
        return EXIT_OK
    entries = []
    for c in covers:
        report = validate_cover(c)
        mult = multiplicity_breakdown(c)
        matrix = dilation_matrix(c)
        entries.append({
            "cell": c.cell.record(),
            "plan": c.plan,
            "valid": report.ok,
            "violations": list(report.violations),
            "multiplicity": str(mult.value),
            "factors": {
                "automorphisms": str(mult.automorphisms),
                "hurwitz": str(mult.hurwitz),
                "determinant": str(mult.determinant),
                "lcm": str(mult.lcm),
            },
            "matrix": {"rows": matrix.rows, "columns": matrix.columns, "entries": matrix.entries},
            "cover": c.record(),
        })
    if cfg.fmt == "json":
        _emit(cfg, _envelope(params, {"covers": entries, "total": len(entries)}, _degree(params).provenance.value))
    elif cfg.fmt == "text":
        lines = []
        for i, e in enumerate(entries, start=1):
            cell = e["cell"]
            f = e["factors"]
            lines.append(
                f"cover {i}: word {cell['word']} j {cell['j']} plan {e['plan']} "
                f"valid {'yes' if e['valid'] else 'no'} multiplicity {e['multiplicity']} "
                f"= {f['automorphisms']} * {f['hurwitz']} * |{f['determinant']}| * {f['lcm']}")
        lines.append(f"total {len(entries)}")
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        raise InputError(f"covers does not support --format {cfg.fmt}")
    bad = [e for e in entries if not e["valid"] or e["multiplicity"] != "1"]
    return EXIT_FAIL if bad else EXIT_OK


def _parse_partitions(text: str, what: str) -> list[tuple[int, ...]]:
    groups = text.replace(" ", "").split(";")
    out = []
    for grp in groups:
        if grp == "":
            out.append(())
            continue
        try:
            out.append(tuple(int(x) for x in grp.split(",")))
        except ValueError as exc:
            raise InputError(f"cannot parse {what} {text!r}") from exc
    return out


def _hurwitz_query(cfg: RunConfig) -> LocalHurwitzQuery:
    if cfg.d is None or cfg.profiles is None:
        raise InputError("hurwitz needs --d and --profiles")
    profiles = _parse_partitions(cfg.profiles, "profiles")
    if len(profiles) != 3:
        raise InputError("--profiles needs three partitions separated by ';'")
    if cfg.labels is not None:
        labels = _parse_partitions(cfg.labels, "labels")
        if len(labels) != 3:
            raise InputError("--labels needs three groups separated by ';'")
    elif cfg.unmarked or 1 not in profiles[2]:
        labels = [(), (), ()]
    else:
        # default: one marked preimage over the third point
        labels = [(), (), (1,)]
    return LocalHurwitzQuery(cfg.d, tuple(profiles), tuple(labels))


def run_hurwitz(cfg: RunConfig) -> int:
    q = _hurwitz_query(cfg)
    value = local_hurwitz(q)
    text = f"{value.numerator}" if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if cfg.fmt == "json":
        doc = {"query": {"d": q.d, "profiles": [list(p) for p in q.profiles],
                         "labelled": [list(p) for p in q.labelled]},
               "result": {"value": text},
               "meta": {"version": __version__,
                        "provenance": "catalog" if catalog_value(q) is not None else "oracle"}}
        _emit(cfg, json.dumps(doc, indent=2) + "\n")
    else:
        _emit(cfg, text + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- check sweeps

@dataclass
class CheckResult:
    name: str
    passed: int = 0
    total: int = 0
    counterexample: Optional[str] = None
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.passed == self.total and self.counterexample is None

    def record(self, good: bool, describe: Callable[[], str]) -> None:
        self.total += 1
        if good:
            self.passed += 1
        elif self.counterexample is None:
            self.counterexample = describe()


def valid_simple_instances(g_max: int, ells=range(-3, 4), g_min: int = 1):
    for g in range(g_min, g_max + 1):
        for ell in ells:
            if validate(Params.all_simple(g, ell)).ok:
                yield g, ell


def descending_compositions(total: int, parts: int, max_part: int):
    """Non-increasing tuples of positive integers with the given sum."""
    def rec(left, k, cap):
        if k == 0:
            if left == 0:
                yield ()
            return
        for first in range(min(left - (k - 1), cap), 0, -1):
            for rest in rec(left - first, k - 1, first):
                yield (first,) + rest
    yield from rec(total, parts, max_part)


def general_instances(g_max: int, ells=range(-3, 4)):
    """Valid (g, ell, magnitudes) with k >= 3 profiles of parts <= d."""
    for g, ell in valid_simple_instances(g_max, ells):
        base = Params.all_simple(g, ell)
        for k in range(3, base.n_simple + 1):
            for mags in descending_compositions(base.n_simple, k, base.d):
                params = Params(g, ell, tuple(Profile((1,) * m) for m in mags))
                if validate(params).ok:
                    yield params


def check_formula_grid(g_max: int = 12, general_g_max: int = 8) -> CheckResult:
    res = CheckResult("formula = grid")
    for g, ell in valid_simple_instances(g_max):
        got = class_count(build_grid(g, ell))
        want = tev_ell(g, ell).value
        res.record(got == want, lambda: f"g={g} ell={ell}: grid {got}, formula {want}")
    for params in general_instances(general_g_max):
        got = class_count(build_grid_general(params))
        want = tev_general(params).value
        res.record(got == want, lambda: f"g={params.g} ell={params.ell} mu={params.mu_text()}: "
                                        f"grid {got}, formula {want}")
    return res


def check_widths(g_max: int = 12) -> CheckResult:
    """Every row with i D's has g+1-2i columns."""
    res = CheckResult("row widths")
    for g, ell in valid_simple_instances(g_max):
        n = g + 3 + 2 * ell
        for word in enumerate_words(g, max(0, -ell)):
            width = len(column_band(word.joined_ends(ell), n))
            want = g + 1 - 2 * word.d_count
            res.record(width == want, lambda: f"g={g} ell={ell} row {word.text()}: {width} columns, want {want}")
    return res


def check_multiplicity(g_max: int = 6, ells=range(-2, 3)) -> CheckResult:
    res = CheckResult("multiplicity one")
    for g, ell in valid_simple_instances(g_max, ells):
        for c in build_covers(g, ell):
            report = validate_cover(c)
            value = multiplicity_breakdown(c).value if report.ok else None
            res.record(value == 1, lambda: f"g={g} ell={ell} cell {c.cell.record()}: "
                                           f"{report if not report.ok else value}")
    return res


def catalog_shapes(d_max: int):
    """Every unlabelled query with d <= d_max that the catalog answers."""
    def partitions(d, cap=None):
        cap = cap or d
        if d == 0:
            yield ()
            return
        for first in range(min(d, cap), 0, -1):
            for rest in partitions(d - first, first):
                yield (first,) + rest
    for d in range(1, d_max + 1):
        parts = list(partitions(d))
        for a in parts:
            for b in parts:
                for c in parts:
                    q = LocalHurwitzQuery(d, (a, b, c))
                    if catalog_value(q) is not None:
                        yield q


def check_oracle(d_max: int = 6) -> CheckResult:
    res = CheckResult("oracle = catalog")
    for q in catalog_shapes(d_max):
        marked = q.profiles[2].count(1)
        queries = [q]
        if marked:
            queries.append(LocalHurwitzQuery(q.d, q.profiles, ((), (), (1,))))
        for query in queries:
            got, want = catalog_value(query), local_hurwitz_oracle(query)
            res.record(got == want, lambda: f"{query}: catalog {got}, oracle {want}")
    return res


def check_l2(d_max: int = 30) -> CheckResult:
    res = CheckResult("cut/join bound L2 <= 3")
    found, examined = l2_scan(d_max)
    res.total = examined
    res.passed = examined - len(found)
    if found:
        d, j1, j2, L1, L2, L3, dec = found[0]
        res.counterexample = (f"{len(found)} feasible tuples with L2 >= 4; first d={d} j1={j1} j2={j2} "
                              f"L1={L1} L2={L2} L3={L3} decomposition={list(dec)}")
    return res


def run_check(cfg: RunConfig) -> int:
    if cfg.lemma is not None:
        if cfg.lemma != "l2":
            raise InputError(f"unknown lemma {cfg.lemma!r}")
        checks = [lambda: check_l2(cfg.d_max)]
    else:
        if cfg.cover_g_max > 6 or cfg.g_max > 12 or cfg.oracle_d_max > 7:
            raise OracleRangeError("check limits: g <= 12 grids, g <= 6 covers, d <= 7 oracle")
        checks = [
            lambda: check_formula_grid(cfg.g_max, cfg.general_g_max),
            lambda: check_widths(cfg.g_max),
            lambda: check_multiplicity(cfg.cover_g_max),
            lambda: check_oracle(cfg.oracle_d_max),
            lambda: check_l2(cfg.d_max),
        ]
    results = []
    for run in checks:
        start = time.perf_counter()
        res = run()
        res.seconds = time.perf_counter() - start
        results.append(res)
    lines = []
    for res in results:
        status = "PASS" if res.ok else "FAIL"
        lines.append(f"{status} {res.name}: {res.passed}/{res.total}")
        if res.counterexample:
            lines.append(f"  counterexample: {res.counterexample}")
    if cfg.lemma == "l2" and results[0].ok:
        lines.append(f"no L2>=4 feasible for d <= {cfg.d_max}")
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tevelev", description="Tropical Tevelev degrees and their covers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def instance(p, fmts):
        p.add_argument("--g", type=int, required=True, help="source genus")
        p.add_argument("--ell", type=int, default=0, help="twist")
        p.add_argument("--mu", help='ramification profiles, e.g. "1,1;1;1;1"')
        p.add_argument("--format", dest="fmt", choices=fmts, default="text")
        p.add_argument("--out", help="write output here instead of stdout")

    instance(sub.add_parser("deg", help="closed-form degree"), ["text", "json"])
    instance(sub.add_parser("grid", help="grid of solution classes"), ["text", "json", "csv"])
    instance(sub.add_parser("covers", help="explicit covers and multiplicities"), ["text", "json", "dot"])

    chk = sub.add_parser("check", help="consistency sweeps")
    chk.add_argument("--lemma", choices=["l2"], help="run only the cut/join bound scan")
    chk.add_argument("--d-max", type=int, default=30)
    chk.add_argument("--g-max", type=int, default=12, help="genus bound for all-simple grids")
    chk.add_argument("--general-g-max", type=int, default=6, help="genus bound for general profiles")
    chk.add_argument("--cover-g-max", type=int, default=4, help="genus bound for explicit covers")
    chk.add_argument("--oracle-d-max", type=int, default=6)
    chk.add_argument("--out")

    hur = sub.add_parser("hurwitz", help="local Hurwitz number")
    hur.add_argument("--d", type=int, required=True)
    hur.add_argument("--profiles", required=True, help='three partitions, e.g. "3;3;1,1,1"')
    hur.add_argument("--labels", help='labelled cycle lengths per profile, e.g. ";;1"')
    hur.add_argument("--unmarked", action="store_true", help="no preimage of the third point is marked")
    hur.add_argument("--format", dest="fmt", choices=["text", "json"], default="text")
    hur.add_argument("--out")
    return parser


COMMANDS = {"deg": run_deg, "grid": run_grid, "covers": run_covers, "check": run_check, "hurwitz": run_hurwitz}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("g", "ell", "mu", "fmt", "out", "d", "profiles", "labels", "unmarked", "lemma",
                 "d_max", "g_max", "general_g_max", "cover_g_max", "oracle_d_max"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    return cfg


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    cfg = config_from_args(args)
    try:
        code = COMMANDS[cfg.command](cfg)
    except OracleRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalFault as exc:
        print(f"internal fault: {exc}", file=sys.stderr)
        return EXIT_FAIL
    finally:
        for w in cfg.warnings:
            print(w, file=sys.stderr)
    return code
