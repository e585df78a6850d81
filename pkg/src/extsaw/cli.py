"""Command-line front end: ``extsaw {counts,classify,tree-dim,symmetry}``.

Exit codes: 0 success, 2 usage or bad input, 3 resource limits,
4 a check that must hold exactly did not.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import __version__, counting, extend, sawtree, symmetry, treedim
from .graphs import FAMILIES, GrandparentGraph, get_family
from .walks import NotSelfAvoidingError, WalkParseError, parse_directions

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_IDENTITY = 0, 2, 3, 4
JSON_VERSION = 1


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    graph: str
    n_max: int
    depth: int
    modes: tuple
    threads: int
    seed: int
    format: str
    out: str | None
    delta: float
    tol: float
    trials: int

    def validate(self) -> None:
        if self.n_max < 0:
            raise CliError("--n-max must be >= 0")
        if self.depth < 0:
            raise CliError("--depth must be >= 0")
        if self.threads < 1:
            raise CliError("--threads must be >= 1")
        if not 0 < self.delta < 0.5:
            raise CliError("--delta must lie in (0, 1/2)")
        if self.tol <= 0:
            raise CliError("--tol must be positive")
        if self.trials < 0:
            raise CliError("--trials must be >= 0")


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(payload: dict) -> str:
    return json.dumps({"version": JSON_VERSION, **payload}, indent=1, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")


# -- counts ----------------------------------------------------------------

def cmd_counts(cfg: RunConfig) -> int:
    g = get_family(cfg.graph)
    wanted = [m for m in cfg.modes if m != "plain"]
    if wanted and not counting.supports_extendability(g):
        raise CliError(f"modes {','.join(wanted)} are not supported on {cfg.graph}")
    t0 = time.perf_counter()
    table = counting.count_table(g, cfg.n_max, cfg.modes, cfg.threads)
    if cfg.format == "csv":
        _emit(cfg, table.to_csv())
    else:
        run = {"wall_seconds": round(time.perf_counter() - t0, 3), "threads": cfg.threads,
               "package_version": __version__}
        meta = {"representatives": [list(s) for s in g.representatives], "run": run}
        _emit(cfg, counting.table_json(table, meta))
    return EXIT_OK


# -- classify ----------------------------------------------------------------

def cmd_classify(cfg: RunConfig, text: str) -> int:
    g = get_family(cfg.graph)
    try:
        w = parse_directions(g, text)
    except (WalkParseError, NotSelfAvoidingError) as e:
        raise CliError(str(e)) from None
    try:
        verdicts = extend.classify(g, w)
    except extend.UnsupportedFamilyError as e:
        raise CliError(str(e)) from None
    if cfg.format == "json":
        payload = {"graph": cfg.graph, "walk": text, "vertices": [list(v) for v in w.vertices],
                   "verdicts": {k: {"extendable": v.extendable,
                                    "witness": [[list(x) for x in p] for p in v.witness],
                                    "blocking": None if v.blocking is None else sorted(list(x) for x in v.blocking)}
                                for k, v in verdicts.items()}}
        _emit(cfg, _dumps(payload))
        return EXIT_OK
    lines = [" ".join(f"{k}:{'yes' if v.extendable else 'no'}" for k, v in verdicts.items())]
    for k, v in verdicts.items():
        if v.extendable:
            for p in v.witness:
                lines.append(f"# {k} witness: " + " ".join(str(tuple(x)) for x in p))
        elif v.blocking is not None:
            lines.append(f"# {k} blocked: escape search reached {len(v.blocking)} vertices")
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


# -- tree-dim ----------------------------------------------------------------

def cmd_tree_dim(cfg: RunConfig) -> int:
    g = get_family(cfg.graph)
    mode = cfg.modes[-1] if cfg.modes else "F"
    if len(cfg.modes) > 1:
        raise CliError("tree-dim takes a single mode")
    try:
        if g.is_transitive or cfg.depth == 0:
            t = sawtree.build_saw_tree(g, g.origin, cfg.depth, mode)
        else:
            t = sawtree.joined_saw_tree(g, cfg.depth, mode)
    except extend.UnsupportedFamilyError as e:
        raise CliError(str(e)) from None
    payload = {"graph": cfg.graph, "tree": t.name, "D": cfg.depth, "mode": mode, "nodes": len(t),
               "level_sizes": [int(x) for x in t.level_sizes], "seed": cfg.seed, "trials": cfg.trials}
    if cfg.depth <= t.level_offset:
        payload.update({"degenerate": True, "threshold_lo": None, "threshold_hi": None,
                        "growth_window": None, "pc_estimate": None, "ci": None})
    else:
        payload["degenerate"] = False
        bound = treedim.branching_estimate(t, cfg.tol)
        payload.update(bound.as_dict())
        payload["growth_window"] = treedim.growth_estimates(t, 1 + t.level_offset).as_dict()
        cut = treedim.check_br_le_gr(t, bound)
        payload["level_cut_holds"] = cut.holds
        if bound.lam_lo is not None:
            payload["gap"] = treedim.furstenberg_gap(t, bound)
        if cfg.trials:
            est = treedim.percolation_pc_estimate(t, cfg.trials, cfg.seed)
            payload["pc_estimate"] = est.pc
            payload["ci"] = list(est.ci)
            payload["survival"] = {"grid": est.grid, "survival": est.survival}
        else:
            payload["pc_estimate"] = None
            payload["ci"] = None
    if cfg.format == "json":
        _emit(cfg, _dumps(payload))
    else:
        buf = io.StringIO()
        buf.write(f"# seed={cfg.seed} trials={cfg.trials} graph={cfg.graph} mode={mode} D={cfg.depth}\n")
        for k in ("threshold_lo", "threshold_hi", "pc_estimate", "ci"):
            buf.write(f"# {k}={payload.get(k)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "level_size", "rootN"])
        for n, s in enumerate(payload["level_sizes"]):
            k = n - t.level_offset
            w.writerow([n, s, format(s ** (1.0 / k), ".12g") if k > 0 and s else ""])
        _emit(cfg, buf.getvalue())
    return EXIT_OK


# -- symmetry ----------------------------------------------------------------

def cmd_symmetry(cfg: RunConfig) -> int:
    g = get_family(cfg.graph)
    report: dict = {"graph": cfg.graph, "n_max": cfg.n_max, "delta": cfg.delta}
    ok = True
    if g.is_unimodular:
        mt = symmetry.mass_transport_check(g, cfg.n_max)
        report["mass_transport"] = mt.as_dict()
        rev = [symmetry.reverse_count_check(g, n).as_dict() for n in range(cfg.n_max + 1)]
        report["reversal"] = rev
        ok = mt.equal and all(r["holds"] for r in rev)
    else:
        reason = f"{cfg.graph} is not unimodular"
        report["mass_transport"] = {"skipped": reason}
        report["reversal"] = {"skipped": reason}
    if isinstance(g, GrandparentGraph):
        W = cfg.depth if cfg.depth > 0 else 40
        try:
            qg = symmetry.build_quasi_geodesic(g, W)
        except symmetry.ConstructionError as e:
            report["quasi_geodesic"] = {"error": str(e), "violating_pair": e.pair}
            _emit(cfg, _dumps(report))
            return EXIT_IDENTITY
        report["quasi_geodesic"] = {"W": W, "alpha": str(qg.alpha), "log": qg.log,
                                    "v0": list(qg.v(0)), "edge_failures": qg.check_edges(g)}
        cases: dict = {}
        failures = []
        for n in range(1, min(cfg.n_max, 6) + 1):
            for w in counting.iter_saws(g, g.origin, n):
                d = symmetry.decompose_walk(g, w, qg, cfg.delta)
                cases[d.case] = cases.get(d.case, 0) + 1
                if not d.certified:
                    failures.append([list(v) for v in w.vertices])
        report["decomposition"] = {"walks_by_case": cases, "failures": failures[:20]}
        bounds = [symmetry.bound_inequality(g, n, qg.alpha, cfg.delta) for n in range(1, cfg.n_max + 1)]
        report["bound"] = bounds
        ok = ok and not failures and all(b["holds"] for b in bounds)
    report["all_hold"] = ok
    _emit(cfg, _dumps(report))
    return EXIT_OK if ok else EXIT_IDENTITY


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="extsaw", description="Counts and checks for extendable self-avoiding walks.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default):
        sp.add_argument("--graph", required=True, choices=sorted(FAMILIES))
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        sp.add_argument("--out", default=None)
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("counts", help="per-n SAW counts in each mode")
    common(sp, "csv")
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--modes", default="plain,F,B,FB")

    sp = sub.add_parser("classify", help="F/B/FB verdicts for one walk")
    common(sp, "csv")
    sp.add_argument("walk", help="direction string, e.g. ENNWWSE")

    sp = sub.add_parser("tree-dim", help="growth, branching bracket and percolation on a SAW tree")
    common(sp, "json")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--modes", default="F")
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--trials", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("symmetry", help="mass transport, reversal and decomposition checks")
    common(sp, "json")
    sp.add_argument("--n-max", type=int, default=6)
    sp.add_argument("--depth", type=int, default=0, help="quasi-geodesic half-window (0 means 40)")
    sp.add_argument("--delta", type=float, default=0.3)
    return p


def _config(ns) -> RunConfig:
    modes = getattr(ns, "modes", "plain")
    try:
        modes = counting.parse_modes(modes)
    except ValueError as e:
        raise CliError(str(e)) from None
    return RunConfig(graph=ns.graph, n_max=getattr(ns, "n_max", 0), depth=getattr(ns, "depth", 0),
                     modes=modes, threads=ns.threads, seed=getattr(ns, "seed", 0), format=ns.format,
                     out=ns.out, delta=getattr(ns, "delta", 0.3), tol=getattr(ns, "tol", 1e-4),
                     trials=getattr(ns, "trials", 0))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        cfg = _config(ns)
        cfg.validate()
        if ns.command == "counts":
            return cmd_counts(cfg)
        if ns.command == "classify":
            return cmd_classify(cfg, ns.walk)
        if ns.command == "tree-dim":
            return cmd_tree_dim(cfg)
        return cmd_symmetry(cfg)
    except CliError as e:
        print(f"extsaw: {e}", file=sys.stderr)
        return e.code
    except (sawtree.TreeBudgetError, counting.CountOverflowError, MemoryError) as e:
        print(f"extsaw: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
