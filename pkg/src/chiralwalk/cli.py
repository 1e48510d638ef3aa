"""Command-line front end.

Exit codes: 0 success, 1 check failed (zero-check residual or verify
predicate), 2 configuration/parse error, 3 domain error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import yaml

from .chiral import (
    ZERO_TRANSFER_TOL,
    ChiralPhaseAssignment,
    apply_phases,
    branch_phase_sums,
    parse_phase_list,
    plan_zero_transfer,
    zero_transfer_residual,
)
from .estimator import (
    DEFAULT_KINDS,
    DEFAULT_T_STAR,
    ReferenceTable,
    build_probe,
    build_reference,
    default_omega_grid,
    estimate_omega,
    probe_probability,
    simulate_hits,
)
from .exceptions import ChiralWalkError, ConfigError, DomainError
from .graph import (
    BranchDecomposition,
    GraphFamilyParams,
    HermitianGraph,
    complete_graph,
    cycle_decomposition,
    cycle_graph,
    merged_star_type1,
    merged_star_type2,
    passive_edge_graph,
    path_graph,
)
from .lindblad import LindbladSet, qsw_evolve
from .unitary import (
    StateVector,
    basis_state,
    build_propagator,
    time_grid,
    trace_probabilities,
    uniform_state,
)

OUTPUT_DIR_ENV = "CHIRALWALK_OUTPUT_DIR"
FIGURES = ("fig7", "fig9", "fig11", "fig12", "fig14")
FIG14_OMEGAS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

DEFAULTS = {
    "phases": "none",
    "init": "sources",
    "t": "0:10:0.01",
    "omega": 0.1,
    "kinds": "scattering,dephasing,dissipation",
    "dissipation_toward": "lower",
    "method": "auto",
    "t_star": DEFAULT_T_STAR,
    "estimator_kinds": ",".join(DEFAULT_KINDS),
    "omega_step": 0.05,
    "confidence": 0.95,
    "seed": 0,
}


# -- input resolution ----------------------------------------------------

def _family_args(spec: str, kind: str) -> list[int]:
    try:
        return [int(x) for x in spec.split(",")]
    except ValueError:
        raise ConfigError(f"graph: cannot parse integers in {kind}:{spec}") from None


def resolve_graph(spec: str) -> tuple[HermitianGraph, BranchDecomposition | None]:
    """Graph from a family string or a JSON/YAML graph file."""
    if spec is None:
        raise ConfigError("graph: no graph source given")
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind in ("type1", "type2") and rest:
        b, n = _family_args(rest, kind)
        make = merged_star_type1 if kind == "type1" else merged_star_type2
        return make(GraphFamilyParams(b, n))
    if kind == "path" and rest:
        (n,) = _family_args(rest, kind)
        d = BranchDecomposition((tuple(range(1, n + 1)),), n) if n >= 2 else None
        return path_graph(n), d
    if kind == "cycle" and rest:
        (n,) = _family_args(rest, kind)
        return cycle_graph(n), (cycle_decomposition(n) if n % 2 == 0 else None)
    if kind == "complete" and rest:
        (n,) = _family_args(rest, kind)
        return complete_graph(n), None
    if kind == "passive" and not rest:
        return passive_edge_graph()
    if kind == "probe" and not rest:
        return path_graph(3), BranchDecomposition(((1, 2), (3, 2)), 2)
    path = Path(spec)
    if not path.is_file():
        raise ConfigError(f"graph: {spec!r} is neither a known family nor a readable file")
    data = _load_structured(path)
    g = HermitianGraph.from_dict(data)
    d = BranchDecomposition.from_dict(data["decomposition"]) if data.get("decomposition") else None
    if d is not None:
        d.validate_for(g)
    return g, d


def resolve_phases(spec: str, d: BranchDecomposition | None) -> ChiralPhaseAssignment:
    spec = (spec or "none").strip()
    if spec.lower() in ("none", ""):
        return ChiralPhaseAssignment.empty()
    if spec.lower() == "plan":
        if d is None:
            raise DomainError("phases: 'plan' needs a graph with a branch decomposition")
        return plan_zero_transfer(d)
    if Path(spec).is_file():
        return ChiralPhaseAssignment.from_dict(_load_structured(Path(spec)))
    return parse_phase_list(spec)


def resolve_init(spec: str, n: int, d: BranchDecomposition | None) -> StateVector:
    spec = (spec or "sources").strip()
    kind, _, rest = spec.partition(":")
    kind = kind.lower()
    try:
        if kind == "basis":
            return basis_state(n, int(rest))
        if kind == "uniform":
            return uniform_state(n, [int(v) for v in rest.split(",")])
    except ValueError:
        raise ConfigError(f"init: cannot parse {spec!r}") from None
    if kind == "sources":
        if d is None:
            raise ConfigError("init: 'sources' needs a graph with a branch decomposition")
        return uniform_state(n, d.initial_state_vertices())
    if kind == "file":
        data = _load_structured(Path(rest))
        amps = data["amplitudes"] if isinstance(data, dict) else data
        vec = np.array([complex(*a) if isinstance(a, (list, tuple)) else complex(a) for a in amps])
        if vec.size != n:
            raise ConfigError(f"init: amplitude file has {vec.size} entries, graph has {n} vertices")
        return StateVector(vec)
    raise ConfigError(f"init: unknown initial-state spec {spec!r}")


def parse_grid(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(x) for x in str(spec).split(":"))
    except ValueError:
        raise ConfigError(f"t: expected start:stop:step, got {spec!r}") from None
    if not (start < stop and step > 0):
        raise ConfigError(f"t: need start < stop and step > 0, got {spec!r}")
    return time_grid(start, stop, step)


def _load_structured(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None


# -- output --------------------------------------------------------------

def _resolve_out(path: str | None) -> Path | None:
    if path in (None, "-"):
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    path = _resolve_out(out)
    if path is None:
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


# -- subcommands ---------------------------------------------------------

def _phased_graph(args):
    g, d = resolve_graph(args.graph)
    a = resolve_phases(args.phases, d)
    return apply_phases(g, a), d, a


def cmd_walk(args) -> int:
    g, d, _ = _phased_graph(args)
    psi0 = resolve_init(args.init, g.n_vertices, d)
    trace = trace_probabilities(build_propagator(g), psi0, parse_grid(args.t))
    _emit(trace.to_csv(), args.out)
    return 0


def cmd_qsw(args) -> int:
    g, d, _ = _phased_graph(args)
    psi0 = resolve_init(args.init, g.n_vertices, d)
    L = LindbladSet.standard(g, args.kinds, float(args.omega), dissipation_toward=args.dissipation_toward)
    res = qsw_evolve(g, L, psi0, parse_grid(args.t), method=args.method, keep_snapshots=bool(args.rho_dump))
    _emit(res.trace.to_csv(), args.out)
    if args.rho_dump:
        write_atomic(_resolve_out(args.rho_dump), res.snapshots_to_json())
    return 0


def cmd_zero_check(args) -> int:
    g, d = resolve_graph(args.graph)
    if d is None:
        raise DomainError("zero-check: graph has no branch decomposition")
    a = resolve_phases(args.phases, d)
    apply_phases(g, a)
    sums = branch_phase_sums(d, a)
    residual = zero_transfer_residual(sums)
    ok = residual < ZERO_TRANSFER_TOL
    print(f"target={d.merge_vertex}")
    print("branch_sums=" + ",".join(format(s, ".17g") for s in sums.sums))
    print(f"residual={residual:.17g}")
    print(f"zero_transfer={'yes' if ok else 'no'}")
    return 0 if ok else 1


def cmd_plan(args) -> int:
    g, d = resolve_graph(args.graph)
    if d is None:
        raise DomainError("plan: graph has no branch decomposition")
    a = plan_zero_transfer(d)
    apply_phases(g, a)
    _emit(a.to_json() + "\n", args.out)
    return 0


def _table_from_args(args) -> ReferenceTable:
    if args.table:
        path = Path(args.table)
        try:
            return ReferenceTable.from_csv(path.read_text())
        except OSError as exc:
            raise ConfigError(f"table: cannot read {path}: {exc}") from None
    return build_reference(default_omega_grid(float(args.omega_step)), float(args.t_star), args.estimator_kinds)


def cmd_reference(args) -> int:
    _emit(_table_from_args(args).to_csv(), args.out)
    return 0


def cmd_estimate(args) -> int:
    table = _table_from_args(args)
    record = {}
    if args.samples:
        lines = Path(args.samples).read_text().split()
        try:
            samples = np.array([int(x) for x in lines])
        except ValueError:
            raise ConfigError("samples: expected one 0/1 per line") from None
        if not np.all((samples == 0) | (samples == 1)):
            raise ConfigError("samples: expected one 0/1 per line")
        hits, trials = int(samples.sum()), int(samples.size)
        record["source"] = str(args.samples)
    elif args.simulate is not None:
        if args.trials is None:
            raise ConfigError("trials: --simulate needs --trials")
        p = probe_probability(float(args.simulate), table.measure_time, table.kinds)
        draws = simulate_hits(p, int(args.trials), int(args.seed))
        hits, trials = int(draws.sum()), int(draws.size)
        record.update(source="simulated", simulate_omega=float(args.simulate), true_p2=p, seed=int(args.seed))
    else:
        if args.hits is None or args.trials is None:
            raise ConfigError("hits: give --hits and --trials, --samples, or --simulate")
        hits, trials = int(args.hits), int(args.trials)
        record["source"] = "counts"
    est = estimate_omega(table, hits, trials, float(args.confidence))
    record.update(hits=hits, trials=trials, t_star=table.measure_time, kinds=list(table.kinds))
    record.update(est.to_dict())
    _emit(json.dumps(record, indent=2) + "\n", args.out)
    return 0


def figure_traces(kinds: str = DEFAULTS["kinds"], omega: float = 0.1) -> dict[str, str]:
    """CSV text for every reproduced figure, keyed by file stem."""
    out = {}
    g, _ = merged_star_type1(GraphFamilyParams(4, 3))
    g = apply_phases(g, ChiralPhaseAssignment({(1, 2): math.pi / 2, (3, 4): math.pi, (5, 6): 3 * math.pi / 2}))
    out["fig7"] = trace_probabilities(build_propagator(g), uniform_state(9, [1, 3, 5, 7]), time_grid(0, 5, 0.01))
    c4, _ = merged_star_type2(GraphFamilyParams(2, 3))
    c4 = apply_phases(c4, ChiralPhaseAssignment({(1, 2): math.pi}))
    grid10 = time_grid(0, 10, 0.01)
    out["fig9"] = trace_probabilities(build_propagator(c4), basis_state(4, 1), grid10)
    pg, _ = passive_edge_graph()
    pg = apply_phases(pg, ChiralPhaseAssignment({(1, 3): math.pi}))
    out["fig11"] = trace_probabilities(build_propagator(pg), uniform_state(6, [1, 2]), grid10)
    out["fig12"] = qsw_evolve(c4, LindbladSet.standard(c4, kinds, omega), basis_state(4, 1), grid10).trace
    csv = {k: v.to_csv() for k, v in out.items()}

    probe, psi0 = build_probe()
    cols = []
    for w in FIG14_OMEGAS:
        L = LindbladSet.standard(probe, DEFAULT_KINDS, w)
        cols.append(qsw_evolve(probe, L, psi0, grid10).trace.vertex(2))
    lines = ["t," + ",".join(f"omega_{w:.2f}" for w in FIG14_OMEGAS)]
    for k, t in enumerate(grid10):
        lines.append(",".join(format(x, ".17g") for x in (t, *(c[k] for c in cols))))
    csv["fig14"] = "\n".join(lines) + "\n"
    return csv


def cmd_figures(args) -> int:
    outdir = Path(args.outdir or os.environ.get(OUTPUT_DIR_ENV) or "figures")
    for stem, text in figure_traces(args.kinds, float(args.omega)).items():
        write_atomic(outdir / f"{stem}.csv", text)
        print(outdir / f"{stem}.csv")
    return 0


# -- independent figure checker -------------------------------------------

def _read_columns(path: Path) -> dict[str, list[float]]:
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    cols: dict[str, list[float]] = {h: [] for h in header}
    for line in lines[1:]:
        for h, x in zip(header, line.split(",")):
            cols[h].append(float(x))
    return cols


def _row_sums(cols, tol):
    vs = [h for h in cols if h.startswith("v")]
    return all(abs(sum(cols[h][k] for h in vs) - 1.0) <= tol for k in range(len(cols["t"])))


def verify_figures(directory: Path) -> list[tuple[str, str, bool]]:
    """Re-check each figure CSV from its raw numbers (no engine code involved)."""
    results = []

    def check(stem, name, fn):
        path = directory / f"{stem}.csv"
        try:
            ok = bool(fn(_read_columns(path)))
        except (OSError, KeyError, ValueError, IndexError):
            ok = False
        results.append((stem, name, ok))

    check("fig7", "max v9 < 1e-18", lambda c: max(c["v9"]) < 1e-18)
    check("fig7", "row sums = 1 within 1e-10", lambda c: _row_sums(c, 1e-10))
    check("fig9", "max v4 < 1e-18", lambda c: max(c["v4"]) < 1e-18)
    check("fig9", "max v2 > 0.1", lambda c: max(c["v2"]) > 0.1)
    check("fig11", "v3..v6 < 1e-18", lambda c: max(max(c[f"v{j}"]) for j in range(3, 7)) < 1e-18)
    check("fig11", "v1 = v2 = 0.5 within 1e-10",
          lambda c: max(abs(x - 0.5) for x in c["v1"] + c["v2"]) <= 1e-10)
    check("fig12", "row sums = 1 within 1e-8", lambda c: _row_sums(c, 1e-8))
    check("fig12", "max v4 > 1e-3", lambda c: max(c["v4"]) > 1e-3)
    check("fig14", "omega=0 column < 1e-10", lambda c: max(c["omega_0.00"]) < 1e-10)
    check("fig14", "probabilities in [0, 1]",
          lambda c: all(-1e-8 <= x <= 1 + 1e-8 for h, col in c.items() if h != "t" for x in col))
    return results


def cmd_verify(args) -> int:
    directory = Path(args.dir or os.environ.get(OUTPUT_DIR_ENV) or "figures")
    results = verify_figures(directory)
    for stem, name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'} {stem}: {name}")
    return 0 if all(ok for *_, ok in results) else 1


# -- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiralwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="YAML/JSON file of option values; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_opts(p, phases=True):
        p.add_argument("--graph", help="type1:b,n | type2:b,n | path:n | cycle:n | complete:n | passive | probe | FILE")
        if phases:
            p.add_argument("--phases", help="plan | none | FILE | inline 'i,j:alpha;...' (alpha may be e.g. pi/2)")

    def walk_opts(p):
        graph_opts(p)
        p.add_argument("--init", help="basis:k | uniform:i,j,... | sources | file:PATH")
        p.add_argument("--t", help="time grid start:stop:step")
        p.add_argument("--out", help="output CSV (default stdout)")

    walk_opts(sub.add_parser("walk", help="closed-system walk, probability CSV"))
    q = sub.add_parser("qsw", help="open-system walk, probability CSV")
    walk_opts(q)
    q.add_argument("--omega", type=float)
    q.add_argument("--kinds", help="comma list of scattering,dephasing,dissipation")
    q.add_argument("--dissipation-toward", choices=("lower", "higher"))
    q.add_argument("--method", choices=("auto", "expm", "rk45"))
    q.add_argument("--rho-dump", help="also write per-time density matrices (JSON)")

    graph_opts(sub.add_parser("zero-check", help="print the branch phasor residual"))
    p = sub.add_parser("plan", help="write a zero-transfer phase file")
    graph_opts(p, phases=False)
    p.add_argument("--out")

    def table_opts(p):
        p.add_argument("--table", help="reference table CSV (built on the fly if omitted)")
        p.add_argument("--t-star", type=float)
        p.add_argument("--estimator-kinds", help="decoherence kinds for the reference curve")
        p.add_argument("--omega-step", type=float)
        p.add_argument("--out")

    table_opts(sub.add_parser("reference", help="tabulate P2(t*; omega) for the probe"))
    e = sub.add_parser("estimate", help="estimate omega from probe measurements")
    table_opts(e)
    e.add_argument("--hits", type=int)
    e.add_argument("--trials", type=int)
    e.add_argument("--samples", help="file with one 0/1 detection per line")
    e.add_argument("--simulate", type=float, metavar="OMEGA", help="draw synthetic samples at this omega")
    e.add_argument("--seed", type=int)
    e.add_argument("--confidence", type=float)

    f = sub.add_parser("figures", help="write fig7/9/11/12/14 CSVs")
    f.add_argument("--outdir")
    f.add_argument("--omega", type=float)
    f.add_argument("--kinds")
    v = sub.add_parser("verify", help="re-check figure CSVs")
    v.add_argument("--dir")
    return parser


COMMANDS = {
    "walk": cmd_walk,
    "qsw": cmd_qsw,
    "zero-check": cmd_zero_check,
    "plan": cmd_plan,
    "reference": cmd_reference,
    "estimate": cmd_estimate,
    "figures": cmd_figures,
    "verify": cmd_verify,
}


def _merge_config(args) -> None:
    if args.config:
        cfg = _load_structured(Path(args.config)) or {}
        if not isinstance(cfg, dict):
            raise ConfigError("config: top level must be a mapping")
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if key in ("command", "config"):
                continue
            if not hasattr(args, key):
                raise ConfigError(f"config: unknown option {key!r} for {args.command}")
            if getattr(args, key) is None:
                setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    if getattr(args, "graph", "") is None and args.command in ("walk", "qsw", "zero-check", "plan"):
        raise ConfigError("graph: exactly one graph source is required")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return COMMANDS[args.command](args)
    except ChiralWalkError as exc:
        print(f"chiralwalk: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"chiralwalk: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
