"""Command-line front end.

Every subcommand prints (or writes to ``--out``) a deterministic JSON or CSV
report whose header repeats the configuration, and exits with 0 when the
run meets its acceptance bounds, 1 when it does not, and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .bubbling import DEFAULT_C0, DEFAULT_GAMMA, EnergyDensity, quantization_report
from .commutators import (
    ALL_OPERATORS,
    estimate_study,
    op_S,
    op_T,
    spread,
    structure_identity_residual,
    summarize,
    euler_lagrange_defect,
)
from .errors import ConfigError, HalfMapError, ParseError
from .halfharmonic import (
    BlaschkeSpec,
    FlowParams,
    SphereMap,
    blaschke_trace,
    constant_map,
    degree,
    el_residual,
    energy,
    flow_descent,
    gradient_check,
    identity_map,
    project_to_sphere,
    tangential_part,
)
from .littlewood_paley import DyadicFamily, decompose, paraproduct
from .mapfile import read_map, write_map
from .norms import (
    gagliardo_half,
    lorentz,
    lebesgue,
    random_band_limited,
    sobolev_seminorm,
)
from .spectral import (
    Field,
    PeriodicGrid,
    corrupted_riesz_sign,
    derivative,
    dirichlet_energy,
    frac_laplacian,
    inverse_transform,
    poisson_extend,
    riesz,
    transform,
)

TWO_PI = 2.0 * np.pi


# --------------------------------------------------------------------------- configuration


@dataclass
class RunConfig:
    """Run parameters; command-line flags override values read from ``--config``."""

    n: int | None = None
    seed: int = 7
    gamma: float = DEFAULT_GAMMA
    c0: float = DEFAULT_C0
    alpha: float = 0.5
    zeros: tuple[complex, ...] = ()
    constant: bool = False
    schedule: tuple[float, ...] | None = None
    size: int = 100
    peaks: tuple[int, ...] = (8, 16, 32, 64, 128)
    radial_nodes: int = 256
    sphere_tol: float = 1e-6
    energy_tol: float = 1e-6
    residual_target: float = 1e-6
    el_tol: float = 1e-8
    extension_tol: float = 1e-4
    quant_tol: float = 0.05
    spread_bound: float = 2.0
    growth_bound: float = 2.0
    perturb: float | None = None
    max_iters: int = 5000
    target_points: int = 1024
    phases: str = "random"

    def validate(self) -> "RunConfig":
        if self.n is not None:
            if self.n < 8 or self.n & (self.n - 1):
                raise ConfigError(f"n must be a power of two >= 8, got {self.n}")
        for name in ("sphere_tol", "energy_tol", "residual_target", "el_tol", "extension_tol", "quant_tol", "gamma", "c0", "alpha"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.sphere_tol > 1e-6:
            raise ConfigError("sphere_tol must not exceed 1e-6")
        if self.radial_nodes < 4:
            raise ConfigError("radial_nodes must be at least 4")
        return self

    def header(self) -> dict:
        d = asdict(self)
        d["zeros"] = [_complex_str(z) for z in self.zeros]
        d["schedule"] = None if self.schedule is None else list(self.schedule)
        d["peaks"] = list(self.peaks)
        return d


def _complex_str(z: complex) -> str:
    z = complex(z)
    return repr(z.real) if z.imag == 0 else repr(z)


def parse_complex_list(text: str, what: str = "zeros") -> tuple[complex, ...]:
    text = text.strip()
    if not text:
        return ()
    out = []
    for i, tok in enumerate(text.split(",")):
        tok = tok.strip().replace(" ", "")
        try:
            out.append(complex(tok))
        except ValueError:
            raise ParseError(f"cannot read {tok!r} as a complex number", f"{what}[{i}]") from None
    return tuple(out)


def parse_schedule(text: str) -> tuple[float, ...]:
    """``"0.5,0.75"`` or ``"dyadic:2..8"`` (meaning ``a_n = 1 - 2^-n``)."""
    text = text.strip()
    if text.startswith("dyadic:"):
        body = text[len("dyadic:"):]
        try:
            lo, hi = (int(x) for x in body.split(".."))
        except ValueError:
            raise ParseError(f"expected 'dyadic:LO..HI', got {text!r}", "schedule") from None
        if hi < lo:
            raise ParseError("empty dyadic range", "schedule")
        return tuple(1.0 - 2.0**-k for k in range(lo, hi + 1))
    vals = []
    for i, tok in enumerate(text.split(",")):
        try:
            vals.append(float(tok))
        except ValueError:
            raise ParseError(f"cannot read {tok.strip()!r} as a number", f"schedule[{i}]") from None
    return tuple(vals)


def _convert(name: str, raw: str):
    if name == "zeros":
        return parse_complex_list(raw)
    if name == "schedule":
        return parse_schedule(raw)
    if name == "peaks":
        try:
            return tuple(int(x) for x in raw.split(",") if x.strip())
        except ValueError:
            raise ParseError(f"bad peak list {raw!r}", "peaks") from None
    if name == "constant":
        low = raw.strip().lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ParseError(f"expected a boolean, got {raw!r}", name)
        return low in ("true", "1", "yes")
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = kinds[name]
    try:
        if name == "perturb":
            return float(raw)
        if "int" in str(kind) and "float" not in str(kind):
            return int(raw)
        if name == "phases":
            return raw.strip()
        return float(raw)
    except ValueError:
        raise ParseError(f"cannot convert {raw!r}", name) from None


def read_config(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", f"{p}:{i}")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ParseError(f"unknown key {key!r}", f"{p}:{i}")
        try:
            out[key] = _convert(key, raw)
        except ParseError as exc:
            raise ParseError(str(exc), f"{p}:{i}") from None
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = read_config(args.config) if getattr(args, "config", None) else {}
    for name in ("n", "seed", "gamma", "size", "radial_nodes", "perturb", "max_iters"):
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if getattr(args, "zeros", None) is not None:
        values["zeros"] = parse_complex_list(args.zeros)
    if getattr(args, "schedule", None) is not None:
        values["schedule"] = parse_schedule(args.schedule)
    if getattr(args, "peaks", None) is not None:
        values["peaks"] = _convert("peaks", args.peaks)
    if getattr(args, "constant", False):
        values["constant"] = True
    if getattr(args, "phases", None) is not None:
        values["phases"] = args.phases
    return RunConfig(**values).validate()


# --------------------------------------------------------------------------- output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return _complex_str(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dump_json(record: dict) -> str:
    return json.dumps(_jsonable(record), indent=2, sort_keys=True) + "\n"


def dump_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------- map sources


def _grid(cfg: RunConfig, default: int) -> PeriodicGrid:
    return PeriodicGrid(cfg.n if cfg.n is not None else default)


def load_map(args: argparse.Namespace, cfg: RunConfig, default_n: int = 2048) -> SphereMap:
    if getattr(args, "map", None):
        f = read_map(args.map)
        return SphereMap(f, sphere_tol=cfg.sphere_tol)
    grid = _grid(cfg, default_n)
    if cfg.constant:
        return constant_map(grid)
    return blaschke_trace(BlaschkeSpec(cfg.zeros), grid)


def _perturbed(u: SphereMap, amplitude: float) -> SphereMap:
    """``u`` moved by a smooth tangential bump of sup-norm ``amplitude`` and renormalized."""
    if amplitude == 0.0 or np.max(np.abs(u.values - u.values[:, :1])) == 0.0:
        return u
    x = u.grid.nodes
    bump = np.exp(-8.0 * (1.0 - np.cos(x - 1.0)))
    direction = np.zeros_like(u.values)
    direction[0], direction[1] = -u.values[1], u.values[0]
    vals = u.values + amplitude * bump * direction
    return SphereMap(Field(u.grid, project_to_sphere(vals)))


# --------------------------------------------------------------------------- commands


def cmd_energy(args, cfg: RunConfig) -> tuple[dict, int]:
    u = load_map(args, cfg)
    e = energy(u)
    rec: dict = {"command": "energy", "config": cfg.header(), "n_points": u.grid.n_points, "energy": e}
    _, res = el_residual(u)
    rec["el_residual_sup"] = res
    if u.m == 2:
        d = degree(u)
        k = abs(d.degree)
        rec.update(degree=d.degree, degree_raw=d.raw, degree_exact=d.exact)
    else:
        k = int(np.rint(e / TWO_PI))
        rec["degree"] = None
    target = TWO_PI * k
    dev = abs(e - target) / target if k else abs(e)
    rec.update(quantum_multiple=k, deviation_from_2pi_k=dev)
    ok = dev <= cfg.energy_tol
    rec["passed"] = ok
    return rec, 0 if ok else 1


def cmd_residual(args, cfg: RunConfig) -> tuple[dict, int]:
    u = load_map(args, cfg)
    _, res = el_residual(u)
    st = structure_identity_residual(u)
    rec = {
        "command": "residual",
        "config": cfg.header(),
        "n_points": u.grid.n_points,
        "el_residual_sup": res,
        "structure_identity_residual": st.residual,
        "tangency_sup": st.tangency,
        "passed": res <= cfg.el_tol,
    }
    return rec, 0 if rec["passed"] else 1


def cmd_extend_check(args, cfg: RunConfig) -> tuple[dict, int]:
    u = load_map(args, cfg, default_n=4096)
    e = energy(u)
    d = dirichlet_energy(poisson_extend(u.field, cfg.radial_nodes))
    rel = abs(d - e) / e if e > 0 else abs(d)
    rec = {
        "command": "extend-check", "config": cfg.header(), "energy": e, "dirichlet_energy": d,
        "relative_difference": rel, "radial_nodes": cfg.radial_nodes, "passed": rel <= cfg.extension_tol,
    }
    return rec, 0 if rec["passed"] else 1


def cmd_lp_decompose(args, cfg: RunConfig) -> tuple[dict, int]:
    grid = _grid(cfg, 1024)
    rng = np.random.default_rng([cfg.seed, 0])
    band = grid.n_points // 4 - 1
    if getattr(args, "map", None) or cfg.zeros or cfg.constant:
        f = load_map(args, cfg, default_n=grid.n_points).field
        grid = f.grid
        g = random_band_limited(grid, grid.n_points // 4 - 1, rng, components=f.m)
    else:
        f = random_band_limited(grid, band, rng)
        g = random_band_limited(grid, band, rng)
    fam = DyadicFamily(grid)
    blocks = decompose(f, fam)
    recon = sum((b.values for b in blocks.values()), np.zeros_like(f.values))
    part_err = float(np.max(np.abs(recon - f.values)))
    prod = f.values * g.values
    pis = [paraproduct(f, g, fam, i).values for i in (1, 2, 3)]
    scale = float(np.max(np.abs(f.values)) * np.max(np.abs(g.values)))
    para_err = float(np.max(np.abs(prod - sum(pis)))) / scale if scale else 0.0
    rows = [
        {"j": j, "sup_norm": lebesgue(b, np.inf), "l2_norm": lebesgue(b, 2.0)} for j, b in blocks.items()
    ]
    rec = {
        "command": "lp-decompose", "config": cfg.header(), "blocks": rows,
        "partition_error": part_err, "paraproduct_error_relative": para_err,
        "paraproduct_sup_norms": [lebesgue(Field(grid, p), np.inf) for p in pis],
        "passed": part_err <= 1e-12 * max(1.0, float(np.max(np.abs(f.values)))) and para_err <= 1e-10,
    }
    return rec, 0 if rec["passed"] else 1


def _study(cfg: RunConfig, n_points: int, ops: Sequence[str]):
    reports = {op: estimate_study(op, cfg.peaks, cfg.size, cfg.seed, n_points, phases=cfg.phases) for op in ops}
    return reports


def cmd_commutator_study(args, cfg: RunConfig) -> tuple[dict, int]:
    if cfg.size < 1:
        raise ConfigError("ensemble size must be at least 1")
    n = cfg.n if cfg.n is not None else 1024
    reports = _study(cfg, n, ALL_OPERATORS)
    summary = {op: [asdict(s) for s in summarize(r)] for op, r in reports.items()}
    spreads = {op: spread(summarize(r)) for op, r in reports.items()}
    naive = summarize(reports["naive"])
    growth = naive[-1].max_ratio / naive[0].max_ratio
    ok = spreads["T"] < cfg.spread_bound and spreads["S"] < cfg.spread_bound and growth >= cfg.growth_bound
    rec = {
        "command": "commutator-study", "config": cfg.header(), "n_points": n,
        "numerator": "H^-0.5", "summary": summary, "max_ratio_spread": spreads,
        "naive_growth_first_to_last": growth, "passed": ok,
    }
    rows = [
        (r.operator, r.peak_frequency, r.index, r.seed, "" if r.ratio is None else r.ratio, int(r.skipped))
        for op in ALL_OPERATORS for r in reports[op]
    ]
    rec["_csv"] = dump_csv(("operator", "peak", "index", "seed", "ratio", "skipped"), rows)
    return rec, 0 if ok else 1


def cmd_bubble_run(args, cfg: RunConfig) -> tuple[dict, int]:
    grid = _grid(cfg, 8192)
    schedule = cfg.schedule if cfg.schedule is not None else parse_schedule("dyadic:2..8")
    # Validate every parameter before any computation.
    specs = [BlaschkeSpec((a,)) for a in schedule]
    if cfg.constant:
        family = [constant_map(grid) for _ in specs] if len(specs) >= 2 else [constant_map(grid)] * 2
    else:
        family = [blaschke_trace(s, grid) for s in specs]
    rep = quantization_report(
        family, gamma=cfg.gamma, alpha=cfg.alpha, c0=cfg.c0, target_points=cfg.target_points
    )
    body = rep.to_dict()
    ok = all(p["deviation"] <= cfg.quant_tol for p in body["points"])
    rec = {
        "command": "bubble-run", "config": cfg.header(), "n_points": grid.n_points,
        "schedule": list(schedule), "report": body, "far_sup_distance_to_minus_one": rep.far_sup_distance([-1.0, 0.0]),
        "passed": ok,
    }
    rows = []
    for k, u in enumerate(family):
        dens = EnergyDensity.of(u).values
        rows += [(k, th, d) for th, d in zip(grid.nodes, dens)]
    rec["_csv"] = dump_csv(("member", "theta", "density"), rows)
    return rec, 0 if ok else 1


def cmd_flow(args, cfg: RunConfig) -> tuple[dict, int]:
    explicit = bool(cfg.zeros) or cfg.constant or bool(getattr(args, "map", None))
    u0 = load_map(args, cfg, default_n=256) if explicit else identity_map(_grid(cfg, 256))
    # Without an explicit start the run is the perturbed identity.
    perturb = cfg.perturb if cfg.perturb is not None else (0.0 if explicit else 0.05)
    u0 = _perturbed(u0, perturb)
    params = FlowParams(max_iters=cfg.max_iters, residual_target=cfg.residual_target)
    rec: dict = {"command": "flow", "config": cfg.header(), "n_points": u0.grid.n_points, "perturbation": perturb}
    code = 0
    try:
        trace = flow_descent(u0, params)
        stagnated = False
    except HalfMapError as exc:
        trace = getattr(exc, "trace", None)
        if trace is None:
            raise
        stagnated = True
        rec["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = 1
    rows = [(0, trace.energies[0], trace.residuals[0], "")]
    rows += [(i + 1, e, r, s) for i, (e, r, s) in enumerate(zip(trace.energies[1:], trace.residuals[1:], trace.steps))]
    rec.update(
        iterations=trace.iterations, initial_energy=trace.energies[0], terminal_energy=trace.energies[-1],
        terminal_residual=trace.residuals[-1], converged=trace.converged and not stagnated,
    )
    if not rec["converged"]:
        code = 1
    rec["passed"] = code == 0
    rec["_csv"] = dump_csv(("iter", "energy", "residual", "step"), rows)
    if getattr(args, "map_out", None) and trace.terminal is not None:
        write_map(args.map_out, trace.terminal.field)
    return rec, code


# --------------------------------------------------------------------------- selftest


def _check(name: str, value: float, bound: float) -> dict:
    return {"invariant": name, "value": float(value), "bound": float(bound), "passed": bool(value <= bound)}


def selftest_checks(n_points: int = 1024, seed: int = 7) -> list[dict]:
    """Evaluate the library invariants at one resolution; each entry names its bound."""
    grid = PeriodicGrid(n_points)
    rng = np.random.default_rng(seed)
    x = grid.nodes
    f = random_band_limited(grid, n_points // 4 - 1, rng)
    g = random_band_limited(grid, n_points // 4 - 1, rng)
    ident = identity_map(grid)
    blaschke = blaschke_trace(BlaschkeSpec((0.5, 0.3j)), grid)
    out = []

    rt = inverse_transform(transform(f), grid)
    out.append(_check("transform_roundtrip", np.max(np.abs(rt.values - f.values)) / np.max(np.abs(f.values)), 1e-12))
    out.append(_check("riesz_derivative_is_half_laplacian",
                      np.max(np.abs(riesz(derivative(f)).values - frac_laplacian(f, 0.5).values)), 1e-10))
    out.append(_check("frac_laplacian_semigroup",
                      np.max(np.abs(frac_laplacian(frac_laplacian(f, 0.25), -0.25).values - f.values)), 1e-10))

    e_b = energy(blaschke)
    out.append(_check("extension_identity",
                      abs(dirichlet_energy(poisson_extend(blaschke.field)) - e_b) / e_b, 1e-4))
    out.append(_check("gagliardo_fourier_ratio",
                      abs(gagliardo_half(f) ** 2 / sobolev_seminorm(f, 0.5) ** 2 / TWO_PI - 1.0), 1e-2))
    l2inf, l21 = lorentz(f, "2inf"), lorentz(f, "21")
    out.append(_check("lorentz_monotone", l2inf - l21, 1e-12))
    out.append(_check("lorentz_duality_constant_two", lebesgue(f, 2.0) ** 2 - 2.0 * l21 * l2inf, 1e-10))

    fam = DyadicFamily(grid)
    recon = sum(b.values for b in decompose(f, fam).values())
    out.append(_check("partition_of_unity", np.max(np.abs(recon - f.values)), 1e-12))
    pis = sum(paraproduct(f, g, fam, i).values for i in (1, 2, 3))
    out.append(_check("paraproduct_reconstruction",
                      np.max(np.abs(f.values * g.values - pis)) / (np.max(np.abs(f.values)) * np.max(np.abs(g.values))),
                      1e-10))

    const = Field.constant(grid, 0.7)
    out.append(_check("T_cancellation_constant_Q", np.max(np.abs(op_T(const, f).values)), 1e-12))
    out.append(_check("S_cancellation_constant_Q", np.max(np.abs(op_S(const, f).values)), 1e-12))
    out.append(_check("structure_identity", structure_identity_residual(blaschke).residual, 1e-8))
    el_lhs, el_rhs = euler_lagrange_defect(blaschke)
    out.append(_check("euler_lagrange_equivalence", abs(el_lhs - el_rhs), 1e-9))

    out.append(_check("blaschke_energy_quantization", abs(e_b - 2 * TWO_PI) / (2 * TWO_PI), 1e-6))
    out.append(_check("blaschke_degree", abs(degree(blaschke).degree - 2), 0))
    out.append(_check("blaschke_el_residual", el_residual(blaschke)[1], 1e-8))
    base = SphereMap(Field(grid, project_to_sphere(np.vstack([np.cos(x + 0.3 * np.sin(2 * x)), np.sin(x + 0.3 * np.sin(2 * x))]))))
    phi = Field(grid, tangential_part(base, np.vstack([np.cos(3 * x), np.sin(2 * x)])))
    out.append(_check("gradient_check", gradient_check(base, phi)[0], 1e-5))

    dens = EnergyDensity.of(blaschke)
    out.append(_check("local_energy_total", abs(float(dens.arc_energy(0.0, np.pi)) - e_b), 1e-10))
    out.append(_check("identity_local_energy", abs(float(EnergyDensity.of(ident).arc_energy(1.0, 0.3)) - 0.6), 1e-12))
    return out


def cmd_selftest(args, cfg: RunConfig) -> tuple[dict, int]:
    n = cfg.n if cfg.n is not None else 1024
    if args.corrupt_riesz:
        with corrupted_riesz_sign():
            checks = selftest_checks(n, cfg.seed)
    else:
        checks = selftest_checks(n, cfg.seed)
    failed = [c["invariant"] for c in checks if not c["passed"]]
    rec = {"command": "selftest", "config": cfg.header(), "n_points": n, "corrupt_riesz": bool(args.corrupt_riesz),
           "checks": checks, "failed": failed, "passed": not failed}
    return rec, 0 if not failed else 1


# --------------------------------------------------------------------------- entry point


COMMANDS: dict[str, Callable] = {
    "energy": cmd_energy,
    "residual": cmd_residual,
    "extend-check": cmd_extend_check,
    "lp-decompose": cmd_lp_decompose,
    "commutator-study": cmd_commutator_study,
    "bubble-run": cmd_bubble_run,
    "flow": cmd_flow,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="grid size (power of two)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--gamma", type=float, help="concentration threshold")
    common.add_argument("--zeros", help="comma-separated Blaschke zeros, e.g. '0,0.5+0.1j'")
    common.add_argument("--constant", action="store_true", help="use a constant map")
    common.add_argument("--map", help="sampled map file (halfmap-v1 format)")
    common.add_argument("--schedule", help="family parameters: 'a1,a2,...' or 'dyadic:LO..HI'")
    common.add_argument("--out", help="write the report here instead of stdout (plot data goes to the same stem with .csv)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--config", help="key = value configuration file")

    parser = argparse.ArgumentParser(prog="halfmaps", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("energy", parents=[common], help="energy, degree and quantization check")
    sub.add_parser("residual", parents=[common], help="Euler-Lagrange and structure residuals")
    p = sub.add_parser("extend-check", parents=[common], help="Dirichlet energy of the harmonic extension")
    p.add_argument("--radial-nodes", dest="radial_nodes", type=int)
    sub.add_parser("lp-decompose", parents=[common], help="dyadic blocks and paraproduct reconstruction")
    p = sub.add_parser("commutator-study", parents=[common], help="ensemble ratios for T, S and relatives")
    p.add_argument("--size", type=int, help="ensemble size per peak frequency")
    p.add_argument("--peaks", help="comma-separated peak frequencies")
    p.add_argument("--phases", choices=("random", "aligned"))
    sub.add_parser("bubble-run", parents=[common], help="concentration and quantization on a map family")
    p = sub.add_parser("flow", parents=[common], help="projected gradient descent of the energy")
    p.add_argument("--perturb", type=float, help="tangential perturbation amplitude of the start")
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--map-out", dest="map_out", help="write the terminal map here")
    p = sub.add_parser("selftest", parents=[common], help="run the invariant suite")
    p.add_argument("--corrupt-riesz", dest="corrupt_riesz", action="store_true",
                   help="flip the Riesz sign to check that the suite notices")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        rec, code = COMMANDS[args.command](args, cfg)
    except HalfMapError as exc:
        err = {"command": args.command, "error": {"type": type(exc).__name__, "message": str(exc)}, "passed": False}
        sys.stderr.write(dump_json(err))
        return 2
    csv_text = rec.pop("_csv", None)
    if args.format == "csv":
        if csv_text is None:
            flat = {k: v for k, v in rec.items() if not isinstance(v, (dict, list))}
            csv_text = dump_csv(tuple(flat), [tuple(flat.values())])
        emit(csv_text, args.out)
    else:
        emit(dump_json(rec), args.out)
        if csv_text is not None and args.out and Path(args.out).suffix != ".csv":
            # Plot data travels next to the JSON report.
            Path(args.out).with_suffix(".csv").write_text(csv_text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
