"""Command-line front end.

``chainkit SUBCOMMAND --config INSTANCE [options]``. INSTANCE is a JSON file
path or the name of a bundled instance. The file is either an instance
document or a run document ``{"subcommand", "instance", "mc": {"samples",
"seed"}, "tau", "sigma"}`` whose ``instance`` is inline or a path.

Exit status: 0 success, 2 when a bound check fails, 1 on usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__, bounds, cover, empirical, mc, metrics, partition, vc
from .core import BoundReport, PointSet, SetFamily, StructuralError, UsageError

COLUMNS = ("instance_id", "quantity", "value", "stderr", "bound", "ratio", "tau", "samples", "seed", "pass")
INPUT_ERRORS = (UsageError, StructuralError, cover.ParameterError, metrics.RangeError, bounds.AdmissibilityError, OSError, json.JSONDecodeError)


@dataclass
class RunConfig:
    subcommand: str
    instance: dict
    samples: int | None = None
    seed: int | None = None
    tau: int | None = None
    sigma: int | None = None
    out: str | None = None
    format: str = "csv"
    deterministic: bool = False

    def config_hash(self) -> str:
        doc = {
            "subcommand": self.subcommand,
            "instance": self.instance,
            "samples": self.samples,
            "seed": self.seed,
            "tau": self.tau,
            "sigma": self.sigma,
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def need_seed(self) -> int:
        if self.seed is None:
            raise UsageError(f"--seed is required for {self.subcommand}")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        return self.seed

    def samples_or(self, default: int) -> int:
        n = default if self.samples is None else self.samples
        if n < 1:
            raise UsageError("--samples must be >= 1")
        return n

    def tau_or(self, default: int) -> int:
        return default if self.tau is None else self.tau

    @property
    def instance_id(self) -> str:
        return str(self.instance.get("instance_id", "inline"))


@dataclass
class Row:
    quantity: str
    value: float
    stderr: float | None = None
    bound: float | None = None
    ratio: float | None = None
    tau: int | None = None
    samples: int | None = None
    seed: int | None = None
    passed: bool | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_report(cls, r: BoundReport, quantity: str | None = None) -> Row:
        return cls(quantity or r.quantity, r.estimate, r.stderr, r.bound, r.ratio, r.tau, r.samples, r.seed, r.passed, dict(r.extra))

    @property
    def margin(self) -> float | None:
        if self.bound is None:
            return None
        return self.bound + 3.0 * (self.stderr or 0.0) - self.value


# ----------------------------------------------------------------------------
# instance access


def bundled_instances() -> list[str]:
    root = resources.files("chainkit") / "instances"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _resolve(path_or_name: str) -> dict:
    p = Path(path_or_name)
    if p.is_file():
        return json.loads(p.read_text())
    name = path_or_name[:-5] if path_or_name.endswith(".json") else path_or_name
    res = resources.files("chainkit") / "instances" / f"{name}.json"
    if res.is_file():
        return json.loads(res.read_text())
    raise UsageError(f"--config: no such file or bundled instance {path_or_name!r}")


def _get(inst: dict, key: str, default: Any = ...):
    if key in inst:
        return inst[key]
    if default is ...:
        raise StructuralError(f"instance field {key!r} missing")
    return default


def _points(inst: dict, key: str) -> PointSet:
    doc = _get(inst, key)
    try:
        if isinstance(doc, list):
            return PointSet.from_points(np.asarray(doc, dtype=np.float64))
        return PointSet.from_dict(doc)
    except StructuralError as exc:
        raise StructuralError(f"instance field {key!r}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"instance field {key!r}: {exc}") from None


def _vector(inst: dict, key: str) -> np.ndarray:
    try:
        v = np.asarray(_get(inst, key), dtype=np.float64).ravel()
    except (TypeError, ValueError):
        raise StructuralError(f"instance field {key!r} must be a list of numbers") from None
    if v.size == 0:
        raise StructuralError(f"instance field {key!r} is empty")
    return v


def _canonical_model(inst: dict, T: PointSet):
    kind = _get(inst, "model", "gaussian")
    if kind == "gaussian":
        return mc.GaussianCanonical(T)
    if kind == "bernoulli":
        return mc.BernoulliCanonical(T)
    raise StructuralError(f"instance field 'model' must be gaussian or bernoulli, got {kind!r}")


def _function_family(inst: dict) -> empirical.FunctionFamily:
    doc = _get(inst, "family")
    if isinstance(doc, dict) and doc.get("catalog") == "lipschitz":
        return empirical.lipschitz_family(int(doc.get("size", 16)), int(doc.get("dim", 2)), int(doc.get("seed", 0)))
    try:
        return empirical.FunctionFamily.from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"instance field 'family': {exc}") from None


def _eps_list(inst: dict, key: str) -> list[float]:
    v = _vector(inst, key)
    if np.any(v <= 0):
        raise StructuralError(f"instance field {key!r} must be positive")
    return v.tolist()


# ----------------------------------------------------------------------------
# subcommands


def cmd_gamma2(cfg: RunConfig) -> list[Row]:
    T = _points(cfg.instance, "T")
    rows = [Row("gamma2_upper", partition.gamma2_upper(T))]
    if cfg.seed is not None:
        g = mc.estimate_sup(mc.GaussianCanonical(T), "absolute", cfg.samples_or(20_000), cfg.seed)
        ratio = g.mean / rows[0].value if rows[0].value > 0 else None
        rows.append(Row("g_T", g.mean, g.stderr, rows[0].value, ratio, samples=g.samples, seed=g.seed))
    return rows


def cmd_dudley(cfg: RunConfig) -> list[Row]:
    T = _points(cfg.instance, "T")
    s = partition.dudley_sum(T)
    i = partition.dudley_integral(T)
    return [Row("dudley_sum", s), Row("dudley_integral", i), Row("gamma2_upper", partition.gamma2_upper(T), bound=partition.GAMMA2_DUDLEY_CONSTANT * s)]


def cmd_entropy(cfg: RunConfig) -> list[Row]:
    T = _points(cfg.instance, "T")
    tau = cfg.tau_or(0)
    if tau < 0:
        raise UsageError("--tau must be >= 0")
    fam = bounds.default_family(_canonical_model(cfg.instance, T))
    e = partition.entropy_numbers(T, fam, tau, partition.entropy_depth(len(T)))
    rows = [Row(f"e_{n}", float(v), tau=tau) for n, v in enumerate(e)]
    rows.append(Row("entropy_sum", float(e.sum()), tau=tau))
    return rows


def cmd_partition(cfg: RunConfig) -> list[Row]:
    T = _points(cfg.instance, "T")
    tau = cfg.tau_or(1)
    if tau < 1:
        raise UsageError("--tau must be >= 1 for an entropy tree")
    fam = bounds.default_family(_canonical_model(cfg.instance, T))
    tree = partition.partition_from_entropy(T, fam, tau)
    rows = [Row(f"cells_{n}", tree.cell_count(n), bound=partition.level_capacity(n, len(T)), tau=tau, passed=tree.cell_count(n) <= partition.level_capacity(n, len(T))) for n in range(tree.depth)]
    rows.append(Row("gamma_functional", partition.gamma_functional(tree, fam, tau - 1), tau=tau - 1))
    if cfg.out:
        partition.save_tree(tree, Path(cfg.out).with_suffix(".tree.json"))
    return rows


def cmd_quantile_dist(cfg: RunConfig) -> list[Row]:
    scale = float(_get(cfg.instance, "scale", 1.0))
    levels = [int(n) for n in _get(cfg.instance, "levels", list(range(9)))]
    rows = []
    for n in levels:
        q = metrics.gaussian_quantile_distance(scale, n)
        ref = 2.0 ** (n / 2.0) * scale
        rows.append(Row(f"q_{n}", q, bound=ref, ratio=q / ref if ref > 0 else None))
    return rows


def cmd_mc_sup(cfg: RunConfig) -> list[Row]:
    seed = cfg.need_seed()
    samples = cfg.samples_or(20_000)
    mode = _get(cfg.instance, "mode", "absolute")
    if "U" in cfg.instance:
        U, T = _points(cfg.instance, "U"), _points(cfg.instance, "T")
        kind = _get(cfg.instance, "model", "gaussian")
        model = mc.ProductGaussian(U, T) if kind == "gaussian" else mc.ProductBernoulli(U, T)
        est = mc.estimate_product_sup(model, samples, seed, mode=mode)
    else:
        T = _points(cfg.instance, "T")
        est = mc.estimate_sup(_canonical_model(cfg.instance, T), mode, samples, seed)
    return [Row(f"sup_{mode}", est.mean, est.stderr, samples=est.samples, seed=est.seed, extra={"exact": est.exact})]


def cmd_vc_dim(cfg: RunConfig) -> list[Row]:
    fam = SetFamily.from_dict(_get(cfg.instance, "family"))
    return [Row("vc_dimension", vc.vc_dimension(fam))]


def cmd_shatter(cfg: RunConfig) -> list[Row]:
    U = _points(cfg.instance, "U")
    cap = int(_get(cfg.instance, "cap", vc.SHATTER_CAP_MAX))
    rows = []
    for eps in _eps_list(cfg.instance, "eps"):
        k = vc.shattering_dimension(U, eps, cap)
        row = Row(f"vc_eps_{eps:g}", k)
        if "expected" in cfg.instance:
            exp = int(cfg.instance["expected"][str(eps)] if isinstance(cfg.instance["expected"], dict) else vc.unit_ball_vc_expected(eps, U.dim))
            row.bound = exp
            row.passed = k == exp
        rows.append(row)
    return rows


def cmd_shatter_integral(cfg: RunConfig) -> list[Row]:
    U = _points(cfg.instance, "U")
    cap = int(_get(cfg.instance, "cap", vc.SHATTER_CAP_MAX))
    value, curve = vc.shattering_integral(U, _eps_list(cfg.instance, "eps_grid"), cap, return_curve=True)
    rows = [Row(f"vc_eps_{e:g}", k) for e, k in curve]
    rows.append(Row("shatter_integral", value))
    return rows


def cmd_maximal_ineq(cfg: RunConfig) -> list[Row]:
    fam = SetFamily.from_dict(_get(cfg.instance, "family"))
    T = _points(cfg.instance, "T")
    r = vc.maximal_inequality_experiment(fam, T, cfg.samples_or(20_000), cfg.need_seed())
    row = Row.from_report(r)
    k, se = r.extra["K_emp"], r.extra["K_stderr"]
    floor = math.sqrt(fam.ground_size) / 2.0
    return [row, Row("K_emp", k, se, bound=floor, ratio=k / floor, samples=r.samples, seed=r.seed, passed=k >= floor - 3 * se)]


def cmd_cover_ball(cfg: RunConfig) -> list[Row]:
    N = int(_get(cfg.instance, "N"))
    sigma = cfg.sigma if cfg.sigma is not None else int(_get(cfg.instance, "sigma", cover.calibrate_sigma(N)))
    levels = _get(cfg.instance, "levels", None)
    regimes = _get(cfg.instance, "regimes", [])
    audit = cfg.samples is not None or cfg.seed is not None
    seed = cfg.need_seed() if audit else None
    seq = cover.m_sequence(N, sigma)
    growth = all(seq.upper_ok) and all(seq.floor_ok) and all(seq.ratio_ok)
    rows = [Row("m_growth_ok", float(growth), passed=growth, extra={"m": seq.as_dict(), "sigma": sigma})]
    for n, m, ok in zip(seq.n, seq.m, seq.lower_ok):
        target, cap = 2.0 ** (n - sigma), m * math.log(math.e * N / m)
        rows.append(Row(f"m_n{n}", target, bound=cap, ratio=target / cap, passed=ok, extra={"m": m}))
    if levels is None:
        levels = list(range(0, cover.base_level(N) + sigma + 3))
    seen = set()
    for n in levels:
        c = cover.ball_cube_cover(N, int(n), sigma, strict=False)
        seen.add(c.regime)
        ok = c.certified
        samples = None
        if audit:
            a = cover.audit_cover(c, cfg.samples_or(10_000), seed)
            ok = ok and a.ok
            samples = a.points
        value = float(c.count) if c.count is not None else 2.0**c.log2_count_bound
        bound = 2.0**c.certified_log2
        rows.append(Row(f"cover_{c.regime}_n{n}", value, bound=bound, ratio=value / bound, samples=samples, seed=seed, passed=ok))
    wanted = set(regimes)
    rows.append(Row("regimes_covered", len(seen), bound=len(wanted), passed=wanted <= seen))
    return rows


def cmd_ellipsoid_bound(cfg: RunConfig) -> list[Row]:
    x = _vector(cfg.instance, "x")
    ts = _get(cfg.instance, "t")
    ts = [ts] if ts and not isinstance(ts[0], list) else ts
    rows = []
    for j, t in enumerate(ts):
        e = cover.ellipsoid_entropy_bound(x, np.asarray(t, dtype=np.float64))
        rows.append(Row(f"ellipsoid_entropy_{j}", e.value, bound=e.schwartz_cap, ratio=e.value / e.schwartz_cap if e.schwartz_cap > 0 else None, passed=e.ok))
    return rows


def cmd_verify_theorem3(cfg: RunConfig) -> list[Row]:
    T = _points(cfg.instance, "T")
    tau = cfg.tau_or(2)
    if tau < 2:
        raise UsageError(f"--tau must be >= 2 for verify-theorem3 (got {tau})")
    r = bounds.verify_theorem3(_canonical_model(cfg.instance, T), None, tau, cfg.samples_or(100_000), cfg.need_seed())
    return [Row.from_report(r)]


def cmd_verify_theorem4(cfg: RunConfig) -> list[Row]:
    U, T = _points(cfg.instance, "U"), _points(cfg.instance, "T")
    tau = cfg.tau_or(4)
    if tau < 4:
        raise UsageError(f"--tau must be >= 4 for verify-theorem4 (got {tau})")
    r = bounds.verify_theorem4(U, T, _get(cfg.instance, "model", "gaussian"), tau, cfg.samples_or(100_000), cfg.need_seed())
    return [Row.from_report(r)]


def _product_sets(inst: dict) -> tuple[PointSet, PointSet]:
    if "x" in inst and "y" in inst:
        return bounds.diagonal_witnesses(_vector(inst, "x")), bounds.diagonal_witnesses(_vector(inst, "y"))
    return _points(inst, "U"), _points(inst, "T")


def cmd_corollary1(cfg: RunConfig) -> list[Row]:
    U, T = _product_sets(cfg.instance)
    tau = cfg.tau_or(4)
    if tau < 4:
        raise UsageError(f"--tau must be >= 4 for corollary1 (got {tau})")
    seed, samples = cfg.need_seed(), cfg.samples_or(20_000)
    r = bounds.corollary1_bound(U, T, tau, samples, seed)
    rows = [Row.from_report(r)]
    rows.append(Row("corollary1_absolute", r.extra["absolute_mean"], r.extra["absolute_stderr"], r.bound, tau=tau, samples=r.samples, seed=seed))
    rows[-1].ratio = rows[-1].value / r.bound if r.bound > 0 else None
    if "x" in cfg.instance and "y" in cfg.instance:
        p = bounds.ellipsoid_toy(_vector(cfg.instance, "x"), _vector(cfg.instance, "y"), samples, seed)
        rows.append(Row("diagonal_max", p.mean_b, p.se_b, r.bound, p.mean_b / r.bound if r.bound > 0 else None, samples=p.samples, seed=seed, passed=p.agree()))
    return rows


def cmd_remark1(cfg: RunConfig) -> list[Row]:
    r = bounds.remark1_bound(_vector(cfg.instance, "x"), _points(cfg.instance, "T"), cfg.samples_or(20_000), cfg.need_seed())
    return [Row.from_report(r)]


def cmd_remark2(cfg: RunConfig) -> list[Row]:
    r = bounds.remark2_bound(_vector(cfg.instance, "x"), _points(cfg.instance, "T"), cfg.samples_or(20_000), cfg.need_seed())
    return [Row.from_report(r)]


def cmd_theorem2(cfg: RunConfig) -> list[Row]:
    T = _points(cfg.instance, "T")
    m = int(_get(cfg.instance, "m"))
    freqs = _get(cfg.instance, "freqs")
    r = bounds.theorem2_experiment(T, m, freqs, cfg.samples_or(20_000), cfg.need_seed())
    rows = [Row.from_report(r)]
    if m == 1:
        k, rel = r.extra["K"], r.extra["relative_stderr"]
        rows.append(Row("K_trivial_group", k, r.extra["K_stderr"], 1.0, k, samples=r.samples, seed=r.seed, passed=k <= 1 + 3 * rel))
    else:
        rows.append(Row("K", r.extra["K"], r.extra["K_stderr"], samples=r.samples, seed=r.seed))
    return rows


def cmd_decomposition(cfg: RunConfig) -> list[Row]:
    T = _points(cfg.instance, "T")
    seed, samples = cfg.need_seed(), cfg.samples_or(20_000)
    how = _get(cfg.instance, "decomposition", "greedy")
    if how == "identity":
        dec = bounds.DecompositionPair.identity(T)
    elif how == "zero":
        dec = bounds.DecompositionPair.zero(T)
    elif how == "greedy":
        lam = float(_get(cfg.instance, "lambda", 1.0))
        dec = bounds.greedy_l1_decomposition(T, lam * bounds.b_estimate(T, samples, seed).mean)
    elif isinstance(how, list):
        dec = bounds.DecompositionPair(T, np.asarray(how, dtype=T.array.dtype))
    else:
        raise StructuralError(f"instance field 'decomposition' must be identity, zero, greedy or a list of vectors, got {how!r}")
    r = bounds.decomposition_report(T, dec, samples, seed)
    return [Row.from_report(r), Row.from_report(bounds.decomposition_min_form(T, samples, seed))]


def cmd_theorem6(cfg: RunConfig) -> list[Row]:
    F = _function_family(cfg.instance)
    seed, samples = cfg.need_seed(), cfg.samples_or(4000)
    rows = []
    for N in _get(cfg.instance, "N", [16, 64, 256]):
        r = empirical.theorem6_bound(F, int(N), samples, seed)
        rows.append(Row.from_report(r, f"theorem6_N{int(N)}"))
    if len(rows) > 1:
        ratios = [r.ratio for r in rows]
        spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
        rows.append(Row("ratio_spread", spread, bound=2.0, ratio=spread / 2.0, passed=bool(np.isfinite(spread) and spread < 2.0)))
    return rows


def cmd_tail_compare(cfg: RunConfig) -> list[Row]:
    U = _points(cfg.instance, "U")
    vectors = [np.asarray(v, dtype=np.float64) for v in _get(cfg.instance, "vectors")]
    t_grid = _vector(cfg.instance, "t_grid")
    tab = mc.tail_compare(U, vectors, t_grid, cfg.samples_or(20_000), cfg.need_seed(), _get(cfg.instance, "norm", "l2"))
    seed = None if tab.exact else cfg.seed
    rows = [
        Row(f"tail_t{t:g}", ps, ses, bound=pp, samples=tab.samples, seed=seed, extra={"plain_stderr": sp})
        for t, ps, ses, pp, sp in tab.rows()
    ]
    rows.append(Row("K1", tab.K1, samples=tab.samples, seed=seed))
    rows.append(Row("K2", tab.K2, samples=tab.samples, seed=seed))
    rows.append(Row("K", tab.K, samples=tab.samples, seed=seed))
    return rows


COMMANDS: dict[str, Callable[[RunConfig], list[Row]]] = {
    "gamma2": cmd_gamma2,
    "dudley": cmd_dudley,
    "entropy": cmd_entropy,
    "partition": cmd_partition,
    "quantile-dist": cmd_quantile_dist,
    "mc-sup": cmd_mc_sup,
    "vc-dim": cmd_vc_dim,
    "shatter": cmd_shatter,
    "shatter-integral": cmd_shatter_integral,
    "maximal-ineq": cmd_maximal_ineq,
    "cover-ball": cmd_cover_ball,
    "ellipsoid-bound": cmd_ellipsoid_bound,
    "verify-theorem3": cmd_verify_theorem3,
    "verify-theorem4": cmd_verify_theorem4,
    "corollary1": cmd_corollary1,
    "remark1": cmd_remark1,
    "remark2": cmd_remark2,
    "theorem2": cmd_theorem2,
    "decomposition": cmd_decomposition,
    "theorem6": cmd_theorem6,
    "tail-compare": cmd_tail_compare,
}


# ----------------------------------------------------------------------------
# rendering


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "PASS" if v else "FAIL"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def header_lines(cfg: RunConfig) -> list[str]:
    lines = [
        f"# chainkit {__version__} numpy {np.__version__} scipy {scipy.__version__} python {platform.python_version()}",
        f"# subcommand {cfg.subcommand} instance {cfg.instance_id}",
        f"# config_hash {cfg.config_hash()}",
        f"# seed {'' if cfg.seed is None else cfg.seed}",
    ]
    if not cfg.deterministic:
        lines.append(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    return lines


def _fail_lines(rows: list[Row]) -> list[str]:
    out = []
    for r in rows:
        if r.passed is False:
            m = r.margin
            out.append(f"# FAIL {r.quantity} margin {_fmt(m) if m is not None else 'n/a'}")
    return out


def render_csv(cfg: RunConfig, rows: list[Row]) -> str:
    buf = io.StringIO()
    for line in header_lines(cfg):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([cfg.instance_id, r.quantity, _fmt(r.value), _fmt(r.stderr), _fmt(r.bound), _fmt(r.ratio), _fmt(r.tau), _fmt(r.samples), _fmt(r.seed), _fmt(r.passed)])
    for line in _fail_lines(rows):
        buf.write(line + "\n")
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render_text(cfg: RunConfig, rows: list[Row]) -> str:
    lines = header_lines(cfg)
    for r in rows:
        lines.append(f"[{r.quantity}]")
        for name, v in (("value", r.value), ("stderr", r.stderr), ("bound", r.bound), ("ratio", r.ratio), ("tau", r.tau), ("samples", r.samples), ("seed", r.seed), ("pass", r.passed)):
            if v is not None:
                lines.append(f"  {name} = {_fmt(v)}")
        if r.passed is False and r.margin is not None:
            lines.append(f"  margin = {_fmt(r.margin)}")
        for k in sorted(r.extra):
            lines.append(f"  {k} = {json.dumps(_jsonable(r.extra[k]), sort_keys=True)}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# entry points


def run(cfg: RunConfig) -> tuple[int, str]:
    if cfg.subcommand not in COMMANDS:
        raise UsageError(f"unknown subcommand {cfg.subcommand!r}")
    if cfg.format not in ("csv", "text"):
        raise UsageError(f"--format must be csv or text, got {cfg.format!r}")
    rows = COMMANDS[cfg.subcommand](cfg)
    text = render_csv(cfg, rows) if cfg.format == "csv" else render_text(cfg, rows)
    status = 2 if any(r.passed is False for r in rows) else 0
    return status, text


def build_config(args: argparse.Namespace) -> RunConfig:
    doc = _resolve(args.config)
    inst = doc
    seed, samples, tau, sigma = args.seed, args.samples, args.tau, args.sigma
    if "instance" in doc:
        inst = doc["instance"]
        if isinstance(inst, str):
            inst = _resolve(inst)
        if doc.get("subcommand") not in (None, args.subcommand):
            raise UsageError(f"config field 'subcommand' is {doc['subcommand']!r} but {args.subcommand!r} was invoked")
        mcdoc = doc.get("mc", {})
        seed = mcdoc.get("seed") if seed is None else seed
        samples = mcdoc.get("samples") if samples is None else samples
        tau = doc.get("tau") if tau is None else tau
        sigma = doc.get("sigma") if sigma is None else sigma
    if not isinstance(inst, dict):
        raise StructuralError("instance document must be a JSON object")
    return RunConfig(args.subcommand, inst, samples, seed, tau, sigma, args.out, args.format, args.deterministic)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chainkit", description="Chaining bounds on finite index sets, checked against Monte Carlo.")
    p.add_argument("--version", action="version", version=f"chainkit {__version__}")
    sub = p.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name in COMMANDS:
        s = sub.add_parser(name, help=(COMMANDS[name].__doc__ or "").strip() or None)
        s.add_argument("--config", required=True, help="instance or run JSON file, or a bundled instance name")
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--tau", type=int)
        s.add_argument("--sigma", type=int)
        s.add_argument("--out", help="write the report here instead of stdout")
        s.add_argument("--format", default="csv", choices=("csv", "text"))
        s.add_argument("--deterministic", action="store_true", help="omit the timestamp header line")
    sub.add_parser("list", help="list bundled instances")
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = make_parser().parse_args(argv)
        if args.subcommand is None:
            raise UsageError("a subcommand is required")
        if args.subcommand == "list":
            print("\n".join(bundled_instances()))
            return 0
        cfg = build_config(args)
        status, text = run(cfg)
    except INPUT_ERRORS as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"chainkit: error: {msg}", file=sys.stderr)
        return 1
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
