"""Command-line front end: INI configs in, versioned JSON or text reports out.

Exit codes: 0 all requested checks pass, 1 a check failed, 2 config or
usage error, 3 precision exhausted.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import iwasawa as iw
from .funfield import (CurveData, NotImplementedMinimalization, Place, SupersingularInTower,
                       classify_reduction, enumerate_places, parse_place)
from .lfun import LFunctionEngine, check_classical_fe, gauss_sum
from .padic import CycloElt, PrecisionExhausted
from .plfun import (BSDData, CheckReport, ThetaSystem, TowerContext, bsd_check,
                    check_daleth_divisibility, check_functional_equation, check_l_equals_k,
                    check_specialization, constant_field_check, mtt_report, vz_suite)
from .rayclass import (TowerCoordinate, TowerSpec, characters_of, conductor_of,
                       get_level_group, normalize_divisor)

SCHEMA = "ffiwasawa.report/1"

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECISION = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# ------------------------------------------------------------------ config

@dataclass
class ExperimentConfig:
    q: int
    p: int
    source: str
    digest: str
    parser: configparser.ConfigParser
    curve: CurveData | None = None
    tower: TowerSpec | None = None
    level: int = 1
    precision: int = 20
    euler_bound: int | None = None
    check_level: int | None = None
    aleph_budget: int = 2
    bsd: BSDData = field(default_factory=BSDData)
    subtowers: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    contexts: dict = field(default_factory=dict)

    def section(self, name: str) -> configparser.SectionProxy | None:
        return self.parser[name] if self.parser.has_section(name) else None

    def places(self, text: str, path: str) -> list[Place]:
        try:
            return [parse_place(self.q, s) for s in text.split(";") if s.strip()]
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from exc

    def divisor(self, text: str, path: str) -> tuple:
        out = {}
        for item in text.split(";"):
            if not item.strip():
                continue
            label, _, k = item.rpartition(":")
            if not label:
                raise ConfigError(path, f"expected place:exponent, got {item!r}")
            out[self.places(label, path)[0]] = _int(k, path)
        return normalize_divisor(out)


def _int(text: str, path: str) -> int:
    try:
        return int(str(text).strip())
    except ValueError as exc:
        raise ConfigError(path, f"not an integer: {text!r}") from exc


def _int_list(text: str, path: str, sep: str = ",") -> list[int]:
    return [_int(x, path) for x in text.replace("\n", sep).split(sep) if x.strip()]


def _matrix(text: str, path: str) -> np.ndarray:
    rows = [_int_list(r, path, sep=" ") for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError(path, "matrix rows must be non-empty and of equal length")
    return np.array(rows, dtype=np.int64)


def _parse_coordinates(cfg: ExperimentConfig, text: str, path: str) -> list[TowerCoordinate]:
    coords = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        kind, _, where = item.partition(":")
        if kind == "constant":
            coords.append(TowerCoordinate("constant"))
        elif kind == "cyclotomic":
            v = cfg.places(where, path)[0]
            if v.degree != 1 or v.is_infinite:
                raise ConfigError(path, "cyclotomic coordinates need a finite degree-one place")
            coords.append(TowerCoordinate("cyclotomic", v))
        else:
            raise ConfigError(path, f"unknown coordinate kind {kind!r}")
    return coords


def _parse_tower(cfg: ExperimentConfig, sec, prefix: str) -> TowerSpec:
    kind = sec.get("kind", "coordinates").strip()
    if kind == "trivial":
        return TowerSpec.trivial(cfg.q, cfg.p)
    if kind == "explicit":
        explicit = {}
        for name in cfg.parser.sections():
            if name.startswith(prefix + " level "):
                n = _int(name.rsplit(" ", 1)[1], name)
                s = cfg.parser[name]
                explicit[n] = (cfg.divisor(s.get("modulus", ""), f"{name}.modulus"),
                               _matrix(s.get("matrix", ""), f"{name}.matrix"))
        if not explicit:
            raise ConfigError(prefix, "explicit tower without level sections")
        S = cfg.places(sec["places"], f"{prefix}.places") if "places" in sec else None
        return TowerSpec(cfg.q, cfg.p, explicit=explicit, S=S)
    return TowerSpec(cfg.q, cfg.p, _parse_coordinates(cfg, sec.get("coordinates", ""), f"{prefix}.coordinates"))


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(raw, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(path), str(exc)) from exc
    if not parser.has_section("field"):
        raise ConfigError("field", "missing section")
    fs = parser["field"]
    if "q" not in fs or "p" not in fs:
        raise ConfigError("field", "q and p are required")
    q, p = _int(fs["q"], "field.q"), _int(fs["p"], "field.p")
    if p % 2 == 0:
        raise ConfigError("field.p", "p must be odd")
    k = q
    while k % p == 0 and k > 1:
        k //= p
    if k != 1:
        raise ConfigError("field.q", f"q = {q} is not a power of p = {p}")
    cfg = ExperimentConfig(q, p, path.name, hashlib.sha256(raw.encode()).hexdigest(), parser)

    if parser.has_section("curve"):
        cs = parser["curve"]
        coeffs = [_int_list(cs.get(name, "0"), f"curve.{name}") for name in ("a1", "a2", "a3", "a4", "a6")]
        overrides = {}
        for name in parser.sections():
            if name.startswith("place "):
                label = cfg.places(name[6:], name)[0].label()
                s = parser[name]
                ov = {}
                if "m" in s:
                    ov["m"] = _int(s["m"], f"{name}.m")
                if "conductor" in s:
                    ov["conductor"] = _int(s["conductor"], f"{name}.conductor")
                if "reduction" in s:
                    ov["reduction"] = s["reduction"].strip()
                overrides[label] = ov
        try:
            cfg.curve = CurveData.from_int_lists(q, coeffs, overrides)
        except ValueError as exc:
            raise ConfigError("curve", str(exc)) from exc

    ps = parser["precision"] if parser.has_section("precision") else {}
    cfg.precision = _int(ps.get("N", "20"), "precision.N")
    if ps.get("euler_bound", "").strip():
        cfg.euler_bound = _int(ps["euler_bound"], "precision.euler_bound")
    cfg.aleph_budget = _int(ps.get("aleph_budget", "2"), "precision.aleph_budget")

    if parser.has_section("tower"):
        ts = parser["tower"]
        cfg.tower = _parse_tower(cfg, ts, "tower")
        cfg.level = _int(ts.get("level", "1"), "tower.level")
        if ts.get("check_level", "").strip():
            cfg.check_level = _int(ts["check_level"], "tower.check_level")
        d = cfg.tower.d
        if cfg.precision <= cfg.level * d + cfg.aleph_budget:
            raise ConfigError("precision.N", f"N = {cfg.precision} must exceed n*d + aleph budget "
                                             f"= {cfg.level * d + cfg.aleph_budget}")
    for name in parser.sections():
        if name.startswith("subtower "):
            s = parser[name]
            cfg.subtowers[name[9:].strip()] = (_parse_tower(cfg, s, name),
                                               _matrix(s.get("matrix", ""), f"{name}.matrix")
                                               if s.get("matrix", "").strip() else None)
    if parser.has_section("bsd"):
        bs = parser["bsd"]
        cfg.bsd = BSDData(sha=_int(bs.get("sha", "1"), "bsd.sha"),
                          torsion=_int(bs.get("torsion", "1"), "bsd.torsion"),
                          p_torsion=_int(bs.get("p_torsion", "1"), "bsd.p_torsion"),
                          rank=_int(bs.get("rank", "0"), "bsd.rank"),
                          sha_p=_int(bs["sha_p"], "bsd.sha_p") if bs.get("sha_p", "").strip() else None)
    if parser.has_section("checks"):
        cfg.checks = [c.strip() for c in parser["checks"].get("run", "").split(",") if c.strip()]
    return cfg


def make_context(cfg: ExperimentConfig, tower: TowerSpec | None = None,
                 engine: LFunctionEngine | None = None) -> TowerContext:
    if cfg.curve is None:
        raise ConfigError("curve", "this command needs a [curve] section")
    tower = tower or cfg.tower or TowerSpec.trivial(cfg.q, cfg.p)
    if id(tower) in cfg.contexts:
        return cfg.contexts[id(tower)]
    if engine is None and cfg.contexts:
        engine = next(iter(cfg.contexts.values())).engine
    try:
        ctx = TowerContext(cfg.curve, tower, cfg.bsd, cfg.precision, cfg.euler_bound,
                           cfg.check_level, engine)
        cfg.contexts[id(tower)] = ctx
        return ctx
    except (SupersingularInTower, NotImplementedMinimalization) as exc:
        raise ConfigError("tower", str(exc)) from exc
    except ValueError as exc:
        raise ConfigError("curve", str(exc)) from exc


# ----------------------------------------------------------------- reports

def cyclo_json(x: CycloElt) -> dict:
    return {"p": x.prime, "order": x.order, "coeffs": [str(int(c)) for c in x.coeffs],
            "shift": x.shift, "precision": x.precision}


class Report:
    def __init__(self, command: str, cfg: ExperimentConfig | None, level: int | None):
        self.command = command
        self.cfg = cfg
        self.level = level
        self.checks: list[CheckReport] = []
        self.results: dict = {}
        self.status_override: str | None = None

    def add(self, rep: CheckReport):
        self.checks.append(rep)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def status(self) -> str:
        if self.status_override:
            return self.status_override
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "command": self.command,
                "config": None if self.cfg is None else {"file": self.cfg.source, "sha256": self.cfg.digest},
                "level": self.level, "status": self.status,
                "checks": [c.to_json() for c in self.checks],
                "results": _plain(self.results)}

    def emit(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"
        lines = [f"{self.command}  [{self.status}]  schema {SCHEMA}"]
        if self.cfg is not None:
            lines.append(f"config {self.cfg.source} ({self.cfg.digest[:12]})")
        for c in self.checks:
            lines.append(f"  {c.name:<22} {'pass' if c.passed else 'FAIL'}")
            for k, v in sorted(_plain(c.details).items()):
                lines.append(f"      {k}: {json.dumps(v, sort_keys=True)}")
        for k, v in sorted(_plain(self.results).items()):
            lines.append(f"  {k}: {json.dumps(v, sort_keys=True)}")
        return "\n".join(lines) + "\n"


def _plain(x):
    from .plfun import _jsonable
    if isinstance(x, CycloElt):
        return cyclo_json(x)
    if isinstance(x, iw.GroupRingElt):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return _jsonable(x)


# ----------------------------------------------------------------- commands

def _characters(ctx: TowerContext, n: int):
    return iw.characters(ctx.moduli(n)) if ctx.d else [()]


def cmd_places(cfg: ExperimentConfig, level: int, rep: Report):
    """List places up to [places] max_degree with their reduction data."""
    sec = cfg.section("places")
    max_deg = _int(sec.get("max_degree", "1"), "places.max_degree") if sec else 1
    out = []
    for v in enumerate_places(cfg.q, max_deg):
        row = {"place": v.label(), "degree": v.degree}
        if cfg.curve is not None:
            pd = classify_reduction(cfg.curve, v, cfg.precision)
            row.update({"reduction": pd.reduction, "lambda": pd.lam, "m": pd.m,
                        "conductor_exponent": pd.conductor_exponent})
        out.append(row)
    rep.results["places"] = out


def cmd_lvalue(cfg: ExperimentConfig, level: int, rep: Report):
    """L(A, omega, 1) for every character of the tower at the given level."""
    ctx = make_context(cfg)
    n = level if ctx.d else 1
    vals = {}
    for psi in _characters(ctx, n):
        omega = ctx.ray_character(psi, n)
        lp = ctx.engine.l_polynomial(omega, ctx.euler_bound)
        val = lp.value_at_one(ctx.N)
        entry = {"conductor": [(v.label(), k) for v, k in conductor_of(omega)],
                 "degree": lp.degree, "value": cyclo_json(val)}
        if val.is_rational():
            r = val.reconstruct_rational()
            if r is not None:
                entry["rational"] = str(r)
        vals[",".join(map(str, psi)) or "trivial"] = entry
    rep.results["l_values"] = vals


def cmd_gauss(cfg: ExperimentConfig, level: int, rep: Report):
    """Gauss sums of the characters of the ray class group of [gauss] modulus."""
    sec = cfg.section("gauss") or cfg.section("classical")
    if sec is None or "modulus" not in sec:
        raise ConfigError("gauss.modulus", "missing")
    G = get_level_group(cfg.q, cfg.divisor(sec["modulus"], "gauss.modulus"), cfg.p, level)
    out = {}
    for omega in characters_of(G):
        out[",".join(map(str, omega.exps))] = {
            "conductor": [(v.label(), k) for v, k in conductor_of(omega)],
            "tau": cyclo_json(gauss_sum(omega).value)}
    rep.results["gauss_sums"] = out


def cmd_classical_fe(cfg: ExperimentConfig, level: int, rep: Report):
    """Functional equation of Dirichlet L-functions for [classical] modulus."""
    sec = cfg.section("classical")
    if sec is None or "modulus" not in sec:
        raise ConfigError("classical.modulus", "missing")
    G = get_level_group(cfg.q, cfg.divisor(sec["modulus"], "classical.modulus"), cfg.p, level)
    eng = LFunctionEngine(None, cfg.q, cfg.p)
    fails, count = [], 0
    degrees = {}
    for omega in characters_of(G):
        if not conductor_of(omega):
            continue
        r = check_classical_fe(omega, engine=eng)
        count += 1
        degrees[r.degree] = degrees.get(r.degree, 0) + 1
        if not r.passed:
            fails.append({"character": omega.exps, "first_mismatch": r.first_mismatch, "why": r.details})
    rep.add(CheckReport("classical_fe", not fails and count > 0,
                        {"characters": count, "degrees": degrees, "failures": fails[:5]}))


def cmd_build(cfg: ExperimentConfig, level: int, rep: Report):
    """Build hat L and script L at the given level."""
    ctx = make_context(cfg)
    hat = ctx.build_hat_L(level, check_lower=ctx.d > 0 and level > 1)
    script = ctx.build_script_L(level)
    rep.results["hat_L"] = hat.to_json()
    rep.results["script_L"] = script.to_json()
    rep.results["aleph"] = hat.aleph
    rep.results["s_L"] = ctx.s_L
    if ctx.d == 0:
        rep.results["hat_L_value"] = str(hat.value.augmentation())


def _sub_context(cfg: ExperimentConfig, ctx: TowerContext, name: str):
    tower, A = cfg.subtowers[name]
    if A is None:
        A = np.zeros((tower.d, ctx.d), dtype=np.int64)
    return make_context(cfg, tower, ctx.engine), A


def check_fe(cfg, level, rep):
    ctx = make_context(cfg)
    rep.add(check_functional_equation(ctx, tuple(range(1, level + 1)) if ctx.d else (0,)))


def check_spec(cfg, level, rep):
    ctx = make_context(cfg)
    if not cfg.subtowers:
        raise ConfigError("subtower", "no [subtower NAME] sections")
    for name in sorted(cfg.subtowers):
        sub, A = _sub_context(cfg, ctx, name)
        r = check_specialization(ctx, sub, A, level)
        r.name = f"spec:{name}"
        rep.add(r)


def check_daleth(cfg, level, rep):
    rep.add(check_daleth_divisibility(make_context(cfg), level))


def check_mtt(cfg, level, rep):
    ctx = make_context(cfg)
    rep.add(bsd_check(ctx))
    if ctx.d == 0:
        rep.add(check_l_equals_k(ctx))
    else:
        rep.add(mtt_report(ctx, level))


def check_theta(cfg, level, rep):
    sec = cfg.section("theta")
    if sec is None or "places" not in sec:
        raise ConfigError("theta.places", "missing")
    if cfg.curve is None:
        raise ConfigError("curve", "theta checks need a [curve] section")
    T = cfg.places(sec["places"], "theta.places")
    top = _int(sec.get("max_order", "2"), "theta.max_order")
    try:
        TS = ThetaSystem(cfg.curve, T, cfg.p, level, cfg.precision, cfg.euler_bound)
    except SupersingularInTower as exc:
        raise ConfigError("theta.places", str(exc)) from exc
    import itertools
    grid = [normalize_divisor({v: k for v, k in zip(T, ks) if k})
            for ks in itertools.product(range(top + 1), repeat=len(T))]
    rep.add(TS.check_recursions(grid))
    rep.add(TS.check_thetacomp(grid))
    rep.add(TS.check_tilde_interpolation(grid[-1]))
    trials = _int(sec.get("vz_trials", "100"), "theta.vz_trials")
    shapes = [((), {T[0]: 1}, {T[1]: 1} if len(T) > 1 else {}),
              ({T[0]: 1}, {T[0]: 1}, {T[-1]: 1} if len(T) > 1 else {}),
              ({T[-1]: 1}, {}, {T[0]: 2} if len(T) > 1 else {T[0]: 1})]
    rep.add(vz_suite(cfg.q, cfg.p, level, shapes, trials))


def check_constfield(cfg, level, rep):
    ctx = make_context(cfg)
    if not ctx.is_constant_tower:
        raise ConfigError("tower", "constfield needs the constant tower")
    rep.add(constant_field_check(ctx, level))


CHECKS = {"fe": check_fe, "spec": check_spec, "daleth": check_daleth, "mtt": check_mtt,
          "theta": check_theta, "constfield": check_constfield}


def _iw_element(cfg: ExperimentConfig, level: int) -> iw.GroupRingElt:
    sec = cfg.section("iwasawa")
    src = sec.get("source", "hat_L").strip() if sec else "hat_L"
    if src in ("hat_L", "script_L"):
        ctx = make_context(cfg)
        return (ctx.build_hat_L(level) if src == "hat_L" else ctx.build_script_L(level)).value
    if src != "inline":
        raise ConfigError("iwasawa.source", f"unknown source {src!r}")
    moduli = _int_list(sec.get("moduli", ""), "iwasawa.moduli")
    coeffs = _int_list(sec.get("coeffs", ""), "iwasawa.coeffs", sep=" ")
    if int(np.prod(moduli)) != len(coeffs):
        raise ConfigError("iwasawa.coeffs", f"expected {int(np.prod(moduli))} coefficients")
    prec = sec.get("precision", "").strip()
    return iw.GroupRingElt(cfg.p, moduli, np.array(coeffs, dtype=object).reshape(moduli),
                           _int(sec.get("shift", "0"), "iwasawa.shift"),
                           _int(prec, "iwasawa.precision") if prec else None)


def iw_mu(cfg, level, rep):
    f = _iw_element(cfg, level)
    rep.results["element"] = f.to_json()
    rep.results["mu"] = iw.mu_invariant(f)


def iw_order(cfg, level, rep):
    f = _iw_element(cfg, level)
    rep.results["element"] = f.to_json()
    rep.results["vanishing_order"] = iw.vanishing_order(f)


def iw_weierstrass(cfg, level, rep):
    f = _iw_element(cfg, level)
    sec = cfg.section("iwasawa") or {}
    var = _int(sec.get("var", "0"), "iwasawa.var")
    M = _int(sec.get("M", str(min(f.moduli) - 1 if f.moduli else 0)), "iwasawa.M")
    ps = iw.to_power_series(f, M)
    u, P = iw.weierstrass_prepare(ps, var)
    ok = iw.weierstrass_check(ps, u, P, var)
    rep.add(CheckReport("weierstrass", ok, {"var": var, "M": M}))
    rep.results["distinguished"] = [str(int(x)) for x in np.moveaxis(P.coeffs, var, 0).flat]


def iw_restrict(cfg, level, rep):
    f = _iw_element(cfg, level)
    sec = cfg.section("iwasawa")
    if sec is None or "subgroup" not in sec:
        raise ConfigError("iwasawa.subgroup", "missing")
    gens = _matrix(sec["subgroup"], "iwasawa.subgroup")
    rep.results["element"] = f.to_json()
    rep.results["restricted"] = iw.restrict_to_subgroup(f, gens).to_json()


IWASAWA = {"mu": iw_mu, "order": iw_order, "weierstrass": iw_weierstrass, "restrict": iw_restrict}


# --------------------------------------------------------------- plumbing

def execute(command: str, fn, config: str, level: int | None, out: str | None, fmt: str) -> int:
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    n = level if level is not None else cfg.level
    rep = Report(command, cfg, n)
    code = EXIT_PASS
    try:
        fn(cfg, n, rep)
        code = EXIT_PASS if rep.passed else EXIT_FAIL
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except PrecisionExhausted as exc:
        rep.status_override = "precision-exhausted"
        rep.results["error"] = str(exc)
        code = EXIT_PRECISION
    text = rep.emit(fmt)
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)
    return code


def run(config: str, level: int | None = None, out: str | None = None, fmt: str = "json") -> int:
    """Run every check listed under [checks] run = ... in one report."""
    def body(cfg, n, rep):
        if not cfg.checks:
            return
        for name in cfg.checks:
            if name not in CHECKS:
                raise ConfigError("checks.run", f"unknown check {name!r}")
            CHECKS[name](cfg, n, rep)
    return execute("run", body, config, level, out, fmt)


def _common(f):
    f = click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json")(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None)(f)
    f = click.option("--level", type=int, default=None)(f)
    f = click.option("--config", type=click.Path(exists=True, dir_okay=False), required=True)(f)
    return f


@click.group()
def main():
    """p-adic L-functions of elliptic curves over F_q(t): builds and checks."""


def _simple(name, fn):
    @main.command(name, help=fn.__doc__)
    @_common
    def cmd(config, level, out, fmt):
        sys.exit(execute(name, fn, config, level, out, fmt))
    return cmd


_simple("places", cmd_places)
_simple("lvalue", cmd_lvalue)
_simple("gauss", cmd_gauss)
_simple("classical-fe", cmd_classical_fe)
_simple("build", cmd_build)


@main.command("run")
@_common
def run_cmd(config, level, out, fmt):
    """Run the checks listed in the config."""
    sys.exit(run(config, level, out, fmt))


@main.command("check")
@click.argument("which", type=click.Choice(sorted(CHECKS)))
@_common
def check_cmd(which, config, level, out, fmt):
    """Verify one family of identities."""
    sys.exit(execute(f"check {which}", CHECKS[which], config, level, out, fmt))


@main.command("iwasawa")
@click.argument("which", type=click.Choice(sorted(IWASAWA)))
@_common
def iwasawa_cmd(which, config, level, out, fmt):
    """Iwasawa-algebra invariants of a built or inline element."""
    sys.exit(execute(f"iwasawa {which}", IWASAWA[which], config, level, out, fmt))


if __name__ == "__main__":
    main()
