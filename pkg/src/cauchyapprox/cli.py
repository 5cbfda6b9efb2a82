"""Command-line front end: ``approx {moments,pade,aak,sweep}``.

Exit status: 0 on success, 2 for invalid input or domain errors, 3 when a
numerical accuracy or resolution check fails.  Errors are also reported as
one JSON line on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import gmpy2

from .aak import AakApproximant, GapWarning, aak_approximant, default_truncation, hankel_matrix
from .asymptotics import fit_rate, match_pole_rings, predict_ma, predict_pade, ring_shrink
from .conformal import SzegoData, Weight, build_geometry
from .errors import ApproxError, InvalidInputError
from .io import cdec, csv_text, dec, json_text, pole_svg, write
from .kernel.precision import PrecisionContext, to_mpc
from .model import CauchyFunction, _dist_to_interval, eval_cauchy, moments
from .pade import InterpolationScheme, PadeApproximant, classical_pade, multipoint_pade
from .presets import preset_dict

COMMANDS = ("moments", "pade", "aak", "sweep")
FORMATS = ("csv", "json", "svg")
CONFIG_KEYS = {"function", "preset", "n", "n_range", "N", "K", "precision", "out", "format", "scheme", "approximant", "z"}


@dataclass
class RunConfig:
    command: str
    function: CauchyFunction
    source: dict  # JSON form of the function, echoed into artifacts
    preset: str | None = None
    n: int | None = None
    n_range: tuple[int, int] | None = None
    N: int | None = None
    K: int = 16
    precision: int = 256
    out: Path = Path("out")
    formats: tuple = ("csv", "json")
    scheme: InterpolationScheme = field(default_factory=InterpolationScheme.classical)
    scheme_source: dict = field(default_factory=lambda: {"kind": "classical"})
    approximant: str = "both"
    z: str = "2"

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.precision)

    @property
    def ns(self) -> list[int]:
        if self.n_range is not None:
            return list(range(self.n_range[0], self.n_range[1] + 1))
        return [self.n]


def _int(value, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InvalidInputError(f"{name} must be an integer")
    try:
        v = int(value)
    except ValueError as exc:
        raise InvalidInputError(f"{name} must be an integer") from exc
    if v < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}")
    return v


def _n_range(value) -> tuple[int, int]:
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 2:
            raise InvalidInputError("n range is written a:b")
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        parts = list(value)
    else:
        raise InvalidInputError("n range is written a:b or [a, b]")
    a, b = _int(parts[0], "n range start", 1), _int(parts[1], "n range end", 1)
    if b < a:
        raise InvalidInputError("n range end precedes its start")
    return a, b


def _scheme(data) -> InterpolationScheme:
    if data is None:
        return InterpolationScheme.classical()
    if not isinstance(data, dict) or "kind" not in data:
        raise InvalidInputError("scheme needs a 'kind'")
    kind = data["kind"]
    if kind == "classical":
        return InterpolationScheme.classical()
    if kind == "circle":
        count = data.get("count")
        return InterpolationScheme.circle(data["radius"], None if count is None else _int(count, "count", 0))
    if kind == "explicit":
        pts = data.get("points")
        if not isinstance(pts, dict):
            raise InvalidInputError("explicit scheme needs 'points' keyed by n")
        return InterpolationScheme.explicit(pts)
    raise InvalidInputError(f"unknown scheme kind {kind!r}")


def build_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InvalidInputError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidInputError("config must be a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise InvalidInputError(f"unknown config fields: {sorted(unknown)}")
    # command-line flags override the file
    for key in ("preset", "n", "n_range", "N", "K", "precision", "out", "format", "approximant", "z"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if "preset" in data and "function" in data:
        raise InvalidInputError("give either a preset or an inline function, not both")
    if "preset" in data:
        source = preset_dict(str(data["preset"]))
    elif "function" in data:
        source = data["function"]
    else:
        raise InvalidInputError("no function: use --preset or a config with 'function'")
    cfg = RunConfig(command=args.command, function=CauchyFunction.from_dict(source), source=source, preset=data.get("preset"))
    if "n" in data:
        cfg.n = _int(data["n"], "n", 1)
    if "n_range" in data:
        cfg.n_range = _n_range(data["n_range"])
    if "N" in data:
        cfg.N = _int(data["N"], "N", 1)
    if "K" in data:
        cfg.K = _int(data["K"], "K", 0)
    if "precision" in data:
        cfg.precision = _int(data["precision"], "precision", 53)
    if "out" in data:
        cfg.out = Path(str(data["out"]))
    if "format" in data:
        fmts = data["format"]
        fmts = fmts.split(",") if isinstance(fmts, str) else list(fmts)
        fmts = [f.strip() for f in fmts if f.strip()]
        bad = [f for f in fmts if f not in FORMATS]
        if bad or not fmts:
            raise InvalidInputError(f"formats must be among {', '.join(FORMATS)}")
        cfg.formats = tuple(dict.fromkeys(fmts))
    if "scheme" in data:
        cfg.scheme = _scheme(data["scheme"])
        cfg.scheme_source = data["scheme"]
    if "approximant" in data:
        if data["approximant"] not in ("aak", "pade", "both"):
            raise InvalidInputError("approximant must be aak, pade or both")
        cfg.approximant = data["approximant"]
    if "z" in data:
        cfg.z = str(data["z"])
    if cfg.command in ("pade", "aak") and cfg.n is None:
        raise InvalidInputError(f"{cfg.command} needs --n")
    if cfg.command == "sweep":
        if cfg.n_range is None:
            raise InvalidInputError("sweep needs --n-range")
        if len(cfg.ns) < 5:
            raise InvalidInputError("sweep range needs at least five values of n")
    return cfg


# ---------------------------------------------------------------- helpers

def _sorted_poles(poles) -> list:
    return sorted(poles, key=lambda z: (float(z.real), float(z.imag)))


def _support(cfg: RunConfig):
    if cfg.function.measure is None:
        return None
    c, d = cfg.function.measure.bounds(cfg.ctx)
    return float(c), float(d)


def _marks(cfg: RunConfig) -> list[complex]:
    return [complex(r) for r, _ in cfg.function.poles(cfg.ctx)]


def _header(cfg: RunConfig) -> list[str]:
    name = cfg.preset if cfg.preset is not None else "inline"
    return [f"schema_version=1 command={cfg.command} function={name} precision={cfg.precision}"]


def _emit(cfg: RunConfig, stem: str, json_obj: dict | None, csv_tables: dict, svg: str | None) -> list[Path]:
    """Write the requested formats; csv_tables maps file suffix -> (header, rows)."""
    written = []
    if "json" in cfg.formats and json_obj is not None:
        written.append(write(cfg.out / f"{stem}.json", json_text(json_obj)))
    if "csv" in cfg.formats:
        for suffix, (header, rows) in csv_tables.items():
            name = f"{stem}{suffix}.csv"
            written.append(write(cfg.out / name, csv_text(header, rows, _header(cfg))))
    if "svg" in cfg.formats and svg is not None:
        written.append(write(cfg.out / f"{stem}.svg", svg))
    return written


def _common(cfg: RunConfig) -> dict:
    out = {"command": cfg.command, "function": cfg.source, "precision": cfg.precision}
    if cfg.preset is not None:
        out["preset"] = cfg.preset
    return out


def _num(x):
    """JSON-safe float (infinities become strings)."""
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


# ---------------------------------------------------------------- commands

def cmd_moments(cfg: RunConfig) -> list[Path]:
    ctx = cfg.ctx
    vals = moments(cfg.function, cfg.K, ctx) if cfg.K > 0 else []
    rows = [[str(k)] + cdec(v, ctx) for k, v in enumerate(vals)]
    obj = _common(cfg)
    obj.update({"K": cfg.K, "moments": [cdec(v, ctx) for v in vals]})
    return _emit(cfg, "moments", obj, {"": (["k", "re", "im"], rows)}, None)


def _pade(cfg: RunConfig, n: int, c=None) -> PadeApproximant:
    if cfg.scheme.kind == "classical":
        return classical_pade(cfg.function, n, cfg.ctx, c)
    return multipoint_pade(cfg.function, n, cfg.scheme.nodes(n, cfg.ctx), cfg.ctx)


def _pole_rows(ctx, groups: list[tuple[str, list]]) -> list[list[str]]:
    rows = []
    k = 0
    for label, poles in groups:
        for p in _sorted_poles(poles):
            rows.append([str(k)] + cdec(p, ctx) + [label])
            k += 1
    return rows


def cmd_pade(cfg: RunConfig) -> list[Path]:
    ctx = cfg.ctx
    n = cfg.n
    approx = _pade(cfg, n)
    tie_set = {complex(t) for t in approx.tie_poles}
    groups = [("support", [p for p in approx.support_poles if complex(p) not in tie_set]),
              ("rational", [p for p in approx.rational_poles if complex(p) not in tie_set]),
              ("tie", approx.tie_poles)]
    obj = _common(cfg)
    obj.update({
        "n": n,
        "scheme": cfg.scheme_source,
        "denominator": [cdec(a, ctx) for a in approx.q.coeffs],
        "numerator": [cdec(a, ctx) for a in approx.p.coeffs],
        "poles": [cdec(p, ctx) for p in _sorted_poles(approx.poles)],
        "support_poles": [cdec(p, ctx) for p in _sorted_poles(approx.support_poles)],
        "rational_poles": [cdec(p, ctx) for p in _sorted_poles(approx.rational_poles)],
        "monic": approx.monic,
        "degenerate": approx.degenerate,
        "residual": _num(approx.residual),
    })
    svg = pole_svg(_support(cfg), [complex(p) for p in approx.poles], _marks(cfg), f"Pade n={n}")
    return _emit(cfg, f"pade_n{n}", obj, {"_poles": (["index", "re", "im", "class"], _pole_rows(ctx, groups))}, svg)


def _aak(cfg: RunConfig, hank, n: int) -> AakApproximant:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GapWarning)
        approx = aak_approximant(hank, n)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return approx


def cmd_aak(cfg: RunConfig) -> list[Path]:
    ctx = cfg.ctx
    n = cfg.n
    N = cfg.N if cfg.N is not None else default_truncation(n)
    hank = hankel_matrix(cfg.function, N, ctx)
    approx = _aak(cfg, hank, n)
    obj = _common(cfg)
    obj.update({
        "n": n,
        "N": N,
        "sigma": dec(approx.sigma, ctx),
        "sigma_next": dec(approx.sigma_next, ctx),
        "gap": _num(approx.gap),
        "simple": approx.simple,
        "irreducible": approx.irreducible,
        "singular_vector": [cdec(a, ctx) for a in approx.v.coeffs],
        "numerator": [cdec(a, ctx) for a in approx.numerator.coeffs],
        "poles": [cdec(p, ctx) for p in _sorted_poles(approx.poles)],
        "indeterminate": [cdec(p, ctx) for p in _sorted_poles(approx.indeterminate)],
        "tail_rate": _num(hank.tail_rate),
        "tail_bound": _num(hank.tail_bound),
    })
    rows = _pole_rows(ctx, [("inside", approx.poles), ("indeterminate", approx.indeterminate)])
    svg = pole_svg(_support(cfg), [complex(p) for p in approx.poles], _marks(cfg), f"AAK n={n} N={N}")
    return _emit(cfg, f"aak_n{n}", obj, {"_poles": (["index", "re", "im", "class"], rows)}, svg)


def _attraction_radius(cfg: RunConfig, eta) -> float:
    ctx = cfg.ctx
    with ctx.scope():
        dists = []
        if cfg.function.measure is not None:
            c, d = cfg.function.measure.bounds(ctx)
            dists.append(float(_dist_to_interval(eta, c, d)))
        dists += [float(abs(eta - r)) for r, _ in cfg.function.poles(ctx) if r != eta]
        return 0.25 * min(dists) if dists else 0.25


def cmd_sweep(cfg: RunConfig) -> list[Path]:
    ctx = cfg.ctx
    F = cfg.function
    if F.measure is None:
        raise InvalidInputError("sweep needs a measure part")
    ns = cfg.ns
    kinds = ["aak", "pade"] if cfg.approximant == "both" else [cfg.approximant]
    geom = build_geometry(F.measure, ctx=ctx)
    if "aak" in kinds and geom.rho is None:
        if cfg.approximant == "both":
            kinds.remove("aak")
        else:
            geom.require_condenser()
    rate_rows, ring_rows, report, last_poles = [], [], {}, {}
    poles_of_q = F.poles(ctx)
    if "aak" in kinds:
        N = cfg.N if cfg.N is not None else default_truncation(ns[-1])
        hank = hankel_matrix(F, N, ctx)
        observed, predicted, matches = [], [], {i: [] for i in range(len(poles_of_q))}
        for n in ns:
            approx = _aak(cfg, hank, n)
            pred = predict_ma(F, geom, n)
            observed.append(approx.sigma)
            predicted.append(pred.sigma)
            rate_rows.append(["aak", str(n), dec(approx.sigma, ctx), dec(pred.sigma, ctx)])
            for i, ring in enumerate(pred.rings):
                matches[i].append((match_pole_rings(approx.poles, ring, _attraction_radius(cfg, poles_of_q[i][0])), ring))
            last_poles["aak"] = approx.poles
        with ctx.scope():
            theory = 2 * float(gmpy2.log(geom.rho))
        fit = fit_rate(ns, observed, theory)
        report["aak"] = {"N": N, "slope": fit.slope, "theoretical_slope": theory, "relative_deviation": fit.relative_deviation}
        ring_rows += _ring_rows("aak", matches)
    if "pade" in kinds:
        with ctx.scope():
            z = to_mpc(cfg.z)
        szego = SzegoData(Weight.from_measure(F.measure, ctx), (geom.c, geom.d), ctx)
        observed, predicted, matches = [], [], {i: [] for i in range(len(poles_of_q))}
        value = eval_cauchy(F, z, ctx)
        for n in ns:
            approx = _pade(cfg, n)
            pred = predict_pade(F, n, cfg.scheme, geom, [z], szego)
            with ctx.scope():
                err = abs(value - approx(z))
                prd = abs(pred.error[0])
            observed.append(err)
            predicted.append(prd)
            rate_rows.append(["pade", str(n), dec(err, ctx), dec(prd, ctx)])
            for i, ring in enumerate(pred.rings):
                matches[i].append((match_pole_rings(approx.poles, ring, _attraction_radius(cfg, poles_of_q[i][0])), ring))
            last_poles["pade"] = approx.poles
        theory = fit_rate(ns, predicted).slope
        fit = fit_rate(ns, observed, theory)
        report["pade"] = {"z": cdec(z, ctx), "slope": fit.slope, "theoretical_slope": theory,
                          "relative_deviation": fit.relative_deviation, "scheme": cfg.scheme_source}
        ring_rows += _ring_rows("pade", matches)
    obj = _common(cfg)
    obj.update({"n_range": [ns[0], ns[-1]], "fits": report,
                "rates": [dict(zip(("approximant", "n", "observed", "predicted"), r)) for r in rate_rows],
                "rings": [dict(zip(_RING_HEADER, r)) for r in ring_rows]})
    tables = {"_rates": (["approximant", "n", "observed", "predicted"], rate_rows),
              "_rings": (_RING_HEADER, ring_rows)}
    written = _emit(cfg, "sweep", obj, tables, None)
    if "svg" in cfg.formats:
        for kind, poles in last_poles.items():
            svg = pole_svg(_support(cfg), [complex(p) for p in poles], _marks(cfg), f"{kind} n={ns[-1]}")
            written.append(write(cfg.out / f"sweep_{kind}_n{ns[-1]}.svg", svg))
    return written


_RING_HEADER = ["approximant", "n", "center_re", "center_im", "count", "expected", "mean_radius", "radius_ratio",
                "max_gap_error_deg", "predicted_shrink", "observed_shrink"]


def _ring_rows(kind: str, matches: dict) -> list[list[str]]:
    rows = []
    for items in matches.values():
        found = [m for m, _ in items]
        shrink = ring_shrink(found) if all(m.count for m in found) else []
        for j, (m, ring) in enumerate(items):
            obs = shrink[j - 1] if j >= 1 and len(shrink) >= j else float("nan")
            rows.append([kind, str(m.n), repr(m.center.real), repr(m.center.imag), str(m.count), str(m.expected),
                         repr(m.mean_radius), repr(m.radius_ratio), repr(m.max_gap_error_deg), repr(ring.shrink), repr(obs)])
    return rows


HANDLERS = {"moments": cmd_moments, "pade": cmd_pade, "aak": cmd_aak, "sweep": cmd_sweep}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="approx", description="Padé and AAK approximation of Cauchy transforms.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--preset", help="named function (overrides the config's function)")
    p.add_argument("--n", type=int, help="degree")
    p.add_argument("--n-range", dest="n_range", help="degree range a:b (inclusive) for sweep")
    p.add_argument("--N", type=int, help="Hankel truncation order for AAK")
    p.add_argument("--K", type=int, help="number of moments")
    p.add_argument("--precision", type=int, help="mantissa bits (default 256)")
    p.add_argument("--out", help="output directory (default ./out)")
    p.add_argument("--format", help="comma-separated subset of csv,json,svg")
    p.add_argument("--approximant", choices=("aak", "pade", "both"), help="what sweep runs (default both)")
    p.add_argument("--z", help="evaluation point for Padé errors in sweep (default 2)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = build_config(args)
        written = HANDLERS[cfg.command](cfg)
    except ApproxError as exc:
        print(json.dumps({"error": type(exc).__name__, "code": exc.code, "message": str(exc)}), file=sys.stderr)
        return exc.code
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
