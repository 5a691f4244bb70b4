"""Batch front-end: ``linstat run CONFIG`` and ``linstat validate CONFIG``.

A config is one JSON document, for example::

    {"model": {"kind": "quartic", "m2": 3, "g": 1},
     "experiment": "variance-sweep",
     "n_values": [40, 41, 42],
     "test_function": {"kind": "linear", "t": 1},
     "output": {"path": "sweep.csv", "format": "csv"}}

Output tables have the columns n, finite_value, limit_value, discrepancy,
case_tag, with floats written to 17 significant digits, plus a sidecar
``<path>.meta.json`` echoing the canonical config and the conventions used.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .equilibrium import (Potential, equilibrium_measure, euler_lagrange_residual,
                          minimize_energy)
from .errors import ConfigError, LinstatError, NumericError
from .fluctuations import (counting_covariance, fredholm_sine_det, from_spec, gue_counting_variance,
                           laplace_exact, limit_law_q2, scaled, sine_kernel_variance, variance_exact,
                           variance_limit_q1, variance_limit_q2_sym)
from .orthopoly import kernel_for, stieltjes_recurrence

EXPERIMENTS = ("equilibrium", "recurrence", "variance-sweep", "laplace", "counting", "local")
MODEL_KINDS = ("gaussian", "quartic", "vbp", "generic")
FORMATS = ("csv", "json")
COLUMNS = ("n", "finite_value", "limit_value", "discrepancy", "case_tag")
CONVENTIONS = {
    "cn_shift": "R^2(x) = (b-a)^2/4 + ab cn^2(2K(k)(x+1/2)|k), even n <-> x = 0",
    "modulus": "elliptic modulus k = a/b in (0, 1) for K, E; k^2 = 4ab/(a+b)^2 for the cn form",
    "omega": "omega = -b/(4K(a/b))",
    "fourier": "phihat(k) = (1/2pi) int exp(ikt) phi(t) dt",
}
TF_COMPAT = {
    "variance-sweep": ("linear", "polynomial", "gaussian-bump", "indicator"),
    "laplace": ("linear", "polynomial", "gaussian-bump"),
    "counting": ("indicator",),
    "local": ("gaussian-bump",),
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    model: dict
    experiment: str
    n_values: tuple
    test_function: dict = None
    intervals: tuple = ()
    k_range: tuple = (-2, 2)
    lam0: float = 0.0
    output: dict = field(default_factory=lambda: {"path": "results.csv", "format": "csv"})
    tolerances: dict = field(default_factory=dict)

    def potential(self):
        m = self.model
        if m["kind"] == "gaussian":
            return Potential.gaussian(m["g"])
        if m["kind"] == "quartic":
            return Potential.quartic(m["m2"], m["g"])
        if m["kind"] == "vbp":
            return Potential.vbp(m["coefficients"], m["g"])
        return Potential.generic(m["coefficients"], m["g"])

    def to_dict(self):
        d = {"model": self.model, "experiment": self.experiment, "n_values": list(self.n_values),
             "output": self.output, "tolerances": self.tolerances}
        if self.test_function is not None:
            d["test_function"] = self.test_function
        if self.intervals:
            d["intervals"] = [list(iv) for iv in self.intervals]
        if self.experiment == "recurrence":
            d["k_range"] = list(self.k_range)
        if self.experiment == "local":
            d["lam0"] = self.lam0
        return d

    def canonical(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _num(errors, path, value, positive=False, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
    if ok and integer and float(value) != int(value):
        ok = False
    if ok and positive and not value > 0:
        ok = False
    if not ok:
        kind = "positive " if positive else ""
        errors.append((path, f"expected a {kind}{'integer' if integer else 'number'}, got {value!r}"))
        return None
    return int(value) if integer else float(value)


def _validate_model(errors, raw):
    if not isinstance(raw, dict):
        errors.append(("model", "expected an object"))
        return None
    kind = raw.get("kind")
    if kind not in MODEL_KINDS:
        errors.append(("model.kind", f"expected one of {MODEL_KINDS}, got {kind!r}"))
        return None
    g = _num(errors, "model.g", raw.get("g", 1.0), positive=True)
    out = {"kind": kind, "g": g}
    if kind == "quartic":
        out["m2"] = _num(errors, "model.m2", raw.get("m2"))
    elif kind in ("vbp", "generic"):
        coeffs = raw.get("coefficients")
        if not isinstance(coeffs, list) or not coeffs:
            errors.append(("model.coefficients", "expected a nonempty list of numbers"))
        else:
            out["coefficients"] = [_num(errors, f"model.coefficients[{i}]", c) for i, c in enumerate(coeffs)]
    extra = set(raw) - {"kind", "g", "m2", "coefficients"}
    for k in sorted(extra):
        errors.append((f"model.{k}", "unknown field"))
    return out


TF_FIELDS = {
    "linear": {"t": False},
    "polynomial": {"coefficients": True},
    "gaussian-bump": {"amplitude": False, "center": False, "width": False},
    "indicator": {"a": True, "b": True},
}


def _validate_tf(errors, raw, path="test_function"):
    if not isinstance(raw, dict):
        errors.append((path, "expected an object"))
        return None
    kind = raw.get("kind")
    if kind not in TF_FIELDS:
        errors.append((f"{path}.kind", f"expected one of {tuple(TF_FIELDS)}, got {kind!r}"))
        return None
    out = {"kind": kind}
    for name, required in TF_FIELDS[kind].items():
        if name not in raw:
            if required:
                errors.append((f"{path}.{name}", "missing required field"))
            continue
        if name == "coefficients":
            v = raw[name]
            if not isinstance(v, list) or not v:
                errors.append((f"{path}.coefficients", "expected a nonempty list of numbers"))
            else:
                out[name] = [_num(errors, f"{path}.coefficients[{i}]", c) for i, c in enumerate(v)]
        else:
            out[name] = _num(errors, f"{path}.{name}", raw[name], positive=(name == "width"))
    for k in sorted(set(raw) - set(TF_FIELDS[kind]) - {"kind"}):
        errors.append((f"{path}.{k}", "unknown field"))
    if kind == "indicator" and out.get("a") is not None and out.get("b") is not None and not out["a"] < out["b"]:
        errors.append((path, "indicator needs a < b"))
    return out


def validate(text):
    """Parse and check a raw JSON config; returns an ExperimentConfig or raises ConfigError."""
    errors = []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<root>", str(exc))]) from None
    if not isinstance(raw, dict):
        raise ConfigError([("<root>", "expected an object")])
    known = {"model", "experiment", "n_values", "test_function", "intervals", "k_range", "lam0",
             "output", "tolerances"}
    for k in sorted(set(raw) - known):
        errors.append((k, "unknown field"))

    model = _validate_model(errors, raw.get("model")) if "model" in raw else errors.append(("model", "missing required field"))
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        errors.append(("experiment", f"expected one of {EXPERIMENTS}, got {exp!r}"))

    nv = raw.get("n_values")
    n_values = ()
    if not isinstance(nv, list) or not nv:
        errors.append(("n_values", "expected a nonempty list of positive integers"))
    else:
        vals = [_num(errors, f"n_values[{i}]", v, positive=True, integer=True) for i, v in enumerate(nv)]
        if None not in vals:
            if any(b <= a for a, b in zip(vals, vals[1:])):
                errors.append(("n_values", "values must be strictly ascending"))
            n_values = tuple(vals)

    tf = None
    if "test_function" in raw:
        tf = _validate_tf(errors, raw["test_function"])
    if exp in TF_COMPAT:
        if tf is None and exp != "counting" and "test_function" not in raw:
            errors.append(("test_function", f"required for experiment {exp!r}"))
        elif tf is not None and tf["kind"] not in TF_COMPAT[exp]:
            errors.append(("test_function.kind", f"{tf['kind']!r} is not compatible with experiment {exp!r}"))
    elif tf is not None:
        errors.append(("test_function", f"not used by experiment {exp!r}"))

    intervals = ()
    if "intervals" in raw:
        iv = raw["intervals"]
        if exp != "counting":
            errors.append(("intervals", f"only used by experiment 'counting'"))
        elif not isinstance(iv, list) or len(iv) not in (1, 2):
            errors.append(("intervals", "expected one or two [a, b] pairs"))
        else:
            parsed = []
            for i, pair in enumerate(iv):
                if not isinstance(pair, list) or len(pair) != 2:
                    errors.append((f"intervals[{i}]", "expected [a, b]"))
                    continue
                a = _num(errors, f"intervals[{i}][0]", pair[0])
                b = _num(errors, f"intervals[{i}][1]", pair[1])
                if a is not None and b is not None:
                    if not a < b:
                        errors.append((f"intervals[{i}]", "needs a < b"))
                    parsed.append((a, b))
            intervals = tuple(parsed)
    if exp == "counting" and not intervals:
        if tf is not None and tf.get("kind") == "indicator" and "a" in tf and "b" in tf:
            intervals = ((tf["a"], tf["b"]),)
        elif "intervals" not in raw:
            errors.append(("intervals", "counting needs intervals or an indicator test function"))

    k_range = (-2, 2)
    if "k_range" in raw:
        kr = raw["k_range"]
        if exp != "recurrence":
            errors.append(("k_range", "only used by experiment 'recurrence'"))
        elif not isinstance(kr, list) or len(kr) != 2:
            errors.append(("k_range", "expected [k_min, k_max]"))
        else:
            k0 = _num(errors, "k_range[0]", kr[0], integer=True)
            k1 = _num(errors, "k_range[1]", kr[1], integer=True)
            if k0 is not None and k1 is not None:
                if k1 < k0:
                    errors.append(("k_range", "needs k_min <= k_max"))
                elif n_values and min(n_values) + k0 < 1:
                    errors.append(("k_range", "n + k_min must be >= 1"))
                k_range = (k0, k1)

    lam0 = 0.0
    if "lam0" in raw:
        if exp != "local":
            errors.append(("lam0", "only used by experiment 'local'"))
        else:
            lam0 = _num(errors, "lam0", raw["lam0"])

    out = raw.get("output", {"path": "results.csv", "format": "csv"})
    output = None
    if not isinstance(out, dict):
        errors.append(("output", "expected an object"))
    else:
        path, fmt = out.get("path"), out.get("format", "csv")
        if not isinstance(path, str) or not path:
            errors.append(("output.path", "expected a nonempty string"))
        if fmt not in FORMATS:
            errors.append(("output.format", f"expected one of {FORMATS}, got {fmt!r}"))
        for k in sorted(set(out) - {"path", "format"}):
            errors.append((f"output.{k}", "unknown field"))
        output = {"path": path, "format": fmt}

    tol = raw.get("tolerances", {})
    tolerances = {}
    if not isinstance(tol, dict):
        errors.append(("tolerances", "expected an object"))
    else:
        for k in sorted(tol):
            v = _num(errors, f"tolerances.{k}", tol[k], positive=True)
            if v is not None:
                tolerances[k] = v

    if model is not None and not any(p.startswith("model") for p, _ in errors):
        try:
            ExperimentConfig(model=model, experiment="equilibrium", n_values=(1,)).potential()
        except LinstatError as exc:
            errors.append(("model", str(exc)))

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(model=model, experiment=exp, n_values=n_values, test_function=tf,
                            intervals=intervals, k_range=k_range, lam0=lam0, output=output,
                            tolerances=tolerances)


# ---------------------------------------------------------------------------
# result tables
# ---------------------------------------------------------------------------

def _f17(x):
    return "" if x is None else format(x, ".17g")


def _parse_float(s):
    return None if s == "" else float(s)


@dataclass
class ResultTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    @staticmethod
    def row(n, finite, limit, tag):
        finite = float(finite)
        limit = None if limit is None else float(limit)
        disc = None if limit is None else abs(finite - limit)
        return {"n": int(n), "finite_value": finite, "limit_value": limit, "discrepancy": disc,
                "case_tag": tag}

    @property
    def columns(self):
        return {c: [r[c] for r in self.rows] for c in COLUMNS}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([r["n"], _f17(r["finite_value"]), _f17(r["limit_value"]),
                        _f17(r["discrepancy"]), r["case_tag"]])
        return buf.getvalue()

    def to_json(self):
        rows = ",\n  ".join(json.dumps([r[c] for c in COLUMNS]) for r in self.rows)
        return '{"columns": %s,\n "rows": [\n  %s\n ]}\n' % (json.dumps(list(COLUMNS)), rows)

    @classmethod
    def _rebuild(cls, raw_rows, metadata):
        rows = [cls.row(n, f, l, t) for n, f, l, _, t in raw_rows]
        return cls(rows=rows, metadata=metadata or {})

    @classmethod
    def from_csv(cls, text, metadata=None):
        rd = csv.reader(io.StringIO(text))
        header = next(rd)
        if tuple(header) != COLUMNS:
            raise ConfigError([("header", ",".join(header))])
        raw = [(int(n), float(f), _parse_float(l), _parse_float(d), t) for n, f, l, d, t in rd]
        return cls._rebuild(raw, metadata)

    @classmethod
    def from_json(cls, text, metadata=None):
        doc = json.loads(text)
        if tuple(doc.get("columns", ())) != COLUMNS:
            raise ConfigError([("columns", str(doc.get("columns")))])
        return cls._rebuild(doc["rows"], metadata)

    def __eq__(self, other):
        return isinstance(other, ResultTable) and self.rows == other.rows


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _exp_equilibrium(cfg, V, n):
    exact = equilibrium_measure(V)
    m = minimize_energy(V, resolution=max(int(n), 200), polish=True)
    rows = []
    ex, got = exact.support.endpoints, m.support.endpoints
    if len(ex) == len(got):
        for j, (e, g) in enumerate(zip(ex, got)):
            rows.append(ResultTable.row(n, g, e, f"endpoint_{j}"))
    rows.append(ResultTable.row(n, euler_lagrange_residual(V, m), 0.0, "el_residual"))
    return rows


def _recurrence_limits(V, n, ks):
    meas = equilibrium_measure(V)
    if V.is_quartic_sym:
        (_, _), (a, b) = meas.support.bands
        return [(b - (-1.0) ** (n + k) * a) / 2.0 for k in ks]
    if meas.support.q == 1:
        return [0.25 * (meas.support.upper - meas.support.lower)] * len(ks)
    return [None] * len(ks)


def _exp_recurrence(cfg, V, n):
    k0, k1 = cfg.k_range
    ks = list(range(k0, k1 + 1))
    table = stieltjes_recurrence(V, n, max(n + k1, n) + 1)
    lims = _recurrence_limits(V, n, ks)
    return [ResultTable.row(n, table.r[n + k - 1], lim, f"k={k:+d}") for k, lim in zip(ks, lims)]


def _limit_variance(V, phi, n):
    meas = equilibrium_measure(V)
    if V.is_quartic_sym and phi.is_c1:
        (_, _), (a, b) = meas.support.bands
        par = "even" if n % 2 == 0 else "odd"
        return variance_limit_q2_sym(phi, a, b, par), par
    if meas.support.q == 1 and phi.is_c1:
        lo, hi = meas.support.lower, meas.support.upper
        return variance_limit_q1(phi, 0.25 * (hi - lo), 0.5 * (hi + lo)), "q1"
    return None, ""


def _exp_variance(cfg, V, n):
    phi = from_spec(cfg.test_function)
    K = kernel_for(V, n)
    lim, tag = _limit_variance(V, phi, n)
    return [ResultTable.row(n, variance_exact(K, phi), lim, tag or "finite")]


def _exp_laplace(cfg, V, n):
    phi = from_spec(cfg.test_function)
    K = kernel_for(V, n)
    lz = laplace_exact(K, phi)
    meas = equilibrium_measure(V)
    if V.is_quartic_sym and phi.kind == "linear":
        (_, _), (a, b) = meas.support.bands
        lim, tag = float(limit_law_q2(a, b).F(phi.params["t"], (n / 2.0) % 1.0)), "limit-law"
    else:
        v, _ = _limit_variance(V, phi, n)
        if V.is_quartic_sym and phi.is_c1:
            # the generalized CLT is only claimed for even phi
            even = np.allclose(phi(np.linspace(-3, 3, 61)), phi(-np.linspace(-3, 3, 61)))
            if not even:
                v = None
        lim, tag = (None, "finite") if v is None else (0.5 * v, "clt")
    return [ResultTable.row(n, lz, lim, tag)]


def _exp_counting(cfg, V, n):
    K = kernel_for(V, n)
    if len(cfg.intervals) == 1:
        rep = gue_counting_variance(K, cfg.intervals[0])
    else:
        rep = counting_covariance(K, *cfg.intervals)
    return [ResultTable.row(n, rep.finite_n_value, rep.applicable_limit, rep.case_tag)]


def _exp_local(cfg, V, n):
    base = from_spec(cfg.test_function)
    meas = equilibrium_measure(V)
    rho0 = float(np.atleast_1d(meas(np.array([cfg.lam0])))[0])
    phin = scaled(base, cfg.lam0, 1.0, n)
    K = kernel_for(V, n)
    return [ResultTable.row(n, variance_exact(K, phin), sine_kernel_variance(base, rho0), "variance"),
            ResultTable.row(n, laplace_exact(K, phin), fredholm_sine_det(base, rho0), "log-laplace")]


RUNNERS = {"equilibrium": _exp_equilibrium, "recurrence": _exp_recurrence,
           "variance-sweep": _exp_variance, "laplace": _exp_laplace,
           "counting": _exp_counting, "local": _exp_local}


def _slope_row(rows, limit):
    ns = np.array([r["n"] for r in rows], dtype=float)
    ys = np.array([r["finite_value"] for r in rows])
    slope = float(np.polyfit(np.log(ns), ys, 1)[0])
    return ResultTable.row(int(ns[-1]), slope, limit, "slope")


def run(config, workers=1, out=None, write=True):
    """Run a validated config; rows are ordered by n whatever the worker count."""
    V = config.potential()
    fn = RUNNERS[config.experiment]

    def one(n):
        try:
            return fn(config, V, n)
        except NumericError as exc:
            raise type(exc)(f"{config.experiment} at n = {n}: {exc}") from exc

    if workers > 1 and len(config.n_values) > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            chunks = list(pool.map(one, config.n_values))
    else:
        chunks = [one(n) for n in config.n_values]
    rows = [r for chunk in chunks for r in chunk]
    if config.experiment == "counting" and len(config.n_values) >= 2:
        tag = rows[0]["case_tag"]
        slopes = {"variance": 1 / math.pi ** 2, "touching-outside": -0.5 / math.pi ** 2,
                  "touching-inside": 0.5 / math.pi ** 2}
        if tag in slopes:
            rows.append(_slope_row(rows, slopes[tag]))
    table = ResultTable(rows=rows, metadata=metadata(config))
    if write:
        write_table(table, config, out)
    return table


def metadata(config):
    import scipy
    from . import __version__
    return {"config": config.to_dict(), "conventions": CONVENTIONS, "tolerances": config.tolerances,
            "versions": {"linstat": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "python": platform.python_version()}}


def write_table(table, config, out=None):
    path = Path(out or config.output["path"])
    fmt = config.output["format"]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_csv() if fmt == "csv" else table.to_json())
    Path(str(path) + ".meta.json").write_text(json.dumps(table.metadata, sort_keys=True, indent=2) + "\n")
    return path


def load_table(path, fmt=None):
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    meta_path = Path(str(path) + ".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    text = path.read_text()
    return ResultTable.from_json(text, meta) if fmt == "json" else ResultTable.from_csv(text, meta)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="linstat", description="Run linear-statistics experiments from JSON configs.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out", default=None, help="override the output path")
    v = sub.add_parser("validate", help="check a config and print its canonical form")
    v.add_argument("config")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = validate(text)
    except ConfigError as exc:
        for path, msg in exc.errors:
            print(f"{path}: {msg}", file=sys.stderr)
        return 2
    if args.command == "validate":
        sys.stdout.write(cfg.canonical())
        return 0
    if args.workers < 1:
        print("--workers: must be >= 1", file=sys.stderr)
        return 2
    try:
        table = run(cfg, workers=args.workers, out=args.out)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {len(table.rows)} rows to {args.out or cfg.output['path']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
