"""Command line interface ``ctrw``.

Every command resolves its configuration from built-in defaults, an
optional JSON file (``--config``) and flags, in that order of precedence,
writes its artifacts under the output directory and records the resolved
configuration in ``manifest.json``. A manifest can be passed back through
``--config`` to reproduce the artifacts byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import CTRWError, ConfigError
from .models import ModelSpec

TOOL = "ctrwlimit"
COMMANDS = ("simulate", "limit-sample", "law", "converge", "check-matching", "verify")

# fields each command reads; anything else in a config file is rejected
_FIELDS = {
    "simulate": ("model", "seed", "t", "n", "reps", "threads", "max_steps"),
    "limit-sample": ("model", "seed", "t", "du", "reps", "threads", "max_cells"),
    "law": ("model", "t", "var", "bins", "r_max", "r_bins", "method", "rtol"),
    "converge": ("model", "seed", "t", "n_list", "reps", "du", "limit_reps", "reference",
                 "marginals", "threads"),
    "check-matching": ("model", "seed", "n", "reps", "queries", "horizon"),
    "verify": ("seed", "only", "threads"),
}
_DEFAULTS = {
    "t": 1.0, "reps": 100_000, "threads": 1, "var": "age", "bins": 200, "method": "auto",
    "rtol": 1e-7, "reference": "sample", "marginals": ["X", "Y", "A", "R"], "queries": 200,
    "horizon": 4.0, "max_steps": 10**8, "max_cells": 10**8, "only": None, "n": None,
    "du": None, "r_max": None, "r_bins": None, "limit_reps": None, "n_list": None,
}
_REQUIRED = {
    "simulate": ("model", "seed", "n"),
    "limit-sample": ("model", "seed"),
    "law": ("model",),
    "converge": ("model", "seed", "n_list"),
    "check-matching": ("model", "seed"),
    "verify": (),
}


# ------------------------------------------------------------------ config

def load_model(value, base_dir=None) -> ModelSpec:
    """Model from a dict, an inline JSON object or the path of a JSON file."""
    if isinstance(value, ModelSpec):
        return value
    if isinstance(value, dict):
        return ModelSpec.from_dict(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a JSON object or a file path, got {value!r}", "model")
    if value.lstrip().startswith("{"):
        try:
            return ModelSpec.from_dict(json.loads(value))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid inline JSON: {exc}", "model") from None
    path = value if base_dir is None or os.path.isabs(value) else os.path.join(base_dir, value)
    if not os.path.isfile(path):
        raise ConfigError(f"model file not found: {path}", "model")
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}", "model") from None
    return ModelSpec.from_dict(data)


def _read_config_file(path, command):
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}", "config")
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}", "config") from None
    if not isinstance(data, dict):
        raise ConfigError("must hold a JSON object", "config")
    if data.get("tool") == TOOL and "config" in data:
        if data.get("command") != command:
            raise ConfigError(f"manifest was written by {data.get('command')!r}, not {command!r}",
                              "command")
        data = data["config"]
    unknown = sorted(set(data) - set(_FIELDS[command]))
    if unknown:
        raise ConfigError(f"unknown field(s) for {command}: {', '.join(unknown)}", unknown[0])
    return data


def _int(value, name, lo=None):
    if isinstance(value, bool):
        raise ConfigError(f"must be an integer, got {value!r}", name)
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, (int, np.integer)):
        raise ConfigError(f"must be an integer, got {value!r}", name)
    if lo is not None and value < lo:
        raise ConfigError(f"must be >= {lo}, got {value}", name)
    return int(value)


def _float(value, name, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"must be a number, got {value!r}", name)
    value = float(value)
    if not np.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"must be a finite number > 0, got {value}", name)
    return value


def resolve_config(command, flags: dict, config_path=None) -> dict:
    """Merge defaults, the JSON config (or manifest) at ``config_path`` and flags.

    Flags that are None are treated as unset. The result holds only the
    fields ``command`` reads, with the model as a plain dict.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", "command")
    fields = _FIELDS[command]
    cfg = {k: _DEFAULTS[k] for k in fields if k in _DEFAULTS}
    base_dir = None
    if config_path is not None:
        cfg.update(_read_config_file(config_path, command))
        base_dir = os.path.dirname(os.path.abspath(config_path))
    cfg.update({k: v for k, v in flags.items() if k in fields and v is not None})
    for name in _REQUIRED[command]:
        if cfg.get(name) is None:
            raise ConfigError("is required" + (" (no default seed)" if name == "seed" else ""), name)

    out = {}
    if "model" in fields:
        out["model"] = load_model(cfg["model"], base_dir).to_dict()
    if "seed" in fields and cfg.get("seed") is not None:
        out["seed"] = _int(cfg["seed"], "seed", 0)
    if "t" in fields:
        out["t"] = _float(cfg["t"], "t")
    for name in ("reps", "bins", "queries", "threads", "max_steps", "max_cells"):
        if name in fields:
            out[name] = _int(cfg[name], name, 1)
    for name in ("n", "limit_reps", "r_bins"):
        if name in fields:
            out[name] = None if cfg.get(name) is None else _int(cfg[name], name, 1)
    if "du" in fields:
        out["du"] = 1e-3 * out["t"] if cfg.get("du") is None else _float(cfg["du"], "du")
    if "r_max" in fields:
        out["r_max"] = 2.0 * out["t"] if cfg.get("r_max") is None else _float(cfg["r_max"], "r_max")
    if "horizon" in fields:
        out["horizon"] = _float(cfg["horizon"], "horizon")
    if "rtol" in fields:
        out["rtol"] = _float(cfg["rtol"], "rtol")
    if "n_list" in fields:
        nl = cfg["n_list"]
        if isinstance(nl, str):
            nl = [s for s in nl.replace(",", " ").split() if s]
            try:
                nl = [int(float(s)) for s in nl]
            except ValueError:
                raise ConfigError(f"expected integers, got {cfg['n_list']!r}", "n_list") from None
        if not isinstance(nl, (list, tuple)) or not nl:
            raise ConfigError("must be a non-empty list of integers", "n_list")
        out["n_list"] = [_int(v, "n_list", 1) for v in nl]
    if "var" in fields:
        if cfg["var"] not in ("age", "ar", "atom"):
            raise ConfigError(f"must be one of age, ar, atom; got {cfg['var']!r}", "var")
        out["var"] = cfg["var"]
    if "method" in fields:
        if cfg["method"] not in ("auto", "laplace"):
            raise ConfigError(f"must be auto or laplace; got {cfg['method']!r}", "method")
        out["method"] = cfg["method"]
    if "reference" in fields:
        if cfg["reference"] not in ("sample", "exact"):
            raise ConfigError(f"must be sample or exact; got {cfg['reference']!r}", "reference")
        out["reference"] = cfg["reference"]
    if "marginals" in fields:
        m = cfg["marginals"]
        m = m.split(",") if isinstance(m, str) else list(m)
        bad = [x for x in m if x not in ("X", "Y", "A", "R")]
        if bad or not m:
            raise ConfigError(f"choose from X, Y, A, R; got {m!r}", "marginals")
        out["marginals"] = m
    if "only" in fields:
        only = cfg.get("only")
        if isinstance(only, str):
            only = [s for s in only.replace(",", " ").split() if s]
        if only is not None:
            try:
                only = sorted({int(v) for v in only})
            except (TypeError, ValueError):
                raise ConfigError(f"expected criterion numbers, got {cfg['only']!r}", "only") from None
            if not only or only[0] < 1 or only[-1] > 10:
                raise ConfigError("criteria are numbered 1 to 10", "only")
        out["only"] = only
    return out


def output_dir(flag):
    path = flag or os.environ.get("CTRW_OUTPUT_DIR") or "."
    os.makedirs(path, exist_ok=True)
    return path


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(directory, command, cfg, outputs):
    """``manifest.json`` with the resolved config and output hashes; no timestamps."""
    manifest = {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config": cfg,
        "outputs": {name: _sha256(os.path.join(directory, name)) for name in sorted(outputs)},
    }
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# ----------------------------------------------------------------- commands

def _write_samples(directory, header, columns):
    from .limit import write_table
    write_table(os.path.join(directory, "samples.csv"), header, columns)
    return "samples.csv"


def cmd_simulate(cfg, out, plot):
    from .walk import ctrw_batch
    model = ModelSpec.from_dict(cfg["model"])
    b = ctrw_batch(model, cfg["n"], cfg["t"], cfg["reps"], cfg["seed"],
                   threads=cfg["threads"], max_steps=cfg["max_steps"])
    d = model.d
    header = ",".join(["replica"] + [f"x_{j + 1}" for j in range(d)] + ["a"]
                      + [f"y_{j + 1}" for j in range(d)] + ["r", "renewals"])
    replica = np.arange(len(b), dtype=np.int64)
    files = [_write_samples(out, header, [replica, b.X, b.A, b.Y, b.R, b.N])]
    if plot:
        files.append(_plot_samples(out, b.X[:, 0], b.Y[:, 0], b.A, f"CTRW n={cfg['n']}"))
    print(f"wrote {len(b)} CTRW states (n={cfg['n']}, t={cfg['t']}) to {out}")
    return files


def cmd_limit_sample(cfg, out, plot):
    from .limit import batch_sample
    model = ModelSpec.from_dict(cfg["model"])
    b = batch_sample(model, cfg["t"], cfg["du"], cfg["reps"], cfg["seed"],
                     threads=cfg["threads"], max_cells=cfg["max_cells"])
    b.to_csv(os.path.join(out, "samples.csv"))
    files = ["samples.csv"]
    if plot:
        files.append(_plot_samples(out, b.X[:, 0], b.Y[:, 0], b.A, f"limit du={cfg['du']:g}"))
    print(f"wrote {len(b)} limit draws (du={cfg['du']:g}, t={cfg['t']}); "
          f"on_M fraction {float(np.mean(b.on_M)):.6f}")
    return files


def cmd_law(cfg, out, plot):
    from . import laws
    model = ModelSpec.from_dict(cfg["model"])
    t = cfg["t"]
    if cfg["var"] == "atom":
        if cfg["method"] == "laplace" and model.gamma > 0 and model.kind != "pure-drift":
            res = laws.renewal_density_numeric(model, t, rtol=cfg["rtol"])
            mass = model.gamma * res.value
            extra = {"inversion": res.diagnostics}
        else:
            mass = laws.atom_mass_R0(model, t, method=cfg["method"], rtol=cfg["rtol"])
            extra = {}
        from .limit import write_table
        write_table(os.path.join(out, "law.csv"), "t,atom_mass", [np.array([t]), np.array([mass])])
        with open(os.path.join(out, "law.json"), "w") as fh:
            json.dump({"model": model.to_dict(), "t": t, "variable": "atom",
                       "method": cfg["method"], "rtol": cfg["rtol"], "atom_at_zero": mass,
                       **extra}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"P(R_t = 0) = {mass:.10g}")
        return ["law.csv", "law.json"]
    if cfg["var"] == "age":
        grid = laws.age_grid(model, t, cfg["bins"])
    else:
        grid = laws.joint_ar_grid(model, t, cfg["bins"], cfg["r_max"], cfg["r_bins"])
    grid.write(out, "law")
    files = ["law.csv", "law.json"]
    if plot:
        files.append(_plot_law(out, grid))
    print(f"wrote {cfg['var']} law on {grid.values.shape} cells; mass {grid.total_mass:.6f}, "
          f"atom {grid.atom_at_zero:.6f}")
    return files


def cmd_converge(cfg, out, plot):
    from .stats import convergence_sweep, exact_references
    model = ModelSpec.from_dict(cfg["model"])
    ref = exact_references(model, cfg["t"]) if cfg["reference"] == "exact" else None
    table = convergence_sweep(model, cfg["t"], cfg["n_list"], cfg["reps"], cfg["seed"],
                              du=cfg["du"], limit_reps=cfg["limit_reps"], reference=ref,
                              marginals=cfg["marginals"], threads=cfg["threads"])
    table.to_csv(os.path.join(out, "sweep.csv"))
    files = ["sweep.csv"]
    for m in cfg["marginals"]:
        print(m, " ".join(f"n={n}:{d:.5f}" for n, d in table.distances(m)))
    if plot:
        files.append(_plot_sweep(out, table, cfg["marginals"]))
    return files


def cmd_check_matching(cfg, out, plot):
    from .walk import matching_audit
    model = ModelSpec.from_dict(cfg["model"])
    rep = matching_audit(model, cfg["reps"], cfg["seed"], n=cfg["n"], queries=cfg["queries"],
                         horizon_t=cfg["horizon"])
    rep.to_csv(os.path.join(out, "matching.csv"))
    print(f"checks: {rep.checks}")
    print(f"mismatches: {rep.mismatches}")
    if rep.mismatches:
        raise _Failed(1, ["matching.csv"])
    return ["matching.csv"]


def cmd_verify(cfg, out, plot):
    from .acceptance import run_suite, write_report
    results = run_suite(only=cfg["only"], seed=cfg.get("seed"), threads=cfg["threads"],
                        workdir=out)
    write_report(results, os.path.join(out, "acceptance.csv"))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if failed:
        raise _Failed(1, ["acceptance.csv"])
    return ["acceptance.csv"]


class _Failed(Exception):
    """A check ran to completion and failed; artifacts are still recorded."""

    def __init__(self, code, files=()):
        super().__init__(code)
        self.code = code
        self.files = list(files)


_HANDLERS = {
    "simulate": cmd_simulate,
    "limit-sample": cmd_limit_sample,
    "law": cmd_law,
    "converge": cmd_converge,
    "check-matching": cmd_check_matching,
    "verify": cmd_verify,
}


# -------------------------------------------------------------------- plots

def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise ConfigError("matplotlib is not installed (pip install ctrwlimit[plot])",
                          "plot") from None
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = TOOL
    import matplotlib.pyplot as plt
    return plt


def _plot_samples(out, x, y, a, title):
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    lo, hi = np.quantile(np.concatenate([x, y]), [0.005, 0.995])
    ax1.hist(x, bins=100, range=(lo, hi), histtype="step", density=True, label="X (lagging)")
    ax1.hist(y, bins=100, range=(lo, hi), histtype="step", density=True, label="Y (leading)")
    ax1.legend()
    ax2.hist(a, bins=100, histtype="step", density=True)
    ax2.set_xlabel("age A")
    fig.suptitle(title)
    fig.savefig(os.path.join(out, "samples.svg"))
    plt.close(fig)
    return "samples.svg"


def _plot_law(out, grid):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    if len(grid.axes) == 1:
        ax.plot(grid.axes[0].centers, grid.values)
        ax.set_xlabel(grid.axes[0].name)
        ax.set_ylabel("density")
    else:
        a, r = grid.axes
        im = ax.imshow(grid.values.T, origin="lower", aspect="auto",
                       extent=(a.lo, a.hi, r.lo, r.hi))
        fig.colorbar(im, ax=ax)
        ax.set_xlabel(a.name)
        ax.set_ylabel(r.name)
    fig.savefig(os.path.join(out, "law.svg"))
    plt.close(fig)
    return "law.svg"


def _plot_sweep(out, table, marginals):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    for m in marginals:
        n, dist = zip(*table.distances(m))
        ax.loglog(n, dist, "o-", label=m)
    ax.set_xlabel("n")
    ax.set_ylabel("KS distance")
    ax.legend()
    fig.savefig(os.path.join(out, "sweep.svg"))
    plt.close(fig)
    return "sweep.svg"


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctrw", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def common(sp, seed=True, model=True, threads=True):
        sp.add_argument("--config", help="JSON config file or a manifest.json to re-run")
        if model:
            sp.add_argument("--model", help="model JSON file or inline JSON object")
        if seed:
            sp.add_argument("--seed", type=int, help="master seed (required)")
        if threads:
            sp.add_argument("--threads", type=int, help="worker threads (default 1)")
        sp.add_argument("--output-dir", help="artifact directory (default $CTRW_OUTPUT_DIR or .)")
        sp.add_argument("--plot", action="store_true", help="also write SVG figures")

    sp = sub.add_parser("simulate", help="CTRW states at scale n")
    common(sp)
    sp.add_argument("--t", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--reps", type=int)

    sp = sub.add_parser("limit-sample", help="joint limit draws (X, A, Y, R)")
    common(sp)
    sp.add_argument("--t", type=float)
    sp.add_argument("--du", type=float, help="skeleton cell width (default 1e-3 t)")
    sp.add_argument("--reps", type=int)

    sp = sub.add_parser("law", help="analytic density grids and the R = 0 atom")
    common(sp, seed=False, threads=False)
    sp.add_argument("--t", type=float)
    sp.add_argument("--var", choices=("age", "ar", "atom"))
    sp.add_argument("--bins", type=int)
    sp.add_argument("--r-max", type=float, dest="r_max")
    sp.add_argument("--r-bins", type=int, dest="r_bins")
    sp.add_argument("--method", choices=("auto", "laplace"))
    sp.add_argument("--rtol", type=float, help="Laplace inversion tolerance")

    sp = sub.add_parser("converge", help="KS distances of CTRW marginals to the limit")
    common(sp)
    sp.add_argument("--t", type=float)
    sp.add_argument("--n-list", dest="n_list", help="comma separated scales")
    sp.add_argument("--reps", type=int)
    sp.add_argument("--du", type=float)
    sp.add_argument("--limit-reps", type=int, dest="limit_reps")
    sp.add_argument("--reference", choices=("sample", "exact"))
    sp.add_argument("--marginals", help="comma separated subset of X,Y,A,R")

    sp = sub.add_parser("check-matching", help="exactness audit of the Phi/Psi matching")
    common(sp, threads=False)
    sp.add_argument("--n", type=int, help="scale (default: uniform on 1..100 per realization)")
    sp.add_argument("--reps", type=int)
    sp.add_argument("--queries", type=int)
    sp.add_argument("--horizon", type=float)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    common(sp, model=False)
    sp.add_argument("--only", help="comma separated criterion numbers")
    return p


def run(argv=None) -> int:
    """Parse ``argv`` and run one command; returns the exit code."""
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "output_dir", "plot")}
    try:
        cfg = resolve_config(args.command, flags, args.config)
        out = output_dir(args.output_dir)
        try:
            files = _HANDLERS[args.command](cfg, out, args.plot)
            code = 0
        except _Failed as exc:
            files, code = exc.files, exc.code
        data = [f for f in files if not f.endswith(".svg")]
        write_manifest(out, args.command, cfg, data)
        return code
    except CTRWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
