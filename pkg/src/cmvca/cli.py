"""Batch experiment runner.

Usage::

    cmvca --config run.cfg [--out DIR] [--<key> VALUE ...]

The config file holds ``key = value`` lines (``#`` starts a comment); any key
may also be given as a ``--key`` flag, which takes precedence. Results land in
``curves.csv``, ``rayleigh.csv``, ``summary.csv`` and ``run.json`` under
``out.dir``.

Exit codes: 0 success, 1 config error, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .dataio import Dataset, load_csv, make_blobs, split
from .errors import ConfigError, DataError, NumericError
from .experiment import KERNEL_MODES, METHODS, run_seed

log = logging.getLogger("cmvca")

DEFAULTS = {
    "data.path": None,
    "data.test_path": None,
    "data.has_header": "false",
    "data.synthetic.n_per_class": None,
    "data.synthetic.means": None,
    "data.synthetic.stddev": "1.0",
    "data.synthetic.seed": "0",
    "kernel.mode": "exact",
    "kernel.sigma": "heuristic",
    "kernel.rank_tol": "1e-10",
    "approx.n": "1000",
    "methods": ",".join(METHODS),
    "m_grid": "1..r",
    "split.fraction": "0.5",
    "seeds": "0",
    "out.dir": "results",
}
VALID_KEYS = tuple(DEFAULTS)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(
                f"{source}:{lineno}: unknown key {key!r}; valid keys: {', '.join(VALID_KEYS)}"
            )
        out[key] = value
    return out


def _ints(text, key):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{key}: expected a comma-separated list of integers, got {text!r}") from None


def _float(text, key):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _bool(text, key):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {text!r}")


def parse_m_grid(text):
    """``None`` for ``1..r``; otherwise a sorted list of positive integers."""
    text = text.strip()
    if ".." in text:
        lo, hi = (t.strip() for t in text.split("..", 1))
        try:
            lo = int(lo)
        except ValueError:
            raise ConfigError(f"m_grid: bad lower bound {lo!r}") from None
        if hi == "r":
            if lo != 1:
                raise ConfigError("m_grid: only '1..r' is supported with the symbolic bound")
            return None
        try:
            hi = int(hi)
        except ValueError:
            raise ConfigError(f"m_grid: bad upper bound {hi!r}") from None
        grid = list(range(lo, hi + 1))
    else:
        grid = _ints(text, "m_grid")
    if not grid or min(grid) < 1:
        raise ConfigError("m_grid must contain positive integers")
    return sorted(set(grid))


def resolve(cfg: dict) -> dict:
    """Validate raw string settings and convert them to typed values."""
    c = dict(DEFAULTS)
    c.update({k: v for k, v in cfg.items() if v is not None})
    unknown = sorted(set(c) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown keys {unknown}; valid keys: {', '.join(VALID_KEYS)}")

    r = {"data.has_header": _bool(c["data.has_header"], "data.has_header")}
    if c["data.path"]:
        r["data.path"] = c["data.path"]
        r["data.test_path"] = c["data.test_path"]
    elif c["data.synthetic.n_per_class"] and c["data.synthetic.means"]:
        r["data.synthetic.n_per_class"] = _ints(c["data.synthetic.n_per_class"], "data.synthetic.n_per_class")
        try:
            r["data.synthetic.means"] = [
                [float(v) for v in block.split(",")] for block in c["data.synthetic.means"].split(";")
            ]
        except ValueError:
            raise ConfigError("data.synthetic.means: expected 'x,y;x,y;...'") from None
        counts = r["data.synthetic.n_per_class"]
        if len(counts) == 1:
            # one count applies to every class
            r["data.synthetic.n_per_class"] = counts * len(r["data.synthetic.means"])
        r["data.synthetic.stddev"] = _float(c["data.synthetic.stddev"], "data.synthetic.stddev")
        r["data.synthetic.seed"] = _ints(c["data.synthetic.seed"], "data.synthetic.seed")[0]
    else:
        raise ConfigError("no data source: set data.path or data.synthetic.n_per_class and data.synthetic.means")

    mode = c["kernel.mode"].strip()
    if mode not in KERNEL_MODES:
        raise ConfigError(f"kernel.mode must be one of {KERNEL_MODES}, got {mode!r}")
    r["kernel.mode"] = mode
    sigma = c["kernel.sigma"].strip()
    if sigma == "heuristic":
        r["kernel.sigma"] = "heuristic"
    else:
        value = _float(sigma, "kernel.sigma")
        if not value > 0 or not np.isfinite(value):
            raise ConfigError(f"kernel.sigma must be 'heuristic' or a positive number, got {sigma!r}")
        r["kernel.sigma"] = value
    r["kernel.rank_tol"] = _float(c["kernel.rank_tol"], "kernel.rank_tol")
    n = _ints(c["approx.n"], "approx.n")
    if len(n) != 1 or n[0] < 1:
        raise ConfigError("approx.n must be a single positive integer")
    r["approx.n"] = n[0]

    methods = [m.strip() for m in c["methods"].split(",") if m.strip()]
    if methods == ["all"]:
        methods = list(METHODS)
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ConfigError(f"methods {bad} not recognised; choose from {', '.join(METHODS)}")
    r["methods"] = [m for m in METHODS if m in methods]
    r["m_grid"] = parse_m_grid(c["m_grid"])
    frac = _float(c["split.fraction"], "split.fraction")
    if not 0 < frac < 1:
        raise ConfigError("split.fraction must lie in (0, 1)")
    r["split.fraction"] = frac
    seeds = _ints(c["seeds"], "seeds")
    if not seeds:
        raise ConfigError("seeds must list at least one integer")
    r["seeds"] = sorted(set(seeds))
    r["out.dir"] = c["out.dir"]
    return r


def _load_data(cfg):
    if "data.path" in cfg:
        ds = load_csv(cfg["data.path"], cfg["data.has_header"])
        test = None
        if cfg.get("data.test_path"):
            test = load_csv(cfg["data.test_path"], cfg["data.has_header"])
        return ds, test
    try:
        ds = make_blobs(
            cfg["data.synthetic.n_per_class"],
            cfg["data.synthetic.means"],
            cfg["data.synthetic.stddev"],
            cfg["data.synthetic.seed"],
        )
    except ValueError as exc:
        raise ConfigError(f"synthetic data: {exc}") from exc
    return ds, None


def _align_test(train, test):
    """Map test labels onto the training label ids (by original label value)."""
    index = {lab: i for i, lab in enumerate(train.label_map)}
    missing = [lab for lab in test.label_map if lab not in index]
    if missing:
        raise DataError(f"test set has labels absent from training: {missing}")
    if test.n_features != train.n_features:
        raise DataError(f"test set has {test.n_features} features, training {train.n_features}")
    labels = np.array([index[test.label_map[y]] for y in test.labels])
    return Dataset(test.features, labels, train.label_map)


def run_experiment(cfg: dict) -> dict:
    """Run every seed and write the result files; returns the run metadata."""
    ds, fixed_test = _load_data(cfg)
    if fixed_test is not None:
        fixed_test = _align_test(ds, fixed_test)
    sigma = None if cfg["kernel.sigma"] == "heuristic" else cfg["kernel.sigma"]

    results = []
    for seed in cfg["seeds"]:
        if fixed_test is None:
            train, test = split(ds, cfg["split.fraction"], seed)
        else:
            train, test = ds, fixed_test
        log.info("seed %d: N_train=%d N_test=%d", seed, train.n_samples, test.n_samples)
        results.append(
            run_seed(
                train,
                test,
                seed,
                methods=cfg["methods"],
                mode=cfg["kernel.mode"],
                sigma=sigma,
                approx_n=cfg["approx.n"],
                m_grid=cfg["m_grid"],
                rank_tol=cfg["kernel.rank_tol"],
            )
        )

    out = Path(cfg["out.dir"])
    out.mkdir(parents=True, exist_ok=True)
    _write_curves(out / "curves.csv", "accuracy", results, cfg["methods"], lambda r: r.accuracy)
    _write_curves(out / "rayleigh.csv", "rayleigh_quotient", results, cfg["methods"], lambda r: r.rayleigh)
    summary = _write_summary(out / "summary.csv", results, cfg["methods"])

    meta = {
        "config": {k: v for k, v in sorted(cfg.items())},
        "dataset": {
            "n_samples": ds.n_samples,
            "n_features": ds.n_features,
            "n_classes": ds.n_classes,
            "label_map": [str(v) for v in ds.label_map],
            "fixed_test_set": fixed_test is not None,
        },
        "seeds": [
            {
                "seed": r.seed,
                "sigma": r.sigma,
                "rank": r.rank,
                "n_train": r.n_train,
                "n_test": r.n_test,
                "skipped": {m: r.skipped[m] for m in cfg["methods"] if m in r.skipped},
                "notes": r.notes,
            }
            for r in results
        ],
        "summary": summary,
    }
    with (out / "run.json").open("w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta


def _fmt(x):
    return f"{x:.6g}"


def _mean_curve(results, get, method):
    per_m = {}
    for r in results:
        for M, v in get(r).get(method, {}).items():
            per_m.setdefault(M, []).append(v)
    return {M: float(np.mean(v)) for M, v in sorted(per_m.items())}


def _write_curves(path, column, results, methods, get):
    lines = [f"method,M,seed,{column}"]
    for method in methods:
        Ms = sorted({M for r in results for M in get(r).get(method, {})})
        mean = _mean_curve(results, get, method)
        for M in Ms:
            for r in results:
                v = get(r).get(method, {}).get(M)
                if v is not None:
                    lines.append(f"{method},{M},{r.seed},{_fmt(v)}")
            lines.append(f"{method},{M},mean,{_fmt(mean[M])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_summary(path, results, methods):
    lines = ["method,best_M,max_accuracy,max_accuracy_pct"]
    summary = {}
    for method in methods:
        mean = _mean_curve(results, lambda r: r.accuracy, method)
        if not mean:
            continue
        best = max(mean.values())
        best_M = min(M for M, v in mean.items() if v == best)
        summary[method] = {"best_M": best_M, "max_accuracy": best}
        lines.append(f"{method},{best_M},{_fmt(best)},{_fmt(100 * best)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return summary


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="cmvca", description="Kernel subspace learning experiments (accuracy/Rayleigh vs. dimensionality).")
    p.add_argument("--config", help="config file with 'key = value' lines")
    p.add_argument("--out", help="output directory (same as --out.dir)")
    p.add_argument("-v", "--verbose", action="store_true")
    for key in VALID_KEYS:
        p.add_argument(f"--{key}", dest=key, metavar="VALUE", default=None)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        raw = {}
        if args.config:
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            raw.update(parse_config_text(text, args.config))
        for key in VALID_KEYS:
            value = getattr(args, key)
            if value is not None:
                raw[key] = value
        if args.out is not None:
            raw["out.dir"] = args.out
        cfg = resolve(raw)
        run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
