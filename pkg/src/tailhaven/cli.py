"""Command line front end: ``tailhaven {analyze,compare,extremes,simulate,replay}``.

Every option can also come from a flat ``key = value`` config file passed
with ``--config``; command line flags override the file. Keys are the long
flag names without dashes (``from``, ``reps``, ``price-field`` ...). Repeated
options (``x``, ``k``) take comma-separated values or repeated keys.

Failures print one line, ``tailhaven: error: <CLASS> <Exception>: <detail>``,
and exit with the code for CLASS (PARSE 2, ALIGN 3, DEGENERATE 4, CONFIG 5,
IO 6).
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from datetime import date
from pathlib import Path

from . import __version__, report
from .errors import ConfigError, IOFailure, TailhavenError
from .extreme_events import DIRECTIONS, count_extremes
from .market_data import (
    PRICE_FIELDS,
    align_and_return,
    log_returns,
    parse_aligned_csv,
    read_price_csv,
    standardize,
)
from .quantile_stats import check_grid
from .resampling import BootstrapConfig, bootstrap_qcor
from .synthetic import GaussianPairSpec, gen_bivariate_normal, gen_student_t_pair

FORMATS = ("csv", "json", "svg")
MODES = ("returns", "levels")

# option name -> (kind, default); kinds drive parsing of config-file text
ANALYSIS_OPTIONS = {
    "y": ("path", None),
    "x": ("paths", []),
    "label": ("strs", []),
    "pair": ("path", None),
    "from": ("date", None),
    "to": ("date", None),
    "reps": ("int", 1000),
    "ci": ("float", 0.90),
    "seed": ("int", 42),
    "out": ("path", "out"),
    "price-field": ("str", "close"),
    "y-mode": ("str", "returns"),
    "x-mode": ("str", "returns"),
    "taus": ("floats", None),
    "tau-min": ("float", 0.01),
    "tau-max": ("float", 0.99),
    "tau-step": ("float", 0.01),
    "formats": ("strs", ["csv", "json", "svg"]),
}

EXTREMES_OPTIONS = {
    "input": ("path", None),
    "k": ("floats", [3.0, 5.0]),
    "window": ("int", 500),
    "direction": ("str", "negative"),
    "from": ("date", None),
    "to": ("date", None),
    "price-field": ("str", "close"),
    "out": ("path", "out"),
    "formats": ("strs", ["csv", "svg"]),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _convert(kind: str, text: str, key: str):
    try:
        if kind in ("path", "str"):
            return text
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "date":
            return date.fromisoformat(text).isoformat()
        items = [t.strip() for t in text.split(",") if t.strip()]
        if kind == "floats":
            return [float(t) for t in items]
        return items
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def read_config_file(path, options: dict) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read config {path}: {exc}") from None
    settings = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in options:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        kind = options[key][0]
        value = _convert(kind, value, key)
        if kind in ("paths", "strs", "floats") and key in settings:
            settings[key] = settings[key] + value
        else:
            settings[key] = value
    return settings


def _add_options(parser, options: dict) -> None:
    for name, (kind, _) in options.items():
        flag = f"--{name}"
        dest = name.replace("-", "_")
        if kind in ("paths", "strs", "floats"):
            parser.add_argument(flag, dest=dest, action="append", default=None)
        else:
            parser.add_argument(flag, dest=dest, default=None)
    parser.add_argument("--config", default=None, help="flat key = value file; flags override it")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")


def _merge(args, options: dict) -> dict:
    settings = {name: default for name, (_, default) in options.items()}
    if args.config:
        settings.update(read_config_file(args.config, options))
    for name, (kind, _) in options.items():
        raw = getattr(args, name.replace("-", "_"))
        if raw is None:
            continue
        if kind in ("paths", "strs", "floats"):
            value = []
            for item in raw:
                value += _convert(kind, item, name) if kind != "paths" else [item]
        else:
            value = _convert(kind, raw, name)
        settings[name] = value
    return settings


def _date(value):
    return date.fromisoformat(value) if value else None


def build_grid(settings: dict) -> list:
    if settings.get("taus"):
        grid = [float(t) for t in settings["taus"]]
    else:
        lo, hi, step = settings["tau-min"], settings["tau-max"], settings["tau-step"]
        if step <= 0:
            raise ConfigError("tau-step must be positive")
        count = int(round((hi - lo) / step)) + 1
        grid = [round(lo + i * step, 12) for i in range(count)]
    try:
        check_grid(grid)
    except TailhavenError as exc:
        raise ConfigError(str(exc)) from None
    return grid


def _check_choice(settings, key, choices):
    if settings[key] not in choices:
        raise ConfigError(f"{key} must be one of {', '.join(choices)}, got {settings[key]!r}")


def _check_analysis(settings: dict) -> None:
    _check_choice(settings, "price-field", PRICE_FIELDS)
    _check_choice(settings, "y-mode", MODES)
    _check_choice(settings, "x-mode", MODES)
    bad = set(settings["formats"]) - set(FORMATS)
    if bad:
        raise ConfigError(f"unknown formats {sorted(bad)}")
    if settings["from"] and settings["to"] and settings["from"] >= settings["to"]:
        raise ConfigError("from must be before to")
    BootstrapConfig(settings["reps"], settings["ci"], settings["seed"])


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _input_record(role, path, series=None) -> dict:
    rec = {"role": role, "path": str(path), "sha256": _sha256(path)}
    if series is not None:
        rec["rows"] = len(series)
        rec["dropped"] = series.dropped
    return rec


def _load_pair(settings, x_path, inputs: list, y_series_cache: dict):
    if settings["pair"]:
        with open(settings["pair"], "rb") as fh:
            pair = parse_aligned_csv(fh)
        inputs.append(_input_record("pair", settings["pair"]))
        return pair
    if "y" not in y_series_cache:
        y_series_cache["y"] = read_price_csv(settings["y"])
        inputs.append(_input_record("y", settings["y"], y_series_cache["y"]))
    xs = read_price_csv(x_path)
    inputs.append(_input_record("x", x_path, xs))
    return align_and_return(
        y_series_cache["y"],
        xs,
        settings["price-field"],
        _date(settings["from"]),
        _date(settings["to"]),
        a_mode=settings["y-mode"],
        b_mode=settings["x-mode"],
    )


def _emit_curve(out: Path, stem: str, curve, formats, title=None) -> list:
    records = curve.records()
    written = []
    csv_path = out / f"{stem}.csv"
    report.write_curve_csv(csv_path, records)
    written.append(csv_path.name)
    if "json" in formats:
        report.write_curve_json(out / f"{stem}.json", records)
        written.append(f"{stem}.json")
    if "svg" in formats:
        report.plot_curve(csv_path, out / f"{stem}.svg", title)
        written.append(f"{stem}.svg")
    return written


def _manifest(command: str, settings: dict, inputs: list, **extra) -> dict:
    return {
        "tool": "tailhaven",
        "version": __version__,
        "command": command,
        "settings": settings,
        "inputs": inputs,
        "replicate_seeds": "splitmix64(master_seed, replicate_index)",
        **extra,
    }


def _ensure_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOFailure(f"cannot create {out}: {exc}") from None
    return out


def run_analyze(settings: dict, threads=None) -> dict:
    _check_analysis(settings)
    if settings["pair"] is None and (not settings["y"] or len(settings["x"]) != 1):
        raise ConfigError("analyze needs --y and exactly one --x, or --pair")
    grid = build_grid(settings)
    config = BootstrapConfig(settings["reps"], settings["ci"], settings["seed"])
    inputs = []
    pair = _load_pair(settings, settings["x"][0] if settings["x"] else None, inputs, {})
    out = _ensure_out(settings["out"])
    report.write_aligned_csv(out / "aligned.csv", pair)
    curve = bootstrap_qcor(pair, grid, config, threads=threads)
    title = f"{pair.series_x.instrument_id} vs {pair.series_y.instrument_id}"
    outputs = ["aligned.csv"] + _emit_curve(out, "curve", curve, settings["formats"], title)
    manifest = _manifest(
        "analyze",
        {**settings, "taus": grid},
        inputs,
        n=len(pair),
        alignment=pair.meta,
        redraws=curve.redraws,
        outputs=outputs,
    )
    report.write_json(out / "run.json", manifest)
    return manifest


def _labels(settings: dict) -> list:
    labels = list(settings["label"]) or [Path(p).stem for p in settings["x"]]
    if len(labels) != len(settings["x"]):
        raise ConfigError("give one --label per --x")
    seen = {}
    unique = []
    for label in labels:
        seen[label] = seen.get(label, 0) + 1
        unique.append(label if seen[label] == 1 else f"{label}_{seen[label]}")
    return unique


def _nearest(grid, target):
    return min(range(len(grid)), key=lambda i: (abs(grid[i] - target), i))


def run_compare(settings: dict, threads=None) -> dict:
    _check_analysis(settings)
    if settings["pair"] is not None:
        raise ConfigError("compare takes --y and several --x, not --pair")
    if not settings["y"] or len(settings["x"]) < 2:
        raise ConfigError("compare needs --y and at least two --x")
    grid = build_grid(settings)
    config = BootstrapConfig(settings["reps"], settings["ci"], settings["seed"])
    labels = _labels(settings)
    out = _ensure_out(settings["out"])
    inputs, cache, outputs, csvs, pairs = [], {}, [], {}, {}
    lo_i, hi_i = _nearest(grid, 0.05), _nearest(grid, 0.95)
    rows = []
    for label, x_path in zip(labels, settings["x"]):
        pair = _load_pair(settings, x_path, inputs, cache)
        curve = bootstrap_qcor(pair, grid, config, threads=threads)
        outputs += _emit_curve(out, f"curve_{label}", curve, settings["formats"], label)
        csvs[label] = out / f"curve_{label}.csv"
        pairs[label] = {"n": len(pair), "alignment": pair.meta, "redraws": curve.redraws}
        rows.append(
            (label, curve.taus[lo_i], curve.mean_boot[lo_i], curve.lower[lo_i], curve.upper[lo_i],
             curve.taus[hi_i], curve.mean_boot[hi_i], curve.lower[hi_i], curve.upper[hi_i], len(pair))
        )
    header = ("label", "tau_low", "mean_boot_low", "lower_low", "upper_low",
              "tau_high", "mean_boot_high", "lower_high", "upper_high", "n")
    report.write_table(out / "summary.csv", header, rows)
    outputs.append("summary.csv")
    if "svg" in settings["formats"]:
        report.plot_compare(csvs, out / "compare.svg")
        outputs.append("compare.svg")
    manifest = _manifest("compare", {**settings, "taus": grid, "label": labels}, inputs,
                         pairs=pairs, outputs=outputs)
    report.write_json(out / "run.json", manifest)
    return manifest


def run_extremes(settings: dict, threads=None) -> dict:
    _check_choice(settings, "direction", DIRECTIONS)
    _check_choice(settings, "price-field", PRICE_FIELDS)
    if not settings["input"]:
        raise ConfigError("extremes needs --input")
    ks = sorted(set(settings["k"]))
    if not ks:
        raise ConfigError("give at least one --k")
    series = read_price_csv(settings["input"])
    inputs = [_input_record("input", settings["input"], series)]
    returns = log_returns(series, settings["price-field"], _date(settings["from"]), _date(settings["to"]))
    z = standardize(returns)
    results = [count_extremes(z, k, settings["direction"], settings["window"]) for k in ks]
    out = _ensure_out(settings["out"])
    header = ["date"] + [f"count_k{report.fmt(k)}" for k in ks]
    rows = [[d.isoformat()] + [int(r.counts[i]) for r in results] for i, d in enumerate(results[0].dates)]
    report.write_table(out / "extremes.csv", header, rows)
    report.write_table(out / "standardized.csv", ("date", "z"),
                       [(d.isoformat(), v) for d, v in zip(z.dates, z.values)])
    outputs = ["extremes.csv", "standardized.csv"]
    if "svg" in settings["formats"]:
        report.plot_extremes(out / "extremes.csv", out / "extremes.svg", out / "standardized.csv")
        outputs.append("extremes.svg")
    manifest = _manifest(
        "extremes",
        {**settings, "k": ks},
        inputs,
        n=len(z),
        mu_hat=report.rounded(z.mu_hat),
        sigma_hat=report.rounded(z.sigma_hat),
        outputs=outputs,
    )
    report.write_json(out / "run.json", manifest)
    return manifest


RUNNERS = {"analyze": run_analyze, "compare": run_compare, "extremes": run_extremes}


def run_replay(manifest_path, out=None, threads=None) -> dict:
    """Re-run a recorded command; inputs must still match their recorded hashes."""
    import json

    try:
        manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IOFailure(f"cannot read manifest {manifest_path}: {exc}") from None
    command = manifest.get("command")
    if command not in RUNNERS:
        raise ConfigError(f"manifest has unknown command {command!r}")
    for rec in manifest["inputs"]:
        try:
            digest = _sha256(rec["path"])
        except OSError as exc:
            raise IOFailure(f"cannot read input {rec['path']}: {exc}") from None
        if digest != rec["sha256"]:
            raise IOFailure(f"input {rec['path']} changed since the recorded run")
    settings = dict(manifest["settings"])
    if out is not None:
        settings["out"] = str(out)
    return RUNNERS[command](settings, threads)


def run_simulate(args) -> None:
    if args.model == "gaussian":
        pair = gen_bivariate_normal(GaussianPairSpec(args.n, args.rho, args.seed))
    else:
        pair = gen_student_t_pair(args.n, args.rho, args.dof, args.seed)
    if args.out:
        report.write_aligned_csv(args.out, pair)
    else:
        report.write_aligned_csv(sys.stdout, pair)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailhaven", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="bootstrap quantile-correlation curve for one pair")
    _add_options(p, ANALYSIS_OPTIONS)
    p = sub.add_parser("compare", help="curves for several x-series against one y-series")
    _add_options(p, ANALYSIS_OPTIONS)
    p = sub.add_parser("extremes", help="rolling counts of k-SD standardized returns")
    _add_options(p, EXTREMES_OPTIONS)

    p = sub.add_parser("simulate", help="write a synthetic aligned-returns CSV")
    p.add_argument("--model", choices=("gaussian", "student-t"), default="gaussian")
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--n", type=int, default=1380)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dof", type=float, default=5.0)
    p.add_argument("--out", default=None, help="output file (default: stdout)")

    p = sub.add_parser("replay", help="re-run the command recorded in a run.json")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    return parser


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        if args.command == "simulate":
            run_simulate(args)
        elif args.command == "replay":
            run_replay(args.manifest, args.out, args.threads)
        else:
            options = EXTREMES_OPTIONS if args.command == "extremes" else ANALYSIS_OPTIONS
            RUNNERS[args.command](_merge(args, options), args.threads)
    except TailhavenError as exc:
        print(f"tailhaven: error: {exc.exit_class} {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        err = IOFailure(str(exc))
        print(f"tailhaven: error: IO {type(exc).__name__}: {exc}", file=sys.stderr)
        return err.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
