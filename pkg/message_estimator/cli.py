# message-estimator - Median selection subset aggregation for distributed sparse regression.
# Copyright (C) 2026 The message-estimator developers

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.

# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

"""
Command line interface: fit, simulate, bench, diagnose and report.

Exit codes: 0 on success, 2 on configuration errors, 3 on data errors and 4
on numerical failures.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from message_estimator import __version__
from message_estimator.aggregation import InclusionVector
from message_estimator.config import (
    BenchConfig,
    DataConfig,
    Scale,
    SimulationConfig,
    apply_overrides,
    load_json,
    preset_document,
)
from message_estimator.dataset import (
    Case,
    Dataset,
    load_csv,
    random_partition,
    split_train_test,
    standardize,
)
from message_estimator.diagnostics import condition_report, precondition_elliptical
from message_estimator.exceptions import ConfigError, MessageError
from message_estimator.metrics import CSV_FILE, BenchmarkReport, benchmark_real, monte_carlo
from message_estimator.pipeline import MethodConfig, MethodResult, run_method
from message_estimator.plotting import write_plots, write_tradeoff_plot
from message_estimator.selectors import refit
from message_estimator.utils import get_method, list_methods_str, resolve_threads

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _write_json(path: Path, data: Any) -> None:
    """
    Write a JSON document with sorted keys.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def _document(args: argparse.Namespace) -> Dict[str, Any]:
    """
    Returns:
        Dict[str, Any]: the configuration file (empty without --config) with the overrides applied.
    """
    document = load_json(args.config) if args.config else {}
    return apply_overrides(document, args.set or [])


def _data_config(document: Dict[str, Any], args: argparse.Namespace) -> DataConfig:
    """
    Data section of a document, updated with the command line flags.
    """
    data = dict(document.get("data") or {})
    if args.response is not None:
        data["response"] = args.response
    if args.task is not None:
        data["task"] = args.task
    if args.categorical:
        data["categorical"] = args.categorical
    if args.standardize:
        data["standardize"] = True
    return DataConfig.from_dict(data)


def _load(path: str, cfg: DataConfig) -> Dataset:
    """
    Returns:
        Dataset: the CSV file read with the data configuration.
    """
    return load_csv(path, cfg.response, cfg.categorical, cfg.task)


def summarize(result: MethodResult, column_names: Sequence[str]) -> str:
    """
    Human readable summary of a result.

    Args:
        result (MethodResult): result of a method.
        column_names (Sequence[str]): feature names.

    Returns:
        str: the summary.
    """
    ledger = result.ledger
    lines = [
        f"Method: {result.method.value} (m={result.m})",
        f"Selected features: {result.gamma.size}"
        + (" (empty model)" if result.empty_model else ""),
        f"  {'(intercept)':<24} {result.beta.intercept: .6g}",
    ]
    for j in result.gamma.indices:
        lines.append(f"  {column_names[j]:<24} {result.beta.values[j]: .6g}")
    lines.append(
        f"Communication: {ledger.uplink_bits} bits up, {ledger.downlink_bits} bits down, "
        f"{ledger.uplink_floats} floats up, {ledger.rounds} rounds"
    )
    lines.append(f"Wall time: {result.wall_time:.3f} s")
    return "\n".join(lines)


def cmd_fit(args: argparse.Namespace) -> int:
    """
    Fit a method on a CSV file. Writes result.json and summary.txt.

    Args:
        args (argparse.Namespace): parsed arguments.

    Returns:
        int: exit code.
    """
    document = _document(args)
    data_cfg = _data_config(document, args)
    method_doc = {key: value for key, value in document.items() if key != "data"}
    if args.method is not None:
        method_doc["method"] = args.method
    if args.m is not None:
        method_doc["m"] = args.m
    if args.seed is not None:
        method_doc["seed"] = args.seed
    cfg = MethodConfig.from_dict(method_doc)

    d = _load(args.data, data_cfg)
    scaling = None
    if data_cfg.standardize:
        d, scaling = standardize(d)
    method = get_method(cfg.method.value)
    plan = random_partition(d.n, cfg.m, cfg.seed) if method.distributed else None
    result = run_method(d, cfg, plan, resolve_threads(args.threads))

    output = result.to_dict(d.column_names)
    output["config"] = cfg.to_dict()
    if scaling is not None:
        raw, intercept = scaling.to_raw(result.beta.values, result.beta.intercept)
        output["beta_raw"] = raw.tolist()
        output["intercept_raw"] = intercept
    out = Path(args.out)
    _write_json(out / "result.json", output)
    summary = summarize(result, d.column_names)
    (out / "summary.txt").write_text(summary + "\n", encoding="utf-8")
    print(summary)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    """
    Run a Monte Carlo simulation and write report.json, timing.json, report.csv and the SVG charts.

    The configuration is the scale preset, then the --config file, then the
    explicit flags, then the --set overrides.

    Args:
        args (argparse.Namespace): parsed arguments.

    Returns:
        int: exit code.
    """
    case = Case(f"case{args.case}") if args.case is not None else Case.CASE1
    document = preset_document(Scale(args.scale), case, args.rho or 0.0)
    if args.config:
        document.update(load_json(args.config))
    if args.case is not None:
        document["case"] = case.value
    if args.rho is not None:
        document["rho"] = args.rho
    if args.reps is not None:
        document["reps"] = args.reps
    if args.seed is not None:
        document["base_seed"] = args.seed
    cfg = SimulationConfig.from_dict(apply_overrides(document, args.set or []))
    logger.info("Simulation configuration: %s", cfg.to_dict())

    report = monte_carlo(
        cfg.grid(),
        cfg.method_configs(),
        cfg.reps,
        base_seed=cfg.base_seed,
        subset_size=cfg.subset_size,
        n_test=cfg.n_test,
        threads=resolve_threads(args.threads),
        diagnose=cfg.diagnose,
    )
    report.config["simulation"] = cfg.to_dict()
    report.save(args.out)
    write_plots(report, args.out)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    """
    Real data benchmark: held out accuracy or prediction error against wall time.
    Writes bench.json, bench.csv and tradeoff.svg.

    Args:
        args (argparse.Namespace): parsed arguments.

    Returns:
        int: exit code.
    """
    document = _document(args)
    data_cfg = _data_config(document, args)
    document["data"] = data_cfg.to_dict()
    if args.n_train is not None:
        document["n_train"] = args.n_train
    if args.m:
        document["m_values"] = args.m
    cfg = BenchConfig.from_dict(document)

    d = _load(args.data, cfg.data)
    n_train = cfg.n_train if cfg.n_train is not None else int(0.8 * d.n)
    train, test = split_train_test(d, n_train)
    if cfg.data.standardize:
        train, scaling = standardize(train)
        test = Dataset(
            x=(test.x - scaling.mean) / scaling.scale,
            y=test.y,
            column_names=test.column_names,
            task=test.task,
            response_name=test.response_name,
        )
    methods = [
        MethodConfig(method=name, selector=cfg.selector, bolasso_B=cfg.bolasso_B, seed=cfg.seed)
        for name in cfg.methods
    ]
    frame = benchmark_real(
        train, test, methods, cfg.m_values, seed=cfg.seed, threads=resolve_threads(args.threads)
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    runs = frame.to_dict(orient="records")
    _write_json(out / "bench.json", {"config": cfg.to_dict(), "runs": runs})
    frame.to_csv(out / "bench.csv", index=False)
    write_tradeoff_plot(frame, out / "tradeoff.svg")
    print(frame.to_string(index=False))
    return 0


def _support_from_names(d: Dataset, names: Sequence[str]) -> List[int]:
    """
    Raises:
        ConfigError: if a name is neither a column name nor a column index.

    Returns:
        List[int]: column indices.
    """
    res = []
    for name in names:
        if name in d.column_names:
            res.append(d.column_names.index(name))
        elif name.isdigit() and int(name) < d.p:
            res.append(int(name))
        else:
            raise ConfigError(f"Unknown support column {name}.")
    return res


def cmd_diagnose(args: argparse.Namespace) -> int:
    """
    Condition reports on the full data and on every subset. Failed checks are
    warnings, never errors. Writes diagnostics.json.

    The support is --support when given, otherwise the model selected on the
    full data by the configured selector; the signs come from a refit on the
    full data.

    Args:
        args (argparse.Namespace): parsed arguments.

    Returns:
        int: exit code.
    """
    document = _document(args)
    data_cfg = _data_config(document, args)
    method_doc = {key: value for key, value in document.items() if key != "data"}
    if args.m is not None:
        method_doc["m"] = args.m
    if args.seed is not None:
        method_doc["seed"] = args.seed
    cfg = MethodConfig.from_dict(method_doc)

    d = _load(args.data, data_cfg)
    if args.precondition:
        d = precondition_elliptical(d)
        logger.info("Diagnostics run on the preconditioned design.")

    if args.support:
        support = _support_from_names(d, args.support)
    else:
        try:
            support = cfg.selector.build().select(d).gamma.indices.tolist()
        except MessageError as exc:
            logger.warning("Selection on the full data failed (%s), using the empty support.", exc)
            support = []
    output: Dict[str, Any] = {
        "support": [d.column_names[j] for j in sorted(set(support))],
        "preconditioned": bool(args.precondition),
        "full": None,
        "subsets": [],
    }
    if not support:
        logger.warning("The selected support is empty, nothing to diagnose.")
        _write_json(Path(args.out) / "diagnostics.json", output)
        return 0

    gamma = InclusionVector.from_indices(d.p, support)
    try:
        signs = np.sign(refit(d, gamma).beta.values[gamma.indices])
        signs[signs == 0] = 1.0
    except MessageError as exc:
        logger.warning("Refit on the support failed (%s), using positive signs.", exc)
        signs = np.ones(gamma.size)
    s = args.s if args.s is not None else gamma.size

    output["full"] = condition_report(d, gamma.indices, signs, s=s, seed=cfg.seed).to_dict()
    if cfg.m > 1:
        plan = random_partition(d.n, cfg.m, cfg.seed)
        for i in range(plan.m):
            sub = d.subset(plan.indices(i))
            report = condition_report(sub, gamma.indices, signs, s=s, subset_id=i, seed=cfg.seed)
            output["subsets"].append(report.to_dict())
    _write_json(Path(args.out) / "diagnostics.json", output)
    full = output["full"]
    print(
        f"v1_hat={full['v1_hat']:.6g} v2_hat={full['v2_hat']:.6g} "
        f"irrepresentable_stat={full['irrepresentable_stat']} "
        f"sparse_riesz_rho={full['sparse_riesz_rho']}"
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    """
    Rewrite report.csv and the SVG charts of an existing report.json and timing.json.

    Args:
        args (argparse.Namespace): parsed arguments.

    Returns:
        int: exit code.
    """
    report = BenchmarkReport.load(args.out)
    out = Path(args.out)
    report.to_frame(include_timing=True).to_csv(out / CSV_FILE, index=False)
    write_plots(report, out)
    print(report.summary(include_timing=True).to_string(index=False))
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    """
    Flags shared by every command.
    """
    parser.add_argument("--config", type=str, default=None, help="JSON configuration file.")
    parser.add_argument("--out", type=str, default="out", help="Output directory.")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="Override a configuration entry (dotted keys), can be repeated.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="Number of workers, 0 for all cores (default: $MESSAGE_THREADS or 1).",
    )
    parser.add_argument("--seed", type=int, default=None, help="Seed.")


def _add_data(parser: argparse.ArgumentParser) -> None:
    """
    Flags of the commands reading a CSV file.
    """
    parser.add_argument("--data", type=str, required=True, help="CSV file with a header row.")
    parser.add_argument("--response", type=str, default=None, help="Response column (default: y).")
    parser.add_argument(
        "--task", choices=["regression", "classification"], default=None, help="Learning task."
    )
    parser.add_argument(
        "--categorical", nargs="*", default=None, help="Columns recoded as indicator columns."
    )
    parser.add_argument(
        "--standardize", action="store_true", help="Standardize the columns before fitting."
    )


def create_parser() -> argparse.ArgumentParser:
    """
    Create the parser of the command line interface.

    Returns:
        argparse.ArgumentParser: the parser.
    """
    parser = argparse.ArgumentParser(
        prog="message-estimator",
        description="Median selection subset aggregation for distributed sparse regression.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only warnings and errors.")
    parser.add_argument(
        "--list-methods", action="store_true", help="List the available methods and exit."
    )
    subparsers = parser.add_subparsers(dest="command")

    fit = subparsers.add_parser("fit", help="Fit a method on a CSV file.")
    _add_common(fit)
    _add_data(fit)
    fit.add_argument("--method", type=str, default=None, help="Method name.")
    fit.add_argument("--m", type=int, default=None, help="Number of subsets.")
    fit.set_defaults(func=cmd_fit)

    simulate = subparsers.add_parser("simulate", help="Run a Monte Carlo simulation.")
    _add_common(simulate)
    simulate.add_argument(
        "--case", type=int, choices=[1, 2, 3], default=None, help="Simulation case (default: 1)."
    )
    simulate.add_argument(
        "--rho", type=float, default=None, help="Compound symmetry correlation (default: 0)."
    )
    simulate.add_argument("--reps", type=int, default=None, help="Replicates per grid point.")
    simulate.add_argument(
        "--scale", choices=[scale.value for scale in Scale], default="desk", help="Preset."
    )
    simulate.set_defaults(func=cmd_simulate)

    bench = subparsers.add_parser("bench", help="Benchmark the methods on a CSV file.")
    _add_common(bench)
    _add_data(bench)
    bench.add_argument("--n-train", type=int, default=None, help="Training rows (file order).")
    bench.add_argument("--m", type=int, nargs="+", default=None, help="Numbers of subsets.")
    bench.set_defaults(func=cmd_bench)

    diagnose = subparsers.add_parser("diagnose", help="Condition diagnostics of a CSV file.")
    _add_common(diagnose)
    _add_data(diagnose)
    diagnose.add_argument("--support", nargs="+", default=None, help="Support column names.")
    diagnose.add_argument("--m", type=int, default=None, help="Number of subsets.")
    diagnose.add_argument("--s", type=int, default=None, help="Sparse Riesz support size.")
    diagnose.add_argument(
        "--precondition", action="store_true", help="Precondition the design first (p > n)."
    )
    diagnose.set_defaults(func=cmd_diagnose)

    report = subparsers.add_parser("report", help="Redraw the outputs of a simulation.")
    report.add_argument("--out", type=str, default="out", help="Simulation output directory.")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the command line interface.

    Args:
        argv (Optional[Sequence[str]], optional): arguments, sys.argv when None. Defaults to None.

    Returns:
        int: exit code.
    """
    parser = create_parser()
    args = parser.parse_args(argv)

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)

    if args.list_methods:
        print(list_methods_str())
        return 0
    if args.command is None:
        parser.print_help()
        return 2

    try:
        return args.func(args)
    except MessageError as exc:
        logger.error("%s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
