"""Command-line entry point: ``towbandit {run,compare,sweep,bound}``.

Run settings come from flags, optionally layered over a TOML config file whose
keys mirror the flag names (``probs``, ``algo``, ``omega``, ``horizon`` ...,
with a ``[fluct]`` table and ``switch = [{t = .., probs = [..]}]``).  Flags win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import bound_report
from .env import BanditEnv
from .harness import (CSV_HEADER, SWEEP_PARAMS, ConfigError, RunConfig, build_policy, compare, metric_rows,
                      run_experiment, sweep, with_param, write_compare, write_compare_csv,
                      write_metrics_csv, write_results)
from .tow import FLUCT_KINDS, FluctuationConfig

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

CONFIG_KEYS = {"probs", "switch", "algo", "algos", "omega", "fluct", "horizon", "trials",
               "seed", "stride", "out", "out_dir", "param", "grid"}


def _probs(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _switch(text: str) -> dict:
    t, sep, ps = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return {"t": int(t), "probs": _probs(ps)}
    except (ValueError, argparse.ArgumentTypeError):
        raise argparse.ArgumentTypeError(f"expected T:P1,P2,..., got {text!r}") from None


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` within half a step."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
    count = int((stop - start) / step + 0.5) + 1
    return [round(start + i * step, 12) for i in range(count)]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message} (see --help)\n")


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML file with default settings")
    p.add_argument("--probs", type=_probs, help="machine probabilities, e.g. 0.6,0.4")
    p.add_argument("--switch", type=_switch, action="append",
                   help="probability change T:P1,P2,... (repeatable)")
    p.add_argument("--omega", help="'auto', 'adaptive' or a number (TOW weight)")
    p.add_argument("--fluct-kind", choices=FLUCT_KINDS)
    p.add_argument("--fluct-amplitude", type=float)
    p.add_argument("--fluct-period", type=_positive_int)
    p.add_argument("--fluct-coupled", action="store_true", default=None,
                   help="pass the fluctuation through the volume-conserving coupling")
    p.add_argument("--horizon", type=_positive_int)
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--stride", type=_positive_int, help="record every k-th step")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="towbandit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="Monte Carlo run of one policy")
    _run_flags(run)
    run.add_argument("--algo", help="tow, cheater, egreedy:E, softmax:T, ucb1, ucb1tuned, "
                                    "random, randomwalk:A,B")
    run.add_argument("--out", type=Path, help="CSV path (stdout if omitted)")

    cmp_ = sub.add_parser("compare", help="several policies on common random numbers")
    _run_flags(cmp_)
    cmp_.add_argument("--algos", nargs="+")
    cmp_.add_argument("--out", type=Path, help="merged CSV path (stdout if omitted)")

    sw = sub.add_parser("sweep", help="one run per value of a parameter grid")
    _run_flags(sw)
    sw.add_argument("--algo")
    sw.add_argument("--param", choices=SWEEP_PARAMS)
    sw.add_argument("--grid", type=parse_grid, help="start:stop:step")
    sw.add_argument("--out-dir", type=Path)

    bd = sub.add_parser("bound", help="analytic E(N_B) and regret bounds")
    bd.add_argument("--mu-a", type=float, required=True)
    bd.add_argument("--mu-b", type=float, required=True)
    bd.add_argument("--horizon", type=_positive_int, required=True)
    return parser


@dataclass
class Command:
    name: str
    config: RunConfig | None = None
    out: Path | None = None
    algos: list[str] = field(default_factory=list)
    param: str | None = None
    grid: list[float] = field(default_factory=list)
    mu_a: float | None = None
    mu_b: float | None = None
    horizon: int | None = None


def _load_config(path: Path) -> dict:
    try:
        data = tomllib.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config {path}: {e}") from None
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"config {path}: unknown keys {', '.join(sorted(unknown))}")
    return data


def _settings(ns: argparse.Namespace) -> dict:
    s = _load_config(ns.config) if ns.config else {}
    fluct = dict(s.get("fluct", {}))
    flag_map = {"probs": "probs", "switch": "switch", "omega": "omega", "horizon": "horizon",
                "trials": "trials", "seed": "seed", "stride": "stride"}
    for flag, key in flag_map.items():
        if getattr(ns, flag) is not None:
            s[key] = getattr(ns, flag)
    for flag, key in [("fluct_kind", "kind"), ("fluct_amplitude", "amplitude"),
                      ("fluct_period", "period"), ("fluct_coupled", "coupled")]:
        if getattr(ns, flag) is not None:
            fluct[key] = getattr(ns, flag)
    s["fluct"] = fluct
    for flag in ("algo", "algos", "out", "out_dir", "param", "grid"):
        if getattr(ns, flag, None) is not None:
            s[flag] = getattr(ns, flag)
    if isinstance(s.get("grid"), str):
        s["grid"] = parse_grid(s["grid"])
    return s


def _run_config(s: dict, algo: str) -> RunConfig:
    if "probs" not in s:
        raise ConfigError("missing machine probabilities (--probs)")
    try:
        env = BanditEnv(s["probs"], [(e["t"], e["probs"]) for e in s.get("switch", [])])
        fluct = FluctuationConfig(**s.get("fluct", {}))
    except (TypeError, KeyError, ValueError) as e:
        raise ConfigError(str(e)) from None
    config = RunConfig(env=env, policy=algo, omega=s.get("omega", "auto"), fluct=fluct,
                       horizon=int(s.get("horizon", 1000)), trials=int(s.get("trials", 100)),
                       base_seed=int(s.get("seed", 0)), record_stride=int(s.get("stride", 10)))
    build_policy(config)
    return config


def parse_args(argv=None) -> Command:
    """Parse and validate; usage problems exit with status 2 and a diagnostic."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "bound":
        if not 0 <= ns.mu_b < ns.mu_a <= 1:
            parser.error("bound needs 0 <= mu_b < mu_a <= 1")
        return Command("bound", mu_a=ns.mu_a, mu_b=ns.mu_b, horizon=ns.horizon)
    try:
        s = _settings(ns)
        out = Path(s["out"]) if "out" in s else None
        if ns.command == "run":
            return Command("run", _run_config(s, s.get("algo", "tow")), out=out)
        if ns.command == "compare":
            algos = s.get("algos")
            if not algos:
                raise ConfigError("compare needs --algos")
            config = _run_config(s, algos[0])
            for a in algos:
                _run_config(s, a)
            return Command("compare", config, out=out, algos=list(algos))
        for key in ("param", "grid", "out_dir"):
            if not s.get(key):
                raise ConfigError(f"sweep needs --{key.replace('_', '-')}")
        config = _run_config(s, s.get("algo", "tow"))
        with_param(config, s["param"], s["grid"][0])
        return Command("sweep", config, out=Path(s["out_dir"]), param=s["param"], grid=s["grid"])
    except (ConfigError, ValueError) as e:
        parser.error(str(e))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def execute(cmd: Command) -> None:
    if cmd.name == "bound":
        report = bound_report(cmd.mu_a, cmd.mu_b, cmd.horizon)
        print(report.format())
        print(json.dumps(report.as_dict()))
        return
    if cmd.name == "run":
        metrics = run_experiment(cmd.config)
        if cmd.out is None:
            write_metrics_csv(sys.stdout, metrics)
        else:
            write_results(metrics, cmd.out)
        return
    if cmd.name == "compare":
        results = compare(cmd.config, cmd.algos)
        if cmd.out is None:
            write_compare_csv(sys.stdout, results)
        else:
            write_compare(results, cmd.out)
        return
    cmd.out.mkdir(parents=True, exist_ok=True)
    summary = []
    for value, metrics in sweep(cmd.config, cmd.param, cmd.grid):
        write_results(metrics, cmd.out / f"{cmd.param}={value!r}.csv")
        rows = metric_rows(metrics)
        if rows:
            summary.append([repr(value)] + rows[-1])
    (cmd.out / "summary.csv").write_text(_csv_text(("value",) + CSV_HEADER, summary))


def main(argv=None) -> int:
    cmd = parse_args(argv)
    try:
        execute(cmd)
    except (OSError, ConfigError, ValueError) as e:
        print(f"towbandit: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
