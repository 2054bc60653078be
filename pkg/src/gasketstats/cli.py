"""Command line entry point: ``gasketstats <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical or degeneracy
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path

from . import __version__, kernels
from .errors import ConfigError, DegenerateSpecError, NumericalError
from .harness import COMPARISON_SPECS, RUNNERS, ExperimentConfig, parse_pi_multiple, visible_report
from .statistics import Region

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("gasketstats")


def _bool(text) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected true/false, got {text!r}")


def _t_list(text):
    try:
        return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad T list {text!r}") from exc


def _specs(text):
    pairs = []
    for item in str(text).split(";"):
        if item.strip():
            a, _, b = item.partition(":")
            if not b:
                raise ConfigError(f"gasket pair must look like 1.1/3:3.5/3, got {item!r}")
            parse_pi_multiple(a), parse_pi_multiple(b)
            pairs.append((a.strip(), b.strip()))
    return tuple(pairs)


def _regions(values):
    try:
        return [Region.parse(v) for v in values]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("experiment")
    g.add_argument("--config", type=Path, help="INI-style key = value file; flags override it")
    g.add_argument("--theta1", help="first tangency angle as a multiple of pi, e.g. 1.8/3")
    g.add_argument("--theta2", help="second tangency angle as a multiple of pi, e.g. 3.7/3")
    g.add_argument("--tmax", help="single curvature bound T")
    g.add_argument("--t-list", dest="t_list", help="comma separated curvature bounds")
    g.add_argument("--smax", help="largest normalized distance on the s grid")
    g.add_argument("--sstep", help="s grid spacing")
    g.add_argument("--delta", help="forward-difference step for the derivative")
    g.add_argument("--s", dest="visible_s", help="normalized radius for 'visible' (default 10)")
    g.add_argument("--region", action="append", help="plane|halfplane|quadrant|disk:cx,cy,r|rect:x0,y0,x1,y1")
    g.add_argument("--include-bounding", dest="include_bounding", help="true|false")
    g.add_argument("--deterministic", action="store_const", const="true", default=None)
    g.add_argument("--out", help="output directory")
    g.add_argument("--threads", help="worker threads for the kernels")
    g.add_argument("--compare-specs", dest="compare_specs",
                   help="gaskets compared by 'sweep', e.g. '1.1/3:3.5/3;2.9/3:3.2/3'")
    g.add_argument("--points", help="CSV with re,im columns to use instead of an enumerated gasket")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="gasketstats", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "write the circles with curvature < T",
        "paircorr": "pair correlation F_T(s) and its forward difference",
        "nearest": "nearest-neighbour spacing ECDF H_T(s)",
        "energy": "normalized electrostatic energy G(T)",
        "count": "circle counts divided by T**delta",
        "visible": "mean number of centers within s/T of a center",
        "sweep": "all of the above across the T list, regions and comparison gaskets",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


_KEYS = ("theta1", "theta2", "tmax", "t_list", "smax", "sstep", "delta", "visible_s", "region",
         "include_bounding", "deterministic", "out", "threads", "compare_specs", "points")


def _read_config_file(path: Path) -> dict:
    text = Path(path).read_text()
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text if text.lstrip().startswith("[") else "[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    values = {}
    for section in cp.sections():
        for key, value in cp[section].items():
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise ConfigError(f"{path}: unknown key {key!r}")
            values[key] = value
    if "region" in values:
        values["region"] = [r for r in values["region"].replace(";", "\n").split() if r]
    return values


def config_from_args(args) -> ExperimentConfig:
    values = _read_config_file(args.config) if args.config else {}
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    cfg = ExperimentConfig()
    try:
        if "theta1" in values:
            cfg.theta1 = values["theta1"]
        if "theta2" in values:
            cfg.theta2 = values["theta2"]
        if "t_list" in values:
            cfg.T_list = _t_list(values["t_list"])
        if "tmax" in values:
            cfg.T_list = [float(values["tmax"])]
        if "smax" in values:
            cfg.s_max = float(values["smax"])
        if "sstep" in values:
            cfg.s_step = float(values["sstep"])
        if "delta" in values:
            cfg.delta = float(values["delta"])
        if "visible_s" in values:
            cfg.visible_s = float(values["visible_s"])
        if "threads" in values:
            cfg.threads = int(values["threads"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if "region" in values:
        cfg.regions = _regions(values["region"])
    if "include_bounding" in values:
        cfg.include_bounding = _bool(values["include_bounding"])
    if "deterministic" in values:
        cfg.deterministic = _bool(values["deterministic"])
    if "out" in values:
        cfg.output_dir = Path(values["out"])
    if "compare_specs" in values:
        cfg.compare_specs = _specs(values["compare_specs"]) or COMPARISON_SPECS
    if "points" in values:
        cfg.points_file = Path(values["points"])
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args).validate()
        if args.command == "visible":
            for T, v in visible_report(cfg):
                print(f"T={T:g} s={cfg.visible_s:g} visible={v:.12g}")
        written = RUNNERS[args.command](cfg)
        for path in written:
            log.info("wrote %s", path)
    except DegenerateSpecError as exc:
        print(f"gasketstats: degenerate gasket: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalError as exc:
        print(f"gasketstats: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"gasketstats: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"gasketstats: I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
