"""Experiment runners behind the command line subcommands.

Every runner takes an :class:`ExperimentConfig`, writes CSV files (plus a
JSON metadata sidecar per file) into ``config.output_dir`` and returns the
list of paths written.  Files are written atomically.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .enumerate import DELTA, CircleSet, count_ratio, enumerate_circles, format_circles_csv
from .errors import ConfigError, NumericalError
from .geometry import GasketSpec
from .statistics import (
    WHOLE_PLANE,
    Region,
    StatSeries,
    default_s_grid,
    empirical_derivative,
    energy,
    expected_visible,
    nearest_spacing,
    pair_correlation,
    restrict,
    sup_distance,
)

log = logging.getLogger(__name__)

DEFAULT_SPEC = ("1.8/3", "3.7/3")
# gaskets compared by 'sweep'; (2.5/3, 3.5/4.2) would put both tangency points
# at 5pi/6, so the middle one uses 4.2/3
COMPARISON_SPECS = (("1.1/3", "3.5/3"), ("2.5/3", "4.2/3"), ("2.9/3", "3.2/3"))
DEFAULT_REGIONS = ("plane", "halfplane", "quadrant")


def parse_pi_multiple(text) -> float:
    """``"1.8/3"`` or ``"0.6"`` -> the number that multiplies pi."""
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            value = float(Fraction(num.strip()) / Fraction(den.strip()))
        else:
            value = float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot read angle {text!r} as a multiple of pi") from exc
    return value


@dataclass
class ExperimentConfig:
    theta1: str = DEFAULT_SPEC[0]
    theta2: str = DEFAULT_SPEC[1]
    T_list: List[float] = field(default_factory=lambda: [250.0, 500.0, 1000.0])
    regions: List[Region] = field(default_factory=lambda: [WHOLE_PLANE])
    s_max: float = 20.0
    s_step: float = 0.05
    delta: float = 0.1
    include_bounding: bool = True
    deterministic: bool = False
    output_dir: Path = Path("out")
    threads: int = 1
    visible_s: float = 10.0
    compare_specs: Sequence[Tuple[str, str]] = COMPARISON_SPECS
    points_file: Optional[Path] = None

    def validate(self) -> "ExperimentConfig":
        if not self.T_list:
            raise ConfigError("T list is empty")
        if any(t <= 0 for t in self.T_list) or any(b <= a for a, b in zip(self.T_list, self.T_list[1:])):
            raise ConfigError(f"T list must be positive and increasing, got {self.T_list}")
        if not self.s_step > 0 or not self.s_max > 0:
            raise ConfigError("s_max and s_step must be positive")
        ratio = self.delta / self.s_step
        if not self.delta > 0 or abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(f"s_step {self.s_step} must divide delta {self.delta}")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        self.spec  # validates angles
        return self

    @property
    def spec(self) -> GasketSpec:
        return GasketSpec.from_pi_multiples(parse_pi_multiple(self.theta1), parse_pi_multiple(self.theta2))

    @property
    def s_grid(self) -> np.ndarray:
        return default_s_grid(self.s_max, self.s_step)

    def describe(self, spec: Optional[GasketSpec] = None, **extra) -> dict:
        spec = spec or self.spec
        meta = {
            "tool": "gasketstats",
            "version": __version__,
            "theta1_over_pi": spec.theta1 / math.pi,
            "theta2_over_pi": spec.theta2 / math.pi,
            "include_bounding": self.include_bounding,
            "deterministic": self.deterministic,
            "s_max": self.s_max,
            "s_step": self.s_step,
            "delta": self.delta,
            "hausdorff_dimension": DELTA,
        }
        meta.update(extra)
        return meta


def write_atomic(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _emit(path: Path, text: str, meta: dict) -> List[Path]:
    meta_path = path.with_suffix(".meta.json")
    return [write_atomic(path, text), write_atomic(meta_path, json.dumps(meta, indent=2, sort_keys=True) + "\n")]


def _tag(T) -> str:
    return f"T{T:g}"


def _spec_tag(spec: GasketSpec) -> str:
    return f"g{spec.theta1 / math.pi:.6g}_{spec.theta2 / math.pi:.6g}"


def read_points_csv(path) -> np.ndarray:
    """Points from a CSV whose header names ``re`` and ``im`` columns."""
    path = Path(path)
    with open(path) as fh:
        header = [h.strip() for h in fh.readline().split(",")]
        if "re" not in header or "im" not in header:
            raise ConfigError(f"{path}: header must contain 're' and 'im' columns")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    if rows.size == 0:
        return np.empty((0, 2))
    return np.column_stack([rows[:, header.index("re")], rows[:, header.index("im")]])


class _Cache:
    """Enumerated circle sets keyed by (spec, T), shared within one run."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self._sets = {}

    def get(self, T, spec: Optional[GasketSpec] = None) -> CircleSet:
        spec = spec or self.config.spec
        key = (spec, float(T))
        if key not in self._sets:
            log.info("enumerating %s at T=%g", _spec_tag(spec), T)
            self._sets[key] = enumerate_circles(spec, T, self.config.include_bounding)
        return self._sets[key]

    def points(self, T, region: Region = WHOLE_PLANE, spec=None) -> np.ndarray:
        if self.config.points_file is not None:
            pts = read_points_csv(self.config.points_file)
            return pts[region.contains(pts[:, 0], pts[:, 1])]
        return restrict(self.get(T, spec), region)


def _series_file(prefix, T, region) -> str:
    return f"{prefix}_{_tag(T)}_{region.name}.csv"


def _write_series(out: Path, name: str, series: StatSeries, meta: dict) -> List[Path]:
    series.validate()
    meta = {**meta, "kind": series.kind, "T": series.T, "region": str(series.region),
            "n_points": series.n_points, **series.meta}
    return _emit(out / name, series.to_csv(), meta)


def _summary(out: Path, name: str, labelled: Sequence[Tuple[str, StatSeries]], meta: dict,
             s_max: Optional[float] = None) -> List[Path]:
    lines = ["series_a,series_b,sup_norm"]
    for (la, a), (lb, b) in itertools.combinations(labelled, 2):
        lines.append(f"{la},{lb},{sup_distance(a, b, s_max):.12g}")
    return _emit(out / name, "\n".join(lines) + "\n", {**meta, "metric": "sup-norm over common s grid",
                                                        "compare_s_max": s_max})


def run_generate(config: ExperimentConfig, cache: Optional[_Cache] = None) -> List[Path]:
    config.validate()
    cache = cache or _Cache(config)
    out = Path(config.output_dir)
    written = []
    for T in config.T_list:
        cs = cache.get(T)
        meta = config.describe(T=T, count=cs.count, diagnostics=cs.diagnostics)
        written += _emit(out / f"circles_{_tag(T)}.csv", format_circles_csv(cs), meta)
    return written


def paircorr_series(config, cache, T, region, spec=None):
    """F series quantized to its CSV digits, and the derivative computed from it."""
    pts = cache.points(T, region, spec)
    F = pair_correlation(pts, T, config.s_grid, region, config.threads).quantized().validate()
    return F, empirical_derivative(F, config.delta)


def run_paircorr(config: ExperimentConfig, cache: Optional[_Cache] = None, out: Optional[Path] = None,
                 spec: Optional[GasketSpec] = None, summary_name: str = "summary_paircorr.csv"):
    config.validate()
    cache = cache or _Cache(config)
    out = Path(out or config.output_dir)
    spec = spec or config.spec
    written, labelled = [], []
    for T in config.T_list:
        for region in config.regions:
            F, dF = paircorr_series(config, cache, T, region, spec)
            meta = config.describe(spec)
            written += _write_series(out, _series_file("paircorr", T, region), F, meta)
            written += _write_series(out, _series_file("paircorr_deriv", T, region), dF, meta)
            labelled.append((f"{_tag(T)}_{region.name}", F))
    if len(labelled) > 1:
        written += _summary(out, summary_name, labelled, config.describe(spec))
    return written


def run_nearest(config: ExperimentConfig, cache: Optional[_Cache] = None, out: Optional[Path] = None):
    config.validate()
    cache = cache or _Cache(config)
    out = Path(out or config.output_dir)
    written, labelled = [], []
    for T in config.T_list:
        for region in config.regions:
            H = nearest_spacing(cache.points(T, region), T, config.s_grid, region, config.threads).quantized()
            written += _write_series(out, _series_file("nearest", T, region), H, config.describe())
            labelled.append((f"{_tag(T)}_{region.name}", H))
    if len(labelled) > 1:
        written += _summary(out, "summary_nearest.csv", labelled, config.describe())
    return written


def _rel_changes(values):
    return [None] + [abs(b - a) / a for a, b in zip(values, values[1:])]


def _fmt(v):
    return "" if v is None else f"{v:.12g}"


def run_energy(config: ExperimentConfig, cache: Optional[_Cache] = None, out: Optional[Path] = None):
    config.validate()
    cache = cache or _Cache(config)
    out = Path(out or config.output_dir)
    rows = []
    for T in config.T_list:
        G = energy(cache.points(T), T, config.threads)
        if not G.value > 0:
            raise NumericalError(f"non-positive energy {G.value} at T={T:g}")
        rows.append(G)
    lines = ["T,G,rel_change"]
    for G, rc in zip(rows, _rel_changes([g.value for g in rows])):
        lines.append(f"{G.T:.12g},{G.value:.12g},{_fmt(rc)}")
    return _emit(out / "energy.csv", "\n".join(lines) + "\n", config.describe(normalizer="T^(2*delta)"))


def run_count(config: ExperimentConfig, cache: Optional[_Cache] = None, out: Optional[Path] = None):
    config.validate()
    cache = cache or _Cache(config)
    out = Path(out or config.output_dir)
    ratios = [count_ratio(cache.get(T)) for T in config.T_list]
    lines = ["T,count,ratio,rel_change"]
    for r, rc in zip(ratios, _rel_changes([r.ratio for r in ratios])):
        lines.append(f"{r.T:.12g},{r.count},{r.ratio:.12g},{_fmt(rc)}")
    return _emit(out / "count.csv", "\n".join(lines) + "\n", config.describe())


def visible_report(config: ExperimentConfig, cache: Optional[_Cache] = None):
    cache = cache or _Cache(config)
    return [(T, expected_visible(cache.points(T), config.visible_s, T, config.threads)) for T in config.T_list]


def run_visible(config: ExperimentConfig, cache: Optional[_Cache] = None, out: Optional[Path] = None):
    config.validate()
    out = Path(out or config.output_dir)
    lines = ["T,s,visible"]
    for T, v in visible_report(config, cache):
        lines.append(f"{T:.12g},{config.visible_s:.12g},{v:.12g}")
    return _emit(out / "visible.csv", "\n".join(lines) + "\n", config.describe())


def run_sweep(config: ExperimentConfig) -> List[Path]:
    """The whole battery: convergence in T, regions, gaskets, energy, spacing, counts."""
    config.validate()
    cache = _Cache(config)
    out = Path(config.output_dir)
    t_top = config.T_list[-1]
    written = []

    plane = _clone(config, regions=[WHOLE_PLANE])
    written += run_paircorr(plane, cache, out / "paircorr", summary_name="summary_convergence.csv")
    written += run_nearest(plane, cache, out / "nearest")
    written += run_energy(plane, cache, out)
    written += run_count(plane, cache, out)
    written += run_visible(plane, cache, out)

    regional = _clone(config, T_list=[t_top], regions=[Region.parse(r) for r in DEFAULT_REGIONS])
    written += run_paircorr(regional, cache, out / "regions", summary_name="summary_regions.csv")

    labelled = []
    for a, b in config.compare_specs:
        spec = GasketSpec.from_pi_multiples(parse_pi_multiple(a), parse_pi_multiple(b))
        F, dF = paircorr_series(config, cache, t_top, WHOLE_PLANE, spec)
        name = f"paircorr_{_spec_tag(spec)}_{_tag(t_top)}.csv"
        written += _write_series(out / "gaskets", name, F, config.describe(spec))
        labelled.append((_spec_tag(spec), F))
    if len(labelled) > 1:
        written += _summary(out / "gaskets", "summary_gaskets.csv", labelled, config.describe())
    return written


def _clone(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(config, **changes)


RUNNERS = {
    "generate": run_generate,
    "paircorr": run_paircorr,
    "nearest": run_nearest,
    "energy": run_energy,
    "count": run_count,
    "visible": run_visible,
    "sweep": run_sweep,
}
