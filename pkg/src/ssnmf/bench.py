"""Seeded multi-trial experiment runner and CSV reports.

A sweep is a grid of cells (alpha x epsilon for synthetic data, a single
cell for a fixed data matrix). Each cell runs ``trials`` trials; every trial
runs all configured algorithm variants. Seeds depend only on
``(base_seed, cell, trial)``, so results do not depend on the execution
schedule.

Synthetic data: ``W`` is drawn once per sweep, ``H`` once per alpha and the
noise once per (cell, trial). All variants of a trial share the same
instance and the same algorithm seed.
"""

import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .datagen import SyntheticSpec, abundances_for, endmembers_for, generate
from .errors import ParameterError, SSNMFError
from .extract import ALGORITHMS, AGGREGATIONS, RANDOMIZED, AlgoConfig, extract
from .linalg import mix_seed
from .metrics import mrsa
from .solver import NnlsSettings, relative_error

log = logging.getLogger(__name__)

STATISTICS = ("min", "median", "max", "std", "best_by_qf")
CSV_COLUMNS = ("algorithm", "p", "alpha", "epsilon", "statistic", "mrsa", "rel_error", "seconds")

_W_KEY, _H_KEY, _ALGO_KEY = 0x57, 0x48, 0x41


@dataclass(frozen=True)
class AlgoVariant:
    """An algorithm with its aggregation; ``p=None`` sweeps over ``SweepSpec.ps``."""

    algorithm: str
    p: int | None = None
    aggregation: str = "median"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ParameterError(f"unknown aggregation {self.aggregation!r}")

    @property
    def label(self):
        if self.algorithm in ("svca", "sspa"):
            return f"{self.algorithm}-{self.aggregation}"
        return self.algorithm

    def expand(self, ps):
        if self.algorithm in ("vca", "spa"):
            return [(self, 1)]
        if self.p is not None:
            return [(self, self.p)]
        return [(self, p) for p in ps]


@dataclass(frozen=True)
class SweepSpec:
    algorithms: tuple
    epsilons: tuple = (0.0,)
    ps: tuple = (1,)
    alphas: tuple = (0.05,)
    trials: int = 30
    base_seed: int = 0
    statistics: tuple = STATISTICS
    m: int = 224
    n: int = 1000
    r: int = 10
    W_source: object = "random"
    data: object = None
    rel_error: bool = True
    nnls: NnlsSettings = field(default_factory=NnlsSettings)
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not (self.algorithms and self.epsilons and self.ps and self.alphas):
            raise ParameterError("sweep lists must be non-empty")
        unknown = set(self.statistics) - set(STATISTICS)
        if unknown:
            raise ParameterError(f"unknown statistics {sorted(unknown)}")
        if "best_by_qf" in self.statistics and not self.rel_error:
            raise ParameterError("best_by_qf requires rel_error")
        if self.data is None and self.n < self.r:
            raise ParameterError("n must be >= r")

    @property
    def synthetic(self):
        return self.data is None

    def variants(self):
        out = []
        for v in self.algorithms:
            out.extend(v.expand(self.ps))
        return out

    def cells(self):
        if not self.synthetic:
            return [(math.nan, math.nan)]
        return [(a, e) for a in self.alphas for e in self.epsilons]


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    p: int
    alpha: float
    epsilon: float
    statistic: str
    mrsa: float | None
    rel_error: float | None
    seconds: float


@dataclass
class SweepReport:
    rows: list

    def __len__(self):
        return len(self.rows)

    def select(self, **criteria):
        return [row for row in self.rows if all(getattr(row, k) == v for k, v in criteria.items())]

    def value(self, column="mrsa", **criteria):
        """The single matching row's ``column``; raises if not exactly one row matches."""
        rows = self.select(**criteria)
        if len(rows) != 1:
            raise KeyError(f"{len(rows)} rows match {criteria}")
        return getattr(rows[0], column)


@dataclass(frozen=True)
class _Outcome:
    mrsa: float
    rel_error: float
    seconds: float


def _run_variant(X, W_true, variant, p, r, seed, spec):
    cfg = AlgoConfig(r=r, p=p, aggregation=variant.aggregation, seed=seed)
    start = time.perf_counter()
    try:
        res = extract(X, variant.algorithm, cfg)
    except SSNMFError as exc:
        log.warning("%s(p=%d) failed: %s", variant.label, p, exc)
        return _Outcome(math.nan, math.nan, time.perf_counter() - start)
    seconds = time.perf_counter() - start
    score = mrsa(W_true, res.endmembers).total if W_true is not None else math.nan
    err = relative_error(X, res.endmembers, spec.nnls) if spec.rel_error else math.nan
    return _Outcome(score, err, seconds)


class _Runner:
    def __init__(self, spec):
        self.spec = spec
        self.variants = spec.variants()
        self.data = None
        if spec.synthetic:
            base = SyntheticSpec(m=spec.m, n=spec.n, r=spec.r, W_source=spec.W_source,
                                 seed=mix_seed(spec.base_seed, _W_KEY))
            self.W = endmembers_for(base)
            self.H = {a: abundances_for(replace(base, alpha=a, seed=mix_seed(spec.base_seed, _H_KEY, i)))
                      for i, a in enumerate(spec.alphas)}
        else:
            from .io import read_any_matrix

            self.data = spec.data if isinstance(spec.data, np.ndarray) else read_any_matrix(spec.data)

    def trial(self, task):
        cell_index, (alpha, eps), t = task
        spec = self.spec
        if spec.synthetic:
            inst = generate(
                SyntheticSpec(m=spec.m, n=spec.n, r=spec.r, alpha=alpha, epsilon=eps,
                              noise_seed=mix_seed(spec.base_seed, cell_index, t)),
                W=self.W, H=self.H[alpha],
            )
            X, W_true = inst.X, inst.W_true
        else:
            X, W_true = self.data, None
        seed = mix_seed(spec.base_seed, cell_index, t, _ALGO_KEY)
        out = []
        for variant, p in self.variants:
            # deterministic algorithms on fixed data give the same answer every trial
            if not spec.synthetic and variant.algorithm not in RANDOMIZED and t > 0:
                out.append(None)
                continue
            out.append(_run_variant(X, W_true, variant, p, spec.r, seed, spec))
        return out


def _stat(values, name):
    v = np.asarray([x for x in values if not math.isnan(x)])
    if v.size == 0:
        return None
    return float({"min": np.min, "median": np.median, "max": np.max, "std": np.std}[name](v))


def run_sweep(spec):
    """Run every (cell, trial, variant) and summarize per cell and variant."""
    runner = _Runner(spec)
    cells = spec.cells()
    tasks = [(c, cell, t) for c, cell in enumerate(cells) for t in range(spec.trials)]
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(runner.trial, tasks))
    else:
        results = [runner.trial(task) for task in tasks]

    rows = []
    for c, (alpha, eps) in enumerate(cells):
        cell_results = results[c * spec.trials:(c + 1) * spec.trials]
        for v, (variant, p) in enumerate(runner.variants):
            outcomes = [res[v] for res in cell_results]
            outcomes = [o if o is not None else outcomes[0] for o in outcomes]
            ok = [o for o in outcomes if not (math.isnan(o.rel_error) and math.isnan(o.mrsa))]
            seconds = float(np.mean([o.seconds for o in outcomes]))
            if not ok:
                rows.append(SweepRow(variant.label, p, alpha, eps, "failed", None, None, seconds))
                continue
            for name in spec.statistics:
                if name == "best_by_qf":
                    best = min(ok, key=lambda o: o.rel_error)
                    score = None if math.isnan(best.mrsa) else best.mrsa
                    rows.append(SweepRow(variant.label, p, alpha, eps, name, score, best.rel_error, seconds))
                else:
                    rows.append(SweepRow(variant.label, p, alpha, eps, name,
                                         _stat([o.mrsa for o in ok], name),
                                         _stat([o.rel_error for o in ok], name), seconds))
    return SweepReport(rows)


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(value)


def export_csv(report, path):
    if not report.rows:
        raise ParameterError("cannot export an empty report")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            writer.writerow([row.algorithm, row.p, _fmt(row.alpha), _fmt(row.epsilon), row.statistic,
                             _fmt(row.mrsa), _fmt(row.rel_error), f"{row.seconds:.6f}"])


def _variant_from_json(entry):
    if isinstance(entry, str):
        return AlgoVariant(entry)
    entry = dict(entry)
    name = entry.pop("algorithm", None) or entry.pop("algo")
    return AlgoVariant(name, entry.pop("p", None), entry.pop("aggregation", "median"))


def sweep_spec_from_dict(cfg):
    """Build a :class:`SweepSpec` from a decoded JSON configuration."""
    cfg = dict(cfg)
    if "algorithms" not in cfg:
        raise ParameterError("config needs an 'algorithms' list")
    cfg["algorithms"] = tuple(_variant_from_json(e) for e in cfg["algorithms"])
    for key in ("epsilons", "ps", "alphas", "statistics"):
        if key in cfg:
            cfg[key] = tuple(cfg[key])
    if "nnls" in cfg:
        cfg["nnls"] = NnlsSettings(**cfg["nnls"])
    for key in ("clip_k", "width", "height", "sidecar"):
        cfg.pop(key, None)
    try:
        return SweepSpec(**cfg)
    except TypeError as exc:
        raise ParameterError(f"invalid sweep config: {exc}") from None


def load_sweep_config(path):
    with open(path) as fh:
        return json.load(fh)
