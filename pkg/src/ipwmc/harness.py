"""Experiment orchestration: replicate loops, summaries and CSV output.

Replicate ``r`` of an experiment always reads ``RandomStream(seed, r)`` (or,
for sweeps over sizes, ``RandomStream(seed, (j << 32) | r)`` for size index
``j``), and results are gathered in replicate order. Output is therefore
identical for any number of workers.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import evidence, ipw, semiparam, wasserman
from .core import RandomStream
from .errors import ConfigurationError, DomainError, EmptySampleError
from .wasserman import WassermanConfig

EXPERIMENTS = ("wasserman", "riemann_rate", "basu", "nested", "semiparam_demo", "consistency")
ESTIMATORS = ("ht", "hajek", "bayes", "bs_ht", "bs_hajek", "tt", "an")
DEFAULT_ESTIMATORS = ("bayes", "bs_hajek", "hajek", "ht")

RAW_HEADER = ("estimator", "replicate", "estimate", "true_psi", "sq_error")
SUMMARY_HEADER = ("estimator", "reps", "mse_mean", "mse_sd", "mse_se")

POPULATION_STREAM = (1 << 64) - 1


@dataclass(frozen=True)
class BenchConfig:
    experiment: str
    seed: int = 2022
    reps: int = 100
    wasserman: Optional[WassermanConfig] = None
    estimators: Tuple[str, ...] = DEFAULT_ESTIMATORS
    output_path: Optional[Path] = None
    workers: int = 1
    tt_lambda: float = 0.5
    eps: float = 0.05
    sizes: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {self.experiment!r}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigurationError("reps must be a positive integer")
        if not 0 <= int(self.seed) < (1 << 64):
            raise ConfigurationError("seed must be an unsigned 64-bit integer")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigurationError("workers must be a positive integer")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad:
            raise ConfigurationError(f"unknown estimators {bad}; choose from {list(ESTIMATORS)}")
        if not self.estimators:
            raise ConfigurationError("select at least one estimator")
        if self.experiment in ("wasserman", "consistency") and self.wasserman is None:
            raise ConfigurationError(f"experiment {self.experiment!r} needs a Wasserman sub-config")


class ReplicateRecord(NamedTuple):
    estimator: str
    replicate: int
    estimate: float
    true_psi: float
    sq_error: float


class SummaryRow(NamedTuple):
    estimator: str
    reps: int
    mse_mean: float
    mse_sd: float
    mse_se: float


def _map_replicates(fn, items, workers: int) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {os.fspath(path)}: {exc.strerror}") from exc
    return path


# --- Wasserman MSE study ---------------------------------------------------


def evaluate_estimators(
    draws: wasserman.Draws,
    pop: wasserman.Population,
    cfg: WassermanConfig,
    names: Sequence[str],
    tt_lambda: float = 0.5,
) -> Dict[str, float]:
    """Every requested estimator on one shared set of draws.

    Self-normalized estimators are undefined without responses; they report
    NaN for that replicate rather than aborting the study.
    """
    out = {}
    part = None
    sample = None
    for name in names:
        try:
            if name == "ht":
                out[name] = wasserman.ht_wasserman(draws, pop)
            elif name == "hajek":
                out[name] = wasserman.hajek_wasserman(draws, pop)
            elif name == "bayes":
                out[name] = wasserman.bayes_li(draws, cfg.alpha_f)
            elif name in ("bs_ht", "bs_hajek"):
                if part is None:
                    part = wasserman.bin_partition(draws, pop, cfg.k_bins, cfg.delta)
                fn = wasserman.bs_ht if name == "bs_ht" else wasserman.bs_hajek
                out[name] = fn(draws, part)
            else:
                if sample is None:
                    sample = wasserman.to_weighted_sample(draws, pop)
                if name == "tt":
                    out[name] = ipw.trotter_tukey(sample, tt_lambda).estimate
                else:
                    out[name] = ipw.adaptive_normalization(sample).estimate
        except EmptySampleError:
            out[name] = math.nan
    return out


def wasserman_replicate(cfg: BenchConfig, r: int) -> List[ReplicateRecord]:
    wcfg = cfg.wasserman
    stream = RandomStream(cfg.seed, r)
    pop = wasserman.generate_population(wcfg, stream)
    draws = wasserman.simulate_draws(pop, wcfg.n, stream)
    psi = pop.psi
    est = evaluate_estimators(draws, pop, wcfg, cfg.estimators, cfg.tt_lambda)
    return [ReplicateRecord(name, r, est[name], psi, (est[name] - psi) ** 2) for name in cfg.estimators]


def summarize(records: Sequence[ReplicateRecord], estimators: Sequence[str]) -> List[SummaryRow]:
    """Per-estimator mean, sd and standard error of the squared errors, in replicate order."""
    rows = []
    for name in estimators:
        se = np.array([rec.sq_error for rec in records if rec.estimator == name], dtype=float)
        reps = se.size
        mean = float(np.mean(se))
        sd = float(np.std(se, ddof=1)) if reps > 1 else math.nan
        rows.append(SummaryRow(name, reps, mean, sd, sd / math.sqrt(reps) if reps > 1 else math.nan))
    return rows


@dataclass
class WassermanResult:
    records: List[ReplicateRecord]
    summary: List[SummaryRow]
    paths: Dict[str, Path] = field(default_factory=dict)

    def mse(self, name: str) -> float:
        return next(row.mse_mean for row in self.summary if row.estimator == name)


def run_wasserman_study(cfg: BenchConfig) -> WassermanResult:
    """Monte Carlo MSE comparison on the paired-replicate design.

    Each replicate draws a fresh population and one set of draws; every
    selected estimator sees the same draws.
    """
    if cfg.wasserman is None:
        raise ConfigurationError("run_wasserman_study needs a Wasserman sub-config")
    per_rep = _map_replicates(lambda r: wasserman_replicate(cfg, r), range(cfg.reps), cfg.workers)
    records = [rec for recs in per_rep for rec in recs]
    result = WassermanResult(records, summarize(records, cfg.estimators))
    if cfg.output_path is not None:
        out = Path(cfg.output_path)
        result.paths["raw"] = write_csv(out / "wasserman_raw.csv", RAW_HEADER, records)
        result.paths["summary"] = write_csv(out / "wasserman_summary.csv", SUMMARY_HEADER, result.summary)
    return result


def read_raw_csv(path) -> List[ReplicateRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != RAW_HEADER:
            raise ConfigurationError(f"unexpected raw CSV header {header}")
        return [
            ReplicateRecord(row[0], int(row[1]), float(row[2]), float(row[3]), float(row[4]))
            for row in reader
        ]


# --- Riemann convergence-rate study -------------------------------------------

RATE_SIZES = tuple(2**e for e in range(5, 13))


def _rate_schemes():
    unif = evidence.get_problem("quadratic-uniform")
    dens = evidence.get_problem("quadratic-linear-density")
    return {
        # trapezoid rule on uniform order statistics (Yakowitz)
        "uniform-trapezoid": lambda s, n: evidence.trapezoid_estimate(unif.g_sample(s, n), unif),
        # left Riemann sum on draws from f itself (Philippe)
        "iid-riemann": lambda s, n: evidence.riemann_estimate(dens.g_sample(s, n), dens),
        "uniform-riemann": lambda s, n: evidence.riemann_estimate(unif.g_sample(s, n), unif),
        "plain-mc": lambda s, n: float(np.mean(dens.l(dens.g_sample(s, n)))),
    }


@dataclass
class RateResult:
    rows: List[Tuple[str, int, float, float]]  # scheme, n, variance, mean
    slopes: Dict[str, float]
    paths: Dict[str, Path] = field(default_factory=dict)


def loglog_slope(ns, variances) -> float:
    """Ordinary least-squares slope of ``log variance`` on ``log n``."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(variances, dtype=float))
    x0 = x - x.mean()
    return float(np.sum(x0 * (y - y.mean())) / np.sum(x0 * x0))


def run_riemann_rate_study(cfg: BenchConfig) -> RateResult:
    """Variance of each quadrature scheme over ``n = 2^5 .. 2^12`` and its log-log slope."""
    sizes = cfg.sizes or RATE_SIZES
    schemes = _rate_schemes()
    names = list(schemes)

    def one(job):
        j, r = job
        stream = RandomStream(cfg.seed, (j << 32) | r)
        n = sizes[j]
        return [schemes[name](stream, n) for name in names]

    jobs = [(j, r) for j in range(len(sizes)) for r in range(cfg.reps)]
    values = np.array(_map_replicates(one, jobs, cfg.workers)).reshape(len(sizes), cfg.reps, len(names))
    rows = []
    slopes = {}
    for c, name in enumerate(names):
        var = values[:, :, c].var(axis=1, ddof=1)
        mean = values[:, :, c].mean(axis=1)
        rows.extend((name, int(n), float(v), float(m)) for n, v, m in zip(sizes, var, mean))
        slopes[name] = loglog_slope(sizes, var)
    result = RateResult(rows, slopes)
    if cfg.output_path is not None:
        out = Path(cfg.output_path)
        result.paths["rate"] = write_csv(out / "riemann_rate.csv", ("scheme", "n", "variance", "mean"), rows)
        result.paths["slopes"] = write_csv(
            out / "riemann_slopes.csv", ("scheme", "slope"), [(k, v) for k, v in slopes.items()]
        )
    return result


# --- Basu's circus ------------------------------------------------------------


@dataclass
class BasuReport:
    herd_total: float
    sambo_weight: float
    jumbo_weight: float
    ht_total_sambo: float
    ht_total_jumbo: float
    ratio_total_sambo: float
    ratio_total_jumbo: float
    text: str


def basu_herd():
    """Fifty elephants: this year's weights, last year's weights, and selection probabilities.

    Index 0 is Sambo, an average elephant drawn with probability 99/100;
    index 1 is Jumbo, the heaviest; the other 49 are drawn with 1/4900 each.
    """
    last_year = np.concatenate(([4000.0, 6400.0], np.linspace(3000.0, 5000.0, 48)))
    weights = 1.05 * last_year
    p = np.full(50, 1.0 / 4900.0)
    p[0] = 99.0 / 100.0
    return weights, last_year, p


def _basu_totals(weights, aux, p, drawn):
    one = ipw.WeightedSample(y=weights[drawn : drawn + 1], p=p[drawn : drawn + 1])
    ht_total = ipw.horvitz_thompson(one, total=True).estimate
    r = np.zeros(weights.size, dtype=np.int8)
    r[drawn] = 1
    herd = ipw.WeightedSample(y=np.where(r == 1, weights, 0.0), p=p, r=r, a=aux)
    return ht_total, ipw.hajek_ratio_total(herd)


def run_basu_demo() -> BasuReport:
    weights, aux, p = basu_herd()
    ht_s, ratio_s = _basu_totals(weights, aux, p, 0)
    ht_j, ratio_j = _basu_totals(weights, aux, p, 1)
    total = float(np.sum(weights))
    lines = [
        "Basu's circus: 50 elephants",
        f"  true herd total          {total:12.1f}",
        f"  Sambo weight             {weights[0]:12.1f}   (p = 99/100)",
        f"  Jumbo weight             {weights[1]:12.1f}   (p = 1/4900)",
        f"  HT total, Sambo drawn    {ht_s:12.1f}   = Sambo x 100/99",
        f"  HT total, Jumbo drawn    {ht_j:12.1f}   = Jumbo x 4900",
        f"  Hajek ratio, Sambo drawn {ratio_s:12.1f}",
        f"  Hajek ratio, Jumbo drawn {ratio_j:12.1f}",
    ]
    return BasuReport(total, float(weights[0]), float(weights[1]), ht_s, ht_j, ratio_s, ratio_j, "\n".join(lines))


# --- consistency sweep ---------------------------------------------------------

CONSISTENCY_SIZES = (100, 1000, 10000)
CONSISTENCY_HEADER = (
    "n",
    "bayes_bias",
    "bayes_var",
    "bayes_var_delta",
    "bayes_var_times_n",
    "ht_var",
    "ht_var_exact",
    "ht_var_bound",
    "li_exceed_freq",
    "li_tail_bound",
)


def run_consistency_check(cfg: BenchConfig) -> List[dict]:
    """Bias and variance of the Bayes and HT estimators on one fixed population.

    The population comes from the dedicated stream ``2**64 - 1``; each size
    ``j`` and replicate ``r`` uses stream ``(j << 32) | r``.
    """
    wcfg = cfg.wasserman
    if wcfg is None:
        raise ConfigurationError("consistency check needs a Wasserman sub-config")
    sizes = cfg.sizes or CONSISTENCY_SIZES
    pop = wasserman.generate_population(wcfg, RandomStream(cfg.seed, POPULATION_STREAM))
    psi = pop.psi
    rows = []
    for j, n in enumerate(sizes):

        def one(r, j=j, n=n):
            draws = wasserman.simulate_draws(pop, n, RandomStream(cfg.seed, (j << 32) | r))
            return wasserman.bayes_li(draws, wcfg.alpha_f), wasserman.ht_wasserman(draws, pop)

        est = np.array(_map_replicates(one, range(cfg.reps), cfg.workers))
        bayes, ht = est[:, 0], est[:, 1]
        mom = wasserman.delta_moments(pop, n, wcfg.alpha_f)
        var_b = float(np.var(bayes, ddof=1)) if cfg.reps > 1 else math.nan
        rows.append(
            {
                "n": int(n),
                "bayes_bias": float(np.mean(bayes)) - psi,
                "bayes_var": var_b,
                "bayes_var_delta": mom.v_bayes,
                "bayes_var_times_n": var_b * n,
                "ht_var": float(np.var(ht, ddof=1)) if cfg.reps > 1 else math.nan,
                "ht_var_exact": mom.v_ht,
                "ht_var_bound": 1.0 / (n * wcfg.delta**2),
                "li_exceed_freq": float(np.mean(bayes >= psi + cfg.eps)),
                "li_tail_bound": wasserman.hoeffding_tail_bound(n, wcfg.delta, psi, cfg.eps),
            }
        )
    if cfg.output_path is not None:
        write_csv(
            Path(cfg.output_path) / "consistency.csv",
            CONSISTENCY_HEADER,
            [[row[k] for k in CONSISTENCY_HEADER] for row in rows],
        )
    return rows


def homogeneous_bayes_variance(
    theta: float, p: float, n: int, reps: int, seed: int = 2022, B: int = 10, workers: int = 1
) -> Tuple[float, float]:
    """Empirical variance of the Bayes estimator against its delta-method value.

    Every ``theta_b`` equals ``theta`` and every ``p_b`` equals ``p``.
    Returns ``(empirical, predicted)``.
    """
    pop = wasserman.Population(theta=np.full(B, float(theta)), p=np.full(B, float(p)))

    def one(r):
        return wasserman.bayes_li(wasserman.simulate_draws(pop, n, RandomStream(seed, r)))

    est = np.array(_map_replicates(one, range(reps), workers))
    return float(np.var(est, ddof=1)), wasserman.delta_moments(pop, n).v_bayes


# --- nested quadrature and semiparametric demos ------------------------------


def run_nested(problem: str = "linear-uniform", ms: Sequence[int] = (10, 100, 500, 1000), K: float = 50.0,
               output_path=None) -> List[Tuple[int, float, float, float, float]]:
    prob = evidence.get_problem(problem)
    if prob.survival is None:
        raise DomainError(f"problem {problem!r} has no survival function")
    rows = []
    for m in ms:
        est = evidence.nested_quadrature(prob.survival, int(m), K)
        rows.append((int(m), float(K), est, prob.truth, abs(est - prob.truth)))
    if output_path is not None:
        write_csv(Path(output_path) / "nested.csv", ("m", "K", "estimate", "truth", "abs_error"), rows)
    return rows


def run_semiparam(data: semiparam.SemiparamData, anchor: int = 0, output_path=None,
                  tol: float = 1e-13, max_iter: int = 100_000):
    sol = semiparam.ips_solve(data, anchor=anchor, tol=tol, max_iter=max_iter)
    rows = [(r + 1, float(sol.psi_hat[r])) for r in range(data.k)]
    if output_path is not None:
        write_csv(Path(output_path) / "semiparam.csv", ("sampler", "psi_ratio_to_anchor"), rows)
    return sol, rows


def with_theta_range(cfg: BenchConfig, lo: float, hi: float) -> BenchConfig:
    return replace(cfg, wasserman=replace(cfg.wasserman, theta_lo=lo, theta_hi=hi))
