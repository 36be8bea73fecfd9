"""Seeded Monte Carlo engine over independent replicates.

Replicate r draws from its own generator, seeded by a splitmix-style 64-bit
avalanche mix of (master_seed XOR r):

    z = (x + 0x9E3779B97F4A7C15) mod 2^64
    z = ((z XOR z >> 30) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z XOR z >> 27) * 0x94D049BB133111EB) mod 2^64
    z = z XOR z >> 31

so results are a pure function of (config, master_seed), whatever the thread
count.  Reports carry wall-clock time as an attribute but never serialize it;
serialized reports are byte-identical across reruns.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import stats as sps

from . import kingman
from .errors import ConfigurationError
from .stats import (
    FiniteRef,
    MomentSpec,
    NormalRef,
    PoissonRef,
    epsilon,
    floor_log2,
    gof,
    limit_mean,
    min_geometric_pmf,
    moment_prediction,
    selection_size_bernoulli_sample,
    selection_size_mean,
    tail_reference,
    two_sample_chi_square,
)

__all__ = [
    "SCHEMA",
    "KINDS",
    "MODELS",
    "REPLAY_N_GUARD",
    "substream_seed",
    "replicate_rng",
    "ExperimentConfig",
    "SummaryReport",
    "run",
]

SCHEMA = "rrtlab/v1"
KINDS = ("simulate", "poisson", "tail", "clt", "moments", "verify")
MODELS = ("rrt", "kingman-replay", "kingman-fast")
VERIFY_SUITES = ("streak", "exchangeability", "selection", "tau")

# kingman-replay keeps python-object forests per replicate; past this size the
# cost balloons, use kingman-fast instead
REPLAY_N_GUARD = 20000

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def substream_seed(master_seed: int, replicate: int) -> int:
    # int() guards against numpy integer inputs, whose ^ would wrap at 64 bits
    return splitmix64((int(master_seed) ^ int(replicate)) & _MASK64)


def replicate_rng(master_seed: int, replicate: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(substream_seed(master_seed, replicate)))


_DEFAULT_MOMENT_SPECS = (
    MomentSpec({0: 2}),
    MomentSpec({0: 1, 1: 1}),
    MomentSpec({1: 1}, top=1),
)


@dataclass
class ExperimentConfig:
    """Everything a run depends on.  See run() for the kinds."""

    kind: str
    n: int
    replicates: int
    master_seed: int = 0
    model: str = "kingman-fast"
    imin: int = -4
    imax: int = 4
    i: Optional[int] = None  # focus cell for kind="clt"
    moment_specs: tuple[MomentSpec, ...] = ()
    tail_pair: tuple[int, int] = (1, 2)  # (plain cell, tail cell) for independence
    ks: tuple[int, ...] = (2, 3)  # tau suite
    tau_exponent: float = 0.5  # horizon n - ceil(n**tau_exponent)
    tau_replicates: Optional[int] = None
    streak_n: int = 1000
    streak_replicates: int = 1000
    exch_n: int = 100
    exch_replicates: int = 30000
    threads: int = 1
    checks: str = "all"  # verify suite selection, comma separated
    csv_path: Optional[str] = None
    json_path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.model not in MODELS:
            raise ConfigurationError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.n < 1 or self.replicates < 1 or self.threads < 1:
            raise ConfigurationError("n, replicates and threads must be positive")
        if not 0 <= self.master_seed <= _MASK64:
            raise ConfigurationError("master_seed must fit in 64 bits")
        if self.imin >= self.imax:
            raise ConfigurationError(f"need imin < imax, got [{self.imin}, {self.imax}]")
        if self.model == "kingman-replay" and self.n > REPLAY_N_GUARD:
            raise ConfigurationError(
                f"kingman-replay is guarded at n <= {REPLAY_N_GUARD}; "
                "use kingman-fast for large n"
            )
        if self.kind == "clt":
            if self.i is None:
                raise ConfigurationError("kind='clt' needs a focus index i")
            if not self.imin <= self.i < self.imax:
                raise ConfigurationError(
                    f"focus index {self.i} outside [{self.imin}, {self.imax})"
                )
        if self.kind == "moments" and not self.moment_specs:
            self.moment_specs = _DEFAULT_MOMENT_SPECS
        self.moment_specs = tuple(
            s if isinstance(s, MomentSpec) else MomentSpec(**s) for s in self.moment_specs
        )
        for spec in self.moment_specs:
            for k in spec.a:
                if k == spec.top:
                    if not self.imin <= k <= self.imax:
                        raise ConfigurationError(
                            f"tail index {k} outside [{self.imin}, {self.imax}]"
                        )
                elif not self.imin <= k < self.imax:
                    raise ConfigurationError(
                        f"moment index {k} outside [{self.imin}, {self.imax})"
                    )
        self.tail_pair = (int(self.tail_pair[0]), int(self.tail_pair[1]))
        self.ks = tuple(int(k) for k in self.ks)
        if self.kind == "verify":
            for name in self._suites():
                if name not in VERIFY_SUITES:
                    raise ConfigurationError(f"unknown verify suite {name!r}")
            for k in self.ks:
                if k < 2:
                    raise ConfigurationError(f"tau needs k >= 2, got {k}")
            if not 0 < self.tau_exponent < 1:
                raise ConfigurationError("tau_exponent must lie in (0, 1)")

    def _suites(self) -> tuple[str, ...]:
        if self.checks == "all":
            return VERIFY_SUITES
        return tuple(s.strip() for s in self.checks.split(",") if s.strip())

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "model": self.model,
            "imin": self.imin,
            "imax": self.imax,
            "i": self.i,
            "moment_specs": [s.to_jsonable() for s in self.moment_specs],
            "tail_pair": list(self.tail_pair),
            "ks": list(self.ks),
            "tau_exponent": self.tau_exponent,
            "tau_replicates": self.tau_replicates,
            "streak_n": self.streak_n,
            "streak_replicates": self.streak_replicates,
            "exch_n": self.exch_n,
            "exch_replicates": self.exch_replicates,
            "threads": self.threads,
            "checks": self.checks,
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        specs = obj.pop("moment_specs", [])
        parsed = tuple(
            MomentSpec({int(k): int(v) for k, v in s["a"].items()}, s.get("top"))
            for s in specs
        )
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(obj) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        if "tail_pair" in obj:
            obj["tail_pair"] = tuple(obj["tail_pair"])
        if "ks" in obj:
            obj["ks"] = tuple(obj["ks"])
        return cls(moment_specs=parsed, **obj)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    raise TypeError(f"cannot serialize {type(x)}")


@dataclass
class SummaryReport:
    """Aggregated run output.  data serializes; wall_seconds deliberately
    stays outside so identical configs produce identical bytes."""

    data: dict
    wall_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.data.get("passed", True))

    @property
    def checks(self) -> dict:
        return self.data.get("checks", {})

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.data, sort_keys=True, indent=indent)


# ---------------------------------------------------------------------------
# profile experiments (simulate / poisson / tail / clt / moments)
# ---------------------------------------------------------------------------


def _pooled_row(hist: np.ndarray, fl: int, imin: int, imax: int, out: np.ndarray) -> None:
    # out = [x_lo, x_imin, ..., x_{imax-1}, x_hi], everything outside the
    # window pooled into the end cells
    lo_end = fl + imin
    hi_start = fl + imax
    size = hist.shape[0]
    out[0] = hist[: min(max(lo_end, 0), size)].sum()
    for idx in range(imax - imin):
        d = lo_end + idx
        out[1 + idx] = hist[d] if 0 <= d < size else 0
    out[-1] = hist[min(max(hi_start, 0), size) :].sum()


def _degree_hist(config: ExperimentConfig, rng: np.random.Generator, scratch) -> np.ndarray:
    n = config.n
    if config.model == "rrt":
        if n == 1:
            return np.array([1], dtype=np.int64)
        parents = rng.integers(1, scratch["hi"])
        return np.bincount(np.bincount(parents, minlength=n + 1)[1:])
    if config.model == "kingman-fast":
        kingman.degree_sample_into(n, rng, scratch["deg"], scratch["roots"])
        return np.bincount(scratch["deg"])
    ev = kingman.sample_events(n, rng)
    return np.bincount(kingman.replay_degrees(ev))


def _profile_worker(config, fl, indices, rows, deltas) -> None:
    n = config.n
    scratch = {}
    if config.model == "rrt" and n > 1:
        scratch["hi"] = np.arange(2, n + 1)
    if config.model == "kingman-fast":
        scratch["deg"] = np.empty(n, dtype=np.int64)
        scratch["roots"] = np.empty(n, dtype=np.int64)
    for r in indices:
        rng = replicate_rng(config.master_seed, r)
        hist = _degree_hist(config, rng, scratch)
        deltas[r] = hist.shape[0] - 1
        _pooled_row(hist, fl, config.imin, config.imax, rows[r])


def _write_csv(path, config, eps, rows, deltas) -> None:
    names = (
        ["x_lo"]
        + [f"x_{i}" for i in range(config.imin, config.imax)]
        + ["x_hi"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replicate", "n", "eps_n", "delta"] + names)
        for r in range(rows.shape[0]):
            writer.writerow(
                [r, config.n, repr(eps), int(deltas[r])] + [int(v) for v in rows[r]]
            )


def _mean_se(values: np.ndarray) -> tuple[float, float, float]:
    mean = float(values.mean())
    var = float(values.var(ddof=1)) if values.shape[0] > 1 else 0.0
    se = math.sqrt(var / values.shape[0])
    return mean, var, se


def _run_profile_experiment(config: ExperimentConfig) -> dict:
    n, reps = config.n, config.replicates
    fl = floor_log2(n)
    eps = epsilon(n)
    width = config.imax - config.imin + 2
    rows = np.zeros((reps, width), dtype=np.int64)
    deltas = np.zeros(reps, dtype=np.int64)

    if config.threads == 1:
        _profile_worker(config, fl, range(reps), rows, deltas)
    else:
        chunks = np.array_split(np.arange(reps), config.threads)
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = [
                pool.submit(_profile_worker, config, fl, chunk, rows, deltas)
                for chunk in chunks
                if chunk.size
            ]
            for f in futures:
                f.result()

    if config.csv_path:
        _write_csv(config.csv_path, config, eps, rows, deltas)

    def col(i: int) -> np.ndarray:
        if not config.imin <= i < config.imax:
            raise ConfigurationError(f"cell {i} outside [{config.imin}, {config.imax})")
        return rows[:, 1 + (i - config.imin)]

    def col_ge(i: int) -> np.ndarray:
        # X_{>=i}; valid for imin <= i <= imax thanks to the x_hi pool
        if not config.imin <= i <= config.imax:
            raise ConfigurationError(f"tail cell {i} outside [{config.imin}, {config.imax}]")
        return rows[:, 1 + (i - config.imin) :].sum(axis=1)

    body: dict = {
        "kind": config.kind,
        "n": n,
        "replicates": reps,
        "eps_n": eps,
        "floor_log": fl,
        "model": config.model,
    }
    prof = {}
    for i in range(config.imin, config.imax):
        mean, var, se = _mean_se(col(i).astype(float))
        prof[str(i)] = {"mean": mean, "var": var, "se": se, "limit_mean": limit_mean(i, eps)}
    mean_lo, var_lo, _ = _mean_se(rows[:, 0].astype(float))
    mean_hi, var_hi, _ = _mean_se(rows[:, -1].astype(float))
    body["profile"] = {"x": prof, "x_lo_mean": mean_lo, "x_hi_mean": mean_hi}
    body["delta"] = {
        "mean": float(deltas.mean()),
        "min": int(deltas.min()),
        "max": int(deltas.max()),
        "tail": {
            str(i): float((deltas >= fl + i).mean())
            for i in range(config.imin, config.imax + 1)
        },
    }

    checks: dict = {}

    if config.kind == "poisson":
        cells = {}
        for i in range(config.imin, config.imax):
            xi = col(i)
            mu = limit_mean(i, eps)
            rep = gof(xi, PoissonRef(mu))
            mean, var, se = _mean_se(xi.astype(float))
            cells[str(i)] = {
                "mean": mean,
                "var": var,
                "se": se,
                "limit_mean": mu,
                "tv": rep.tv,
                "chi_square": list(rep.chi_square),
                "counts": {str(v): int(c) for v, c in enumerate(np.bincount(xi)) if c},
            }
            tol = 3 * se + 0.05 * mu
            checks[f"mean_{i}"] = {
                "pass": abs(mean - mu) <= tol,
                "mean": mean,
                "target": mu,
                "tolerance": tol,
            }
        body["cells"] = cells
        if config.imin <= 0 < config.imax:
            checks["tv_0"] = {"pass": cells["0"]["tv"] <= 0.02, "tv": cells["0"]["tv"], "limit": 0.02}
        if config.imin <= 0 and 1 < config.imax:
            x0 = col(0).astype(float)
            x1 = col(1).astype(float)
            prod = (x0 - x0.mean()) * (x1 - x1.mean())
            cov = float(prod.sum() / (reps - 1))
            se_cov = float(prod.std(ddof=1) / math.sqrt(reps))
            body["covariance"] = {"pair": [0, 1], "cov": cov, "se": se_cov}
            checks["cov_0_1"] = {"pass": abs(cov) <= 3 * se_cov, "cov": cov, "se": se_cov}
        i1, i2 = config.tail_pair
        xi1 = col(i1)
        ge2 = col_ge(i2)
        mu_ge = 2.0 ** (-i2 + eps)
        rep = gof(ge2, PoissonRef(mu_ge))
        table = np.array(
            [
                [int(((xi1 == 0) & (ge2 == 0)).sum()), int(((xi1 == 0) & (ge2 > 0)).sum())],
                [int(((xi1 > 0) & (ge2 == 0)).sum()), int(((xi1 > 0) & (ge2 > 0)).sum())],
            ]
        )
        if table.sum(axis=1).min() == 0 or table.sum(axis=0).min() == 0:
            pval = 1.0
            stat = 0.0
        else:
            stat, pval, _, _ = sps.chi2_contingency(table, correction=False)
        body["tail_cell"] = {
            "i": i1,
            "ge": i2,
            "tail_mean": float(ge2.mean()),
            "limit_mean": mu_ge,
            "tv": rep.tv,
            "independence_table": table.tolist(),
            "independence_chi2": float(stat),
            "independence_p": float(pval),
        }
        checks[f"tv_ge{i2}"] = {"pass": rep.tv <= 0.02, "tv": rep.tv, "limit": 0.02}
        checks[f"indep_{i1}_ge{i2}"] = {"pass": pval > 1e-3, "p": float(pval), "alpha": 1e-3}

    elif config.kind == "tail":
        tails = {}
        for i in range(config.imin, config.imax + 1):
            freq = float((deltas >= fl + i).mean())
            se = math.sqrt(freq * (1 - freq) / reps)
            ref = tail_reference(i, eps)
            tol = max(3 * se, 0.1 * ref)
            tails[str(i)] = {"freq": freq, "se": se, "reference": ref, "tolerance": tol}
            checks[f"tail_{i}"] = {
                "pass": abs(freq - ref) <= tol,
                "freq": freq,
                "reference": ref,
                "tolerance": tol,
            }
        body["tails"] = tails

    elif config.kind == "clt":
        xi = col(config.i).astype(float)
        mu = limit_mean(config.i, eps)
        z = (xi - mu) / math.sqrt(mu)
        rep = gof(z, NormalRef())
        body["clt"] = {
            "i": config.i,
            "mu": mu,
            "ks": rep.ks,
            "mean_z": float(z.mean()),
            "var_z": float(z.var(ddof=1)),
        }
        checks["clt_ks"] = {"pass": rep.ks <= 0.05, "ks": rep.ks, "limit": 0.05}

    elif config.kind == "moments":
        entries = []
        for idx, spec in enumerate(config.moment_specs):
            vals = np.ones(reps, dtype=float)
            for k, a in spec.a.items():
                xs = (col_ge(k) if k == spec.top else col(k)).astype(float)
                for t in range(a):
                    vals = vals * (xs - t)
            est = float(vals.mean())
            se = float(vals.std(ddof=1) / math.sqrt(reps))
            pred = moment_prediction(spec, eps)
            tol = 3 * se + 0.05 * pred
            entries.append(
                {
                    "spec": spec.to_jsonable(),
                    "estimate": est,
                    "se": se,
                    "prediction": pred,
                    "tolerance": tol,
                }
            )
            checks[f"moment_{idx}"] = {
                "pass": abs(est - pred) <= tol,
                "estimate": est,
                "prediction": pred,
                "tolerance": tol,
            }
        body["moments"] = entries

    body["checks"] = checks
    return body


# ---------------------------------------------------------------------------
# verification suites (kind = "verify")
# ---------------------------------------------------------------------------


def _run_verify(config: ExperimentConfig) -> dict:
    body: dict = {"kind": "verify", "n": config.n, "replicates": config.replicates}
    checks: dict = {}
    suites = config._suites()
    offset = 0  # suites consume disjoint replicate index ranges of one stream family

    if "streak" in suites:
        ns, rs = config.streak_n, config.streak_replicates
        mismatches = 0
        for r in range(rs):
            rng = replicate_rng(config.master_seed, offset + r)
            ev = kingman.sample_events(ns, rng)
            recs = kingman.selection_records(ev)
            deg = kingman.replay_degrees(ev)
            for v in range(1, ns + 1):
                if recs[v].degree != int(deg[v - 1]):
                    mismatches += 1
        offset += rs
        body["streak"] = {"n": ns, "replicates": rs, "mismatches": mismatches}
        checks["streak"] = {"pass": mismatches == 0, "mismatches": mismatches}

    if "exchangeability" in suites:
        ne, re = config.exch_n, config.exch_replicates
        verts = (1, (ne + 1) // 2, ne)
        samples = np.empty((3, re), dtype=np.int64)
        for r in range(re):
            rng = replicate_rng(config.master_seed, offset + r)
            deg = kingman.replay_degrees(kingman.sample_events(ne, rng))
            for j, v in enumerate(verts):
                samples[j, r] = deg[v - 1]
        offset += re
        pvals = {}
        for a in range(3):
            for b in range(a + 1, 3):
                _, _, p = two_sample_chi_square(samples[a], samples[b])
                pvals[f"{verts[a]}-{verts[b]}"] = p
        body["exchangeability"] = {"n": ne, "replicates": re, "vertices": list(verts), "p": pvals}
        checks["exchangeability"] = {
            "pass": min(pvals.values()) > 1e-3,
            "min_p": min(pvals.values()),
            "alpha": 1e-3,
        }

    if "selection" in suites:
        ns, rs = config.n, config.replicates
        sizes = np.empty(rs, dtype=np.int64)
        degs = np.empty(rs, dtype=np.int64)
        bern = np.empty(rs, dtype=np.int64)
        for r in range(rs):
            rng = replicate_rng(config.master_seed, offset + r)
            s, d, _ = kingman.selection_stats_sample(ns, rng)
            sizes[r] = s
            degs[r] = d
            bern[r] = selection_size_bernoulli_sample(ns, rng)
        offset += rs
        target = selection_size_mean(ns)
        mean, _, se = _mean_se(sizes.astype(float))
        stat, dof, p_two = two_sample_chi_square(sizes, bern)
        buckets = {}
        bucket_ps = []
        for s in np.unique(sizes):
            sel = degs[sizes == s]
            if sel.shape[0] < 50:
                continue
            rep = gof(sel, FiniteRef(min_geometric_pmf(int(s))))
            buckets[str(int(s))] = {
                "count": int(sel.shape[0]),
                "chi_square": list(rep.chi_square),
            }
            bucket_ps.append(rep.chi_square[2])
        body["selection"] = {
            "n": ns,
            "replicates": rs,
            "mean": mean,
            "se": se,
            "target": target,
            "two_sample": [stat, dof, p_two],
            "buckets": buckets,
        }
        checks["selection_mean"] = {
            "pass": abs(mean - target) <= 3 * se,
            "mean": mean,
            "target": target,
            "se": se,
        }
        checks["selection_two_sample"] = {"pass": p_two > 1e-3, "p": p_two, "alpha": 1e-3}
        checks["selection_conditional"] = {
            "pass": bool(bucket_ps) and min(bucket_ps) > 1e-3,
            "buckets": len(bucket_ps),
            "min_p": min(bucket_ps) if bucket_ps else None,
            "alpha": 1e-3,
        }

    if "tau" in suites:
        nt = config.n
        rt = config.tau_replicates or config.replicates
        cut = math.ceil(nt**config.tau_exponent)
        horizon = nt - cut
        taus = {}
        for k in config.ks:
            hits = 0
            for r in range(rt):
                rng = replicate_rng(config.master_seed, offset + r)
                t = kingman.sample_tau(nt, k, rng)
                if t is not None and t <= horizon:
                    hits += 1
            offset += rt
            freq = hits / rt
            se = math.sqrt(freq * (1 - freq) / rt)
            bound = 2 * k * k / (cut - 1)
            taus[str(k)] = {
                "replicates": rt,
                "horizon": horizon,
                "freq": freq,
                "se": se,
                "bound": bound,
            }
            checks[f"tau_{k}"] = {
                "pass": freq <= bound + 3 * se,
                "freq": freq,
                "bound": bound,
                "se": se,
            }
        body["tau"] = taus

    body["checks"] = checks
    return body


def run(config: ExperimentConfig) -> SummaryReport:
    """Run an experiment.  Deterministic given (config, master_seed); the
    thread count changes scheduling only, never results."""
    t0 = time.perf_counter()
    if config.kind == "verify":
        body = _run_verify(config)
    else:
        body = _run_profile_experiment(config)
    checks = body.get("checks", {})
    data = {"schema": SCHEMA, "config": config.to_jsonable(), **body}
    data["passed"] = all(c["pass"] for c in checks.values()) if checks else True
    data = _jsonable(data)
    report = SummaryReport(data=data, wall_seconds=time.perf_counter() - t0)
    if config.json_path and config.json_path != "-":
        with open(config.json_path, "w") as fh:
            fh.write(report.to_json())
            fh.write("\n")
    return report
