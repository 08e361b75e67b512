"""Discrete-event Monte Carlo of the nested repeater protocol.

Time is slotted at one entanglement-generation attempt per slot
(slot = L0/c + tau_init).  All elementary links attempt in parallel; sibling
subtrees wait on each other, and a failed swap regenerates both child
subtrees starting from the failure time.  Every trial draws from its own
counter-based RNG stream keyed by (seed, trial index), so results are
bit-reproducible no matter how trials are scheduled.

A finite ``memory_cutoff`` bounds how long any nuclear memory may hold a
state; a trial aborts unsuccessfully the moment a stored state would exceed
it (see TrialRecord.success).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rates import RateResult


@dataclass(frozen=True)
class ProtocolConfig:
    """Inputs of one simulation campaign."""

    n_nest: int
    p0: float
    p_swap: float
    slot_time: float
    trials: int
    seed: int
    swap_time: float = 0.0
    memory_cutoff: float = math.inf

    def __post_init__(self):
        if not 0.0 < self.p0 <= 1.0:
            raise ValueError("p0 must lie in (0, 1]")
        if not 0.0 < self.p_swap <= 1.0:
            raise ValueError("p_swap must lie in (0, 1]")
        if self.slot_time <= 0.0:
            raise ValueError("slot_time must be positive")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.n_nest < 0:
            raise ValueError("n_nest must be non-negative")


@dataclass(frozen=True)
class TrialRecord:
    total_time: float
    attempts_per_link: tuple[int, ...]
    swap_failures: int
    max_storage_time: float
    success: bool


@dataclass(frozen=True)
class TimingStats:
    """Aggregate waiting-time statistics over the successful trials."""

    mean: float
    variance: float
    stderr: float
    p50: float
    p90: float
    p99: float
    trials: int
    n_success: int
    seed: int


@dataclass(frozen=True)
class ComparisonReport:
    mc_mean: float
    mc_stderr: float
    analytic_time: float
    ratio: float
    tolerance: float
    passed: bool

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"MC mean {self.mc_mean:.6e} +- {self.mc_stderr:.2e} s | "
                f"analytic {self.analytic_time:.6e} s | "
                f"ratio {self.ratio:.4f} | tol {self.tolerance:.0%} | {verdict}")


@dataclass
class StorageHistogram:
    """Distribution of the per-trial maximum memory storage time."""

    values: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    slot_time: float = field(default=0.0)

    def fraction_exceeding(self, threshold: float) -> float:
        return float((self.values > threshold).mean())


class _CutoffExceeded(Exception):
    def __init__(self, expiry_time: float):
        self.expiry_time = expiry_time


def _sample_geometric(rng: np.random.Generator, p: float) -> int:
    """Slots until first success, from a single uniform (inverse transform).

    One uniform per draw keeps streams aligned across parameter values, so
    common-random-number comparisons are monotone in p.
    """
    if p >= 1.0:
        return 1
    u = rng.random()
    return max(1, math.ceil(math.log1p(-u) / math.log1p(-p)))


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, trial]))


def _run_trial(cfg: ProtocolConfig, trial: int) -> TrialRecord:
    rng = _trial_rng(cfg.seed, trial)
    n_links = 2**cfg.n_nest
    attempts = [0] * n_links
    swap_failures = 0
    max_storage = 0.0
    cutoff = cfg.memory_cutoff

    def hold(consume_time: float, written: float) -> None:
        nonlocal max_storage
        stored = consume_time - written
        if stored > cutoff:
            raise _CutoffExceeded(written + cutoff)
        if stored > max_storage:
            max_storage = stored

    def generate(level: int, base: int, start: float):
        """Completion time plus write times of the boundary memories."""
        nonlocal swap_failures
        if level == 0:
            slots = _sample_geometric(rng, cfg.p0)
            attempts[base] += slots
            t = start + slots * cfg.slot_time
            return t, t, t
        half = 2 ** (level - 1)
        round_start = start
        while True:
            ta, left_a, right_a = generate(level - 1, base, round_start)
            tb, left_b, right_b = generate(level - 1, base + half, round_start)
            t = max(ta, tb) + cfg.swap_time
            hold(t, right_a)   # mid memories are consumed by the swap
            hold(t, left_b)
            if rng.random() < cfg.p_swap:
                return t, left_a, right_b
            swap_failures += 1
            hold(t, left_a)    # outer memories lose their state on failure
            hold(t, right_b)
            round_start = t

    try:
        t, left, right = generate(cfg.n_nest, 0, 0.0)
        if cfg.n_nest > 0:
            hold(t, left)      # end memories hold until final delivery
            hold(t, right)
        return TrialRecord(total_time=t, attempts_per_link=tuple(attempts),
                           swap_failures=swap_failures,
                           max_storage_time=max_storage, success=True)
    except _CutoffExceeded as exc:
        return TrialRecord(total_time=exc.expiry_time,
                           attempts_per_link=tuple(attempts),
                           swap_failures=swap_failures,
                           max_storage_time=cfg.memory_cutoff, success=False)


def run_trials(cfg: ProtocolConfig) -> list[TrialRecord]:
    """All trial records, in trial order (deterministic for a given cfg)."""
    return [_run_trial(cfg, i) for i in range(cfg.trials)]


def timing_stats(records: list[TrialRecord], cfg: ProtocolConfig) -> TimingStats:
    """Aggregate statistics over the successful trials of a record list."""
    times = np.array([r.total_time for r in records if r.success])
    n_success = times.size
    if n_success == 0:
        nan = math.nan
        return TimingStats(nan, nan, nan, nan, nan, nan,
                           trials=cfg.trials, n_success=0, seed=cfg.seed)
    mean = float(times.mean())
    var = float(times.var(ddof=1)) if n_success > 1 else 0.0
    p50, p90, p99 = (float(v) for v in np.percentile(times, [50, 90, 99]))
    return TimingStats(mean=mean, variance=var,
                       stderr=math.sqrt(var / n_success),
                       p50=p50, p90=p90, p99=p99,
                       trials=cfg.trials, n_success=n_success, seed=cfg.seed)


def simulate_chain(cfg: ProtocolConfig) -> TimingStats:
    """Run the campaign and aggregate waiting-time statistics."""
    return timing_stats(run_trials(cfg), cfg)


def compare_with_analytic(cfg: ProtocolConfig, analytic: RateResult | float,
                          tolerance: float = 0.15,
                          stats: TimingStats | None = None) -> ComparisonReport:
    """Monte Carlo mean against a closed-form mean time, with a pass band.

    Passes when |ratio - 1| <= tolerance or the gap is within three standard
    errors (whichever is looser), so tight statistics are not penalized.
    """
    if stats is None:
        stats = simulate_chain(cfg)
    target = analytic.mean_time if isinstance(analytic, RateResult) else float(analytic)
    ratio = stats.mean / target
    within_band = abs(ratio - 1.0) <= tolerance
    within_noise = abs(stats.mean - target) <= 3.0 * stats.stderr
    return ComparisonReport(mc_mean=stats.mean, mc_stderr=stats.stderr,
                            analytic_time=target, ratio=ratio,
                            tolerance=tolerance,
                            passed=within_band or within_noise)


def storage_time_histogram(cfg: ProtocolConfig, bins: int = 50) -> StorageHistogram:
    """Distribution of each trial's maximum memory storage time."""
    records = run_trials(cfg)
    values = np.array([r.max_storage_time for r in records if r.success])
    if values.size == 0:
        values = np.zeros(1)
    counts, edges = np.histogram(values, bins=bins)
    return StorageHistogram(values=values, bin_edges=edges, counts=counts,
                            slot_time=cfg.slot_time)
