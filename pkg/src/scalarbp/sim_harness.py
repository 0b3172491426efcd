"""Monte-Carlo decoding experiments over the depolarizing channel."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bp4_reference import decode_bp4_vector
from .bp4_scalar import DecoderConfig, ScalarBp4Decoder, depolarizing_priors
from .outcome import DecodeOutcome
from .pauli_core import CheckMatrix, PauliString, is_stabilizer_element, syndrome

SUCCESS = "success"
DETECTED_FAILURE = "detected_failure"
FALSE_CONVERGENCE = "false_convergence"

DECODERS = ("bp4", "bp4_vector")

CSV_FIELDS = ("epsilon", "decoder", "schedule", "alpha_v", "trials", "logical_errors", "detected_failures",
              "false_convergences", "logical_error_rate", "ci_low", "ci_high", "mean_iterations", "seed")


@dataclass(frozen=True)
class ChannelParams:
    epsilon: float
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")

    def priors(self, n: int) -> np.ndarray:
        return depolarizing_priors(n, self.epsilon)


@dataclass(frozen=True)
class StopRule:
    min_logical_errors: int = 100
    max_trials: int = 100_000

    def __post_init__(self):
        if self.min_logical_errors < 1 or self.max_trials < 1:
            raise ValueError("stop bounds must be positive")


@dataclass
class TrialStats:
    trials: int = 0
    logical_errors: int = 0
    detected_failures: int = 0
    false_converged: int = 0
    sum_iterations: int = 0

    @property
    def rate(self) -> float:
        return self.logical_errors / self.trials if self.trials else 0.0

    @property
    def mean_iterations(self) -> float:
        return self.sum_iterations / self.trials if self.trials else 0.0

    def add(self, kind: str, iterations: int) -> None:
        self.trials += 1
        self.sum_iterations += iterations
        if kind == DETECTED_FAILURE:
            self.detected_failures += 1
        elif kind == FALSE_CONVERGENCE:
            self.false_converged += 1
        self.logical_errors = self.detected_failures + self.false_converged


@dataclass(frozen=True)
class ConfidenceInterval:
    low: float
    high: float


@dataclass
class ExperimentResult:
    stats: TrialStats
    ci: ConfidenceInterval
    channel: ChannelParams
    config: DecoderConfig
    decoder: str = "bp4"
    hit_max_trials: bool = False
    extra: dict = field(default_factory=dict)

    def csv_row(self) -> dict:
        s = self.stats
        return {
            "epsilon": repr(float(self.channel.epsilon)),
            "decoder": self.decoder,
            "schedule": self.config.schedule,
            "alpha_v": repr(float(self.config.alpha_v)),
            "trials": s.trials,
            "logical_errors": s.logical_errors,
            "detected_failures": s.detected_failures,
            "false_convergences": s.false_converged,
            "logical_error_rate": f"{s.rate:.6e}",
            "ci_low": f"{self.ci.low:.6e}",
            "ci_high": f"{self.ci.high:.6e}",
            "mean_iterations": f"{s.mean_iterations:.4f}",
            "seed": self.channel.seed,
        }


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> ConfidenceInterval:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials <= 0:
        return ConfidenceInterval(0.0, 1.0)
    p = successes / trials
    z2n = z * z / trials
    center = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    # the endpoints are exact at k = 0 and k = n; rounding would leave ~1e-17 residue
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return ConfidenceInterval(low, high)


def sample_error(n: int, channel: ChannelParams, trial: int) -> PauliString:
    """i.i.d. depolarizing error; the stream depends only on (seed, trial)."""
    rng = np.random.default_rng([channel.seed, trial])
    eps = channel.epsilon
    u = rng.random(n)
    # I below 1-eps, then X, Y, Z in equal thirds of the remainder
    codes = np.zeros(n, dtype=np.uint8)
    hit = u >= 1.0 - eps
    if eps > 0:
        codes[hit] = 1 + np.minimum(((u[hit] - (1.0 - eps)) * (3.0 / eps)).astype(np.int64), 2)
    return PauliString(codes)


def classify(S: CheckMatrix, E, outcome: DecodeOutcome) -> str:
    """Degeneracy-aware outcome: success iff the residual is a stabilizer."""
    if not outcome.converged:
        return DETECTED_FAILURE
    E = E if isinstance(E, PauliString) else PauliString(E)
    residual = outcome.estimate * E
    if residual.is_identity():
        return SUCCESS
    if syndrome(S, residual).any():
        return FALSE_CONVERGENCE
    return SUCCESS if is_stabilizer_element(S, residual) else FALSE_CONVERGENCE


class _Worker:
    def __init__(self, S, decoder, config, priors):
        self.S = S
        self.priors = priors
        self.decoder = decoder
        self.config = config
        self._bp4 = ScalarBp4Decoder(S, config) if decoder == "bp4" else None

    def run(self, channel: ChannelParams, trial: int) -> tuple[str, int]:
        E = sample_error(self.S.num_qubits, channel, trial)
        z = syndrome(self.S, E)
        if self._bp4 is not None:
            out = self._bp4.decode(z, self.priors)
        else:
            out = decode_bp4_vector(self.S, z, self.priors, self.config.max_iter, schedule=self.config.schedule)
        return classify(self.S, E, out), out.iterations


def run_experiment(S: CheckMatrix, channel: ChannelParams, config: DecoderConfig, stop: StopRule = StopRule(),
                   decoder: str = "bp4", threads: int = 1, batch: int = 256) -> ExperimentResult:
    """Sample, decode and classify until enough logical errors or trials.

    Trials are evaluated in index order for the stopping decision, so the
    result does not depend on ``threads``.
    """
    if decoder not in DECODERS:
        raise ValueError(f"unknown decoder {decoder!r}")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    priors = channel.priors(S.num_qubits)
    stats = TrialStats()
    workers = [_Worker(S, decoder, config, priors) for _ in range(threads)]
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        next_trial = 0
        while stats.logical_errors < stop.min_logical_errors and stats.trials < stop.max_trials:
            count = min(batch, stop.max_trials - next_trial)
            idx = range(next_trial, next_trial + count)
            if pool is None:
                results = [workers[0].run(channel, t) for t in idx]
            else:
                chunks = [list(idx)[i::threads] for i in range(threads)]
                futures = [pool.submit(lambda w, ts: [w.run(channel, t) for t in ts], w, ts)
                           for w, ts in zip(workers, chunks)]
                parts = [f.result() for f in futures]
                results = [None] * count
                for i, part in enumerate(parts):
                    results[i::threads] = part
            for kind, its in results:
                stats.add(kind, its)
                if stats.logical_errors >= stop.min_logical_errors:
                    break
            next_trial += count
    finally:
        if pool is not None:
            pool.shutdown()
    ci = wilson_interval(stats.logical_errors, stats.trials)
    return ExperimentResult(stats, ci, channel, config, decoder,
                            hit_max_trials=stats.logical_errors < stop.min_logical_errors)
