"""Noisy Forward-Euler integration of coupled oscillator phase dynamics.

Each oscillator phase obeys

    dphi_i/dt = K * sum_j J_ij sin(2*pi*(phi_i - phi_j))
                - Ks(t) * sin(2*pi*N*phi_i) + noise

where Ks(t) follows a triangular annealing waveform and the noise kick per
step is kn * N(0,1) * sqrt(h).  Positive couplings are repulsive (the flow
descends sum_{i<j} J_ij cos(2*pi*(phi_i - phi_j))) and the locking term
attracts phases to the N states k/N read out by thresholding.

Updates are synchronous: every drift in a step reads the frozen pre-step
phases, oscillators are processed in contiguous batches by a worker pool,
and noise is counter-indexed, so results are bit-identical for any batch
size or worker count.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numba
import numpy as np
from numba import njit, prange
from numpy.typing import NDArray

from .model import (
    CouplingMatrix,
    PhaseState,
    SolverParams,
    StateAssignment,
    _threshold,
)

TWO_PI = 2.0 * np.pi

# Noise protocol constant: Gaussian draws are generated in blocks of this many
# steps from a counter-keyed Philox stream.  Changing it changes the mapping
# from (seed, oscillator, step) to draws, so it is fixed, not configurable.
NOISE_CHUNK = 256

WORKER_ENV_VAR = "OSCIM_MAX_WORKERS"

__all__ = [
    "KsSchedule",
    "NoiseSource",
    "RunResult",
    "NumericalError",
    "ks_at",
    "phase_drift",
    "euler_step",
    "run",
    "run_replicas",
    "run_replica_set",
    "replica_seed",
    "resolve_workers",
]


class NumericalError(ArithmeticError):
    """A phase became non-finite during integration."""


@dataclass(frozen=True)
class KsSchedule:
    """Triangular annealing waveform: 0 at cycle start, ks_max at mid-cycle,
    back to 0 at the period, repeating."""

    ks_max: float
    period: float

    def __post_init__(self) -> None:
        if not (self.ks_max >= 0 and np.isfinite(self.ks_max)):
            raise ValueError("ks_max must be finite and >= 0")
        if not (self.period > 0 and np.isfinite(self.period)):
            raise ValueError("period must be finite and > 0")

    def value(self, t: float) -> float:
        tm = t % self.period
        half = 0.5 * self.period
        if tm <= half:
            return self.ks_max * (tm / half)
        return self.ks_max * (2.0 - tm / half)


def ks_at(schedule: KsSchedule, t: float) -> float:
    return schedule.value(t)


@dataclass(frozen=True)
class NoiseSource:
    """Counter-indexed Gaussian noise keyed by a 64-bit seed.

    Draws come from Philox streams addressed by position rather than by
    history: the stream for steps [c*NOISE_CHUNK, (c+1)*NOISE_CHUNK) starts
    at counter (c*NOISE_CHUNK) << 64, and the initial-phase stream lives at
    counter 1 << 192.  The draw for (seed, oscillator, step) is therefore a
    pure function of that triple, independent of execution order, batch
    size, or worker count.
    """

    seed: int

    def __post_init__(self) -> None:
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")

    def _generator(self, counter: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed, counter=counter))

    def normal_chunk(self, chunk_index: int, n: int) -> NDArray[np.float64]:
        """Standard-normal draws for NOISE_CHUNK consecutive steps, shape (NOISE_CHUNK, n)."""
        start = chunk_index * NOISE_CHUNK
        return self._generator(start << 64).standard_normal((NOISE_CHUNK, n))

    def step_normals(self, step: int, n: int) -> NDArray[np.float64]:
        """Draws for all n oscillators at one step."""
        if step < 0:
            raise ValueError("step must be >= 0")
        return self.normal_chunk(step // NOISE_CHUNK, n)[step % NOISE_CHUNK]

    def initial_phases(self, n: int) -> NDArray[np.float64]:
        """Uniform [0, 1) starting phases."""
        return self._generator(1 << 192).random(n)


@dataclass
class RunResult:
    """Outcome of one solver run (or the best replica of a batch)."""

    best_assignment: StateAssignment
    best_objective: float
    final_phases: PhaseState
    energy_trace: List[Tuple[float, float, float]]  # (t, continuous energy, Ks)
    best_trace: List[float]  # best-so-far objective at each trace sample
    wall_time: float
    steps_executed: int
    objective_kind: str
    replica_index: int = 0


# ---------------------------------------------------------------------------
# step kernels
#
# One task per (replica, oscillator-batch).  Each output element reads only
# the frozen pre-step arrays and accumulates its coupling row in CSR order,
# so results never depend on scheduling.  sin/cos inputs are precomputed with
# full-array numpy calls for the same reason.

@njit(cache=True)
def _step_serial(indptr, indices, data, phi, sin_p, cos_p, shil, noise,
                 K, ks, h, kn_sqrt_h, batch_size, out):
    """Single-worker step: oscillators walked in contiguous batches."""
    R, n = phi.shape
    nb = (n + batch_size - 1) // batch_size
    for task in range(R * nb):
        r = task // nb
        lo = (task - r * nb) * batch_size
        hi = min(lo + batch_size, n)
        for i in range(lo, hi):
            acc = 0.0
            for kk in range(indptr[i], indptr[i + 1]):
                j = indices[kk]
                # sin(2*pi*(phi_i - phi_j)) via the angle-difference identity
                acc += data[kk] * (sin_p[r, i] * cos_p[r, j] - cos_p[r, i] * sin_p[r, j])
            x = phi[r, i] + h * (K * acc - ks * shil[r, i]) + kn_sqrt_h * noise[r, i]
            out[r, i] = x - math.floor(x)


@njit(parallel=True, cache=True)
def _step_parallel(indptr, indices, data, phi, sin_p, cos_p, shil, noise,
                   K, ks, h, kn_sqrt_h, batch_size, out):
    """Multi-worker step: one task per (replica, oscillator) row, statically
    scheduled in contiguous blocks.  Per-row arithmetic is identical to the
    serial kernel, so the two agree bit for bit."""
    R, n = phi.shape
    for ri in prange(R * n):
        r = ri // n
        i = ri - r * n
        acc = 0.0
        for kk in range(indptr[i], indptr[i + 1]):
            j = indices[kk]
            acc += data[kk] * (sin_p[r, i] * cos_p[r, j] - cos_p[r, i] * sin_p[r, j])
        x = phi[r, i] + h * (K * acc - ks * shil[r, i]) + kn_sqrt_h * noise[r, i]
        out[r, i] = x - math.floor(x)


@njit(cache=True)
def _score_kernel(phi, n_states, iu, jv, w, maximize, states_tmp, out):
    """Threshold all replica rows and score the pair objective.

    Must agree exactly with model._threshold (nearest k/n_states, circular,
    ties to the smaller k) and with the per-row numpy reductions."""
    R, n = phi.shape
    m = iu.shape[0]
    for r in range(R):
        for i in range(n):
            p = phi[r, i]
            best_k = 0
            best_d = 2.0
            for k in range(n_states):
                d = abs(p - k / n_states)
                if 1.0 - d < d:
                    d = 1.0 - d
                if d < best_d:
                    best_d = d
                    best_k = k
            states_tmp[r, i] = best_k
        acc = 0.0
        if maximize:
            for e in range(m):
                if states_tmp[r, iu[e]] != states_tmp[r, jv[e]]:
                    acc += w[e]
        else:
            for e in range(m):
                if states_tmp[r, iu[e]] == states_tmp[r, jv[e]]:
                    acc += 1.0
        out[r] = acc


def resolve_workers(requested: Optional[int]) -> int:
    """Clamp a worker-count request by the OSCIM_MAX_WORKERS env var and the
    thread pool numba was started with."""
    cap = numba.config.NUMBA_NUM_THREADS
    env = os.environ.get(WORKER_ENV_VAR)
    if env is not None:
        try:
            cap = min(cap, max(1, int(env)))
        except ValueError:
            raise ValueError(f"{WORKER_ENV_VAR} must be an integer, got {env!r}") from None
    if requested is None:
        return 1
    if requested < 1:
        raise ValueError("workers must be >= 1")
    return min(requested, cap)


def replica_seed(seed: int, index: int) -> int:
    """Seed for replica `index`: (seed + index) mod 2^64.  Adjacent keys give
    statistically independent Philox streams, and index 0 reproduces the
    base run exactly."""
    return (seed + index) % 2**64


def _csr_view(J: CouplingMatrix):
    return J.indptr, J.indices, J.data


def phase_drift(
    J: CouplingMatrix,
    phi: PhaseState,
    i: int,
    K: float,
    ks_t: float,
    n_states: int,
) -> float:
    """Deterministic part of dphi_i/dt, evaluated directly from the model
    formula (reference path; the step kernel must agree with this)."""
    if not 0 <= i < J.n:
        raise IndexError(f"oscillator index {i} out of range for n={J.n}")
    if J.n != phi.n:
        raise ValueError(f"dimension mismatch: coupling n={J.n} vs phases n={phi.n}")
    p = phi.phases
    lo, hi = J.indptr[i], J.indptr[i + 1]
    js = J.indices[lo:hi]
    ws = J.data[lo:hi]
    coupling = float((ws * np.sin(TWO_PI * (p[i] - p[js]))).sum())
    return K * coupling - ks_t * math.sin(TWO_PI * n_states * p[i])


def _check_finite(phi: np.ndarray, step: int) -> None:
    if np.isfinite(phi).all():
        return
    r, i = np.argwhere(~np.isfinite(phi))[0]
    raise NumericalError(
        f"non-finite phase for oscillator {int(i)} (replica row {int(r)}) "
        f"after step {step}; parameters are numerically unstable"
    )


def euler_step(
    phi: PhaseState,
    J: CouplingMatrix,
    params: SolverParams,
    t: float,
    noise: NoiseSource,
    step_index: int,
) -> PhaseState:
    """One synchronous Forward-Euler update of all phases.

    Every drift reads the pre-step state; the result is wrapped back into
    [0, 1).  Bit-identical to the corresponding step inside `run`.
    """
    if J.n != phi.n:
        raise ValueError(f"dimension mismatch: coupling n={J.n} vs phases n={phi.n}")
    schedule = KsSchedule(params.ks_max, params.ks_period)
    p = phi.phases[None, :].copy()
    sin_p = np.sin(TWO_PI * p)
    cos_p = np.cos(TWO_PI * p)
    shil = np.sin((TWO_PI * params.n_states) * p)
    kick = noise.step_normals(step_index, phi.n)[None, :].copy()
    out = np.empty_like(p)
    _step_serial(
        *_csr_view(J), p, sin_p, cos_p, shil, kick,
        params.K, schedule.value(t), params.h, params.kn * math.sqrt(params.h),
        params.batch_size, out,
    )
    _check_finite(out, step_index)
    return PhaseState(out[0])


def _objective_from_states(states_row: np.ndarray, iu, jv, w, kind: str) -> float:
    """Objective of one assignment, computed exactly like the model scoring
    functions (cut_value / coloring_conflicts) on the canonical pair order."""
    if kind == "maxcut":
        return float((w * (states_row[iu] != states_row[jv])).sum())
    return float((states_row[iu] == states_row[jv]).sum())


def _objective_cadence(n: int, pair_count: int) -> int:
    """Steps between best-of objective checks.  Near-optimal states are often
    visited only transiently, so scoring runs much denser than the energy
    trace; the cadence backs off when scoring a state costs as much as
    several integration steps."""
    return max(1, min(10, round(pair_count / max(n, 1))))


def _simulate(
    J: CouplingMatrix,
    params: SolverParams,
    objective: str,
    seeds: Sequence[int],
    workers: int,
    trace_stride: Optional[float],
) -> List[RunResult]:
    """Advance all replicas in `seeds` together and return one result each."""
    n = J.n
    R = len(seeds)
    maximize = objective == "maxcut"
    schedule = KsSchedule(params.ks_max, params.ks_period)
    stride = params.ks_period / 2.0 if trace_stride is None else float(trace_stride)
    if stride <= 0:
        raise ValueError("trace_stride must be > 0")
    steps = int(math.ceil(params.t_stop / params.h))
    indptr, indices, data = _csr_view(J)
    iu, jv, w = J.pairs()
    kernel = _step_parallel if workers > 1 else _step_serial
    if workers > 1:
        numba.set_num_threads(workers)

    t_start = time.perf_counter()
    sources = [NoiseSource(s) for s in seeds]
    phi = np.stack([src.initial_phases(n) for src in sources])
    out = np.empty_like(phi)
    noise_block = None

    best_obj = np.full(R, -np.inf if maximize else np.inf)
    best_states = np.zeros((R, n), dtype=np.int64)
    states_tmp = np.zeros((R, n), dtype=np.int64)
    obj_tmp = np.zeros(R)
    traces: List[List[Tuple[float, float, float]]] = [[] for _ in range(R)]
    best_traces: List[List[float]] = [[] for _ in range(R)]
    cadence = _objective_cadence(n, len(iu))

    def score() -> None:
        _score_kernel(phi, params.n_states, iu, jv, w, maximize, states_tmp, obj_tmp)
        better = obj_tmp > best_obj if maximize else obj_tmp < best_obj
        if better.any():
            best_obj[better] = obj_tmp[better]
            best_states[better] = states_tmp[better]

    def sample(t_now: float, ks_now: float) -> None:
        score()
        for r in range(R):
            energy = float((w * np.cos(TWO_PI * (phi[r, iu] - phi[r, jv]))).sum())
            traces[r].append((t_now, energy, ks_now))
            best_traces[r].append(float(best_obj[r]))

    sample(0.0, schedule.value(0.0))
    next_sample = stride
    kn_sqrt_h = params.kn * math.sqrt(params.h)
    for step in range(steps):
        t = step * params.h
        if step % NOISE_CHUNK == 0:
            noise_block = np.stack(
                [src.normal_chunk(step // NOISE_CHUNK, n) for src in sources], axis=1
            )
        sin_p = np.sin(TWO_PI * phi)
        cos_p = np.cos(TWO_PI * phi)
        shil = np.sin((TWO_PI * params.n_states) * phi)
        kernel(
            indptr, indices, data, phi, sin_p, cos_p, shil,
            noise_block[step % NOISE_CHUNK],
            params.K, schedule.value(t), params.h, kn_sqrt_h,
            params.batch_size, out,
        )
        phi, out = out, phi
        _check_finite(phi, step)
        t_next = (step + 1) * params.h
        if t_next >= next_sample or step == steps - 1:
            while next_sample <= t_next:
                next_sample += stride
            sample(t_next, schedule.value(t_next))
        elif step % cadence == 0:
            score()
    wall = time.perf_counter() - t_start

    results = []
    for r in range(R):
        assignment = StateAssignment(params.n_states, best_states[r])
        # report the objective recomputed from the winning assignment; the
        # in-loop kernel value only detects candidates
        results.append(
            RunResult(
                best_assignment=assignment,
                best_objective=_objective_from_states(best_states[r], iu, jv, w, objective),
                final_phases=PhaseState(phi[r]),
                energy_trace=traces[r],
                best_trace=best_traces[r],
                wall_time=wall,
                steps_executed=steps,
                objective_kind=objective,
                replica_index=r,
            )
        )
    return results


def _validate_run_args(J: CouplingMatrix, params: SolverParams, objective: str) -> None:
    if J.n < 1:
        raise ValueError("problem must have at least one oscillator")
    if objective not in ("maxcut", "coloring"):
        raise ValueError(f"unknown objective kind: {objective!r}")
    if objective == "maxcut" and params.n_states != 2:
        raise ValueError("maxcut runs require n_states=2")


def run(
    J: CouplingMatrix,
    params: SolverParams,
    objective: str = "maxcut",
    workers: Optional[int] = None,
    trace_stride: Optional[float] = None,
) -> RunResult:
    """Integrate from random initial phases and return the best assignment
    found at any trace sample (including the final state).

    Deterministic for fixed (params.seed, J): two runs produce bit-identical
    traces regardless of worker count or coupling storage kind.
    """
    _validate_run_args(J, params, objective)
    return _simulate(
        J, params, objective, [params.seed % 2**64],
        resolve_workers(workers), trace_stride,
    )[0]


def _group_size(n: int, replicas: int) -> int:
    # cap noise-block memory at ~32 MB per group
    cap = max(1, 4_000_000 // max(1, n * NOISE_CHUNK))
    return min(replicas, cap)


def run_replica_set(
    J: CouplingMatrix,
    params: SolverParams,
    objective: str = "maxcut",
    replicas: int = 1,
    workers: Optional[int] = None,
    trace_stride: Optional[float] = None,
) -> List[RunResult]:
    """All replica results (replica r uses seed replica_seed(params.seed, r));
    identical to running each seed separately."""
    _validate_run_args(J, params, objective)
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    eff_workers = resolve_workers(workers)
    seeds = [replica_seed(params.seed, r) for r in range(replicas)]
    group = _group_size(J.n, replicas)
    results: List[RunResult] = []
    for start in range(0, replicas, group):
        chunk = _simulate(
            J, params, objective, seeds[start : start + group], eff_workers, trace_stride
        )
        for res in chunk:
            res.replica_index += start
        results.extend(chunk)
    return results


def run_replicas(
    J: CouplingMatrix,
    params: SolverParams,
    objective: str = "maxcut",
    replicas: int = 1,
    workers: Optional[int] = None,
    trace_stride: Optional[float] = None,
) -> RunResult:
    """Best-of-replicas restart strategy; ties go to the lowest replica index."""
    t0 = time.perf_counter()
    results = run_replica_set(J, params, objective, replicas, workers, trace_stride)
    maximize = objective == "maxcut"
    best = results[0]
    for res in results[1:]:
        if (res.best_objective > best.best_objective) if maximize else (
            res.best_objective < best.best_objective
        ):
            best = res
    best.wall_time = time.perf_counter() - t0
    return best
