"""Frame-level Monte-Carlo bit error rate estimation.

A frame is ``G`` independent clusters. Frames are simulated in fixed-size
blocks; block ``b`` of sweep point ``p`` draws from its own Philox stream
keyed by ``(seed, p, b)``, so a run is reproducible bit for bit no matter
how many worker threads execute the blocks. Blocks are merged in index
order and the stopping rule is checked after each one, again independent
of scheduling.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analytics
from .channel import propagate, sample_channel, select_combine
from .codec import encode_batch
from .config import SystemConfig, db_to_linear, derive, epsilon_for
from .detectors import DETECTORS, count_bit_errors_batch, detect_batch
from .kernels import KERNELS

log = logging.getLogger(__name__)

BLOCK_CLUSTERS = 16384


@dataclass(frozen=True)
class StopRule:
    min_bit_errors: int = 200
    max_frames: int = 10_000_000

    def __post_init__(self):
        if self.min_bit_errors < 1:
            raise ValueError("min_bit_errors must be at least 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be at least 1")


@dataclass(frozen=True)
class BerEstimate:
    detector: str
    frames: int
    total_bits: int
    index_bits: int
    index_bit_errors: int
    symbol_bit_errors: int
    seed: int
    elapsed: float = 0.0

    @property
    def bit_errors(self) -> int:
        return self.index_bit_errors + self.symbol_bit_errors

    @property
    def ber(self) -> float:
        return self.bit_errors / self.total_bits

    @property
    def index_ber(self) -> float:
        return self.index_bit_errors / self.index_bits if self.index_bits else 0.0

    @property
    def symbol_ber(self) -> float:
        symbol_bits = self.total_bits - self.index_bits
        return self.symbol_bit_errors / symbol_bits

    @property
    def ci95(self) -> float:
        """Normal-approximation 95% half-width on ``ber``."""
        p = self.ber
        return 1.96 * math.sqrt(p * (1.0 - p) / self.total_bits)

    @property
    def log10_halfwidth(self) -> float:
        """Half-width of the 95% interval expressed in decades (upper side)."""
        if self.bit_errors == 0:
            return math.inf
        return math.log10(1.0 + self.ci95 / self.ber)


def _normalize_detectors(detector) -> tuple[str, ...]:
    if isinstance(detector, str):
        detector = DETECTORS if detector.lower() == "both" else (detector,)
    out = tuple(d.upper() for d in detector)
    for d in out:
        if d not in DETECTORS:
            raise ValueError(f"unknown detector {d!r}")
    return tuple(sorted(set(out), key=DETECTORS.index))


def block_rng(seed: int, point_id: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(point_id, block))
    return np.random.Generator(np.random.Philox(ss))


def simulate_clusters(cfg: SystemConfig, detectors, n0: float, eps2: float, rng, clusters: int, kernels=KERNELS):
    """One batch of clusters through the whole link.

    Returns ``{detector: (index_bit_errors, symbol_bit_errors)}``.
    """
    d = derive(cfg)
    bits = rng.integers(0, 2, size=(clusters, d.total_bits), dtype=np.uint8)
    rank, symbols, x = encode_batch(bits, cfg)
    ch = sample_channel(rng, cfg, eps2, batch=clusters)
    y_branches = propagate(x, ch, rng, n0)
    obs = select_combine(y_branches, ch.hhat)
    y = np.ascontiguousarray(obs.y)
    hhat = np.ascontiguousarray(obs.hhat)
    out = {}
    for det in detectors:
        rank_hat, sym_hat = detect_batch(det, y, hhat, cfg, kernels)
        out[det] = count_bit_errors_batch(rank, symbols, rank_hat, sym_hat, cfg.m)
    return out


def run_point(cfg: SystemConfig, detector="both", gamma0_db: float = 10.0, seed: int = 0,
              stop: StopRule = StopRule(), workers: int = 1, point_id: int = 0) -> dict:
    """Simulate one SNR point until the stop rule fires.

    Every requested detector sees the same observations. Simulation
    continues until each of them has ``stop.min_bit_errors`` bit errors or
    ``stop.max_frames`` frames have been run.

    Returns ``{detector: BerEstimate}``.
    """
    detectors = _normalize_detectors(detector)
    d = derive(cfg)
    gamma0 = db_to_linear(gamma0_db)
    eps2 = epsilon_for(cfg.csi, gamma0)
    # unit-energy active symbols: noise sets the per-active SNR to (N/K) * gamma0
    n0 = cfg.k / (cfg.n * gamma0)
    frames_per_block = max(1, BLOCK_CLUSTERS // cfg.g)
    n_blocks = -(-stop.max_frames // frames_per_block)

    def frames_in(block):
        return min(frames_per_block, stop.max_frames - block * frames_per_block)

    def work(block):
        rng = block_rng(seed, point_id, block)
        return simulate_clusters(cfg, detectors, n0, eps2, rng, frames_in(block) * cfg.g)

    t0 = time.perf_counter()
    errors = {det: [0, 0] for det in detectors}
    frames = 0
    block = 0
    done = False
    workers = max(1, int(workers))
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while not done and block < n_blocks:
            wave = range(block, min(block + workers, n_blocks))
            results = pool.map(work, wave) if pool else map(work, wave)
            for b, res in zip(wave, results):
                for det in detectors:
                    errors[det][0] += res[det][0]
                    errors[det][1] += res[det][1]
                frames += frames_in(b)
                block = b + 1
                if all(sum(errors[det]) >= stop.min_bit_errors for det in detectors):
                    done = True
                    break
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    elapsed = time.perf_counter() - t0
    log.debug("%s %.1f dB: %d frames in %.2fs", cfg, gamma0_db, frames, elapsed)
    clusters = frames * cfg.g
    return {
        det: BerEstimate(
            detector=det,
            frames=frames,
            total_bits=clusters * d.total_bits,
            index_bits=clusters * d.index_bits,
            index_bit_errors=errors[det][0],
            symbol_bit_errors=errors[det][1],
            seed=seed,
            elapsed=elapsed,
        )
        for det in detectors
    }


@dataclass(frozen=True)
class SweepPoint:
    gamma0_db: float
    estimates: dict
    theory: analytics.TheoryPoint
    asymptote_ml: float
    asymptote_gd: float


def sweep(cfg: SystemConfig, detectors="both", snrs_db=(0.0,), seed: int = 0,
          stop: StopRule = StopRule(), workers: int = 1) -> list[SweepPoint]:
    asym = {det: analytics.asymptote(det, cfg) for det in DETECTORS}
    out = []
    for i, snr in enumerate(snrs_db):
        est = run_point(cfg, detectors, snr, seed, stop, workers, point_id=i)
        gamma0 = db_to_linear(snr)
        out.append(SweepPoint(
            gamma0_db=float(snr),
            estimates=est,
            theory=analytics.theory_point(snr, cfg),
            asymptote_ml=float(asym["ML"].at(gamma0)),
            asymptote_gd=float(asym["GD"].at(gamma0)),
        ))
    return out


def empirical_mgf(cfg: SystemConfig, eps2: float, ts, samples: int = 1_000_000, seed: int = 0) -> dict:
    """Sample means of ``exp(t * nu)`` and ``exp(t * nu_hat)`` over fresh channel draws.

    ``nu_hat`` is the largest estimated gain across the ``L`` branches and
    ``nu`` the true gain of that branch.
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(ts > 0):
        raise ValueError("only t <= 0 is supported")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    batch = -(-samples // cfg.n)
    ch = sample_channel(rng, cfg, eps2, batch=batch)
    obs = select_combine(ch.hhat, ch.hhat, ch.h)
    nu = obs.true_gain.reshape(-1)[:samples]
    nu_hat = obs.est_gain.reshape(-1)[:samples]
    return {
        "t": ts,
        "nu": np.array([np.exp(t * nu).mean() for t in ts]),
        "nu_hat": np.array([np.exp(t * nu_hat).mean() for t in ts]),
    }


__all__ = [
    "BerEstimate",
    "StopRule",
    "SweepPoint",
    "block_rng",
    "empirical_mgf",
    "run_point",
    "simulate_clusters",
    "sweep",
]
