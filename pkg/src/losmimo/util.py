"""Small shared helpers: tolerant ceiling, fingerprints, derived RNG streams."""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

#: Relative slack used when taking ceilings of quantities that are integers
#: up to floating-point rounding (e.g. (sqrt(M)*ld)^2 / ld^2 == M).
CEIL_SLACK = 1e-9


def ceil_tol(x: float) -> int:
    """Ceiling that snaps values a hair above an integer back down."""
    return int(math.ceil(x - CEIL_SLACK * max(1.0, abs(x))))


def derive_rng(seed: int, *counters: int) -> np.random.Generator:
    """Independent generator for (seed, counters).

    Streams are derived through ``np.random.SeedSequence(seed, spawn_key=counters)``,
    so trial i never depends on whether trial j was drawn before it.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(c) for c in counters))
    return np.random.default_rng(ss)


def fingerprint(params: dict) -> str:
    """Stable 12-hex-digit digest of a canonical parameter mapping."""
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error of the mean (ddof=1; 0 for length 1)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = float(np.mean(values))
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / np.sqrt(n))
