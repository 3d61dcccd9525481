"""Synthetic coincidence-count experiments with Poisson statistics and drift.

A run steps through the 36 input probe pairs in a fixed order.  For each
input block the 36 output projections are measured sequentially (one abstract
acquisition window each), followed by one reference measurement at a fixed
setting (input |HH>, projection onto |HH>) used later to divide out slow
source-rate drift.  Counts are Poisson draws with mean
``pair_rate * m(t) * p_jk,lm`` where ``m(t)`` is the drift multiplier of the
window in which that setting was acquired.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import pair_index, pair_labels, pair_projectors, pair_projectors_transposed
from .exceptions import DegenerateDataError
from .model import model_choi

log = logging.getLogger(__name__)

#: Windows per input block: 36 projection settings plus one reference setting.
WINDOWS_PER_BLOCK = 37
N_WINDOWS = 36 * WINDOWS_PER_BLOCK

DRIFT_KINDS = ("constant", "linear", "sinusoidal", "random-walk")


@dataclass(frozen=True)
class DriftProfile:
    """Slow variation of the pair-generation rate across acquisition windows.

    ``amplitude`` is a relative fraction (0.1 = +-10%), ``period`` is measured
    in window counts, ``step`` is the standard deviation of one random-walk
    increment.  Multipliers are clamped to [0.5, 1.5].
    """

    kind: str = "constant"
    amplitude: float = 0.0
    period: float = 0.0
    step: float = 0.0

    def __post_init__(self):
        if self.kind not in DRIFT_KINDS:
            raise ValueError(f"drift kind must be one of {DRIFT_KINDS}, got {self.kind!r}")
        if self.kind == "sinusoidal" and self.period <= 0:
            raise ValueError("sinusoidal drift requires a positive period")

    def multipliers(self, n_windows: int, rng: np.random.Generator) -> np.ndarray:
        """Rate multiplier m(t) for window indices 0..n_windows-1."""
        t = np.arange(n_windows, dtype=float)
        if self.kind == "constant":
            m = np.ones(n_windows)
        elif self.kind == "linear":
            span = max(n_windows - 1, 1)
            m = 1.0 + self.amplitude * (2.0 * t / span - 1.0)
        elif self.kind == "sinusoidal":
            m = 1.0 + self.amplitude * np.sin(2.0 * np.pi * t / self.period)
        else:  # random-walk
            steps = rng.normal(0.0, self.step, size=n_windows)
            steps[0] = 0.0
            m = 1.0 + np.cumsum(steps)
        return np.clip(m, 0.5, 1.5)


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated data-taking run.

    ``pair_rate`` is the mean number of detected photon pairs per window
    (before drift); the 30 s physical window duration is metadata only.
    The process is given either by ``visibility`` (gate model) or an explicit
    Choi matrix.  ``noise_admixture`` replaces that fraction of the process
    with white noise of equal trace, emulating residual setup imperfections.
    """

    pair_rate: float
    visibility: float | None = None
    choi: np.ndarray | None = None
    drift: DriftProfile = field(default_factory=DriftProfile)
    seed: int = 0
    noise_admixture: float = 0.0

    def __post_init__(self):
        if not self.pair_rate > 0:
            raise ValueError(f"pair_rate must be positive, got {self.pair_rate}")
        if not 0.0 <= self.noise_admixture < 1.0:
            raise ValueError(f"noise_admixture must be in [0, 1), got {self.noise_admixture}")
        if self.visibility is None and self.choi is None:
            raise ValueError("config must provide either a visibility or a Choi matrix")

    def resolve_choi(self) -> np.ndarray:
        """Process matrix the run draws data from, including noise admixture."""
        chi = np.asarray(self.choi, dtype=complex) if self.choi is not None else model_choi(self.visibility)
        if self.noise_admixture > 0.0:
            eps = self.noise_admixture
            white = np.trace(chi).real * np.eye(16, dtype=complex) / 16.0
            chi = (1.0 - eps) * chi + eps * white
        return chi


@dataclass(frozen=True)
class CoincidenceTable:
    """36x36 coincidence counts, rows = input pairs, columns = projections."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (36, 36):
            raise ValueError(f"expected a 36x36 table, got shape {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("coincidence counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> float:
        return float(self.counts.sum())


@dataclass(frozen=True)
class ReferenceCounts:
    """Reference coincidences D_jk, one per input block, with window indices."""

    values: np.ndarray
    windows: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        windows = np.asarray(self.windows)
        if values.shape != (36,) or windows.shape != (36,):
            raise ValueError("expected 36 reference counts and 36 window indices")
        if np.any(values < 0):
            raise ValueError("reference counts must be nonnegative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "windows", windows)


def outcome_probabilities(chi: np.ndarray) -> np.ndarray:
    """Table p[jk, lm] = Tr[Psi_jk^T (x) Psi_lm chi] for all 36x36 settings.

    Entries sum to 81 Tr[chi].  Tiny negative values from roundoff are
    clamped to zero; anything beyond double-precision slack means the input
    was not PSD and is rejected.
    """
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (16, 16):
        raise ValueError(f"expected a 16x16 process matrix, got shape {chi.shape}")
    if np.max(np.abs(chi - chi.conj().T)) > 1e-9:
        raise ValueError("process matrix must be Hermitian")
    if float(np.linalg.eigvalsh((chi + chi.conj().T) / 2.0)[0]) < -1e-10 * max(np.trace(chi).real, 1.0):
        raise ValueError("process matrix must be positive semidefinite")
    p = _probability_table(chi)
    worst = float(p.min())
    if worst < 0.0:
        if worst < -1e-10:
            raise ValueError(f"probability clamp {worst:.3e} exceeds roundoff slack; chi is not PSD")
        log.debug("clamping %d negative probabilities, worst %.3e", int((p < 0).sum()), worst)
        p = np.clip(p, 0.0, None)
    return p


def _probability_table(chi: np.ndarray) -> np.ndarray:
    """Raw (unclamped) probability table; no validation."""
    chi4 = chi.reshape(4, 4, 4, 4)
    # Tr[(A (x) B) chi] = sum_ij A[i,j] * (sum_ab B[a,b] chi[(j,b),(i,a)])
    h = np.einsum("mab,jbia->mji", pair_projectors(), chi4)
    return np.einsum("nij,mji->nm", pair_projectors_transposed(), h).real


def reference_setting_index() -> tuple[int, int]:
    """(input, projection) flat indices of the fixed reference measurement."""
    return pair_index("H", "H"), pair_index("H", "H")


def simulate_counts(
    config: ExperimentConfig, chi: np.ndarray | None = None
) -> tuple[CoincidenceTable, ReferenceCounts]:
    """Draw one full dataset: coincidence table plus reference counts.

    ``chi`` overrides the process resolved from the config (the noise
    admixture is not reapplied in that case).  Identical configs produce
    bit-identical tables.
    """
    if chi is None:
        chi = config.resolve_choi()
    p = outcome_probabilities(chi)
    ref_in, ref_out = reference_setting_index()
    p_ref = p[ref_in, ref_out]

    rng = np.random.default_rng(config.seed)
    mult = config.drift.multipliers(N_WINDOWS, rng)
    window_grid = np.arange(36)[:, None] * WINDOWS_PER_BLOCK + np.arange(36)[None, :]
    ref_windows = np.arange(36) * WINDOWS_PER_BLOCK + 36

    counts = rng.poisson(config.pair_rate * mult[window_grid] * p)
    refs = rng.poisson(config.pair_rate * mult[ref_windows] * p_ref)
    return CoincidenceTable(counts), ReferenceCounts(refs, ref_windows)


def expected_counts(chi: np.ndarray, pair_rate: float = 1.0) -> np.ndarray:
    """Noiseless (drift-free) expected coincidence table pair_rate * p."""
    if not pair_rate > 0:
        raise ValueError(f"pair_rate must be positive, got {pair_rate}")
    return pair_rate * outcome_probabilities(chi)


def renormalize_counts(counts, references) -> np.ndarray:
    """Divide each input block's counts by its reference: C~ = C_jk,lm / D_jk."""
    counts = np.asarray(getattr(counts, "counts", counts), dtype=float)
    refs = np.asarray(getattr(references, "values", references), dtype=float)
    if counts.shape != (36, 36):
        raise ValueError(f"expected a 36x36 table, got shape {counts.shape}")
    if refs.shape != (36,):
        raise ValueError(f"expected 36 reference counts, got shape {refs.shape}")
    bad = np.flatnonzero(refs <= 0)
    if bad.size:
        j, k = pair_labels(int(bad[0]))
        raise DegenerateDataError(
            f"reference count for input block |{j}{k}> is zero; cannot renormalize"
        )
    return counts / refs[:, None]
