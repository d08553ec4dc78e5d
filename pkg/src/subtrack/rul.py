"""Similarity-based RUL estimation by health-index curve matching.

A truncated test curve is slid along every full training curve over a range
of lags. Each (train unit, lag) pair yields a candidate RUL of
train_length - test_length - lag, weighted by exp(-curve_distance / beta);
the estimate is the similarity-weighted average of all candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoMatchError, ValidationError
from .health import HiCurve


@dataclass(frozen=True)
class MatchConfig:
    tau1: int = 1
    tau2: int = 40
    beta: float = 0.0235

    def __post_init__(self):
        if not 0 <= self.tau1 <= self.tau2:
            raise ValidationError("need 0 <= tau1 <= tau2")
        if not self.beta > 0:
            raise ValidationError("beta must be positive")


@dataclass(frozen=True)
class Candidate:
    train_unit: int
    tau: int
    rul: float
    similarity: float
    clamped: bool  # raw candidate was negative, clamped to 0


@dataclass(frozen=True)
class RulEstimate:
    unit_id: int
    estimate: float
    candidates: list[Candidate]
    sum_similarity: float
    similarity_underflow: bool = False


def curve_distance(test: np.ndarray, train: np.ndarray, tau: int) -> float | None:
    """Mean squared pointwise difference with the test curve shifted by tau.

    Returns None when the training curve is too short for full overlap;
    the caller skips that candidate.
    """
    test = np.asarray(test, dtype=float)
    train = np.asarray(train, dtype=float)
    n = len(test)
    if n + tau > len(train):
        return None
    return float(np.mean((test - train[tau : tau + n]) ** 2))


def similarity(d2: float, beta: float) -> float:
    """exp(-d2 / beta); 1 at a perfect match, decaying with curve distance."""
    if d2 < 0:
        raise ValidationError("squared distance must be >= 0")
    if not beta > 0:
        raise ValidationError("beta must be positive")
    return math.exp(-d2 / beta)


def candidate_rul(train_len: int, test_len: int, tau: int) -> tuple[float, bool]:
    """Candidate RUL for one alignment; negative values clamp to 0 (flagged)."""
    raw = train_len - test_len - tau
    if raw < 0:
        return 0.0, True
    return float(raw), False


def estimate_rul(
    test: HiCurve, library: list[HiCurve], cfg: MatchConfig
) -> RulEstimate:
    """Similarity-weighted combination of candidate RULs over all library
    curves and lags in [tau1, tau2].

    Candidates are accumulated in (train unit, lag) order with compensated
    summation, so the result is invariant to library ordering.
    """
    if not library:
        raise NoMatchError(f"unit {test.unit_id}: empty training library")

    candidates: list[Candidate] = []
    for train_curve in sorted(library, key=lambda c: c.unit_id):
        for tau in range(cfg.tau1, cfg.tau2 + 1):
            d2 = curve_distance(test.sigma, train_curve.sigma, tau)
            if d2 is None:
                continue
            s = similarity(d2, cfg.beta)
            rul, clamped = candidate_rul(len(train_curve), len(test), tau)
            candidates.append(
                Candidate(
                    train_unit=train_curve.unit_id,
                    tau=tau,
                    rul=rul,
                    similarity=s,
                    clamped=clamped,
                )
            )

    if not candidates:
        raise NoMatchError(
            f"unit {test.unit_id}: no training curve long enough for any lag"
        )

    sum_s = math.fsum(c.similarity for c in candidates)
    if sum_s > 0.0:
        estimate = math.fsum(c.similarity * c.rul for c in candidates) / sum_s
        underflow = False
    else:
        # every similarity underflowed; fall back to the unweighted mean
        estimate = math.fsum(c.rul for c in candidates) / len(candidates)
        underflow = True

    return RulEstimate(
        unit_id=test.unit_id,
        estimate=estimate,
        candidates=candidates,
        sum_similarity=sum_s,
        similarity_underflow=underflow,
    )
