"""Multi-view token packing and sequence log-probability arithmetic.

Reference arithmetic only: views are represented by their token counts,
spans are separated by one boundary token each and carry a view-index id,
and the stage table pins the training schedule's caps (vision tokens per
view, view counts, grid, max sequence length).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOKENS_PER_VIEW = 729
BASE_RESOLUTION = 384
RESERVED_PROMPT_TOKENS = 256


@dataclass(frozen=True)
class StageConfig:
    stage: int
    max_views: int
    grid: tuple
    max_seq_len: int
    tokens_per_view: int = TOKENS_PER_VIEW
    resolution: int = BASE_RESOLUTION


STAGES = {
    1: StageConfig(1, 1, (1, 1), 4096),
    2: StageConfig(2, 5, (2, 2), 4096),
    3: StageConfig(3, 10, (6, 6), 8192),
    4: StageConfig(4, 10, (6, 6), 8192),
}


@dataclass(frozen=True)
class PackingLayout:
    """Contiguous per-view token spans with boundary tokens between them."""

    view_spans: tuple  # ordered (start, length) pairs
    boundary_positions: tuple
    view_index_ids: tuple

    def __post_init__(self):
        if len(self.view_spans) != len(self.view_index_ids):
            raise ValueError("one view-index id per span")
        if len(self.boundary_positions) != max(len(self.view_spans) - 1, 0):
            raise ValueError("boundaries must number view count - 1")
        cursor = 0
        for k, (start, length) in enumerate(self.view_spans):
            if start != cursor or length < 1:
                raise ValueError("spans must be contiguous, non-overlapping, nonempty")
            cursor = start + length
            if k < len(self.boundary_positions):
                if self.boundary_positions[k] != cursor:
                    raise ValueError("each boundary sits directly after its span")
                cursor += 1

    @property
    def total_tokens(self) -> int:
        return sum(length for _, length in self.view_spans) + len(self.boundary_positions)


def pack_views(view_token_counts) -> PackingLayout:
    """Lay out per-view token spans separated by single boundary tokens."""
    counts = list(view_token_counts)
    if not counts:
        raise ValueError("need at least one view")
    if any(int(c) < 1 for c in counts):
        raise ValueError("view token counts must be positive")
    spans = []
    boundaries = []
    cursor = 0
    for k, count in enumerate(counts):
        spans.append((cursor, int(count)))
        cursor += int(count)
        if k < len(counts) - 1:
            boundaries.append(cursor)
            cursor += 1
    return PackingLayout(tuple(spans), tuple(boundaries), tuple(range(len(counts))))


@dataclass(frozen=True)
class BudgetVerdict:
    fits: bool
    slack: int
    used: int
    max_seq_len: int


def check_budget(
    layout: PackingLayout, prompt_len: int, response_len: int, stage: StageConfig
) -> BudgetVerdict:
    """Whether layout + prompt + response fit the stage's max sequence length."""
    if prompt_len < 0 or response_len < 0:
        raise ValueError("prompt_len and response_len must be nonnegative")
    if len(layout.view_spans) > stage.max_views:
        raise ValueError(
            f"{len(layout.view_spans)} views exceed the stage-{stage.stage} cap "
            f"of {stage.max_views}"
        )
    used = layout.total_tokens + prompt_len + response_len
    return BudgetVerdict(used <= stage.max_seq_len, stage.max_seq_len - used, used, stage.max_seq_len)


@dataclass
class LmBatch:
    """Per-step log-probability rows and the target token ids.

    Each row must be a valid log-distribution (logsumexp 0 within 1e-6).
    """

    step_logprobs: np.ndarray  # (L, V)
    targets: np.ndarray  # (L,)

    def __post_init__(self):
        self.step_logprobs = np.asarray(self.step_logprobs, dtype=float)
        self.targets = np.asarray(self.targets, dtype=int)
        if self.step_logprobs.ndim != 2:
            raise ValueError("step_logprobs must be an (L, V) matrix")
        L, V = self.step_logprobs.shape
        if self.targets.shape != (L,):
            raise ValueError("targets must have one token id per step")
        if np.any(self.targets < 0) or np.any(self.targets >= V):
            raise ValueError("targets must lie in [0, V)")
        peak = self.step_logprobs.max(axis=1, keepdims=True)
        lse = peak[:, 0] + np.log(np.exp(self.step_logprobs - peak).sum(axis=1))
        if np.any(np.abs(lse) > 1e-6):
            raise ValueError("each row must be a log-distribution (logsumexp 0 within 1e-6)")


def seq_logprob(batch: LmBatch) -> float:
    """Log of the autoregressive product: sum of target log-probabilities."""
    rows = np.arange(batch.targets.size)
    return float(batch.step_logprobs[rows, batch.targets].sum())


def lm_loss(batch: LmBatch) -> float:
    """Negative sequence log-probability; nonnegative."""
    return -seq_logprob(batch)


def stage_table() -> str:
    """Four-row schedule with the max-layout fit verdict per stage."""
    lines = [
        f"{'stage':>5s} {'grid':>6s} {'views':>5s} {'tok/view':>8s} "
        f"{'layout':>7s} {'max_seq':>8s} {'verdict':>20s}"
    ]
    for stage in STAGES.values():
        layout = pack_views([stage.tokens_per_view] * stage.max_views)
        verdict = check_budget(layout, RESERVED_PROMPT_TOKENS, 0, stage)
        status = f"fits, slack {verdict.slack}" if verdict.fits else "exceeds"
        grid = f"{stage.grid[0]}x{stage.grid[1]}"
        lines.append(
            f"{stage.stage:>5d} {grid:>6s} {stage.max_views:>5d} "
            f"{stage.tokens_per_view:>8d} {layout.total_tokens:>7d} "
            f"{stage.max_seq_len:>8d} {status:>20s}"
        )
    return "\n".join(lines)
