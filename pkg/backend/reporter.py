"""
Score summaries and the one-line fast-mode report
"""

import re
import statistics
from typing import Optional, Sequence

from shared.models import EpisodeStats, InferenceSummary, LiveStats

REPORT_PATTERN = re.compile(
    r'^Games: (\d+) \| Mean: (-|\d+\.\d) \| Median: (-|\d+\.\d) \| Score: (\d+) \| Turns: (\d+)$'
)


def _fmt(value: Optional[float]) -> str:
    return '-' if value is None else f"{value:.1f}"


def fast_mode_report(history: Sequence[EpisodeStats], current: LiveStats) -> str:
    scores = [episode.score for episode in history]
    mean = statistics.fmean(scores) if scores else None
    median = float(statistics.median(scores)) if scores else None
    return (f"Games: {len(scores)} | Mean: {_fmt(mean)} | Median: {_fmt(median)} | "
            f"Score: {current.score} | Turns: {current.turns}")


def summarize(episodes: Sequence[EpisodeStats]) -> InferenceSummary:
    scores = [episode.score for episode in episodes]
    if not scores:
        return InferenceSummary(episodes=[], mean_score=0.0, median_score=0.0)
    return InferenceSummary(episodes=list(episodes), mean_score=statistics.fmean(scores),
                            median_score=float(statistics.median(scores)))


def summary_lines(summary: InferenceSummary) -> str:
    lines = [f"Episode {i}: seed={e.seed} score={e.score} turns={e.turns} depth={e.max_depth} "
             f"end={e.end_reason.value}" for i, e in enumerate(summary.episodes)]
    lines.append(f"Mean score: {summary.mean_score:.2f}")
    lines.append(f"Median score: {summary.median_score:.2f}")
    return '\n'.join(lines)
