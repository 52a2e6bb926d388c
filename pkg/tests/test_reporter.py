from backend.reporter import REPORT_PATTERN, fast_mode_report, summarize, summary_lines
from shared.constants import EndReason
from shared.models import EpisodeStats, LiveStats


def episode(score, seed=0):
    return EpisodeStats(score=score, turns=100, max_depth=2, end_reason=EndReason.DEATH, seed=seed)


def test_no_finished_games():
    line = fast_mode_report([], LiveStats(score=40, turns=100))

    assert line == 'Games: 0 | Mean: - | Median: - | Score: 40 | Turns: 100'
    assert REPORT_PATTERN.match(line)


def test_mean_and_median_of_two_games():
    line = fast_mode_report([episode(10), episode(20)], LiveStats(score=5, turns=12))

    assert line == 'Games: 2 | Mean: 15.0 | Median: 15.0 | Score: 5 | Turns: 12'
    match = REPORT_PATTERN.match(line)
    assert match.groups() == ('2', '15.0', '15.0', '5', '12')


def test_report_stays_on_one_line():
    history = [episode(s) for s in (3, 1000, 17)]
    line = fast_mode_report(history, LiveStats(score=123, turns=4567))

    assert '\n' not in line
    assert REPORT_PATTERN.match(line)


def test_median_of_three():
    summary = summarize([episode(100), episode(817), episode(2000)])

    assert summary.median_score == 817.0
    assert summary.mean_score == (100 + 817 + 2000) / 3


def test_empty_summary():
    summary = summarize([])
    assert summary.episodes == []
    assert summary.mean_score == summary.median_score == 0.0


def test_summary_lines():
    text = summary_lines(summarize([episode(10, seed=4), episode(30, seed=5)]))

    assert text.split('\n') == [
        'Episode 0: seed=4 score=10 turns=100 depth=2 end=' + EndReason.DEATH.value,
        'Episode 1: seed=5 score=30 turns=100 depth=2 end=' + EndReason.DEATH.value,
        'Mean score: 20.00',
        'Median score: 20.00',
    ]
