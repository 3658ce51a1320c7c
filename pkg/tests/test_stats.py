import numpy as np
import pytest

from conftest import make_statistics
from corpus.segments import ReferenceAnnotation, Turn
from errors import ParseError, StatisticsError, ValidationError
from stats.histogram import Histogram, bin_index
from stats.io import format_statistics, load_statistics, parse_statistics, save_statistics
from stats.turns import (OVERLAP, PAUSE, collect_transitions, classify_transition,
                         estimate_pooled_statistics, estimate_turn_statistics)


def alternating(n_turns: int = 10, gap: float = 0.5) -> ReferenceAnnotation:
    turns, t = [], 0.0
    for i in range(n_turns):
        turns.append(Turn("ab"[i % 2], t, 1.0))
        t += 1.0 + gap
    return ReferenceAnnotation.from_turns("alt", turns)


def test_strict_alternation():
    stats = estimate_turn_statistics([alternating()])
    assert stats.p_same_speaker == 0.0
    assert stats.p_overlap_given_change == 0.0
    assert stats.cross_speaker_pause.counts[bin_index(0.5, 0.01)] == stats.cross_speaker_pause.total == 9
    assert stats.same_speaker_pause.is_empty


def test_single_speaker_pauses():
    annotation = ReferenceAnnotation.from_turns("solo", [Turn("a", 0, 1), Turn("a", 2, 1), Turn("a", 4, 1)])
    stats = estimate_turn_statistics([annotation])
    assert stats.p_same_speaker == 1.0
    assert stats.same_speaker_pause.support() == pytest.approx((1.0, 1.01))


def test_negative_gap_is_overlap():
    kind, value = classify_transition(Turn("A", 0.0, 5.0), Turn("B", 4.2, 3.0))
    assert kind == OVERLAP
    assert value == pytest.approx(0.8)


def test_contained_turn_overlap_truncated_to_its_length():
    kind, value = classify_transition(Turn("A", 0.0, 10.0), Turn("B", 2.0, 1.0))
    assert (kind, value) == (OVERLAP, 1.0)


def test_classification_is_exhaustive():
    rng = np.random.default_rng(2)
    turns = [Turn("abc"[rng.integers(3)], float(rng.uniform(0, 100)), float(rng.uniform(0.2, 4)))
             for _ in range(60)]
    annotation = ReferenceAnnotation.from_turns("r", turns)
    transitions = collect_transitions([annotation])
    assert transitions.total == len(annotation.turns) - 1


def test_shift_invariance():
    a = estimate_turn_statistics([alternating(gap=0.37)])
    b = estimate_turn_statistics([alternating(gap=0.37).shifted(12.0)])
    assert a == b


def test_zero_transitions_is_an_error():
    with pytest.raises(StatisticsError):
        estimate_turn_statistics([ReferenceAnnotation.from_turns("r", [Turn("a", 0, 1)])])


def test_sampling_single_bin_and_determinism():
    hist = Histogram.from_observations([0.05], 0.1)
    values = [hist.sample(np.random.default_rng(9)) for _ in range(3)]
    assert values[0] == values[1] == values[2]
    assert 0.0 <= values[0] < 0.1


def test_sampling_frequencies():
    hist = Histogram(0.1, (3, 1))
    rng = np.random.default_rng(0)
    samples = np.array([hist.sample(rng) for _ in range(100_000)])
    assert np.mean(samples < 0.1) == pytest.approx(0.75, abs=0.01)
    low, high = hist.support()
    assert samples.min() >= low and samples.max() < high


def test_pooled_statistics_equalize():
    big = [alternating(n_turns=41, gap=0.5)]
    small = [ReferenceAnnotation.from_turns("s", [Turn("a", 0, 1), Turn("a", 2, 1), Turn("a", 4, 1)])]
    plain = estimate_pooled_statistics({"big": big, "small": small})
    assert plain.p_same_speaker == pytest.approx(2 / 42)

    equal = estimate_pooled_statistics({"big": big, "small": small}, equalize=True, seed=1)
    assert equal.transitions == 80
    assert equal.p_same_speaker == pytest.approx(0.5)


def test_file_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    turns = [Turn("abc"[rng.integers(3)], float(rng.uniform(0, 100)), float(rng.uniform(0.2, 4)))
             for _ in range(80)]
    stats = estimate_turn_statistics([ReferenceAnnotation.from_turns("r", turns)])
    save_statistics(stats, tmp_path / "stats.txt")
    assert load_statistics(tmp_path / "stats.txt") == stats


def test_probability_out_of_range_rejected():
    text = format_statistics(make_statistics()).replace("p_same_speaker 0.0", "p_same_speaker 1.2")
    with pytest.raises(ValidationError):
        parse_statistics(text)


def test_empty_histogram_that_would_be_sampled_is_rejected():
    stats = make_statistics(p_same=0.5)
    text = format_statistics(stats).replace("histogram same_speaker_pause 0.01 1\n50 1\n",
                                            "histogram same_speaker_pause 0.01 0\n")
    with pytest.raises(ValidationError):
        parse_statistics(text)


def test_version_mismatch():
    text = format_statistics(make_statistics()).replace("version 1", "version 2")
    with pytest.raises(ValidationError):
        parse_statistics(text)


def test_truncated_file():
    text = format_statistics(make_statistics())
    with pytest.raises(ParseError):
        parse_statistics(text.rsplit("\n", 2)[0])


def test_pause_kind_for_zero_gap():
    assert classify_transition(Turn("A", 0, 1), Turn("B", 1, 1)) == (PAUSE, 0)
