import numpy as np
import pytest

from conftest import make_statistics, memory_pool
from corpus.segments import ReferenceAnnotation, Turn
from errors import ConfigError, SimulationError
from score.timeline import activity_summary
from simulate.plan import ConversationPlan, Placement, plan_to_annotation
from simulate.sc import plan_sc
from simulate.sm import plan_sm
from simulate.spec import MixSpec, load_mix_spec
from stats.turns import estimate_turn_statistics


def rng(seed=0):
    return np.random.default_rng(seed)


def test_sm_zero_pause_is_contiguous():
    pool, _ = memory_pool({"a": [1.0, 2.0, 0.5]})
    spec = MixSpec(mode="sm", speakers_per_recording=[1], utterances_per_speaker=3, sm_pause_mean_s=0.0)
    plan = plan_sm(pool, spec, rng())
    placements = plan.placements
    assert placements[0].onset == 0.0
    for previous, following in zip(placements, placements[1:]):
        assert following.onset == pytest.approx(previous.end)
    assert activity_summary(plan_to_annotation(plan)).overlap == 0.0


def test_sm_channels_start_at_zero():
    pool, _ = memory_pool({"a": [10.0], "b": [10.0]})
    spec = MixSpec(mode="sm", speakers_per_recording=[2], utterances_per_speaker=1)
    summary = activity_summary(plan_to_annotation(plan_sm(pool, spec, rng())))
    assert summary.overlap == pytest.approx(10.0)


def test_sm_too_many_utterances():
    pool, _ = memory_pool({"a": [1.0, 1.0]})
    spec = MixSpec(mode="sm", speakers_per_recording=[1], utterances_per_speaker=3)
    with pytest.raises(SimulationError):
        plan_sm(pool, spec, rng())
    spec.sm_allow_replacement = True
    assert len(plan_sm(pool, spec, rng()).placements) == 3


def test_sm_determinism(uniform_pool):
    pool, _ = uniform_pool
    spec = MixSpec(mode="sm", speakers_per_recording=[2, 3, 4])
    assert plan_sm(pool, spec, rng(11)) == plan_sm(pool, spec, rng(11))


def test_sc_strict_alternation(uniform_pool):
    pool, _ = uniform_pool
    spec = MixSpec(mode="sc", speakers_per_recording=[2], utterances=12)
    plan = plan_sc(pool, spec, make_statistics(p_same=0.0, p_overlap=0.0, cross_pause=0.5), rng(3))
    assert len(plan.placements) == 12
    for previous, following in zip(plan.placements, plan.placements[1:]):
        assert following.speaker != previous.speaker
        assert following.onset - previous.end == pytest.approx(0.505, abs=0.0051)


def test_sc_every_change_overlaps(uniform_pool):
    pool, _ = uniform_pool
    spec = MixSpec(mode="sc", speakers_per_recording=[3], utterances=15)
    plan = plan_sc(pool, spec, make_statistics(p_same=0.0, p_overlap=1.0, overlap=0.5), rng(4))
    for previous, following in zip(plan.placements, plan.placements[1:]):
        assert following.speaker != previous.speaker
        assert following.onset >= previous.onset
    assert activity_summary(plan_to_annotation(plan)).overlap > 0


def test_sc_no_overlap_without_overlap_probability(uniform_pool):
    pool, _ = uniform_pool
    spec = MixSpec(mode="sc", speakers_per_recording=[4], utterances=40)
    stats = make_statistics(p_same=0.3, p_overlap=0.0)
    plan = plan_sc(pool, spec, stats, rng(5))
    assert activity_summary(plan_to_annotation(plan)).overlap == 0.0


def test_sc_never_overlaps_same_speaker(uniform_pool):
    pool, _ = uniform_pool
    spec = MixSpec(mode="sc", speakers_per_recording=[2], utterances=40)
    plan = plan_sc(pool, spec, make_statistics(p_same=0.2, p_overlap=1.0, overlap=5.0), rng(6))
    by_speaker = {}
    for p in plan.placements:
        by_speaker.setdefault(p.speaker, []).append(p)
    for placements in by_speaker.values():
        for previous, following in zip(placements, placements[1:]):
            assert following.onset >= previous.end - 1e-12


def test_sc_exhausted_speakers_end_early():
    pool, _ = memory_pool({"a": [1.0, 1.0], "b": [1.0]})
    spec = MixSpec(mode="sc", speakers_per_recording=[2], utterances=10)
    plan = plan_sc(pool, spec, make_statistics(p_same=0.5), rng(0))
    assert len(plan.placements) == 3
    assert plan.warnings


def test_sc_stop_on_duration(uniform_pool):
    pool, _ = uniform_pool
    spec = MixSpec(mode="sc", stop_on="duration", target_duration_s=30.0)
    plan = plan_sc(pool, spec, make_statistics(), rng(1))
    assert plan.duration >= 30.0


def test_sc_determinism(uniform_pool):
    pool, _ = uniform_pool
    spec = MixSpec(mode="sc", speakers_per_recording=[2, 3])
    stats = make_statistics(p_same=0.3, p_overlap=0.2)
    assert plan_sc(pool, spec, stats, rng(8)) == plan_sc(pool, spec, stats, rng(8))


def test_sm_overlaps_more_than_sc():
    rng_pool = np.random.default_rng(0)
    pool, _ = memory_pool({f"s{i}": list(rng_pool.uniform(1.0, 4.0, size=20)) for i in range(8)})
    # conversación de referencia con poco solape
    turns, t = [], 0.0
    for i in range(200):
        duration = float(rng_pool.uniform(1.0, 4.0))
        turns.append(Turn(f"r{i % 3}", t, duration))
        t += duration + (float(rng_pool.uniform(0.1, 1.0)) if rng_pool.random() > 0.1 else -0.3)
    stats = estimate_turn_statistics([ReferenceAnnotation.from_turns("real", turns)])

    def mean_overlap(plans):
        return np.mean([activity_summary(plan_to_annotation(p)).overlap_fraction for p in plans])

    sm_by_count = []
    for count in (2, 3, 4):
        sm = MixSpec(mode="sm", speakers_per_recording=[count], utterances_per_speaker=5)
        sm_by_count.append(mean_overlap([plan_sm(pool, sm, rng(s)) for s in range(30)]))
        sc = MixSpec(mode="sc", speakers_per_recording=[count], utterances=5 * count)
        sc_overlap = mean_overlap([plan_sc(pool, sc, stats, rng(s)) for s in range(30)])
        if count >= 3:
            assert sm_by_count[-1] > sc_overlap
    assert sm_by_count == sorted(sm_by_count)


def test_plan_to_annotation():
    pool, _ = memory_pool({"a": [1.0, 1.0], "b": [1.0], "c": [1.0]})
    seg = lambda spk, i=0: pool.segments[spk][i]
    empty = ConversationPlan((), 1, 0.0)
    assert plan_to_annotation(empty).turns == ()

    distinct = ConversationPlan((Placement(0, seg("a"), 0.0), Placement(1, seg("b"), 2.0),
                                 Placement(2, seg("c"), 4.0)), 3, 5.0, speakers=("a", "b", "c"))
    assert len(plan_to_annotation(distinct).turns) == 3

    merged = ConversationPlan((Placement(0, seg("a"), 0.0), Placement(0, seg("a", 1), 0.8)), 1, 1.8)
    assert plan_to_annotation(merged).intervals() == {"spk0": [(0.0, 1.8)]}


def test_mix_spec_yaml_and_overrides(tmp_path):
    path = tmp_path / "mix.yaml"
    path.write_text("mode: sm\nspeakers_per_recording: [2, 3]\nsm_pause_mean_s: 1.5\n")
    spec = load_mix_spec(path, overrides=["utterances_per_speaker=4"], seed=9)
    assert spec.mode == "sm"
    assert spec.speakers_per_recording == [2, 3]
    assert spec.utterances_per_speaker == 4
    assert spec.seed == 9

    path.write_text("mode: sm\nunknown_key: 1\n")
    with pytest.raises(ConfigError):
        load_mix_spec(path)


def test_reverb_and_missing_statistics_rejected():
    with pytest.raises(ConfigError):
        MixSpec(mode="sm", reverb=True).validate()
    with pytest.raises(ConfigError):
        MixSpec(mode="sc").validate(has_statistics=False)


def test_sc_reproduces_source_gap_means(uniform_pool):
    pool, _ = uniform_pool
    turns, t = [], 0.0
    for i in range(60):
        turns.append(Turn("ab"[i % 2], t, 2.0))
        t += 2.0 + (0.8 if i % 2 == 0 else -0.4)
    source = estimate_turn_statistics([ReferenceAnnotation.from_turns("src", turns)])
    assert source.p_overlap_given_change == pytest.approx(0.5, abs=0.02)

    spec = MixSpec(mode="sc", speakers_per_recording=[2], utterances=20)
    plans = [plan_sc(pool, spec, source, rng(s)) for s in range(100)]
    generated = estimate_turn_statistics([plan_to_annotation(p, f"c{i}") for i, p in enumerate(plans)])
    assert generated.cross_speaker_pause.mean() == pytest.approx(source.cross_speaker_pause.mean(), rel=0.02)
    assert generated.cross_speaker_overlap.mean() == pytest.approx(source.cross_speaker_overlap.mean(), rel=0.02)
