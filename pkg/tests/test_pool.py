import numpy as np
import pytest
import soundfile as sf

from conftest import SR, silence, tone
from corpus.audio import AudioStore, read_wav, write_wav
from corpus.pool import build_pool, load_pool, pool_from_vad, save_pool, speaker_from_filename
from corpus.segments import ReferenceAnnotation, Turn
from errors import ValidationError


def test_single_speaker_three_segments(tmp_path):
    write_wav(tmp_path / "r.wav", np.concatenate([tone(1.0), silence(0.5)] * 3), SR)
    annotation = ReferenceAnnotation.from_turns("r", [Turn("a", 0.0, 1.0), Turn("a", 1.5, 1.0),
                                                      Turn("a", 3.0, 1.0)])
    pool = build_pool([annotation], tmp_path, min_segment_s=0.5)
    assert pool.speakers == ["a"]
    assert pool.num_segments == 3
    assert pool.sample_rate == SR


def test_short_segments_dropped(tone_corpus):
    audio_dir, annotations = tone_corpus
    pool = build_pool(annotations, audio_dir, min_segment_s=1.0)
    assert all(seg.duration >= 1.0 for segs in pool.segments.values() for seg in segs)
    assert [seg.duration for seg in pool.segments["ana"]] == [2.0]


def test_low_snr_recording_excluded_and_speaker_omitted(tone_corpus):
    audio_dir, annotations = tone_corpus
    noise = 0.1 * np.random.default_rng(0).standard_normal(SR * 6)
    write_wav(audio_dir / "noisy.wav", noise, SR)
    annotations = annotations + [ReferenceAnnotation.from_turns("noisy", [Turn("pepe", 1.0, 2.0)])]

    pool = build_pool(annotations, audio_dir, snr_floor_db=15.0)
    assert "pepe" not in pool.speakers
    assert "noisy" not in pool.recordings()
    assert any("pepe" in w for w in pool.warnings)


def test_segments_never_pass_end_of_file(tmp_path):
    write_wav(tmp_path / "r.wav", tone(2.0), SR)
    pool = build_pool([ReferenceAnnotation.from_turns("r", [Turn("a", 1.0, 5.0)])], tmp_path)
    segment = pool.segments["a"][0]
    assert segment.end == pytest.approx(2.0)
    assert len(AudioStore.for_pool(pool).segment(segment)) == SR


def test_mixed_sample_rates_need_resampling(tmp_path):
    write_wav(tmp_path / "a.wav", tone(2.0), SR)
    write_wav(tmp_path / "b.wav", tone(2.0, sr=8000), 8000)
    annotations = [ReferenceAnnotation.from_turns(r, [Turn(r, 0.0, 1.0)]) for r in ("a", "b")]
    with pytest.raises(ValidationError) as excinfo:
        build_pool(annotations, tmp_path)
    assert "a.wav" in str(excinfo.value) or "b.wav" in str(excinfo.value)

    pool = build_pool(annotations, tmp_path, target_sample_rate=SR)
    store = AudioStore.for_pool(pool, resample=True)
    assert len(store.segment(pool.segments["b"][0])) == SR


def test_excluded_recordings_do_not_count_for_sample_rate(tmp_path):
    write_wav(tmp_path / "a.wav", np.concatenate([tone(1.0), silence(1.0)]), SR)
    write_wav(tmp_path / "b.wav", 0.1 * np.random.default_rng(1).standard_normal(8000 * 3), 8000)
    annotations = [ReferenceAnnotation.from_turns(r, [Turn(r, 0.0, 1.0)]) for r in ("a", "b")]
    pool = build_pool(annotations, tmp_path, snr_floor_db=15.0)
    assert pool.sample_rate == SR
    assert pool.speakers == ["a"]


def test_stereo_rejected(tmp_path):
    sf.write(str(tmp_path / "st.wav"), np.zeros((SR, 2), dtype=np.int16), SR, subtype="PCM_16")
    with pytest.raises(ValidationError):
        read_wav(tmp_path / "st.wav")


def test_save_and_load_pool(tone_corpus, tmp_path):
    audio_dir, annotations = tone_corpus
    pool = build_pool(annotations, audio_dir)
    save_pool(pool, tmp_path / "pool.json")
    assert load_pool(tmp_path / "pool.json") == pool


def test_pool_from_vad(tmp_path):
    audio = np.concatenate([silence(0.5), tone(1.0), silence(0.5), tone(1.0), silence(0.5)])
    write_wav(tmp_path / "103-1240-0001.wav", audio, SR)
    write_wav(tmp_path / "19-198-0002.wav", audio, SR)
    pool = pool_from_vad(tmp_path, speaker_map={"19-198-0002": "lector19"})
    assert pool.speakers == ["103", "lector19"]
    assert len(pool.segments["103"]) == 2
    assert speaker_from_filename("103-1240-0001") == "103"
