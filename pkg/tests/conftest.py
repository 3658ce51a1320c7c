import pathlib
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pytest

from corpus.audio import AudioStore, write_wav
from corpus.rttm import save_annotations
from corpus.segments import ReferenceAnnotation, SegmentPool, SpeechSegment, Turn
from stats.histogram import Histogram
from stats.turns import TurnStatistics

SR = 16000


def tone(seconds: float, freq: float = 440.0, amplitude: float = 0.5, sr: int = SR) -> np.ndarray:
    t = np.arange(int(round(seconds * sr))) / sr
    return amplitude * np.sin(2 * np.pi * freq * t)


def silence(seconds: float, sr: int = SR) -> np.ndarray:
    return np.zeros(int(round(seconds * sr)))


def point_histogram(value: float, bin_width: float = 0.01) -> Histogram:
    return Histogram.from_observations([value], bin_width)


def make_statistics(p_same: float = 0.0, p_overlap: float = 0.0, same_pause: float = 0.5,
                    cross_pause: float = 0.5, overlap: float = 0.5) -> TurnStatistics:
    return TurnStatistics(point_histogram(same_pause), point_histogram(cross_pause),
                          point_histogram(overlap), p_same, p_overlap)


def memory_pool(durations: Dict[str, Sequence[float]], sr: int = SR,
                seed: int = 0) -> Tuple[SegmentPool, AudioStore]:
    """Pool con un audio de ruido blanco por segmento, cargado en memoria"""
    rng = np.random.default_rng(seed)
    store = AudioStore(sr)
    segments = {}
    for speaker, lengths in durations.items():
        segs = []
        for i, length in enumerate(lengths):
            recording_id = f"{speaker}_{i}"
            store.add(recording_id, 0.1 * rng.standard_normal(int(round(length * sr))))
            segs.append(SpeechSegment(recording_id, 0.0, length, speaker))
        segments[speaker] = tuple(segs)
    return SegmentPool(segments, sr), store


@pytest.fixture
def uniform_pool():
    """6 hablantes con 30 segmentos de 1 a 3 s"""
    rng = np.random.default_rng(42)
    return memory_pool({f"s{i}": list(np.round(rng.uniform(1.0, 3.0, size=30), 2)) for i in range(6)})


@pytest.fixture
def tone_corpus(tmp_path: pathlib.Path) -> Tuple[pathlib.Path, List[ReferenceAnnotation]]:
    """Dos grabaciones de dos hablantes: tonos separados por silencio digital"""
    audio_dir = tmp_path / "audio"
    annotations = []
    for r, (a, b) in enumerate([("ana", "luis"), ("eva", "luis")]):
        audio = np.concatenate([silence(0.5), tone(2.0, 300), silence(0.5), tone(1.5, 500),
                                silence(0.5), tone(0.4, 300), silence(0.6)])
        recording_id = f"rec{r}"
        write_wav(audio_dir / f"{recording_id}.wav", audio, SR)
        annotations.append(ReferenceAnnotation.from_turns(recording_id, [
            Turn(a, 0.5, 2.0), Turn(b, 3.0, 1.5), Turn(a, 5.0, 0.4)]))
    save_annotations(annotations, tmp_path / "ref.rttm")
    return audio_dir, annotations
