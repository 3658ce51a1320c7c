"""
Construcción del pool de segmentos a partir de anotaciones + audio,
con filtrado por duración mínima y por SNR de la grabación.
"""
from __future__ import annotations
import json
import logging
import pathlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from corpus.audio import read_wav
from corpus.segments import ReferenceAnnotation, SegmentPool, SpeechSegment, Turn
from corpus.vad import (DEFAULT_MIN_GAP_S, DEFAULT_MIN_SPEECH_S, DEFAULT_THRESHOLD_DB,
                        energy_vad, estimate_snr)
from errors import ValidationError

logger = logging.getLogger(__name__)

POOL_FORMAT = "simconv-pool/1"


@dataclass(frozen=True)
class _RecordingInfo:
    recording_id: str
    path: pathlib.Path
    sample_rate: int
    length_s: float
    snr_db: float


def _inspect(recording_id: str, path: pathlib.Path) -> _RecordingInfo:
    samples, sample_rate = read_wav(path)
    length_s = len(samples) / sample_rate
    snr_db = estimate_snr(samples, sample_rate).db if len(samples) >= sample_rate else float("nan")
    return _RecordingInfo(recording_id, path, sample_rate, length_s, snr_db)


def _inspect_all(recording_ids: Iterable[str], audio_dir: pathlib.Path,
                 workers: int) -> Dict[str, _RecordingInfo]:
    infos: Dict[str, _RecordingInfo] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        future_to_rec = {
            executor.submit(_inspect, rec, audio_dir / f"{rec}.wav"): rec
            for rec in recording_ids
        }
        for future in as_completed(future_to_rec):
            rec = future_to_rec[future]
            infos[rec] = future.result()
    return infos


def build_pool(annotations: List[ReferenceAnnotation],
               audio_dir: Union[str, pathlib.Path],
               min_segment_s: float = 0.0,
               snr_floor_db: Optional[float] = None,
               target_sample_rate: Optional[int] = None,
               workers: int = 1) -> SegmentPool:
    """
    Pool de segmentos por hablante. Las grabaciones con SNR < snr_floor_db se excluyen
    enteras; con frecuencias mezcladas hace falta target_sample_rate (remuestreo al leer).
    """
    audio_dir = pathlib.Path(audio_dir)
    recording_ids = sorted({a.recording_id for a in annotations})
    infos = _inspect_all(recording_ids, audio_dir, workers)

    excluded = set()
    if snr_floor_db is not None:
        for rec, info in sorted(infos.items()):
            if not info.snr_db >= snr_floor_db:
                logger.info(f"Grabación {rec} excluida: SNR {info.snr_db:.1f} dB < {snr_floor_db} dB")
                excluded.add(rec)

    # la frecuencia del pool sólo depende de las grabaciones incluidas
    included = [info for rec, info in infos.items() if rec not in excluded]
    rates = Counter(info.sample_rate for info in included)
    if target_sample_rate is None and len(rates) > 1:
        main_rate = rates.most_common(1)[0][0]
        offending = sorted(str(i.path) for i in included if i.sample_rate != main_rate)
        raise ValidationError(
            f"frecuencias de muestreo mezcladas {sorted(rates)}; ficheros a {main_rate} Hz esperados, "
            f"difieren: {', '.join(offending)}")
    sample_rate = target_sample_rate or (next(iter(rates)) if rates else 16000)

    segments: Dict[str, List[SpeechSegment]] = {}
    all_speakers = set()
    for annotation in annotations:
        info = infos[annotation.recording_id]
        all_speakers.update(annotation.speakers)
        if annotation.recording_id in excluded:
            continue
        for turn in ReferenceAnnotation.from_turns(annotation.recording_id, annotation.turns).turns:
            onset, end = turn.onset, min(turn.end, info.length_s)
            if end - onset < min_segment_s or end <= onset:
                continue
            segments.setdefault(turn.speaker, []).append(
                SpeechSegment(annotation.recording_id, onset, end - onset, turn.speaker))

    warnings = []
    for speaker in sorted(all_speakers - set(segments)):
        message = f"hablante {speaker} omitido: ningún segmento superó los filtros"
        logger.warning(message)
        warnings.append(message)

    pool = SegmentPool(
        {spk: tuple(sorted(segs, key=lambda s: (s.source_audio, s.onset))) for spk, segs in sorted(segments.items())},
        sample_rate,
        tuple(warnings),
        str(audio_dir),
    )
    logger.info(f"Pool con {len(pool.segments)} hablantes y {pool.num_segments} segmentos "
                f"({len(excluded)} grabaciones excluidas por SNR)")
    return pool


def speaker_from_filename(recording_id: str) -> str:
    """Convención tipo LibriSpeech: `hablante-capítulo-enunciado`"""
    return recording_id.split("-", 1)[0]


def pool_from_vad(audio_dir: Union[str, pathlib.Path],
                  speaker_map: Optional[Mapping[str, str]] = None,
                  min_segment_s: float = 0.0,
                  snr_floor_db: Optional[float] = None,
                  threshold_db: float = DEFAULT_THRESHOLD_DB,
                  min_speech_s: float = DEFAULT_MIN_SPEECH_S,
                  min_gap_s: float = DEFAULT_MIN_GAP_S,
                  workers: int = 1) -> SegmentPool:
    """Segmenta con VAD grabaciones de un solo hablante y construye el pool"""
    audio_dir = pathlib.Path(audio_dir)
    annotations = []
    for path in sorted(audio_dir.glob("*.wav")):
        samples, sample_rate = read_wav(path)
        recording_id = path.stem
        speaker = (speaker_map or {}).get(recording_id) or speaker_from_filename(recording_id)
        intervals = energy_vad(samples, sample_rate, threshold_db_below_peak=threshold_db,
                               min_speech_s=min_speech_s, min_gap_s=min_gap_s)
        turns = [Turn(speaker, onset, duration) for onset, duration in intervals]
        if turns:
            annotations.append(ReferenceAnnotation.from_turns(recording_id, turns))
        else:
            logger.warning(f"{recording_id}: el VAD no encontró voz")
    return build_pool(annotations, audio_dir, min_segment_s, snr_floor_db, workers=workers)


def read_speaker_map(path: Union[str, pathlib.Path]) -> Dict[str, str]:
    """Fichero `recording-id speaker` por línea"""
    mapping = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            fields = line.split()
            if len(fields) == 2:
                mapping[fields[0]] = fields[1]
    return mapping


def save_pool(pool: SegmentPool, path: Union[str, pathlib.Path]) -> None:
    data = {
        "format": POOL_FORMAT,
        "sample_rate": pool.sample_rate,
        "audio_dir": pool.audio_dir,
        "warnings": list(pool.warnings),
        "speakers": {
            spk: [[seg.source_audio, seg.onset, seg.duration] for seg in segs]
            for spk, segs in pool.segments.items()
        },
    }
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)


def load_pool(path: Union[str, pathlib.Path]) -> SegmentPool:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if data.get("format") != POOL_FORMAT:
        raise ValidationError(f"{path}: formato de pool desconocido {data.get('format')!r}")
    segments = {
        spk: tuple(SpeechSegment(rec, onset, duration, spk) for rec, onset, duration in segs)
        for spk, segs in data["speakers"].items()
    }
    return SegmentPool(segments, data["sample_rate"], tuple(data.get("warnings", [])), data.get("audio_dir"))


def pool_statistics(pool: SegmentPool) -> Dict[str, Tuple[int, float]]:
    """(número de segmentos, segundos de voz) por hablante"""
    return {
        spk: (len(segs), float(np.sum([s.duration for s in segs])))
        for spk, segs in pool.segments.items()
    }
