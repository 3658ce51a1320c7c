"""
Generación de lotes: WAV + RTTM por conversación y un manifiesto JSON Lines.
Cada conversación usa su propia semilla derivada, así que el resultado no depende
del número de workers ni del orden de ejecución.
"""
from __future__ import annotations
import hashlib
import json
import logging
import pathlib
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np
from tqdm import tqdm

from corpus.audio import AudioStore, write_wav
from corpus.rttm import save_annotations
from corpus.segments import SegmentPool
from errors import ConfigError
from score.timeline import activity_summary
from simulate.noise import NoisePool, mix_noise
from simulate.plan import ConversationPlan, plan_to_annotation
from simulate.render import render, speech_mask
from simulate.sc import plan_sc
from simulate.sm import plan_sm
from simulate.spec import MODE_SC, MixSpec
from stats.turns import TurnStatistics

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
RTTM_PRECISION = 2


def derive_seed(seed: int, index: int) -> int:
    """seed_i = hash(seed, i), estable entre ejecuciones y plataformas"""
    digest = hashlib.sha256(f"{seed}:{index}".encode()).hexdigest()
    return int(digest[:16], 16)


@dataclass
class ManifestRecord:
    id: str
    seed: int
    status: str = "ok"
    duration: float = 0.0
    num_speakers: int = 0
    speech_per_speaker: Dict[str, float] = field(default_factory=dict)
    overlap: float = 0.0
    silence: float = 0.0
    overlap_fraction: float = 0.0
    snr_db: Optional[float] = None
    noise_id: Optional[str] = None
    clipped_samples: int = 0
    warnings: List[str] = field(default_factory=list)
    error: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)


def plan_conversation(spec: MixSpec, pool: SegmentPool, statistics: Optional[TurnStatistics],
                      rng: np.random.Generator, seed: int) -> ConversationPlan:
    if spec.mode == MODE_SC:
        if statistics is None:
            raise ConfigError("el modo SC requiere estadísticas")
        return plan_sc(pool, spec, statistics, rng, seed)
    return plan_sm(pool, spec, rng, seed)


def generate_conversation(index: int, spec: MixSpec, pool: SegmentPool, store: AudioStore,
                          statistics: Optional[TurnStatistics], output_dir: pathlib.Path,
                          noise_pool: Optional[NoisePool] = None) -> ManifestRecord:
    seed = derive_seed(spec.seed, index)
    conversation_id = f"{spec.mode}_{index:06d}"
    record = ManifestRecord(conversation_id, seed)
    rng = np.random.default_rng(seed)

    plan = plan_conversation(spec, pool, statistics, rng, seed)
    clean = render(plan, store, pool.sample_rate, spec.normalize_peak)
    audio = clean
    if noise_pool is not None:
        mixed = mix_noise(clean, noise_pool, spec.snr_choices_db, rng,
                          speech_mask(plan, pool.sample_rate, len(clean)))
        audio, record.snr_db, record.noise_id = mixed.samples, mixed.snr_db, mixed.noise_id

    record.clipped_samples = write_wav(output_dir / "wav" / f"{conversation_id}.wav", audio, pool.sample_rate)
    annotation = plan_to_annotation(plan, conversation_id).normalized(RTTM_PRECISION)
    save_annotations([annotation], output_dir / "rttm" / f"{conversation_id}.rttm", RTTM_PRECISION)

    summary = activity_summary(annotation, len(audio) / pool.sample_rate)
    record.duration = summary.duration
    record.num_speakers = plan.num_speakers
    record.speech_per_speaker = summary.speech_per_speaker
    record.overlap = summary.overlap
    record.silence = summary.silence
    record.overlap_fraction = summary.overlap_fraction
    record.warnings = list(plan.warnings)
    return record


def generate_batch(spec: MixSpec, pool: SegmentPool, store: AudioStore,
                   statistics: Optional[TurnStatistics], count: int,
                   output_dir: Union[str, pathlib.Path],
                   noise_pool: Optional[NoisePool] = None,
                   workers: int = 1) -> List[ManifestRecord]:
    """Genera `count` conversaciones; un fallo aislado queda en el manifiesto y el lote sigue"""
    spec.validate(has_statistics=statistics is not None, has_noise=noise_pool is not None)
    output_dir = pathlib.Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    records: Dict[int, ManifestRecord] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        future_to_index = {
            executor.submit(generate_conversation, i, spec, pool, store, statistics, output_dir, noise_pool): i
            for i in range(count)
        }
        for future in tqdm(as_completed(future_to_index), total=count, desc=f"simulate {spec.mode}",
                           disable=count == 0):
            index = future_to_index[future]
            try:
                records[index] = future.result()
            except Exception as e:
                logger.error(f"Error generando la conversación {index}: {e}")
                records[index] = ManifestRecord(f"{spec.mode}_{index:06d}", derive_seed(spec.seed, index),
                                                status="error", error=str(e))

    manifest = [records[i] for i in range(count)]
    with open(output_dir / MANIFEST_NAME, "w", encoding="utf-8") as f:
        for record in manifest:
            f.write(record.to_json() + "\n")

    failed = sum(1 for r in manifest if r.status != "ok")
    logger.info(f"Lote {spec.mode}: {count - failed} conversaciones generadas, {failed} con error → {output_dir}")
    return manifest


def read_manifest(path: Union[str, pathlib.Path]) -> List[ManifestRecord]:
    with open(path, "r", encoding="utf-8") as f:
        return [ManifestRecord(**json.loads(line)) for line in f if line.strip()]
