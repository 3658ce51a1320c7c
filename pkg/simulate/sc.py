"""
Conversaciones simuladas (SC): una única línea temporal construida turno a turno,
con pausas y solapes muestreados de estadísticas estimadas sobre conversaciones reales.
"""
from __future__ import annotations
import logging
from collections import deque
from typing import Deque, List

import numpy as np

from corpus.segments import SegmentPool, SpeechSegment
from simulate.plan import ConversationPlan, Placement, build_plan, choose_speakers, draw_gains_db
from simulate.spec import STOP_ON_DURATION, MixSpec
from stats.turns import TurnStatistics

logger = logging.getLogger(__name__)


def plan_sc(pool: SegmentPool, spec: MixSpec, statistics: TurnStatistics,
            rng: np.random.Generator, seed: int = 0) -> ConversationPlan:
    """
    Con probabilidad p_same_speaker sigue el mismo hablante tras una pausa; si no, entra
    otro (uniforme entre el resto) tras una pausa o, con p_overlap_given_change, solapándose.
    Las pausas y solapes se miden desde el final más tardío de la línea temporal.
    """
    count = spec.choose_speaker_count(rng)
    speakers = choose_speakers(pool, count, rng)
    gains = draw_gains_db(count, spec.level_speakers_db, rng)
    queues: List[Deque[SpeechSegment]] = [
        deque(pool.segments[spk][i] for i in rng.permutation(len(pool.segments[spk])))
        for spk in speakers
    ]
    by_duration = spec.stop_on == STOP_ON_DURATION

    current = int(rng.integers(count))
    first = queues[current].popleft()
    placements = [Placement(current, first, 0.0)]
    own_end = [0.0] * count
    own_end[current] = first.duration
    previous_onset, timeline_end = 0.0, first.duration
    warnings: List[str] = []

    def finished() -> bool:
        if by_duration:
            return timeline_end >= spec.target_duration_s
        return len(placements) >= spec.utterances

    while not finished():
        available = [i for i in range(count) if queues[i]]
        if not available:
            warnings.append(f"todos los hablantes agotaron sus segmentos tras {len(placements)} turnos")
            break
        others = [i for i in available if i != current]
        same = rng.random() < statistics.p_same_speaker

        if (same or not others) and current in available:
            if statistics.same_speaker_pause.is_empty:
                warnings.append("sólo queda el hablante actual y no hay pausas del mismo hablante")
                break
            following = current
            onset = timeline_end + statistics.same_speaker_pause.sample(rng)
        elif others:
            following = others[int(rng.integers(len(others)))]
            if rng.random() < statistics.p_overlap_given_change:
                # el solape no supera la duración del turno entrante ni empieza antes que el anterior
                overlap = min(statistics.cross_speaker_overlap.sample(rng), queues[following][0].duration)
                onset = max(timeline_end - overlap, previous_onset)
            else:
                onset = timeline_end + statistics.cross_speaker_pause.sample(rng)
        else:
            warnings.append("no quedan hablantes disponibles")
            break

        # un hablante nunca se solapa consigo mismo
        onset = max(onset, own_end[following])
        segment = queues[following].popleft()
        placements.append(Placement(following, segment, onset))
        own_end[following] = onset + segment.duration
        previous_onset = onset
        timeline_end = max(timeline_end, onset + segment.duration)
        current = following

    for message in warnings:
        logger.warning(f"Plan SC (semilla {seed}) terminado antes de tiempo: {message}")
    return build_plan(placements, count, seed, speakers, gains, warnings)
