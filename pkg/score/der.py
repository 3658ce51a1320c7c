"""
Diarization Error Rate al estilo NIST: collar de perdón alrededor de los límites de la
referencia, evaluación opcional del solape y correspondencia óptima global de hablantes.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from corpus.segments import Interval, ReferenceAnnotation
from errors import ScoringError, ValidationError
from pitloss.assignment import hungarian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DERReport:
    file_id: str
    scored_speech: float
    missed: float
    false_alarm: float
    confusion: float
    collar: float
    mapping: Dict[str, str] = field(default_factory=dict)   # hablante hipótesis → hablante referencia
    flagged: bool = False

    def __post_init__(self):
        for name in ("scored_speech", "missed", "false_alarm", "confusion", "collar"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{self.file_id}: {name} negativo")

    @property
    def error(self) -> float:
        return self.missed + self.false_alarm + self.confusion

    @property
    def der(self) -> float:
        if self.scored_speech <= 0:
            raise ScoringError(f"{self.file_id}: sin voz evaluable, DER indefinido")
        return self.error / self.scored_speech

    def as_record(self) -> dict:
        """Registro con orden de campos fijo para la salida JSONL"""
        return {
            "file_id": self.file_id,
            "missed": round(self.missed, 6),
            "false_alarm": round(self.false_alarm, 6),
            "confusion": round(self.confusion, 6),
            "scored_speech": round(self.scored_speech, 6),
            "der": round(self.der, 6),
            "flagged": self.flagged,
        }


class _Activity:
    """Búsqueda de actividad de un hablante en un instante sobre intervalos ordenados"""

    def __init__(self, intervals: List[Interval]):
        self.starts = np.array([s for s, _ in intervals], dtype=np.float64)
        self.ends = np.array([e for _, e in intervals], dtype=np.float64)

    def active_at(self, times: np.ndarray) -> np.ndarray:
        if self.starts.size == 0:
            return np.zeros(times.shape, dtype=bool)
        idx = np.searchsorted(self.starts, times, side="right") - 1
        inside = idx >= 0
        inside[inside] = times[inside] < self.ends[idx[inside]]
        return inside


def _regions(reference: Dict[str, List[Interval]], hypothesis: Dict[str, List[Interval]],
             collar_s: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corta la línea de tiempo en todos los límites; devuelve (inicio, longitud, en_collar) por región"""
    ref_bounds = sorted({t for ivs in reference.values() for iv in ivs for t in iv})
    cuts = set(ref_bounds)
    cuts.update(t for ivs in hypothesis.values() for iv in ivs for t in iv)
    if collar_s > 0:
        cuts.update(max(0.0, t - collar_s) for t in ref_bounds)
        cuts.update(t + collar_s for t in ref_bounds)
    points = np.array(sorted(cuts), dtype=np.float64)
    if points.size < 2:
        empty = np.zeros(0)
        return empty, empty, np.zeros(0, dtype=bool)

    starts, lengths = points[:-1], np.diff(points)
    mids = starts + lengths / 2
    in_collar = np.zeros(mids.shape, dtype=bool)
    if collar_s > 0 and ref_bounds:
        bounds = np.array(ref_bounds)
        pos = np.searchsorted(bounds, mids)
        left = bounds[np.clip(pos - 1, 0, bounds.size - 1)]
        right = bounds[np.clip(pos, 0, bounds.size - 1)]
        in_collar = np.minimum(np.abs(mids - left), np.abs(mids - right)) < collar_s
    return mids, lengths, in_collar


def der(reference: ReferenceAnnotation, hypothesis: ReferenceAnnotation,
        collar_s: float = 0.0, score_overlap: bool = True, file_id: Optional[str] = None,
        flagged: bool = False) -> DERReport:
    """
    DER de una grabación. En cada región con R hablantes de referencia y H de hipótesis:
    fallo max(R-H, 0), falsa alarma max(H-R, 0) y confusión min(R, H) - coincidentes.
    """
    if collar_s < 0:
        raise ValidationError(f"collar negativo: {collar_s}")
    file_id = file_id or reference.recording_id
    ref_ivs, hyp_ivs = reference.intervals(), hypothesis.intervals()
    ref_names, hyp_names = sorted(ref_ivs), sorted(hyp_ivs)

    mids, lengths, in_collar = _regions(ref_ivs, hyp_ivs, collar_s)
    ref_active = np.array([_Activity(ref_ivs[s]).active_at(mids) for s in ref_names],
                          dtype=bool).reshape(len(ref_names), mids.size)
    hyp_active = np.array([_Activity(hyp_ivs[s]).active_at(mids) for s in hyp_names],
                          dtype=bool).reshape(len(hyp_names), mids.size)
    r_count = ref_active.sum(axis=0)
    h_count = hyp_active.sum(axis=0)

    scored = ~in_collar
    if not score_overlap:
        scored &= r_count < 2
    weights = np.where(scored, lengths, 0.0)

    scored_speech = float(np.sum(r_count * weights))
    if scored_speech <= 0:
        raise ScoringError(f"{file_id}: la referencia no tiene voz evaluable, DER indefinido")

    # correspondencia global que maximiza el tiempo de voz coincidente
    mapping: Dict[str, str] = {}
    matched = np.zeros(mids.shape)
    if ref_names and hyp_names:
        overlap = (ref_active * weights) @ hyp_active.T.astype(np.float64)
        assignment = hungarian(overlap, maximize=True)
        for r, h in assignment.as_dict().items():
            if overlap[r, h] > 0:
                mapping[hyp_names[h]] = ref_names[r]
                matched += ref_active[r] & hyp_active[h]

    missed = float(np.sum(np.maximum(r_count - h_count, 0) * weights))
    false_alarm = float(np.sum(np.maximum(h_count - r_count, 0) * weights))
    confusion = float(np.sum((np.minimum(r_count, h_count) - matched) * weights))

    report = DERReport(file_id, scored_speech, missed, false_alarm, max(confusion, 0.0),
                       collar_s, mapping, flagged)
    logger.debug(f"{file_id}: DER={report.der:.4f} (fallo {missed:.2f}s, FA {false_alarm:.2f}s, "
                 f"confusión {confusion:.2f}s sobre {scored_speech:.2f}s)")
    return report


def pool_reports(reports: Iterable[DERReport], file_id: str = "ALL") -> DERReport:
    """Agrega sumando duraciones antes de dividir (no promedia DER por fichero)"""
    reports = list(reports)
    if not reports:
        raise ScoringError("no hay ficheros que agregar")
    collars = {r.collar for r in reports}
    if len(collars) != 1:
        raise ScoringError(f"collares distintos entre ficheros: {sorted(collars)}")
    return DERReport(
        file_id,
        sum(r.scored_speech for r in reports),
        sum(r.missed for r in reports),
        sum(r.false_alarm for r in reports),
        sum(r.confusion for r in reports),
        collars.pop(),
        flagged=any(r.flagged for r in reports),
    )
