"""
Evaluación de un directorio de hipótesis frente a uno de referencias.
Hipótesis admitidas: <id>.rttm (o RTTM con varias grabaciones) y <id>.post (posteriors).
"""
from __future__ import annotations
import json
import logging
import pathlib
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

from corpus.rttm import load_annotations
from corpus.segments import ReferenceAnnotation
from errors import ScoringError, ValidationError
from pitloss.activity import DEFAULT_FRAME_STEP, read_activity
from score.der import DERReport, der, pool_reports
from score.postprocess import (DEFAULT_MEDIAN_WINDOW, DEFAULT_THRESHOLD, binarize, matrix_to_annotation,
                               median_filter)

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]
MEDIAN_MODES = ("auto", "on", "off")
POSTERIOR_SUFFIX = ".post"


@dataclass
class DirectoryScore:
    total: DERReport
    files: List[DERReport]
    median_applied: bool
    warnings: List[str] = field(default_factory=list)


def median_applies(collar_s: float, apply_median: str) -> bool:
    """En modo auto el filtro de mediana sólo se aplica con collar > 0"""
    if apply_median not in MEDIAN_MODES:
        raise ValidationError(f"apply_median debe ser uno de {MEDIAN_MODES}: {apply_median!r}")
    if apply_median == "auto":
        return collar_s > 0
    return apply_median == "on"


def _load_hypotheses(hyp_dir: pathlib.Path) -> Dict[str, ReferenceAnnotation]:
    return {a.recording_id: a for a in load_annotations(hyp_dir)} if hyp_dir.is_dir() else {}


def _prepare_hypothesis(recording_id: str, rttm_hyps: Dict[str, ReferenceAnnotation],
                        hyp_dir: pathlib.Path, filtered: bool, window: int,
                        frame_step: float, threshold: float) -> Optional[ReferenceAnnotation]:
    posterior_path = hyp_dir / f"{recording_id}{POSTERIOR_SUFFIX}"
    if posterior_path.exists():
        activity = binarize(read_activity(posterior_path, frame_step), threshold)
        if filtered:
            activity = median_filter(activity, window)
        return matrix_to_annotation(activity, recording_id)

    # las hipótesis RTTM se evalúan tal cual; el filtro sólo actúa sobre posteriors
    return rttm_hyps.get(recording_id)


def score_directory(ref_dir: PathLike, hyp_dir: PathLike, collar_s: float = 0.0,
                    apply_median: str = "auto", score_overlap: bool = True,
                    window: int = DEFAULT_MEDIAN_WINDOW, frame_step: float = DEFAULT_FRAME_STEP,
                    threshold: float = DEFAULT_THRESHOLD, workers: int = 1) -> DirectoryScore:
    """DER por fichero y agregado (duraciones sumadas) para todas las grabaciones de referencia"""
    ref_dir, hyp_dir = pathlib.Path(ref_dir), pathlib.Path(hyp_dir)
    filtered = median_applies(collar_s, apply_median)
    references = load_annotations(ref_dir)
    if not references:
        raise ScoringError(f"no hay referencias RTTM en {ref_dir}")
    rttm_hyps = _load_hypotheses(hyp_dir)
    logger.info(f"📊 Evaluando {len(references)} grabaciones (collar {collar_s}s, "
                f"mediana {'sí' if filtered else 'no'}, solape {'sí' if score_overlap else 'no'})")

    warnings: List[str] = []

    def score_one(reference: ReferenceAnnotation) -> Optional[DERReport]:
        hypothesis = _prepare_hypothesis(reference.recording_id, rttm_hyps, hyp_dir,
                                         filtered, window, frame_step, threshold)
        missing = hypothesis is None
        if missing:
            warnings.append(f"{reference.recording_id}: sin hipótesis, se cuenta como voz no detectada")
            hypothesis = ReferenceAnnotation(reference.recording_id)
        try:
            return der(reference, hypothesis, collar_s, score_overlap, flagged=missing)
        except ScoringError as e:
            warnings.append(f"{reference.recording_id}: excluido ({e})")
            return None

    reports: List[DERReport] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(score_one, ref): ref.recording_id for ref in references}
        for future in as_completed(futures):
            report = future.result()
            if report is not None:
                reports.append(report)

    for message in sorted(warnings):
        logger.warning(message)
    reports.sort(key=lambda r: r.file_id)
    total = pool_reports(reports)
    logger.info(f"✅ DER global: {total.der * 100:.2f}% sobre {len(reports)} ficheros")
    return DirectoryScore(total, reports, filtered, sorted(warnings))


def format_table(result: DirectoryScore) -> str:
    """Tabla legible: una fila por fichero y la fila agregada al final"""
    header = f"{'fichero':<24} {'fallo':>9} {'FA':>9} {'conf':>9} {'evaluado':>10} {'DER%':>7}"
    lines = [header, "-" * len(header)]
    for report in result.files + [result.total]:
        mark = " *" if report.flagged and report is not result.total else ""
        lines.append(f"{report.file_id:<24} {report.missed:>9.2f} {report.false_alarm:>9.2f} "
                     f"{report.confusion:>9.2f} {report.scored_speech:>10.2f} {report.der * 100:>7.2f}{mark}")
    return "\n".join(lines)


def format_records(result: DirectoryScore) -> str:
    """Un registro JSON por línea; el último es el agregado"""
    return "\n".join(json.dumps(r.as_record(), ensure_ascii=False) for r in result.files + [result.total])
