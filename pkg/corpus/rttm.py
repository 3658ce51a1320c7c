"""
Lectura y escritura de anotaciones RTTM y de listas de segmentos
(`recording-id speaker onset duration`, como las transcripciones de VoxPopuli).
"""
from __future__ import annotations
import logging
import pathlib
from typing import Dict, Iterable, List, TextIO, Union

from corpus.segments import ReferenceAnnotation, Turn
from errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

RTTM_FIELDS = (9, 10)  # la columna final (<NA>) es opcional


def _group(turns_by_rec: Dict[str, List[Turn]]) -> List[ReferenceAnnotation]:
    return [ReferenceAnnotation.from_turns(rec, turns) for rec, turns in turns_by_rec.items()]


def _parse_number(text: str, what: str, line_number: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{what} no numérico: {text!r}", line_number) from None


def parse_rttm(stream: TextIO) -> List[ReferenceAnnotation]:
    """Una anotación por grabación, en orden de aparición; fusiona turnos del mismo hablante"""
    turns_by_rec: Dict[str, List[Turn]] = {}
    for line_number, line in enumerate(stream, start=1):
        fields = line.split()
        if not fields or fields[0].startswith("#"):
            continue
        if fields[0] != "SPEAKER":
            # SPKR-INFO, LEXEME, etc. no aportan turnos
            continue
        if len(fields) not in RTTM_FIELDS:
            raise ParseError(f"se esperaban 9 o 10 campos, hay {len(fields)}", line_number)

        recording, onset, duration, speaker = fields[1], fields[3], fields[4], fields[7]
        onset = _parse_number(onset, "onset", line_number)
        duration = _parse_number(duration, "duración", line_number)
        if duration < 0:
            raise ValidationError(f"línea {line_number}: duración negativa ({duration})")
        if onset < 0:
            raise ValidationError(f"línea {line_number}: onset negativo ({onset})")
        if duration == 0:
            logger.debug(f"Turno de duración cero ignorado en la línea {line_number}")
            continue
        turns_by_rec.setdefault(recording, []).append(Turn(speaker, onset, duration))
    return _group(turns_by_rec)


def write_rttm(annotations: Iterable[ReferenceAnnotation], stream: TextIO, precision: int = 2) -> None:
    """Escribe líneas SPEAKER de 10 campos; las anotaciones se normalizan antes"""
    for annotation in annotations:
        normalized = annotation.normalized(precision)
        for turn in normalized.turns:
            stream.write(
                f"SPEAKER {normalized.recording_id} 1 {turn.onset:.{precision}f} "
                f"{turn.duration:.{precision}f} <NA> <NA> {turn.speaker} <NA> <NA>\n"
            )


def parse_segment_list(stream: TextIO) -> List[ReferenceAnnotation]:
    turns_by_rec: Dict[str, List[Turn]] = {}
    for line_number, line in enumerate(stream, start=1):
        fields = line.split()
        if not fields or fields[0].startswith("#"):
            continue
        if len(fields) != 4:
            raise ParseError(f"se esperaban 4 campos, hay {len(fields)}", line_number)
        recording, speaker = fields[0], fields[1]
        onset = _parse_number(fields[2], "onset", line_number)
        duration = _parse_number(fields[3], "duración", line_number)
        if duration <= 0 or onset < 0:
            raise ValidationError(f"línea {line_number}: intervalo inválido ({onset}, {duration})")
        turns_by_rec.setdefault(recording, []).append(Turn(speaker, onset, duration))
    return _group(turns_by_rec)


def load_annotations(path: Union[str, pathlib.Path]) -> List[ReferenceAnnotation]:
    """Carga un fichero RTTM/lista de segmentos o todos los *.rttm de un directorio"""
    path = pathlib.Path(path)
    if path.is_dir():
        annotations: List[ReferenceAnnotation] = []
        for rttm in sorted(path.glob("*.rttm")):
            annotations.extend(load_annotations(rttm))
        return annotations

    with open(path, "r", encoding="utf-8") as f:
        if path.suffix == ".rttm":
            return parse_rttm(f)
        return parse_segment_list(f)


def save_annotations(annotations: Iterable[ReferenceAnnotation], path: Union[str, pathlib.Path],
                     precision: int = 2) -> None:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        write_rttm(annotations, f, precision)
