"""
Fichero de estadísticas: texto plano clave/valor + conteos por bin, con cabecera de versión.
Los flotantes se escriben con repr() para que la ida y vuelta sea exacta.

    # simconv turn statistics
    version 1
    p_same_speaker 0.25
    p_overlap_given_change 0.1
    histogram same_speaker_pause 0.01 2
    3 10
    7 4
    ...
"""
from __future__ import annotations
import pathlib
from typing import Dict, Iterator, List, Tuple, Union

from errors import ParseError, ValidationError
from stats.histogram import Histogram
from stats.turns import TurnStatistics

HEADER = "# simconv turn statistics"
FORMAT_VERSION = 1
HISTOGRAMS = ("same_speaker_pause", "cross_speaker_pause", "cross_speaker_overlap")
PROBABILITIES = ("p_same_speaker", "p_overlap_given_change")


def format_statistics(stats: TurnStatistics) -> str:
    lines = [HEADER, f"version {FORMAT_VERSION}"]
    for name in PROBABILITIES:
        lines.append(f"{name} {getattr(stats, name)!r}")
    for name in HISTOGRAMS:
        hist: Histogram = getattr(stats, name)
        bins = [(k, c) for k, c in enumerate(hist.counts) if c]
        lines.append(f"histogram {name} {hist.bin_width!r} {len(bins)}")
        lines.extend(f"{k} {c}" for k, c in bins)
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    for line_number, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if fields and not fields[0].startswith("#"):
            yield line_number, fields


def parse_statistics(text: str) -> TurnStatistics:
    lines = _content_lines(text)
    try:
        line_number, fields = next(lines)
    except StopIteration:
        raise ParseError("fichero de estadísticas vacío") from None
    if fields[0] != "version" or len(fields) != 2:
        raise ParseError("falta la cabecera de versión", line_number)
    if fields[1] != str(FORMAT_VERSION):
        raise ValidationError(f"versión {fields[1]} no soportada (se espera {FORMAT_VERSION})")

    values: Dict[str, float] = {}
    histograms: Dict[str, Histogram] = {}
    for line_number, fields in lines:
        key = fields[0]
        try:
            if key in PROBABILITIES and len(fields) == 2:
                values[key] = float(fields[1])
            elif key == "histogram" and len(fields) == 4 and fields[1] in HISTOGRAMS:
                bin_width, n_bins = float(fields[2]), int(fields[3])
                counts: Dict[int, int] = {}
                for _ in range(n_bins):
                    bin_line, bin_fields = next(lines)
                    if len(bin_fields) != 2:
                        raise ParseError("se esperaba `bin conteo`", bin_line)
                    counts[int(bin_fields[0])] = int(bin_fields[1])
                if any(k < 0 for k in counts):
                    raise ValidationError(f"bin negativo en {fields[1]}")
                size = max(counts) + 1 if counts else 0
                histograms[fields[1]] = Histogram(bin_width, tuple(counts.get(k, 0) for k in range(size)))
            else:
                raise ParseError(f"clave desconocida o mal formada: {key}", line_number)
        except StopIteration:
            raise ParseError(f"histograma {fields[1]} truncado", line_number) from None
        except (TypeError, ValueError) as e:
            if isinstance(e, (ParseError, ValidationError)):
                raise
            raise ParseError(f"valor no numérico: {e}", line_number) from None

    missing = [k for k in PROBABILITIES + HISTOGRAMS if k not in values and k not in histograms]
    if missing:
        raise ValidationError(f"faltan claves: {', '.join(missing)}")
    return TurnStatistics(**histograms, **values)


def save_statistics(stats: TurnStatistics, path: Union[str, pathlib.Path]) -> None:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_statistics(stats), encoding="utf-8")


def load_statistics(path: Union[str, pathlib.Path]) -> TurnStatistics:
    return parse_statistics(pathlib.Path(path).read_text(encoding="utf-8"))
