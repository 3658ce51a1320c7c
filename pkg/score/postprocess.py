"""Post-proceso de salidas del modelo: umbral, filtro de mediana y conversión a anotación"""
from __future__ import annotations
from typing import Optional, Sequence

import numpy as np
from scipy.ndimage import median_filter as _median_filter

from corpus.segments import ReferenceAnnotation, Turn
from errors import ValidationError
from pitloss.activity import ActivityMatrix

DEFAULT_THRESHOLD = 0.5
DEFAULT_MEDIAN_WINDOW = 11


def binarize(posteriors: ActivityMatrix, threshold: float = DEFAULT_THRESHOLD) -> ActivityMatrix:
    """entrada >= umbral → 1"""
    if not 0 < threshold < 1:
        raise ValidationError(f"umbral fuera de (0, 1): {threshold}")
    return ActivityMatrix((posteriors.values >= threshold).astype(np.float64), posteriors.frame_step)


def median_filter(activity: ActivityMatrix, window: int = DEFAULT_MEDIAN_WINDOW) -> ActivityMatrix:
    """Mediana por columna (hablante) a lo largo de las tramas; bordes replicados"""
    if window < 1 or window % 2 == 0:
        raise ValidationError(f"la ventana del filtro de mediana debe ser impar >= 1: {window}")
    if window == 1 or activity.num_speakers == 0:
        return activity
    filtered = _median_filter(activity.values, size=(window, 1), mode="nearest")
    return ActivityMatrix(filtered, activity.frame_step)


def matrix_to_annotation(activity: ActivityMatrix, recording_id: str = "",
                         speakers: Optional[Sequence[str]] = None,
                         frame_step: Optional[float] = None) -> ReferenceAnnotation:
    """Cada racha máxima de unos de un hablante → intervalo [inicio·paso, fin·paso)"""
    if not activity.is_binary():
        raise ValidationError("matrix_to_annotation requiere una matriz binaria")
    step = frame_step if frame_step is not None else activity.frame_step
    names = list(speakers) if speakers is not None else [f"spk{i}" for i in range(activity.num_speakers)]
    if len(names) != activity.num_speakers:
        raise ValidationError("número de nombres de hablante distinto del número de columnas")

    turns = []
    for column, name in enumerate(names):
        active = np.concatenate(([0], activity.values[:, column].astype(np.int8), [0]))
        edges = np.diff(active)
        for start, end in zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)):
            turns.append(Turn(name, start * step, (end - start) * step))
    return ReferenceAnnotation.from_turns(recording_id, turns)


def annotation_to_matrix(annotation: ReferenceAnnotation, frame_step: float,
                         num_frames: Optional[int] = None,
                         speakers: Optional[Sequence[str]] = None) -> ActivityMatrix:
    """Rasterizado: la trama f está activa si [f·paso, (f+1)·paso) cae dentro del intervalo redondeado"""
    names = list(speakers) if speakers is not None else annotation.speakers
    if num_frames is None:
        num_frames = max(1, int(round(annotation.end / frame_step)))
    values = np.zeros((num_frames, len(names)))
    column = {name: i for i, name in enumerate(names)}
    for speaker, intervals in annotation.intervals().items():
        if speaker not in column:
            continue
        for start, end in intervals:
            values[int(round(start / frame_step)):int(round(end / frame_step)), column[speaker]] = 1.0
    return ActivityMatrix(values, frame_step)
