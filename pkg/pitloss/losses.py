"""
Pérdidas de entrenamiento de un diarizador extremo a extremo con atractores, evaluadas
numéricamente (sin gradientes):
diarización con PIT húngaro, existencia de atractores, VAD auxiliar y su combinación
L = L_diarization + L_attractors + alpha · L_VAD.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from errors import ValidationError
from pitloss.activity import ActivityMatrix
from pitloss.assignment import Assignment, hungarian

logger = logging.getLogger(__name__)

EPS = 1e-7
DEFAULT_ALPHA = 0.2


@dataclass(frozen=True)
class LossBreakdown:
    diarization: float
    attractors: float
    vad: float
    alpha: float
    combined: float

    def __post_init__(self):
        expected = self.diarization + self.attractors + self.alpha * self.vad
        if abs(self.combined - expected) > 1e-12:
            raise ValidationError("combined no coincide con diarization + attractors + alpha·vad")

    def as_dict(self) -> dict:
        return {
            "diarization": self.diarization,
            "attractors": self.attractors,
            "vad": self.vad,
            "alpha": self.alpha,
            "combined": self.combined,
        }


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, EPS, 1 - EPS)


def bce(probabilities: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Entropía cruzada binaria elemento a elemento, con las probabilidades recortadas a [ε, 1-ε]"""
    p = _clamp(np.asarray(probabilities, dtype=np.float64))
    t = np.asarray(labels, dtype=np.float64)
    return -(t * np.log(p) + (1 - t) * np.log(1 - p))


def pit_cost_matrix(posteriors: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """cost[i][j] = BCE media sobre tramas entre la columna predicha i y la de referencia j"""
    p = _clamp(posteriors)
    frames = p.shape[0]
    return -(np.log(p).T @ labels + np.log(1 - p).T @ (1 - labels)) / frames


def pit_diarization_loss(posteriors: ActivityMatrix, labels: ActivityMatrix) -> Tuple[float, Assignment]:
    """BCE media mínima sobre todas las asignaciones hablante predicho → referencia"""
    if posteriors.num_frames != labels.num_frames:
        raise ValidationError(
            f"número de tramas distinto: {posteriors.num_frames} vs {labels.num_frames}")
    speakers = max(posteriors.num_speakers, labels.num_speakers)
    if speakers == 0:
        return 0.0, Assignment((), 0.0)
    posteriors, labels = posteriors.padded(speakers), labels.padded(speakers)

    assignment = hungarian(pit_cost_matrix(posteriors.values, labels.values))
    return assignment.cost / speakers, assignment


def vad_loss(posteriors: ActivityMatrix, labels: ActivityMatrix) -> float:
    """
    BCE por trama entre la probabilidad de silencio p(sil_f) = prod_s (1 - y_f^s) y la
    etiqueta de silencio s_f = 1[sum_s t_f^s = 0]; no depende de la asignación.
    """
    if posteriors.num_frames != labels.num_frames:
        raise ValidationError(
            f"número de tramas distinto: {posteriors.num_frames} vs {labels.num_frames}")
    if posteriors.num_speakers != labels.num_speakers:
        raise ValidationError(
            f"número de hablantes distinto: {posteriors.num_speakers} vs {labels.num_speakers}")
    if not labels.is_binary():
        raise ValidationError("las etiquetas de VAD deben ser binarias")

    p_silence = np.prod(1 - posteriors.values, axis=1)
    silence = (labels.values.sum(axis=1) == 0).astype(np.float64)
    return float(np.mean(bce(p_silence, silence)))


def attractor_existence_loss(existence: np.ndarray, num_speakers: int) -> float:
    """BCE media frente a S unos seguidos de un cero"""
    existence = np.asarray(existence, dtype=np.float64).ravel()
    if existence.size == 0:
        raise ValidationError("vector de probabilidades de existencia vacío")
    if existence.size != num_speakers + 1:
        raise ValidationError(
            f"se esperaban {num_speakers + 1} probabilidades de existencia, hay {existence.size}")
    if np.any(existence < 0) or np.any(existence > 1):
        raise ValidationError("probabilidades de existencia fuera de [0, 1]")
    targets = np.append(np.ones(num_speakers), 0.0)
    return float(np.mean(bce(existence, targets)))


def combined_loss(posteriors: ActivityMatrix, labels: ActivityMatrix, existence: np.ndarray,
                  alpha: float = DEFAULT_ALPHA) -> LossBreakdown:
    diarization, _ = pit_diarization_loss(posteriors, labels)
    attractors = attractor_existence_loss(existence, labels.num_speakers)
    vad = vad_loss(posteriors.padded(labels.num_speakers), labels.padded(posteriors.num_speakers))
    return breakdown(diarization, attractors, vad, alpha)


def breakdown(diarization: float, attractors: float, vad: float, alpha: float = DEFAULT_ALPHA) -> LossBreakdown:
    return LossBreakdown(diarization, attractors, vad, alpha, diarization + attractors + alpha * vad)
