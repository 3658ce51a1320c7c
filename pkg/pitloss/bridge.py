"""
Puente para código de entrenamiento externo: lee posteriors/etiquetas de ficheros
tensoriales y devuelve el desglose de pérdidas como registro de texto.
"""
from __future__ import annotations
import json
import logging
import pathlib
from typing import Optional, Union

import numpy as np

from pitloss.activity import ActivityMatrix, read_tensor
from pitloss.losses import (DEFAULT_ALPHA, LossBreakdown, breakdown, combined_loss,
                            pit_diarization_loss, vad_loss)

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]


def evaluate_tensor_files(posteriors_path: PathLike, labels_path: PathLike,
                          existence_path: Optional[PathLike] = None,
                          alpha: float = DEFAULT_ALPHA) -> LossBreakdown:
    posteriors = ActivityMatrix(read_tensor(posteriors_path))
    labels = ActivityMatrix(read_tensor(labels_path))
    if existence_path is not None:
        return combined_loss(posteriors, labels, np.ravel(read_tensor(existence_path)), alpha)

    logger.warning("Sin probabilidades de existencia: el término de atractores se toma como 0")
    diarization, _ = pit_diarization_loss(posteriors, labels)
    speakers = max(posteriors.num_speakers, labels.num_speakers)
    vad = vad_loss(posteriors.padded(speakers), labels.padded(speakers))
    return breakdown(diarization, 0.0, vad, alpha)


def format_breakdown(losses: LossBreakdown, as_json: bool = False) -> str:
    if as_json:
        return json.dumps(losses.as_dict())
    return " ".join(f"{key}={value:.10g}" for key, value in losses.as_dict().items())
