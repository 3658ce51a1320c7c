"""
ActivityMatrix (tramas x hablantes, valores en [0, 1]) y su fichero binario:
cabecera int32 little-endian (F, S) seguida de float32 en orden fila a fila.
"""
from __future__ import annotations
import pathlib
from dataclasses import dataclass
from typing import Union

import numpy as np

from errors import ParseError, ValidationError

DEFAULT_FRAME_STEP = 0.1
HEADER_DTYPE = np.dtype("<i4")
VALUE_DTYPE = np.dtype("<f4")


@dataclass(frozen=True, eq=False)
class ActivityMatrix:
    values: np.ndarray
    frame_step: float = DEFAULT_FRAME_STEP

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError(f"se esperaba una matriz F x S, forma {values.shape}")
        if values.shape[0] < 1:
            raise ValidationError("la matriz de actividad necesita al menos una trama")
        if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
            raise ValidationError("valores de actividad fuera de [0, 1]")
        object.__setattr__(self, "values", values)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def num_speakers(self) -> int:
        return self.values.shape[1]

    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0) | (self.values == 1)))

    def padded(self, num_speakers: int) -> "ActivityMatrix":
        """Añade columnas a cero hasta num_speakers"""
        missing = num_speakers - self.num_speakers
        if missing <= 0:
            return self
        return ActivityMatrix(np.pad(self.values, ((0, 0), (0, missing))), self.frame_step)


def write_tensor(path: Union[str, pathlib.Path], values: np.ndarray) -> None:
    values = np.atleast_2d(np.asarray(values))
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(np.asarray(values.shape, dtype=HEADER_DTYPE).tobytes())
        f.write(np.ascontiguousarray(values, dtype=VALUE_DTYPE).tobytes())


def read_tensor(path: Union[str, pathlib.Path]) -> np.ndarray:
    data = pathlib.Path(path).read_bytes()
    header = HEADER_DTYPE.itemsize * 2
    if len(data) < header:
        raise ParseError(f"{path}: cabecera incompleta")
    frames, speakers = np.frombuffer(data[:header], dtype=HEADER_DTYPE)
    if frames < 0 or speakers < 0:
        raise ParseError(f"{path}: dimensiones negativas ({frames}, {speakers})")
    expected = header + int(frames) * int(speakers) * VALUE_DTYPE.itemsize
    if len(data) != expected:
        raise ParseError(f"{path}: tamaño {len(data)} bytes, se esperaban {expected}")
    values = np.frombuffer(data[header:], dtype=VALUE_DTYPE).astype(np.float64)
    return values.reshape(int(frames), int(speakers))


def read_activity(path: Union[str, pathlib.Path], frame_step: float = DEFAULT_FRAME_STEP) -> ActivityMatrix:
    return ActivityMatrix(read_tensor(path), frame_step)
