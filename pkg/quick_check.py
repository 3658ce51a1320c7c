# quick_check.py - Prueba rápida de extremo a extremo con un corpus sintético
import logging
import pathlib
import sys
import tempfile
import time

import numpy as np

from corpus.audio import AudioStore, write_wav
from corpus.pool import build_pool
from corpus.rttm import save_annotations
from corpus.segments import ReferenceAnnotation, Turn
from score.directory import score_directory
from simulate.batch import generate_batch
from simulate.noise import NoisePool
from simulate.spec import load_mix_spec
from stats.turns import estimate_turn_statistics

SAMPLE_RATE = 16000
NUM_SOURCES = 6
CONVERSATIONS = 50


def synth_source(recording_id: str, speakers, rng: np.random.Generator):
    """Conversación fuente: tonos de frecuencia distinta por hablante, con pausas y solapes"""
    t, turns = 0.5, []
    for i in range(40):
        speaker = speakers[i % len(speakers)] if rng.random() > 0.2 else speakers[(i + 1) % len(speakers)]
        duration = float(rng.uniform(0.8, 3.0))
        turns.append(Turn(speaker, round(t, 2), round(duration, 2)))
        t += duration + float(rng.uniform(-0.4, 0.8))
        t = max(t, turns[-1].onset + 0.1)

    annotation = ReferenceAnnotation.from_turns(recording_id, turns).normalized()
    length = int((annotation.end + 0.5) * SAMPLE_RATE)
    audio = np.zeros(length)
    for turn in annotation.turns:
        freq = 150.0 + 40.0 * int(turn.speaker[3:])
        start = int(turn.onset * SAMPLE_RATE)
        n = int(turn.duration * SAMPLE_RATE)
        audio[start:start + n] += 0.2 * np.sin(2 * np.pi * freq * np.arange(n) / SAMPLE_RATE)
    return annotation, audio


def main():
    """Corpus → pool → estadísticas → 50 conversaciones SC con ruido → DER de la hipótesis perfecta"""
    print("🚀 Iniciando prueba rápida...")
    logging.basicConfig(level=logging.WARNING)
    rng = np.random.default_rng(0)
    started = time.time()

    with tempfile.TemporaryDirectory() as tmp:
        root = pathlib.Path(tmp)
        annotations = []
        for i in range(NUM_SOURCES):
            speakers = [f"spk{2 * i}", f"spk{2 * i + 1}"]
            annotation, audio = synth_source(f"src{i}", speakers, rng)
            write_wav(root / "audio" / f"src{i}.wav", audio, SAMPLE_RATE)
            annotations.append(annotation)
        save_annotations(annotations, root / "ref.rttm")
        write_wav(root / "noise" / "hum.wav", 0.05 * rng.standard_normal(SAMPLE_RATE * 5), SAMPLE_RATE)
        print(f"📁 Corpus sintético: {NUM_SOURCES} grabaciones")

        pool = build_pool(annotations, root / "audio", min_segment_s=0.5)
        statistics = estimate_turn_statistics(annotations)
        spec = load_mix_spec(mode="sc", speakers_per_recording=[2, 3, 4], utterances=50, seed=7)
        noise = NoisePool.from_directory(root / "noise", SAMPLE_RATE)

        out = root / "sc"
        manifest = generate_batch(spec, pool, AudioStore.for_pool(pool), statistics, CONVERSATIONS, out, noise,
                                  workers=4)
        failed = [r for r in manifest if r.status != "ok"]
        mean_duration = np.mean([r.duration for r in manifest if r.status == "ok"])
        print(f"🎙️ {len(manifest) - len(failed)} conversaciones, duración media {mean_duration:.1f}s")

        result = score_directory(out / "rttm", out / "rttm", collar_s=0.0)
        print(f"📊 DER de la hipótesis perfecta: {result.total.der * 100:.2f}%")
        print(f"⏱️ {time.time() - started:.1f}s")

        ok = not failed and result.total.der == 0.0
        print("✅ Prueba superada" if ok else "❌ Prueba fallida")
        return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
