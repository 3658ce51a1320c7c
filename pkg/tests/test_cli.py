import json

import pytest

from config import WORKERS_ENV, load_run_config
from corpus.rttm import save_annotations
from corpus.segments import ReferenceAnnotation, Turn
from errors import ConfigError
from main import LOSSES_FILE, POOL_FILE, RUN_RECORD, SCORE_FILE, STATS_FILE, run
from pitloss.activity import write_tensor


def tree(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def prepared(tone_corpus, tmp_path):
    """Pool y estadísticas construidos con la propia CLI"""
    audio_dir, _ = tone_corpus
    work = tmp_path / "work"
    assert run(["ingest", "--audio-dir", str(audio_dir), "--annotations", str(tmp_path / "ref.rttm"),
                "--output-root", str(work)]) == 0
    assert run(["estimate-stats", "--rttm", str(tmp_path / "ref.rttm"), "--output-root", str(work)]) == 0
    return work / POOL_FILE, work / STATS_FILE


def simulate_args(prepared, output_root):
    pool, stats = prepared
    return ["simulate", "sc", "--pool", str(pool), "--statistics", str(stats), "--count", "3",
            "--seed", "13", "-o", "mix.utterances=4", "--output-root", str(output_root)]


def test_score_perfect(tone_corpus, tmp_path, capsys):
    ref = tmp_path / "refs"
    ref.mkdir()
    (ref / "ref.rttm").write_bytes((tmp_path / "ref.rttm").read_bytes())
    assert run(["score", "--ref", str(ref), "--hyp", str(ref), "--output-root", str(tmp_path / "out")]) == 0
    assert "DER 0.00" in capsys.readouterr().out
    assert (tmp_path / "out" / "score.jsonl").exists()


def test_simulation_is_reproducible(prepared, tmp_path):
    assert run(simulate_args(prepared, tmp_path / "a")) == 0
    assert run(simulate_args(prepared, tmp_path / "b")) == 0
    first, second = tree(tmp_path / "a"), tree(tmp_path / "b")
    assert first == second
    assert any(p.suffix == ".wav" for p in first)
    assert any(p.suffix == ".rttm" for p in first)


def test_replay_regenerates_batch(prepared, tmp_path):
    assert run(simulate_args(prepared, tmp_path / "a")) == 0
    record = json.loads((tmp_path / "a" / RUN_RECORD).read_text())
    assert record["command"] == "simulate"
    assert record["seed"] == 13
    assert record["config"]["mix"]["utterances"] == 4
    assert "output_root" not in record["config"]

    assert run(["replay", str(tmp_path / "a" / RUN_RECORD), "--output-root", str(tmp_path / "c")]) == 0
    assert tree(tmp_path / "a") == tree(tmp_path / "c")


def test_missing_statistics_file(prepared, tmp_path, capsys):
    pool, _ = prepared
    missing = tmp_path / "nowhere" / "stats.txt"
    code = run(["simulate", "sc", "--pool", str(pool), "--statistics", str(missing),
                "--output-root", str(tmp_path / "x")])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


def test_usage_errors():
    assert run(["score", "--bogus"]) == 2
    assert run([]) == 2


def test_config_precedence(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 5\nscore:\n  collar_s: 0.1\nmix:\n  utterances: 7\n")
    config = load_run_config(path, ["seed=6", "score.collar_s=0.25"], {"seed": 7, "score.median": None})
    assert config.seed == 7
    assert config.mix.seed == 7
    assert config.score.collar_s == 0.25
    assert config.score.median == "auto"
    assert config.mix.utterances == 7

    with pytest.raises(ConfigError):
        load_run_config(overrides=["score.no_such_key=1"])


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert load_run_config().workers == 3
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        load_run_config()


def test_losses_command(tmp_path, capsys):
    write_tensor(tmp_path / "y.bin", [[0.9, 0.2]])
    write_tensor(tmp_path / "t.bin", [[0.0, 1.0]])
    assert run(["losses", "--posteriors", str(tmp_path / "y.bin"), "--labels", str(tmp_path / "t.bin"),
                "--json", "--output-root", str(tmp_path / "out")]) == 0
    printed = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert printed["diarization"] == pytest.approx(0.16425, abs=1e-5)
    assert printed["attractors"] == 0.0
    assert json.loads((tmp_path / "out" / "losses.json").read_text()) == pytest.approx(printed)


def test_derive_pairs_command(tone_corpus, tmp_path):
    audio_dir, _ = tone_corpus
    out = tmp_path / "out"
    assert run(["derive-pairs", "--annotations", str(tmp_path / "ref.rttm"), "--audio-dir", str(audio_dir),
                "--output-root", str(out)]) == 0
    assert sorted(p.name for p in (out / "pairs" / "rttm").iterdir()) == ["rec0_ana_luis.rttm", "rec1_eva_luis.rttm"]
    assert (out / "pairs" / "wav" / "rec0_ana_luis.wav").exists()


def replays_identically(first, second):
    assert run(["replay", str(first / RUN_RECORD), "--output-root", str(second)]) == 0
    assert tree(first) == tree(second)


def test_replay_ingest(tone_corpus, tmp_path):
    audio_dir, _ = tone_corpus
    assert run(["ingest", "--audio-dir", str(audio_dir), "--annotations", str(tmp_path / "ref.rttm"),
                "--snr-floor-db", "10", "--output-root", str(tmp_path / "a")]) == 0
    assert json.loads((tmp_path / "a" / RUN_RECORD).read_text())["command"] == "ingest"
    replays_identically(tmp_path / "a", tmp_path / "b")


def test_replay_estimate_stats(tone_corpus, tmp_path):
    ref = str(tmp_path / "ref.rttm")
    assert run(["estimate-stats", "--rttm", f"uno={ref}", "--rttm", f"dos={ref}", "--equalize",
                "--seed", "4", "--output-root", str(tmp_path / "a")]) == 0
    assert (tmp_path / "a" / STATS_FILE).exists()
    replays_identically(tmp_path / "a", tmp_path / "b")


def test_replay_derive_pairs(tone_corpus, tmp_path):
    audio_dir, _ = tone_corpus
    assert run(["derive-pairs", "--annotations", str(tmp_path / "ref.rttm"), "--audio-dir", str(audio_dir),
                "--output-root", str(tmp_path / "a")]) == 0
    replays_identically(tmp_path / "a", tmp_path / "b")
    assert (tmp_path / "b" / "pairs" / "wav" / "rec1_eva_luis.wav").exists()


def test_replay_losses(tmp_path):
    write_tensor(tmp_path / "y.bin", [[0.9, 0.2], [0.3, 0.6]])
    write_tensor(tmp_path / "t.bin", [[0.0, 1.0], [0.0, 0.0]])
    write_tensor(tmp_path / "p.bin", [[0.8], [0.4], [0.1]])
    assert run(["losses", "--posteriors", str(tmp_path / "y.bin"), "--labels", str(tmp_path / "t.bin"),
                "--existence", str(tmp_path / "p.bin"), "--alpha", "0.5",
                "--output-root", str(tmp_path / "a")]) == 0
    replays_identically(tmp_path / "a", tmp_path / "b")
    assert (tmp_path / "b" / LOSSES_FILE).exists()


def test_replay_score(tone_corpus, tmp_path):
    ref, hyp = tmp_path / "refs", tmp_path / "hyps"
    ref.mkdir()
    hyp.mkdir()
    (ref / "ref.rttm").write_bytes((tmp_path / "ref.rttm").read_bytes())
    save_annotations([ReferenceAnnotation.from_turns("rec0", [Turn("x", 0.5, 2.0)])], hyp / "rec0.rttm")
    assert run(["score", "--ref", str(ref), "--hyp", str(hyp), "--collar", "0.25",
                "--output-root", str(tmp_path / "a")]) == 0
    replays_identically(tmp_path / "a", tmp_path / "b")
    assert (tmp_path / "b" / SCORE_FILE).read_text().count("\n") == 3


def test_replay_rejects_unknown_command(tmp_path):
    record = tmp_path / RUN_RECORD
    record.write_text(json.dumps({"command": "publish", "inputs": {}, "config": {}, "version": "1.0.0"}))
    assert run(["replay", str(record), "--output-root", str(tmp_path / "x")]) == 2
