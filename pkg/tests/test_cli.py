"""Patient CLI: register, practice, inbox, exit codes."""

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from telespeech import cli
from telespeech.api import create_app
from telespeech.audio import encode_wav
from telespeech.service import TherapyService
from telespeech.synth import silence

from conftest import FakeClock, bearer, make_therapist, register_patient, seed_numerals
from synthcases import NUMERALS, normal_word, numeral_wav


@pytest.fixture
def world(tmp_path, monkeypatch):
    service = TherapyService(tmp_path / "data", clock=FakeClock())
    app = create_app(service)
    api = TestClient(app)

    def fake_make_client(server_url, token=None):
        c = TestClient(app)
        if token:
            c.headers.update({"Authorization": f"Bearer {token}"})
        return c

    monkeypatch.setattr(cli, "_make_client", fake_make_client)
    therapist = make_therapist(api)
    items = seed_numerals(api, therapist)
    return {"api": api, "therapist": therapist, "items": items, "config": tmp_path / "cli.json"}


def run_cli(world, *args):
    runner = CliRunner()
    return runner.invoke(
        cli.main,
        ["--server", "http://testserver", "--config", str(world["config"]), *args],
        catch_exceptions=False,
    )


def register_args(world):
    return [
        "register",
        "--name", "Asha",
        "--age", "6",
        "--gender", "female",
        "--disorder", "cleft_palate",
        "--therapist", world["therapist"],
        "--stage", "number",
    ]


def test_register_writes_config(world):
    result = run_cli(world, *register_args(world))
    assert result.exit_code == 0, result.output
    config = json.loads(world["config"].read_text())
    assert config["patient_id"].startswith("pat_")
    assert config["patient_id"] in result.output


def test_missing_required_flag_is_usage_error(world):
    result = run_cli(world, "register", "--name", "Asha")
    assert result.exit_code == 2


def test_unreachable_server_exits_3(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        cli.main,
        [
            "--server", "http://127.0.0.1:1",
            "--config", str(tmp_path / "c.json"),
            "register", "--name", "A", "--age", "5",
            "--disorder", "cleft_palate", "--therapist", "ther_x",
        ],
        catch_exceptions=False,
    )
    assert result.exit_code == 3
    assert "network error" in result.output


def test_practice_reference_copy_advances(world, tmp_path):
    run_cli(world, *register_args(world))
    wav = tmp_path / "one.wav"
    wav.write_bytes(numeral_wav(0))
    result = run_cli(world, "practice", str(wav))
    assert result.exit_code == 0, result.output
    assert "advance" in result.output
    assert 'prompt: "one"' in result.output


def test_practice_audio_flag_form(world, tmp_path):
    run_cli(world, *register_args(world))
    wav = tmp_path / "one.wav"
    wav.write_bytes(numeral_wav(0))
    result = run_cli(world, "practice", "--audio", str(wav))
    assert result.exit_code == 0, result.output
    assert "advance" in result.output


def test_practice_without_recording_is_usage_error(world):
    run_cli(world, *register_args(world))
    result = run_cli(world, "practice")
    assert result.exit_code == 2


def test_practice_silence_exits_11(world, tmp_path):
    run_cli(world, *register_args(world))
    wav = tmp_path / "quiet.wav"
    wav.write_bytes(encode_wav(silence(0.5)))
    result = run_cli(world, "practice", str(wav))
    assert result.exit_code == 11
    assert "attempt not counted" in result.output


def test_practice_repeat_exits_10_with_worst_features(world, tmp_path):
    run_cli(world, *register_args(world))
    config = json.loads(world["config"].read_text())
    patient = world["api"].get(
        f"/patients/{config['patient_id']}", headers=bearer(config["patient_id"])
    ).json()
    world["api"].put(
        f"/programs/{patient['program_id']}",
        json={"op": "set_threshold", "value": 0.99},
        headers=bearer(world["therapist"]),
    )
    wav = tmp_path / "near.wav"
    wav.write_bytes(encode_wav(normal_word(0, duration_s=0.5)))
    result = run_cli(world, "practice", str(wav))
    assert result.exit_code == 10, result.output
    assert "repeat: worst=" in result.output


def test_inbox_voice_note_then_empty(world, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run_cli(world, *register_args(world))
    config = json.loads(world["config"].read_text())
    pid = config["patient_id"]
    note = encode_wav(normal_word(2))
    up = world["api"].post(
        "/audio", files={"file": ("n.wav", note, "audio/wav")}, headers=bearer(world["therapist"])
    )
    world["api"].post(
        f"/patients/{pid}/messages",
        json={"kind": "voice", "audio_id": up.json()["audio_id"]},
        headers=bearer(world["therapist"]),
    )
    world["api"].post(
        f"/patients/{pid}/messages",
        json={"kind": "text", "text": "slow and steady"},
        headers=bearer(world["therapist"]),
    )

    result = run_cli(world, "inbox", "--save-dir", str(tmp_path / "notes"))
    assert result.exit_code == 0, result.output
    assert "slow and steady" in result.output
    saved = list((tmp_path / "notes").glob("voice_*.wav"))
    assert len(saved) == 1
    assert saved[0].read_bytes() == note

    again = run_cli(world, "inbox")
    assert again.exit_code == 0
    assert "no messages" in again.output


def test_scripted_session_reproducible(tmp_path, monkeypatch):
    def scripted(run_dir):
        service = TherapyService(run_dir / "data", clock=FakeClock())
        app = create_app(service)
        api = TestClient(app)

        def fake_make_client(server_url, token=None):
            c = TestClient(app)
            if token:
                c.headers.update({"Authorization": f"Bearer {token}"})
            return c

        monkeypatch.setattr(cli, "_make_client", fake_make_client)
        therapist = make_therapist(api)
        seed_numerals(api, therapist)
        world = {"therapist": therapist, "config": run_dir / "cli.json"}
        run_cli(world, *register_args(world))
        config = json.loads(world["config"].read_text())

        exit_codes = []
        for i in range(3):
            wav = run_dir / f"a{i}.wav"
            wav.write_bytes(numeral_wav(i) if i != 1 else encode_wav(silence(0.3)))
            exit_codes.append(run_cli(world, "practice", str(wav)).exit_code)
        inbox_code = run_cli(world, "inbox").exit_code
        pid = config["patient_id"]
        progress = api.get(f"/patients/{pid}", headers=bearer(pid)).json()["progress"]
        return exit_codes, inbox_code, progress

    first = scripted(tmp_path / "run1")
    second = scripted(tmp_path / "run2")
    assert first == second
    assert first[0][1] == 11  # the silence upload never counts
