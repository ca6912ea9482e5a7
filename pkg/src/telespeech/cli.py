"""Patient command-line client: register, practice prompted words, read the inbox.

Stands in for the mobile handset: audio comes from WAV files on disk, and
graph feedback is reduced to terminal sparklines.

Exit codes: 0 ok/advance, 2 usage error, 3 server unreachable,
10 repeat verdict, 11 empty-speech upload (attempt not counted), 1 other failure.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_NETWORK = 3
EXIT_REPEAT = 10
EXIT_EMPTY_SPEECH = 11

SPARK_CHARS = "▁▂▃▄▅▆▇█"


def default_config_path() -> Path:
    base = os.environ.get("XDG_CONFIG_HOME", os.path.join(os.path.expanduser("~"), ".config"))
    return Path(base) / "telespeech" / "config.json"


def load_config(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        return {}


def save_config(path: Path, config: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config, indent=2) + "\n")


def _make_client(server_url: str, token: str | None = None) -> httpx.Client:
    headers = {"Authorization": f"Bearer {token}"} if token else {}
    return httpx.Client(base_url=server_url, headers=headers, timeout=30.0)


def sparkline(values: list[float]) -> str:
    if not values:
        return ""
    lo, hi = min(values), max(values)
    span = hi - lo
    if span <= 0:
        return SPARK_CHARS[0] * len(values)
    return "".join(SPARK_CHARS[int((v - lo) / span * (len(SPARK_CHARS) - 1))] for v in values)


def _die_network(exc: Exception) -> None:
    click.echo(f"network error: {exc}", err=True)
    sys.exit(EXIT_NETWORK)


def _error_detail(response: httpx.Response) -> str:
    try:
        body = response.json()
    except ValueError:
        return response.text
    if isinstance(body, dict):
        if "detail" in body and isinstance(body["detail"], str):
            return body["detail"]
        if "detail" in body:  # pydantic validation: list of field errors
            fields = ", ".join(str(e.get("loc", ["?"])[-1]) for e in body["detail"])
            return f"invalid fields: {fields}"
    return response.text


@click.group()
@click.option("--server", help="server base URL (overrides the config file)")
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    default=None,
    help="config file location",
)
@click.pass_context
def main(ctx, server, config_path):
    """Remote speech-therapy practice client."""
    path = config_path or default_config_path()
    config = load_config(path)
    if server:
        config["server_url"] = server
    ctx.obj = {"config": config, "path": path}


@main.command()
@click.option("--name", required=True)
@click.option("--age", required=True, type=int)
@click.option("--gender", default="unspecified")
@click.option("--history", default="", help="free-text medical history")
@click.option("--disorder", required=True, help="articulation disorder tag, e.g. cleft_palate")
@click.option("--therapist", "therapist_id", required=True, help="assigned therapist id")
@click.option("--stage", "stages", multiple=True, help="program stage override (repeatable)")
@click.pass_obj
def register(obj, name, age, gender, history, disorder, therapist_id, stages):
    """Register this patient and store the returned id locally."""
    config, path = obj["config"], obj["path"]
    server = config.get("server_url")
    if not server:
        raise click.UsageError("no server configured; pass --server")
    payload = {
        "name": name,
        "age": age,
        "gender": gender,
        "medical_history": history,
        "disorder": disorder,
        "therapist_id": therapist_id,
    }
    if stages:
        payload["template"] = list(stages)
    try:
        with _make_client(server) as client:
            response = client.post("/patients", json=payload)
    except httpx.TransportError as exc:
        _die_network(exc)
    if response.status_code != 201:
        click.echo(f"registration failed ({response.status_code}): {_error_detail(response)}", err=True)
        sys.exit(1)
    patient = response.json()
    config.update({"server_url": server, "patient_id": patient["id"]})
    save_config(path, config)
    click.echo(f"registered: {patient['id']}")
    click.echo(f"config written to {path}")


def _require_registration(config) -> tuple[str, str]:
    server = config.get("server_url")
    patient_id = config.get("patient_id")
    if not server or not patient_id:
        raise click.UsageError("not registered; run `telespeech register` first")
    return server, patient_id


def _fetch_prompt(client: httpx.Client, patient_id: str) -> dict:
    response = client.get(f"/patients/{patient_id}/next-prompt")
    response.raise_for_status()
    return response.json()


@main.command()
@click.argument("audio_file", required=False, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--audio", "audio_opt", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="recording to submit (alternative to the positional argument)")
@click.pass_obj
def practice(obj, audio_file, audio_opt):
    """Fetch the next prompt and submit AUDIO_FILE as the attempt."""
    audio_file = audio_opt or audio_file
    if audio_file is None:
        raise click.UsageError("provide a recording: `practice FILE` or `practice --audio FILE`")
    config = obj["config"]
    server, patient_id = _require_registration(config)
    try:
        with _make_client(server, patient_id) as client:
            prompt = _fetch_prompt(client, patient_id)
            if prompt.get("completed"):
                click.echo("program completed; nothing to practice")
                sys.exit(EXIT_OK)
            click.echo(f"prompt: \"{prompt['item']['text']}\" [{prompt['item']['category']}]")

            wav_bytes = audio_file.read_bytes()
            response = None
            for attempt in range(2):
                response = client.post(
                    f"/patients/{patient_id}/utterances",
                    data={"item_id": prompt["item"]["id"]},
                    files={"file": (audio_file.name, wav_bytes, "audio/wav")},
                )
                if response.status_code != 409:
                    break
                prompt = _fetch_prompt(client, patient_id)  # stale prompt: refetch once
                if prompt.get("completed"):
                    click.echo("program completed; nothing to practice")
                    sys.exit(EXIT_OK)
    except httpx.TransportError as exc:
        _die_network(exc)

    if response.status_code == 422 and response.json().get("code") == "empty_speech":
        click.echo("empty speech - attempt not counted")
        sys.exit(EXIT_EMPTY_SPEECH)
    if response.status_code != 200:
        click.echo(f"upload failed ({response.status_code}): {_error_detail(response)}", err=True)
        sys.exit(1)

    result = response.json()
    feedback = result["feedback"]
    closeness = result["report"]["closeness"]
    pitch = feedback["graph_payload"].get("pitch_hz")
    if pitch:
        click.echo(f"you:  {sparkline(pitch['patient'])}")
        click.echo(f"ref:  {sparkline(pitch['reference'])}")
    if result["decision"] == "advance":
        click.echo(f"advance (closeness {closeness:.2f})")
        sys.exit(EXIT_OK)
    worst = ",".join(feedback["worst_features"]) or "overall"
    if result["decision"] == "advance_flagged":
        click.echo(f"flagged for your therapist; moving on (closeness {closeness:.2f})")
        sys.exit(EXIT_OK)
    click.echo(f"repeat: worst={worst} (closeness {closeness:.2f})")
    sys.exit(EXIT_REPEAT)


@main.command()
@click.option("--save-dir", type=click.Path(file_okay=False, path_type=Path), default=Path("."))
@click.pass_obj
def inbox(obj, save_dir):
    """List undelivered therapist messages; voice notes are saved as WAV files."""
    config = obj["config"]
    server, patient_id = _require_registration(config)
    try:
        with _make_client(server, patient_id) as client:
            response = client.get(f"/patients/{patient_id}/messages", params={"undelivered": "true"})
            if response.status_code != 200:
                click.echo(f"fetch failed ({response.status_code}): {_error_detail(response)}", err=True)
                sys.exit(1)
            messages = response.json()
            if not messages:
                click.echo("no messages")
                sys.exit(EXIT_OK)
            save_dir.mkdir(parents=True, exist_ok=True)
            for msg in messages:
                if msg["kind"] == "text":
                    click.echo(f"[{msg['created_at']}] {msg['text']}")
                else:
                    audio = client.get(f"/audio/{msg['payload_ref']}")
                    audio.raise_for_status()
                    target = save_dir / f"voice_{msg['id']}.wav"
                    target.write_bytes(audio.content)
                    click.echo(f"[{msg['created_at']}] voice note saved to {target}")
    except httpx.TransportError as exc:
        _die_network(exc)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
