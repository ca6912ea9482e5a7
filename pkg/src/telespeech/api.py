"""HTTP/JSON wire layer over :class:`~telespeech.service.TherapyService`."""

from __future__ import annotations

import argparse
import json
import logging
import time
from typing import Literal

from fastapi import Depends, FastAPI, File, Form, Header, Request, Response, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .config import ServerConfig
from .errors import (
    AudioDecodeError,
    AuthorizationError,
    ConfigError,
    EmptyAudioError,
    EmptySpeechError,
    InsufficientDictionaryError,
    InvalidEditError,
    NotAuthenticatedError,
    StaleAttemptError,
    TelespeechError,
    TooShortError,
    UnknownResourceError,
    UnsupportedFormatError,
)
from .service import TherapyService

access_log = logging.getLogger("telespeech.api.access")

_ERROR_STATUS: list[tuple[type, int, str]] = [
    (NotAuthenticatedError, 401, "not_authenticated"),
    (AuthorizationError, 403, "forbidden"),
    (UnknownResourceError, 404, "not_found"),
    (StaleAttemptError, 409, "stale_item"),
    (EmptyAudioError, 415, "empty_audio"),
    (UnsupportedFormatError, 415, "unsupported_format"),
    (AudioDecodeError, 415, "undecodable_audio"),
    (EmptySpeechError, 422, "empty_speech"),
    (TooShortError, 422, "too_short"),
    (InsufficientDictionaryError, 422, "insufficient_dictionary"),
    (InvalidEditError, 422, "invalid_edit"),
    (ConfigError, 422, "bad_config"),
]


class SurgeryInfo(BaseModel):
    nature: str
    date: str


class PatientCreate(BaseModel):
    name: str = Field(min_length=1)
    age: int = Field(gt=0)
    gender: str = "unspecified"
    medical_history: str = ""
    disorder: str = Field(min_length=1)
    therapist_id: str
    surgery: SurgeryInfo | None = None
    template: list[str] | None = None
    language: str = "en"


class TherapistCreate(BaseModel):
    name: str = Field(min_length=1)


class WordItemCreate(BaseModel):
    text: str = Field(min_length=1)
    category: str
    target_sounds: list[str] = []
    disorder_tags: list[str] = []
    reference_audio_id: str
    prompt_image_id: str | None = None
    pass_threshold_override: float | None = None
    id: str | None = None


class MessageCreate(BaseModel):
    kind: Literal["text", "voice"]
    text: str | None = None
    audio_id: str | None = None


class ProgramEdit(BaseModel):
    op: Literal["reorder", "insert", "remove", "set_threshold", "set_max_repeats"]
    item_ids: list[str] | None = None
    item: dict | None = None
    position: int | None = None
    item_id: str | None = None
    value: float | None = None


def _bearer(authorization: str | None = Header(default=None)) -> str | None:
    if authorization and authorization.lower().startswith("bearer "):
        return authorization[7:].strip()
    return None


def create_app(service: TherapyService, console_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="telespeech", version="0.1.0", description="Remote speech-therapy practice API")
    app.state.service = service

    if console_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    @app.exception_handler(TelespeechError)
    async def _domain_error(_request: Request, exc: TelespeechError):
        for klass, status, code in _ERROR_STATUS:
            if isinstance(exc, klass):
                body = {"code": code, "detail": str(exc)}
                if isinstance(exc, InsufficientDictionaryError):
                    body["stage"] = exc.stage
                return JSONResponse(status_code=status, content=body)
        return JSONResponse(status_code=500, content={"code": "internal", "detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(_request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"code": "invalid_value", "detail": str(exc)})

    if service.config.log_requests:

        @app.middleware("http")
        async def _access_log(request: Request, call_next):
            started = time.monotonic()
            response = await call_next(request)
            access_log.info(
                json.dumps(
                    {
                        "method": request.method,
                        "path": request.url.path,
                        "status": response.status_code,
                        "ms": round((time.monotonic() - started) * 1000, 2),
                    }
                )
            )
            return response

    # ---- registration ----

    @app.post("/therapists", status_code=201)
    def create_therapist(body: TherapistCreate):
        return service.register_therapist(body.name)

    @app.post("/patients", status_code=201)
    def create_patient(body: PatientCreate):
        return service.register_patient(body.model_dump())

    @app.get("/patients/{patient_id}")
    def get_patient(patient_id: str, actor: str | None = Depends(_bearer)):
        return service.get_patient(patient_id, actor)

    # ---- practice flow ----

    @app.get("/patients/{patient_id}/next-prompt")
    def next_prompt(patient_id: str, actor: str | None = Depends(_bearer)):
        return service.next_prompt(patient_id, actor)

    @app.post("/patients/{patient_id}/utterances")
    def upload_utterance(
        patient_id: str,
        item_id: str = Form(...),
        file: UploadFile = File(...),
        actor: str | None = Depends(_bearer),
    ):
        wav_bytes = file.file.read()
        return service.submit_utterance(patient_id, item_id, wav_bytes, actor)

    # ---- dashboards ----

    @app.get("/therapists/{therapist_id}/patients")
    def therapist_patients(therapist_id: str, actor: str | None = Depends(_bearer)):
        return service.patient_summaries(therapist_id, actor)

    @app.get("/patients/{patient_id}/sessions")
    def patient_sessions(patient_id: str, actor: str | None = Depends(_bearer)):
        return service.list_sessions(patient_id, actor)

    @app.get("/sessions/{session_id}")
    def session_detail(session_id: str, actor: str | None = Depends(_bearer)):
        return service.session_detail(session_id, actor)

    @app.get("/utterances/{utterance_id}/features")
    def utterance_features(utterance_id: str, actor: str | None = Depends(_bearer)):
        return service.utterance_features(utterance_id, actor)

    @app.get("/utterances/{utterance_id}/spectrogram")
    def utterance_spectrogram(
        utterance_id: str, format: str = "json", actor: str | None = Depends(_bearer)
    ):
        matrix = service.utterance_spectrogram(utterance_id, actor)
        if format == "csv":
            lines = [",".join(f"{v:.3f}" for v in row) for row in matrix["db"]]
            return PlainTextResponse("\n".join(lines) + "\n", media_type="text/csv")
        return matrix

    # ---- audio ----

    @app.post("/audio", status_code=201)
    def upload_audio(file: UploadFile = File(...), actor: str | None = Depends(_bearer)):
        return {"audio_id": service.store_audio(file.file.read(), actor)}

    @app.get("/audio/{audio_id}")
    def download_audio(audio_id: str, actor: str | None = Depends(_bearer)):
        return Response(content=service.get_audio(audio_id, actor), media_type="audio/wav")

    # ---- dictionary ----

    @app.post("/dictionary/items", status_code=201)
    def add_dictionary_item(body: WordItemCreate, actor: str | None = Depends(_bearer)):
        return service.add_word_item(body.model_dump(), actor)

    @app.get("/dictionary")
    def list_dictionary(actor: str | None = Depends(_bearer)):
        return service.list_dictionary(actor)

    # ---- programs ----

    @app.get("/programs/{program_id}")
    def get_program(program_id: str, actor: str | None = Depends(_bearer)):
        return service.get_program(program_id, actor)

    @app.put("/programs/{program_id}")
    def edit_program(program_id: str, body: ProgramEdit, actor: str | None = Depends(_bearer)):
        return service.edit_program(program_id, body.model_dump(exclude_none=True), actor)

    # ---- messaging ----

    @app.post("/patients/{patient_id}/messages", status_code=201)
    def post_message(patient_id: str, body: MessageCreate, actor: str | None = Depends(_bearer)):
        return service.post_message(patient_id, body.model_dump(), actor)

    @app.get("/patients/{patient_id}/messages")
    def get_messages(
        patient_id: str, undelivered: bool = False, actor: str | None = Depends(_bearer)
    ):
        return service.fetch_messages(patient_id, actor, undelivered_only=undelivered)

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="telespeech-server")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    parser.add_argument("--data-dir")
    parser.add_argument("--console-dir", help="serve the built therapist console from this directory at /console")
    parser.add_argument(
        "--seed-dictionary",
        help="JSON seed file (array of word items; reference_audio_path entries are imported)",
    )
    parser.add_argument(
        "--dump-openapi", action="store_true", help="print the OpenAPI schema and exit"
    )
    args = parser.parse_args(argv)

    config = ServerConfig.load(args.config)
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    if args.data_dir:
        config.data_dir = args.data_dir

    service = TherapyService(config.data_dir, server_config=config)
    if args.seed_dictionary:
        from pathlib import Path

        seed_path = Path(args.seed_dictionary)
        service.seed_dictionary(json.loads(seed_path.read_text()), base_dir=seed_path.parent)
    app = create_app(service, console_dir=args.console_dir)
    if args.dump_openapi:
        print(json.dumps(app.openapi(), indent=2, sort_keys=True))
        return 0

    import uvicorn

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
