"""Application core tying storage, analysis, comparison, and sequencing together.

The HTTP layer (`api.py`) is a thin shell over this class, so tests and the
acceptance suite can drive the full behavior either through plain method
calls or through the wire API. Per-patient mutations are serialized with a
lock; analysis itself is pure and runs concurrently across patients.
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import defaultdict
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from . import program as prog
from .analysis import AnalysisConfig, DEFAULT_CONFIG, UtteranceFeatures, extract_features
from .audio import decode_wav, resample
from .comparison import ComparisonProfile, DEFAULT_PROFILE, compare_utterances, make_feedback
from .config import ServerConfig
from .errors import (
    AuthorizationError,
    NotAuthenticatedError,
    StaleAttemptError,
    UnknownResourceError,
)
from .storage import AudioStore, DocumentStore

GENDERS = ("female", "male", "other", "unspecified")
SESSION_MODE_OFFLINE = "offline_auto"


def _new_id(prefix: str) -> str:
    return f"{prefix}_{uuid.uuid4().hex[:12]}"


def _iso(epoch: float) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).isoformat(timespec="seconds")


class TherapyService:
    def __init__(
        self,
        data_dir: str | Path,
        *,
        server_config: ServerConfig | None = None,
        analysis_config: AnalysisConfig = DEFAULT_CONFIG,
        profile: ComparisonProfile | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.config = server_config or ServerConfig(data_dir=str(data_dir))
        root = Path(data_dir)
        self.docs = DocumentStore(root / "docs")
        self.audio = AudioStore(root / "audio")
        self.analysis_config = analysis_config
        self.clock = clock
        self._base_profile = profile or replace(
            DEFAULT_PROFILE, pass_threshold=self.config.default_pass_threshold
        )
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()

    # ---- identity & authorization -------------------------------------------------

    def _lock(self, patient_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks[patient_id]

    def resolve_actor(self, actor_id: str | None) -> tuple[str, dict]:
        if not actor_id:
            raise NotAuthenticatedError("missing bearer identity")
        patient = self.docs.get("patients", actor_id) if actor_id.startswith("pat_") else None
        if patient:
            return "patient", patient
        therapist = self.docs.get("therapists", actor_id) if actor_id.startswith("ther_") else None
        if therapist:
            return "therapist", therapist
        raise NotAuthenticatedError(f"unknown identity '{actor_id}'")

    def _require_patient_access(self, actor_id: str, patient_id: str) -> tuple[str, dict]:
        role, actor = self.resolve_actor(actor_id)
        patient = self._get_or_404("patients", patient_id, "patient")
        if role == "patient" and actor["id"] == patient_id:
            return role, patient
        if role == "therapist" and patient["therapist_id"] == actor["id"]:
            return role, patient
        raise AuthorizationError(f"{actor['id']} may not access patient {patient_id}")

    def _get_or_404(self, collection: str, doc_id: str, what: str) -> dict:
        doc = self.docs.get(collection, doc_id)
        if doc is None:
            raise UnknownResourceError(f"{what} '{doc_id}' not found")
        return doc

    # ---- registration --------------------------------------------------------------

    def register_therapist(self, name: str) -> dict:
        doc = {"id": _new_id("ther"), "name": name, "registered_at": _iso(self.clock())}
        self.docs.put("therapists", doc["id"], doc)
        return doc

    def register_patient(self, payload: dict) -> dict:
        """Create the patient and immediately build their therapy program."""
        therapist = self._get_or_404("therapists", payload["therapist_id"], "therapist")
        dictionary = [prog.WordItem.from_dict(d) for d in self._dictionary_docs()]
        patient_id = _new_id("pat")
        program = prog.build_program(
            payload["disorder"],
            dictionary,
            payload.get("template"),
            program_id=_new_id("prog"),
            patient_id=patient_id,
            created_by=therapist["id"],
            pass_threshold=self.config.default_pass_threshold,
            max_repeats=self.config.default_max_repeats,
            language=payload.get("language", "en"),
        )
        state = prog.ProgramState(program_id=program.id)
        patient = {
            "id": patient_id,
            "name": payload["name"],
            "age": payload["age"],
            "gender": payload.get("gender", "unspecified"),
            "medical_history": payload.get("medical_history", ""),
            "disorder": payload["disorder"],
            "surgery": payload.get("surgery"),
            "therapist_id": therapist["id"],
            "registered_at": _iso(self.clock()),
            "program_id": program.id,
        }
        self.docs.put("programs", program.id, program.to_dict())
        self.docs.put("program_states", program.id, state.to_dict())
        self.docs.put("patients", patient_id, patient)
        return patient

    # ---- dictionary & reference audio ----------------------------------------------

    def store_audio(self, data: bytes, actor_id: str) -> str:
        role, actor = self.resolve_actor(actor_id)
        audio_id = self.audio.put(data)
        self._grant_audio(audio_id, [actor["id"]])
        return audio_id

    def _grant_audio(self, audio_id: str, actor_ids: list[str], reference: bool = False) -> None:
        acl = self.docs.get("audio_acl", audio_id) or {"actors": [], "reference": False}
        acl["actors"] = sorted(set(acl["actors"]) | set(actor_ids))
        acl["reference"] = acl["reference"] or reference
        self.docs.put("audio_acl", audio_id, acl)

    def get_audio(self, audio_id: str, actor_id: str) -> bytes:
        role, actor = self.resolve_actor(actor_id)
        data = self.audio.get(audio_id)
        if data is None:
            raise UnknownResourceError(f"audio '{audio_id}' not found")
        acl = self.docs.get("audio_acl", audio_id) or {"actors": [], "reference": False}
        if acl["reference"] or actor["id"] in acl["actors"]:
            return data
        raise AuthorizationError(f"{actor['id']} may not fetch audio {audio_id}")

    def add_word_item(self, payload: dict, actor_id: str) -> dict:
        role, _ = self.resolve_actor(actor_id)
        if role != "therapist":
            raise AuthorizationError("only therapists may edit the dictionary")
        item = prog.WordItem.from_dict({**payload, "id": payload.get("id") or _new_id("item")})
        if not self.audio.exists(item.reference_audio_id):
            raise UnknownResourceError(f"reference audio '{item.reference_audio_id}' not found")
        self._grant_audio(item.reference_audio_id, [], reference=True)
        with self._locks_guard:
            doc = item.to_dict()
            doc["seq"] = len(self.docs.list_ids("dictionary"))  # preserves entry order
            self.docs.put("dictionary", item.id, doc)
        return doc

    def seed_dictionary(self, entries: list[dict], base_dir: str | Path | None = None) -> list[dict]:
        """Load WordItems from a seed document (array of WordItem fields).

        An entry may carry ``reference_audio_path`` (WAV file, relative to
        ``base_dir``) instead of ``reference_audio_id``; the file is imported
        into the audio store. Entries whose id already exists are skipped, so
        re-seeding at startup is idempotent.
        """
        out = []
        for entry in entries:
            doc = dict(entry)
            wav_path = doc.pop("reference_audio_path", None)
            if wav_path:
                data = (Path(base_dir) / wav_path if base_dir else Path(wav_path)).read_bytes()
                doc["reference_audio_id"] = self.audio.put(data)
            item_id = doc.get("id")
            if item_id:
                existing = self.docs.get("dictionary", item_id)
                if existing is not None:
                    out.append(existing)
                    continue
            item = prog.WordItem.from_dict({**doc, "id": item_id or _new_id("item")})
            if not self.audio.exists(item.reference_audio_id):
                raise UnknownResourceError(f"reference audio '{item.reference_audio_id}' not found")
            self._grant_audio(item.reference_audio_id, [], reference=True)
            with self._locks_guard:
                stored = item.to_dict()
                stored["seq"] = len(self.docs.list_ids("dictionary"))
                self.docs.put("dictionary", item.id, stored)
            out.append(stored)
        return out

    def _dictionary_docs(self) -> list[dict]:
        docs = self.docs.all("dictionary")
        docs.sort(key=lambda d: d.get("seq", 0))
        return docs

    def list_dictionary(self, actor_id: str) -> list[dict]:
        self.resolve_actor(actor_id)
        return self._dictionary_docs()

    # ---- program access ------------------------------------------------------------

    def _load_program(self, program_id: str) -> tuple[prog.TherapyProgram, prog.ProgramState]:
        program = prog.TherapyProgram.from_dict(self._get_or_404("programs", program_id, "program"))
        state = prog.ProgramState.from_dict(self._get_or_404("program_states", program_id, "program state"))
        return program, state

    def get_program(self, program_id: str, actor_id: str) -> dict:
        program, state = self._load_program(program_id)
        self._require_patient_access(actor_id, program.patient_id)
        return {"program": program.to_dict(), "state": state.to_dict()}

    def edit_program(self, program_id: str, edit: dict, actor_id: str) -> dict:
        role, actor = self.resolve_actor(actor_id)
        if role != "therapist":
            raise AuthorizationError("only therapists may edit programs")
        program, state = self._load_program(program_id)
        patient = self._get_or_404("patients", program.patient_id, "patient")
        with self._lock(program.patient_id):
            program, state = self._load_program(program_id)
            updated, new_state = prog.apply_override(
                program, state, edit, actor["id"], patient["therapist_id"], _iso(self.clock())
            )
            self.docs.put("programs", program_id, updated.to_dict())
            self.docs.put("program_states", program_id, new_state.to_dict())
        return {"program": updated.to_dict(), "state": new_state.to_dict()}

    # ---- sessions ------------------------------------------------------------------

    def _touch_session(self, patient_id: str) -> dict:
        """Return the active session, opening or rolling one as needed."""
        now = self.clock()
        idle_limit = self.config.session_idle_minutes * 60.0
        pointer = self.docs.get("session_pointers", patient_id)
        if pointer:
            session = self.docs.get("sessions", pointer["session_id"])
            if session and now - session["last_epoch"] <= idle_limit:
                session["last_epoch"] = now
                self.docs.put("sessions", session["id"], session)
                return session
            if session:
                self._close_session(session)
        session = {
            "id": _new_id("ses"),
            "patient_id": patient_id,
            "mode": SESSION_MODE_OFFLINE,
            "started_at": _iso(now),
            "started_epoch": now,
            "last_epoch": now,
            "ended_at": None,
            "entries": [],
            "total_practice_seconds": 0.0,
        }
        self.docs.put("sessions", session["id"], session)
        self.docs.put("session_pointers", patient_id, {"session_id": session["id"]})
        return session

    def _close_session(self, session: dict) -> None:
        session["ended_at"] = _iso(session["last_epoch"])
        session["total_practice_seconds"] = max(0.0, session["last_epoch"] - session["started_epoch"])
        self.docs.put("sessions", session["id"], session)
        self.docs.delete("session_pointers", session["patient_id"])

    # ---- prompting and uploads -----------------------------------------------------

    def next_prompt(self, patient_id: str, actor_id: str) -> dict:
        self._require_patient_access(actor_id, patient_id)
        patient = self._get_or_404("patients", patient_id, "patient")
        with self._lock(patient_id):
            program, state = self._load_program(patient["program_id"])
            item = prog.next_prompt(state, program)
            if item is None:
                return {"completed": True, "program_id": program.id, "progress": 1.0}
            session = self._touch_session(patient_id)
            return {
                "completed": False,
                "item": item.to_dict(),
                "reference_audio_url": f"/audio/{item.reference_audio_id}",
                "prompt_image_id": item.prompt_image_id,
                "session_hint": session["id"],
                "attempts_on_current": state.attempts_on_current,
                "progress": state.cursor / len(program.items),
                "program_id": program.id,
            }

    def _features_for_audio(self, audio_id: str) -> UtteranceFeatures:
        cache_id = f"{audio_id}-{self.analysis_config.fingerprint()}"
        cached = self.docs.get("feature_cache", cache_id)
        if cached is not None:
            return UtteranceFeatures.from_dict(cached)
        data = self.audio.get(audio_id)
        if data is None:
            raise UnknownResourceError(f"audio '{audio_id}' not found")
        buf = resample(decode_wav(data), self.analysis_config.sample_rate)
        features = extract_features(buf, self.analysis_config)
        self.docs.put("feature_cache", cache_id, features.to_dict())
        return features

    def submit_utterance(self, patient_id: str, item_id: str, wav_bytes: bytes, actor_id: str) -> dict:
        """Decode, analyze, compare, score, and log one practice attempt."""
        role, patient = self._require_patient_access(actor_id, patient_id)
        if role != "patient":
            raise AuthorizationError("only the patient may submit utterances")
        with self._lock(patient_id):
            program, state = self._load_program(patient["program_id"])
            current = prog.next_prompt(state, program)
            if current is None:
                raise StaleAttemptError("program already completed")
            if current.id != item_id:
                raise StaleAttemptError(f"current item is '{current.id}', not '{item_id}'")

            # analysis failures (empty speech, undecodable) must not burn an attempt
            buf = resample(decode_wav(wav_bytes), self.analysis_config.sample_rate)
            features = extract_features(buf, self.analysis_config)
            reference = self._features_for_audio(current.reference_audio_id)
            profile = replace(
                self._base_profile, pass_threshold=program.effective_threshold(current)
            )
            report = compare_utterances(features, reference, profile)
            feedback = make_feedback(report, current.reference_audio_id)

            now = self.clock()
            utterance_id = _new_id("utt")
            new_state, decision = prog.record_attempt(
                state, program, item_id, report.closeness, utterance_id, _iso(now)
            )

            audio_id = self.audio.put(wav_bytes)
            self._grant_audio(audio_id, [patient_id, patient["therapist_id"]])
            self.docs.put("features", utterance_id, features.to_dict())
            self.docs.put("reports", utterance_id, report.to_dict())
            self.docs.put("feedback", utterance_id, feedback.to_dict())
            self.docs.put(
                "utterances",
                utterance_id,
                {
                    "id": utterance_id,
                    "patient_id": patient_id,
                    "item_id": item_id,
                    "audio_ref": audio_id,
                    "features_ref": utterance_id,
                    "report_ref": utterance_id,
                    "created_at": _iso(now),
                },
            )
            self.docs.put("program_states", program.id, new_state.to_dict())
            session = self._touch_session(patient_id)
            session["entries"].append(
                {
                    "item_id": item_id,
                    "utterance_id": utterance_id,
                    "closeness": report.closeness,
                    "decision": decision,
                    "feedback_id": utterance_id,
                    "at": _iso(now),
                }
            )
            self.docs.put("sessions", session["id"], session)

            return {
                "utterance_id": utterance_id,
                "audio_id": audio_id,
                "decision": decision,
                "report": report.to_dict(),
                "feedback": feedback.to_dict(),
                "session_id": session["id"],
                "program_status": new_state.status,
                "progress": new_state.cursor / len(program.items),
            }

    # ---- review & dashboards -------------------------------------------------------

    def get_patient(self, patient_id: str, actor_id: str) -> dict:
        self._require_patient_access(actor_id, patient_id)
        patient = self._get_or_404("patients", patient_id, "patient")
        program, state = self._load_program(patient["program_id"])
        return {
            **patient,
            "progress": state.cursor / len(program.items),
            "program_version": program.version,
            "program_status": state.status,
            "flagged_items": state.flagged_item_ids(),
        }

    def patient_summaries(self, therapist_id: str, actor_id: str) -> list[dict]:
        role, actor = self.resolve_actor(actor_id)
        therapist = self._get_or_404("therapists", therapist_id, "therapist")
        if role != "therapist" or actor["id"] != therapist_id:
            raise AuthorizationError("roster is visible only to the therapist who owns it")
        rows = []
        for patient in self.docs.all("patients"):
            if patient["therapist_id"] != therapist_id:
                continue
            program, state = self._load_program(patient["program_id"])
            sessions = self._sessions_for(patient["id"])
            last = sessions[-1] if sessions else None
            rows.append(
                {
                    "id": patient["id"],
                    "name": patient["name"],
                    "age": patient["age"],
                    "disorder": patient["disorder"],
                    "progress": state.cursor / len(program.items),
                    "status": state.status,
                    "flagged_items": state.flagged_item_ids(),
                    "program_id": program.id,
                    "last_session_at": last["started_at"] if last else None,
                    "total_practice_seconds": sum(s["total_practice_seconds"] or 0.0 for s in sessions)
                    + sum(
                        (s["last_epoch"] - s["started_epoch"])
                        for s in sessions
                        if s["ended_at"] is None
                    ),
                }
            )
        rows.sort(key=lambda r: r["last_session_at"] or "", reverse=True)
        return rows

    def _sessions_for(self, patient_id: str) -> list[dict]:
        sessions = [s for s in self.docs.all("sessions") if s["patient_id"] == patient_id]
        sessions.sort(key=lambda s: s["started_epoch"])
        return sessions

    def list_sessions(self, patient_id: str, actor_id: str) -> list[dict]:
        self._require_patient_access(actor_id, patient_id)
        out = []
        for s in self._sessions_for(patient_id):
            out.append(
                {
                    "id": s["id"],
                    "patient_id": patient_id,
                    "mode": s["mode"],
                    "started_at": s["started_at"],
                    "ended_at": s["ended_at"],
                    "n_entries": len(s["entries"]),
                    "total_practice_seconds": s["total_practice_seconds"]
                    if s["ended_at"] is not None
                    else s["last_epoch"] - s["started_epoch"],
                }
            )
        return out

    def session_detail(self, session_id: str, actor_id: str) -> dict:
        session = self._get_or_404("sessions", session_id, "session")
        self._require_patient_access(actor_id, session["patient_id"])
        items = {d["id"]: d for d in self.docs.all("dictionary")}
        entries = []
        for entry in session["entries"]:
            utt = self.docs.get("utterances", entry["utterance_id"]) or {}
            item = items.get(entry["item_id"], {})
            entries.append(
                {
                    **entry,
                    "item_text": item.get("text"),
                    "audio_url": f"/audio/{utt.get('audio_ref')}" if utt else None,
                    "features_url": f"/utterances/{entry['utterance_id']}/features",
                    "spectrogram_url": f"/utterances/{entry['utterance_id']}/spectrogram",
                    "report": self.docs.get("reports", entry["utterance_id"]),
                    "feedback": self.docs.get("feedback", entry["utterance_id"]),
                }
            )
        return {
            "id": session["id"],
            "patient_id": session["patient_id"],
            "mode": session["mode"],
            "started_at": session["started_at"],
            "ended_at": session["ended_at"],
            "total_practice_seconds": session["total_practice_seconds"]
            if session["ended_at"] is not None
            else session["last_epoch"] - session["started_epoch"],
            "entries": entries,
        }

    def utterance_features(self, utterance_id: str, actor_id: str) -> dict:
        utt = self._get_or_404("utterances", utterance_id, "utterance")
        self._require_patient_access(actor_id, utt["patient_id"])
        return self._get_or_404("features", utterance_id, "features")

    def utterance_spectrogram(self, utterance_id: str, actor_id: str) -> dict:
        features = self.utterance_features(utterance_id, actor_id)
        return features["spectrogram"]

    # ---- messaging -----------------------------------------------------------------

    def post_message(self, patient_id: str, payload: dict, actor_id: str) -> dict:
        role, actor = self._require_patient_access(actor_id, patient_id)
        kind = payload.get("kind")
        if kind not in ("text", "voice"):
            raise ValueError(f"message kind must be text or voice, got {kind!r}")
        msg = {
            "id": _new_id("msg"),
            "from": role,
            "patient_id": patient_id,
            "kind": kind,
            "created_at": _iso(self.clock()),
            "created_epoch": self.clock(),
            "delivered": False,
            "delivered_at": None,
        }
        if kind == "text":
            text = payload.get("text") or ""
            if not text:
                raise ValueError("text message needs a nonempty text field")
            msg["text"] = text
            msg["payload_ref"] = None
        else:
            audio_id = payload.get("audio_id") or ""
            if not self.audio.exists(audio_id):
                raise UnknownResourceError(f"audio '{audio_id}' not found")
            patient = self._get_or_404("patients", patient_id, "patient")
            self._grant_audio(audio_id, [patient_id, patient["therapist_id"]])
            msg["payload_ref"] = audio_id
            msg["text"] = None
        self.docs.put("messages", msg["id"], msg)
        return msg

    def fetch_messages(self, patient_id: str, actor_id: str, undelivered_only: bool = False) -> list[dict]:
        """Thread for this patient; undelivered fetches mark delivery atomically."""
        role, _ = self._require_patient_access(actor_id, patient_id)
        msgs = [m for m in self.docs.all("messages") if m["patient_id"] == patient_id]
        msgs.sort(key=lambda m: (m["created_epoch"], m["id"]))
        if not undelivered_only:
            return msgs
        inbox = [m for m in msgs if m["from"] != role and not m["delivered"]]
        now = _iso(self.clock())
        for m in inbox:
            m["delivered"] = True
            m["delivered_at"] = now
            self.docs.put("messages", m["id"], m)
        return inbox
