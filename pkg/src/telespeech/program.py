"""Prompt dictionary, therapy programs, and the sequencing state machine.

The server decides which word comes next: a passing closeness advances the
cursor, a failing one repeats the item up to ``max_repeats`` attempts, after
which the item is flagged for the therapist and the program moves on.
Programs are versioned; edits never rewrite history.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import AuthorizationError, InsufficientDictionaryError, InvalidEditError, StaleAttemptError

CATEGORIES = ("sustained_sound", "common_word", "number", "phrase_story_rhyme")
DEFAULT_TEMPLATE = list(CATEGORIES)
DEFAULT_PASS_THRESHOLD = 0.6
DEFAULT_MAX_REPEATS = 3

ADVANCE = "advance"
REPEAT = "repeat"
ADVANCE_FLAGGED = "advance_flagged"

STATUS_ACTIVE = "active"
STATUS_COMPLETED = "completed"


@dataclass(frozen=True)
class WordItem:
    id: str
    text: str
    category: str
    target_sounds: tuple[str, ...] = ()
    disorder_tags: tuple[str, ...] = ()
    reference_audio_id: str = ""
    prompt_image_id: str | None = None
    pass_threshold_override: float | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("item text must be nonempty")
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category '{self.category}'")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "category": self.category,
            "target_sounds": list(self.target_sounds),
            "disorder_tags": list(self.disorder_tags),
            "reference_audio_id": self.reference_audio_id,
            "prompt_image_id": self.prompt_image_id,
            "pass_threshold_override": self.pass_threshold_override,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "WordItem":
        return cls(
            id=doc["id"],
            text=doc["text"],
            category=doc["category"],
            target_sounds=tuple(doc.get("target_sounds", ())),
            disorder_tags=tuple(doc.get("disorder_tags", ())),
            reference_audio_id=doc.get("reference_audio_id", ""),
            prompt_image_id=doc.get("prompt_image_id"),
            pass_threshold_override=doc.get("pass_threshold_override"),
        )


@dataclass(frozen=True)
class TherapyProgram:
    id: str
    patient_id: str
    items: tuple[WordItem, ...]
    pass_threshold: float = DEFAULT_PASS_THRESHOLD
    max_repeats: int = DEFAULT_MAX_REPEATS
    created_by: str = ""
    language: str = "en"
    version: int = 1
    audit: tuple[dict, ...] = ()

    def __post_init__(self):
        if not self.items:
            raise ValueError("program needs at least one item")
        ids = [it.id for it in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate item ids in program")
        if not (1 <= self.max_repeats <= 10):
            raise ValueError(f"max_repeats must be 1..10, got {self.max_repeats}")

    def effective_threshold(self, item: WordItem) -> float:
        return item.pass_threshold_override if item.pass_threshold_override is not None else self.pass_threshold

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "patient_id": self.patient_id,
            "items": [it.to_dict() for it in self.items],
            "pass_threshold": self.pass_threshold,
            "max_repeats": self.max_repeats,
            "created_by": self.created_by,
            "language": self.language,
            "version": self.version,
            "audit": list(self.audit),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TherapyProgram":
        return cls(
            id=doc["id"],
            patient_id=doc["patient_id"],
            items=tuple(WordItem.from_dict(d) for d in doc["items"]),
            pass_threshold=doc["pass_threshold"],
            max_repeats=doc["max_repeats"],
            created_by=doc.get("created_by", ""),
            language=doc.get("language", "en"),
            version=doc.get("version", 1),
            audit=tuple(doc.get("audit", ())),
        )


@dataclass(frozen=True)
class AttemptRecord:
    item_id: str
    utterance_id: str
    closeness: float
    decision: str
    at: str  # ISO-8601

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "utterance_id": self.utterance_id,
            "closeness": self.closeness,
            "decision": self.decision,
            "at": self.at,
        }


@dataclass(frozen=True)
class ProgramState:
    program_id: str
    cursor: int = 0
    attempts_on_current: int = 0
    history: tuple[AttemptRecord, ...] = ()
    status: str = STATUS_ACTIVE

    def to_dict(self) -> dict:
        return {
            "program_id": self.program_id,
            "cursor": self.cursor,
            "attempts_on_current": self.attempts_on_current,
            "history": [h.to_dict() for h in self.history],
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProgramState":
        return cls(
            program_id=doc["program_id"],
            cursor=doc["cursor"],
            attempts_on_current=doc["attempts_on_current"],
            history=tuple(AttemptRecord(**h) for h in doc["history"]),
            status=doc["status"],
        )

    def flagged_item_ids(self) -> list[str]:
        return [h.item_id for h in self.history if h.decision == ADVANCE_FLAGGED]


def build_program(
    patient_disorder: str,
    dictionary: list[WordItem],
    template: list[str] | None = None,
    *,
    program_id: str,
    patient_id: str,
    created_by: str,
    pass_threshold: float = DEFAULT_PASS_THRESHOLD,
    max_repeats: int = DEFAULT_MAX_REPEATS,
    language: str = "en",
) -> TherapyProgram:
    """Disorder-filtered item list ordered by template stage, then dictionary order."""
    stages = template if template is not None else DEFAULT_TEMPLATE
    for stage in stages:
        if stage not in CATEGORIES:
            raise InvalidEditError(f"unknown template stage '{stage}'")
    items: list[WordItem] = []
    for stage in stages:
        stage_items = [
            it for it in dictionary if it.category == stage and patient_disorder in it.disorder_tags
        ]
        if not stage_items:
            raise InsufficientDictionaryError(stage)
        items.extend(stage_items)
    return TherapyProgram(
        id=program_id,
        patient_id=patient_id,
        items=tuple(items),
        pass_threshold=pass_threshold,
        max_repeats=max_repeats,
        created_by=created_by,
        language=language,
    )


def next_prompt(state: ProgramState, program: TherapyProgram) -> WordItem | None:
    """Current item, or None as the completed-signal. Never mutates state."""
    if state.status == STATUS_COMPLETED or state.cursor >= len(program.items):
        return None
    return program.items[state.cursor]


def record_attempt(
    state: ProgramState,
    program: TherapyProgram,
    item_id: str,
    closeness: float,
    utterance_id: str,
    at: str,
) -> tuple[ProgramState, str]:
    """Apply one scored attempt; returns the new state and the decision."""
    if not (0.0 <= closeness <= 1.0):
        raise ValueError(f"closeness must be in [0,1], got {closeness}")
    if state.status != STATUS_ACTIVE:
        raise StaleAttemptError("program already completed")
    current = program.items[state.cursor]
    if current.id != item_id:
        raise StaleAttemptError(f"attempt for '{item_id}' but current item is '{current.id}'")

    threshold = program.effective_threshold(current)
    if closeness >= threshold:
        decision = ADVANCE
    elif state.attempts_on_current + 1 < program.max_repeats:
        decision = REPEAT
    else:
        decision = ADVANCE_FLAGGED

    record = AttemptRecord(item_id, utterance_id, closeness, decision, at)
    history = state.history + (record,)
    if decision == REPEAT:
        new_state = replace(state, attempts_on_current=state.attempts_on_current + 1, history=history)
    else:
        cursor = state.cursor + 1
        status = STATUS_COMPLETED if cursor >= len(program.items) else STATUS_ACTIVE
        new_state = replace(state, cursor=cursor, attempts_on_current=0, history=history, status=status)
    return new_state, decision


def _reanchor(state: ProgramState, old_items: tuple[WordItem, ...], new_items: tuple[WordItem, ...]) -> ProgramState:
    if state.status == STATUS_COMPLETED:
        # still completed unless new items appeared past the old end
        if state.cursor < len(new_items) and len(new_items) > len(old_items):
            return replace(state, status=STATUS_ACTIVE, cursor=len(old_items), attempts_on_current=0)
        return replace(state, cursor=len(new_items))
    current_id = old_items[state.cursor].id if state.cursor < len(old_items) else None
    new_ids = [it.id for it in new_items]
    if current_id is not None and current_id in new_ids:
        return replace(state, cursor=new_ids.index(current_id))
    # current item removed: move to the next surviving old item, attempts reset
    for it in old_items[state.cursor + 1 :]:
        if it.id in new_ids:
            return replace(state, cursor=new_ids.index(it.id), attempts_on_current=0)
    return replace(state, cursor=len(new_items), attempts_on_current=0, status=STATUS_COMPLETED)


def apply_override(
    program: TherapyProgram,
    state: ProgramState,
    edit: dict,
    therapist_id: str,
    assigned_therapist_id: str,
    at: str,
) -> tuple[TherapyProgram, ProgramState]:
    """Versioned therapist edit: reorder / insert / remove / thresholds.

    The active state's cursor is re-anchored to the same item id when it
    survives the edit, else to the next surviving item.
    """
    if therapist_id != assigned_therapist_id:
        raise AuthorizationError("only the assigned therapist may edit this program")
    op = edit.get("op")
    items = program.items
    if op == "reorder":
        wanted = list(edit.get("item_ids", ()))
        if sorted(wanted) != sorted(it.id for it in items):
            raise InvalidEditError("reorder must permute the existing item ids")
        by_id = {it.id: it for it in items}
        new_items = tuple(by_id[i] for i in wanted)
        updated = replace(program, items=new_items)
    elif op == "insert":
        item = WordItem.from_dict(edit["item"])
        if any(it.id == item.id for it in items):
            raise InvalidEditError(f"item id '{item.id}' already in program")
        pos = int(edit.get("position", len(items)))
        pos = max(0, min(pos, len(items)))
        updated = replace(program, items=items[:pos] + (item,) + items[pos:])
    elif op == "remove":
        item_id = edit["item_id"]
        new_items = tuple(it for it in items if it.id != item_id)
        if len(new_items) == len(items):
            raise InvalidEditError(f"item '{item_id}' not in program")
        if not new_items:
            raise InvalidEditError("cannot remove the last item")
        updated = replace(program, items=new_items)
    elif op == "set_threshold":
        value = float(edit["value"])
        if not (0.0 <= value <= 1.0):
            raise InvalidEditError("threshold must be in [0,1]")
        updated = replace(program, pass_threshold=value)
    elif op == "set_max_repeats":
        value = int(edit["value"])
        if not (1 <= value <= 10):
            raise InvalidEditError("max_repeats must be 1..10")
        updated = replace(program, max_repeats=value)
    else:
        raise InvalidEditError(f"unknown edit op '{op}'")

    entry = {"at": at, "therapist_id": therapist_id, "edit": edit, "version": program.version + 1}
    updated = replace(updated, version=program.version + 1, audit=program.audit + (entry,))
    return updated, _reanchor(state, items, updated.items)
