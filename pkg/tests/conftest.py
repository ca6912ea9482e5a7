import pytest
from fastapi.testclient import TestClient

from telespeech.api import create_app
from telespeech.service import TherapyService

from synthcases import NUMERALS, numeral_wav


class FakeClock:
    def __init__(self, start: float = 1_700_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def service(tmp_path, clock):
    return TherapyService(tmp_path / "data", clock=clock)


@pytest.fixture
def client(service):
    return TestClient(create_app(service))


def bearer(actor_id: str) -> dict:
    return {"Authorization": f"Bearer {actor_id}"}


def make_therapist(client, name: str = "Dr. Rao") -> str:
    response = client.post("/therapists", json={"name": name})
    assert response.status_code == 201
    return response.json()["id"]


def seed_numerals(client, therapist_id: str, disorder: str = "cleft_palate") -> list[dict]:
    items = []
    for i, word in enumerate(NUMERALS):
        upload = client.post(
            "/audio",
            files={"file": (f"{word}.wav", numeral_wav(i), "audio/wav")},
            headers=bearer(therapist_id),
        )
        assert upload.status_code == 201
        created = client.post(
            "/dictionary/items",
            json={
                "text": word,
                "category": "number",
                "disorder_tags": [disorder],
                "reference_audio_id": upload.json()["audio_id"],
            },
            headers=bearer(therapist_id),
        )
        assert created.status_code == 201
        items.append(created.json())
    return items


def register_patient(client, therapist_id: str, name: str = "Asha", template=("number",)) -> dict:
    response = client.post(
        "/patients",
        json={
            "name": name,
            "age": 6,
            "gender": "female",
            "medical_history": "cleft palate repair",
            "disorder": "cleft_palate",
            "therapist_id": therapist_id,
            "surgery": {"nature": "palatoplasty", "date": "2025-04-18"},
            "template": list(template),
        },
    )
    assert response.status_code == 201, response.text
    return response.json()


def upload_attempt(client, patient_id: str, item_id: str, wav: bytes):
    return client.post(
        f"/patients/{patient_id}/utterances",
        data={"item_id": item_id},
        files={"file": ("attempt.wav", wav, "audio/wav")},
        headers=bearer(patient_id),
    )
