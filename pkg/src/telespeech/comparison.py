"""Patient-vs-reference utterance comparison and patient feedback.

Contours are aligned with dynamic time warping, per-feature distances are
mapped onto [0, 1) deviations via d/(d + scale), and the weighted complement
is the closeness score that drives the advance/repeat decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis.features import UtteranceFeatures
from .errors import EmptyInputError, NoVowelError

GRAPH_POINTS = 100
WORST_FEATURE_MIN_DEVIATION = 0.05
WORST_FEATURE_LIMIT = 3

JUMP_THRESHOLD = 0.2  # relative f0 step counted as a discontinuity
MAX_GAP_FRAMES = 3  # short voicing dropouts also count


@dataclass(frozen=True)
class AlignmentPath:
    """Monotone frame alignment between two contours."""

    pairs: list[tuple[int, int]]
    total_cost: float

    @property
    def normalized_cost(self) -> float:
        return self.total_cost / len(self.pairs)


def _abs_distance(x: float, y: float) -> float:
    return abs(x - y)


def _make_voicing_distance(penalty: float):
    def dist(x: float, y: float) -> float:
        xn = x != x  # NaN marks an unvoiced frame
        yn = y != y
        if xn and yn:
            return 0.0
        if xn or yn:
            return penalty
        return abs(x - y)

    return dist


def dtw_align(a, b, local_distance: str = "abs", voicing_penalty: float = 1.0) -> AlignmentPath:
    """Minimum-cost monotone alignment (steps down/right/diagonal).

    ``local_distance`` is ``"abs"`` for plain |x-y| or ``"voicing"`` for
    contours where NaN means unvoiced: two unvoiced frames cost 0, a
    voiced/unvoiced mismatch costs ``voicing_penalty``.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if not a or not b:
        raise EmptyInputError("cannot align an empty contour")
    if local_distance == "abs":
        dist = _abs_distance
    elif local_distance == "voicing":
        dist = _make_voicing_distance(voicing_penalty)
    else:
        raise ValueError(f"unknown local distance '{local_distance}'")

    n, m = len(a), len(b)
    inf = math.inf
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    cost_rows: list[list[float]] = []
    for i in range(n):
        ai = a[i]
        row = [inf] * (m + 1)
        cur_row = [0.0] * m
        for j in range(m):
            d = dist(ai, b[j])
            best = prev[j]  # diagonal
            if prev[j + 1] < best:
                best = prev[j + 1]
            if row[j] < best:
                best = row[j]
            row[j + 1] = d + best
            cur_row[j] = row[j + 1]
        prev = row
        cost_rows.append(cur_row)

    # backtrace, preferring the diagonal so ties yield the shortest path
    pairs = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = cost_rows[i - 1][j - 1]
            up = cost_rows[i - 1][j]
            left = cost_rows[i][j - 1]
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        pairs.append((i, j))
    pairs.reverse()
    return AlignmentPath(pairs, cost_rows[n - 1][m - 1])


def pitch_discontinuities(contour) -> int:
    """Abrupt f0 jumps plus short voicing dropouts inside the voiced region."""
    voiced = np.asarray(contour.voiced, dtype=bool)
    f0 = np.asarray(contour.f0, dtype=np.float64)
    count = 0
    for k in range(1, len(voiced)):
        if voiced[k] and voiced[k - 1]:
            if abs(f0[k] - f0[k - 1]) / f0[k - 1] > JUMP_THRESHOLD:
                count += 1
    idx = np.nonzero(voiced)[0]
    for prev_i, next_i in zip(idx[:-1], idx[1:]):
        gap = int(next_i - prev_i - 1)
        if 1 <= gap <= MAX_GAP_FRAMES:
            count += 1
    return count


def vowel_segment(features: UtteranceFeatures) -> tuple[float, float]:
    """Longest voiced run in seconds; length ties go to the louder run.

    Frames tile the clock at one hop each, so the segment ends one hop after
    the last voiced frame's start.
    """
    runs = features.pitch.voiced_runs()
    if not runs:
        raise NoVowelError("utterance has no voiced frames")

    def key(run):
        i0, i1 = run
        return (i1 - i0, float(np.mean(features.rms[i0 : i1 + 1])))

    i0, i1 = max(runs, key=key)
    start = float(features.frame_times[i0])
    end = float(features.frame_times[i1]) + features.pitch.hop_length / features.pitch.sample_rate
    return start, end


def _segment_frame_range(features: UtteranceFeatures, segment: tuple[float, float]) -> tuple[int, int]:
    times = features.frame_times
    i0 = int(np.searchsorted(times, segment[0] - 1e-9))
    i1 = int(np.searchsorted(times, segment[1], side="right")) - 1
    return i0, max(i0, i1)


def _mean_f1_in_segment(features: UtteranceFeatures, segment: tuple[float, float]) -> float | None:
    i0, i1 = _segment_frame_range(features, segment)
    values = [
        features.formant_tracks[k][0].frequency_hz
        for k in range(i0, min(i1 + 1, features.n_frames))
        if features.pitch.voiced[k] and features.formant_tracks[k]
    ]
    return float(np.mean(values)) if values else None


@dataclass(frozen=True)
class ComparisonProfile:
    """Feature set, weights, and normalization scales for one disorder profile."""

    name: str = "default"
    weights: dict[str, float] = field(
        default_factory=lambda: {
            "pitch": 0.25,
            "energy": 0.15,
            "duration": 0.15,
            "mean_f1": 0.15,
            "jitter": 0.10,
            "shimmer": 0.10,
            "discontinuities": 0.10,
        }
    )
    scales: dict[str, float] = field(
        default_factory=lambda: {
            "pitch": 1.0,
            "energy": 6.0,
            "duration": math.log(2.0),
            "mean_f1": 0.3,
            "jitter": 0.05,
            "shimmer": 0.05,
            "discontinuities": 5.0,
        }
    )
    pass_threshold: float = 0.6
    voicing_penalty: float = 1.0

    def __post_init__(self):
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"profile weights must sum to 1, got {total}")
        missing = set(self.weights) - set(self.scales)
        if missing:
            raise ValueError(f"missing scales for: {sorted(missing)}")


DEFAULT_PROFILE = ComparisonProfile()


@dataclass
class FeatureDeviation:
    feature_name: str
    patient_value: float | None
    reference_value: float | None
    distance: float | None  # raw distance before the d/(d+s) map
    deviation: float  # mapped onto [0, 1); 0 when unavailable
    weight: float  # effective weight after redistribution
    available: bool
    detail: dict | None = None

    def to_dict(self) -> dict:
        return {
            "feature": self.feature_name,
            "patient_value": self.patient_value,
            "reference_value": self.reference_value,
            "distance": self.distance,
            "deviation": self.deviation,
            "weight": self.weight,
            "available": self.available,
            "detail": self.detail,
        }


@dataclass
class ComparisonReport:
    deviations: list[FeatureDeviation]
    closeness: float
    passed: bool
    threshold: float
    profile_name: str
    patient_vowel_segment: tuple[float, float] | None
    reference_vowel_segment: tuple[float, float] | None

    def deviation(self, name: str) -> FeatureDeviation:
        for d in self.deviations:
            if d.feature_name == name:
                return d
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "deviations": [d.to_dict() for d in self.deviations],
            "closeness": self.closeness,
            "pass": self.passed,
            "threshold": self.threshold,
            "profile": self.profile_name,
            "vowel_segment": {
                "patient": list(self.patient_vowel_segment) if self.patient_vowel_segment else None,
                "reference": list(self.reference_vowel_segment) if self.reference_vowel_segment else None,
            },
        }


def _pitch_display(features: UtteranceFeatures) -> list[float]:
    return [float(f) if v else 0.0 for v, f in zip(features.pitch.voiced, features.pitch.f0)]


def _energy_display(features: UtteranceFeatures) -> list[float]:
    db = features.rms_db
    return list(np.asarray(db, dtype=float) - float(np.max(db)))


def compare_utterances(
    patient: UtteranceFeatures,
    reference: UtteranceFeatures,
    profile: ComparisonProfile = DEFAULT_PROFILE,
) -> ComparisonReport:
    """Per-feature deviations and the aggregate closeness in [0, 1]."""
    distances: dict[str, float | None] = {}
    values: dict[str, tuple[float | None, float | None]] = {}
    details: dict[str, dict | None] = {name: None for name in profile.weights}

    # pitch: DTW over log2(f0) with voicing-aware local distance
    p_log = [math.log2(f) if v else math.nan for v, f in zip(patient.pitch.voiced, patient.pitch.f0)]
    r_log = [math.log2(f) if v else math.nan for v, f in zip(reference.pitch.voiced, reference.pitch.f0)]
    pitch_path = dtw_align(p_log, r_log, "voicing", profile.voicing_penalty)
    distances["pitch"] = pitch_path.normalized_cost
    values["pitch"] = (patient.summary.get("mean_f0_hz"), reference.summary.get("mean_f0_hz"))
    details["pitch"] = {"patient": _pitch_display(patient), "reference": _pitch_display(reference)}

    # energy: DTW over peak-normalized dB contours
    p_db = _energy_display(patient)
    r_db = _energy_display(reference)
    energy_path = dtw_align(p_db, r_db, "abs")
    distances["energy"] = energy_path.normalized_cost
    values["energy"] = (float(np.mean(patient.rms_db)), float(np.mean(reference.rms_db)))
    details["energy"] = {"patient": p_db, "reference": r_db}

    # duration: log ratio of voiced-activity-trimmed durations
    if patient.duration_s > 0 and reference.duration_s > 0:
        distances["duration"] = abs(math.log(patient.duration_s / reference.duration_s))
    else:
        distances["duration"] = None
    values["duration"] = (patient.duration_s, reference.duration_s)

    # mean first formant over each side's vowel segment
    try:
        p_seg = vowel_segment(patient)
    except NoVowelError:
        p_seg = None
    try:
        r_seg = vowel_segment(reference)
    except NoVowelError:
        r_seg = None
    p_f1 = _mean_f1_in_segment(patient, p_seg) if p_seg else None
    r_f1 = _mean_f1_in_segment(reference, r_seg) if r_seg else None
    if p_f1 is not None and r_f1 is not None and r_f1 > 0:
        distances["mean_f1"] = abs(p_f1 - r_f1) / r_f1
    else:
        distances["mean_f1"] = None
    values["mean_f1"] = (p_f1, r_f1)

    for name in ("jitter", "shimmer"):
        pv = getattr(patient, name)
        rv = getattr(reference, name)
        distances[name] = abs(pv - rv) if pv is not None and rv is not None else None
        values[name] = (pv, rv)

    p_disc = pitch_discontinuities(patient.pitch)
    r_disc = pitch_discontinuities(reference.pitch)
    distances["discontinuities"] = float(abs(p_disc - r_disc))
    values["discontinuities"] = (float(p_disc), float(r_disc))

    available = {name for name, d in distances.items() if d is not None}
    weight_total = sum(profile.weights[n] for n in available)
    deviations = []
    closeness = 1.0
    for name, base_weight in profile.weights.items():
        d = distances[name]
        if d is None:
            deviations.append(
                FeatureDeviation(name, values[name][0], values[name][1], None, 0.0, 0.0, False, details[name])
            )
            continue
        weight = base_weight / weight_total if weight_total > 0 else 0.0
        dev = d / (d + profile.scales[name])
        closeness -= weight * dev
        deviations.append(
            FeatureDeviation(name, values[name][0], values[name][1], d, dev, weight, True, details[name])
        )
    closeness = float(min(1.0, max(0.0, closeness)))
    return ComparisonReport(
        deviations=deviations,
        closeness=closeness,
        passed=closeness >= profile.pass_threshold,
        threshold=profile.pass_threshold,
        profile_name=profile.name,
        patient_vowel_segment=p_seg,
        reference_vowel_segment=r_seg,
    )


@dataclass
class FeedbackMessage:
    verdict: str  # "pass" | "repeat"
    worst_features: list[str]
    graph_payload: dict
    reference_audio_ref: str | None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "worst_features": self.worst_features,
            "graph_payload": self.graph_payload,
            "reference_audio_ref": self.reference_audio_ref,
        }


def _resample_points(values: list[float], n: int = GRAPH_POINTS) -> list[float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 1:
        return [float(arr[0])] * n
    xs = np.linspace(0, arr.size - 1, n)
    return [float(v) for v in np.interp(xs, np.arange(arr.size), arr)]


def make_feedback(report: ComparisonReport, reference_audio_id: str | None = None) -> FeedbackMessage:
    """Patient-facing verdict, worst offenders, and display-ready contours."""
    ranked = sorted(
        (d for d in report.deviations if d.available and d.deviation >= WORST_FEATURE_MIN_DEVIATION),
        key=lambda d: d.deviation,
        reverse=True,
    )
    graph: dict[str, dict[str, list[float]]] = {}
    for name, key in (("pitch", "pitch_hz"), ("energy", "energy_db")):
        detail = report.deviation(name).detail
        if detail:
            graph[key] = {
                "patient": _resample_points(detail["patient"]),
                "reference": _resample_points(detail["reference"]),
            }
    return FeedbackMessage(
        verdict="pass" if report.passed else "repeat",
        worst_features=[d.feature_name for d in ranked[:WORST_FEATURE_LIMIT]],
        graph_payload=graph,
        reference_audio_ref=reference_audio_id,
    )
