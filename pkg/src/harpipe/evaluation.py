"""Offline evaluation: stratified three-split protocol, Top-1, confusion matrices."""

from __future__ import annotations

import csv
import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError

NONE_LABEL = "none"

# Seven household-activity classes with per-class clip counts and mean
# durations used by the bundled fixture manifest.
FIXTURE_CLASSES = (
    ("drinking", 238, 4.07),
    ("eating", 271, 4.65),
    ("sitting", 227, 3.43),
    ("standing", 206, 3.02),
    ("walking", 352, 2.73),
    ("lying", 210, 3.33),
    ("talking_on_phone", 207, 4.58),
)


@dataclass(frozen=True)
class ManifestEntry:
    video_id: str
    label: str
    duration_s: float = 0.0
    source: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    class_names: tuple[str, ...]

    def __post_init__(self):
        ids = [e.video_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate video_id in manifest")
        bad = {e.label for e in self.entries} - set(self.class_names)
        if bad:
            raise ConfigError(f"labels not in class_names: {sorted(bad)}")

    @classmethod
    def from_json(cls, path: str) -> "DatasetManifest":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        entries = tuple(
            ManifestEntry(
                video_id=e["video_id"], label=e["label"],
                duration_s=float(e.get("duration_s", 0.0)), source=e.get("source", ""),
            )
            for e in raw["entries"]
        )
        return cls(entries=entries, class_names=tuple(raw["class_names"]))

    def to_json(self, path: str) -> None:
        payload = {
            "class_names": list(self.class_names),
            "entries": [
                {"video_id": e.video_id, "label": e.label,
                 "duration_s": e.duration_s, "source": e.source}
                for e in self.entries
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)

    def labels(self) -> dict[str, str]:
        return {e.video_id: e.label for e in self.entries}


def fixture_manifest() -> DatasetManifest:
    """Synthetic-stub manifest with the reference per-class clip counts (1711 total)."""
    entries = []
    for label, count, avg_dur in FIXTURE_CLASSES:
        for i in range(count):
            entries.append(ManifestEntry(
                video_id=f"{label}_{i:04d}", label=label,
                duration_s=avg_dur, source="fixture",
            ))
    return DatasetManifest(entries=tuple(entries),
                           class_names=tuple(c[0] for c in FIXTURE_CLASSES))


@dataclass(frozen=True)
class SplitPlan:
    split_index: int
    train_ids: frozenset[str]
    test_ids: frozenset[str]
    seed: int


def _test_count(class_count: int) -> int:
    # 20% test share, half rounds up
    return int(math.floor(0.2 * class_count + 0.5))


def make_splits(manifest: DatasetManifest, seed: int) -> list[SplitPlan]:
    """Three independent stratified 80/20 splits; split k shuffles with seed+k."""
    by_class: dict[str, list[str]] = defaultdict(list)
    for e in manifest.entries:
        by_class[e.label].append(e.video_id)
    for label, ids in by_class.items():
        if len(ids) < 5:
            raise ConfigError(f"class {label!r} has only {len(ids)} entries, need >= 5")

    plans = []
    for k in (1, 2, 3):
        rng = random.Random(seed + k)
        test: set[str] = set()
        train: set[str] = set()
        for label in sorted(by_class):
            ids = sorted(by_class[label])
            rng.shuffle(ids)
            cut = _test_count(len(ids))
            test.update(ids[:cut])
            train.update(ids[cut:])
        plans.append(SplitPlan(split_index=k, train_ids=frozenset(train),
                               test_ids=frozenset(test), seed=seed))
    return plans


@dataclass
class ConfusionMatrix:
    """Rows = ground truth classes; columns = predicted classes plus a final
    column for below-threshold ("none") decisions."""

    class_names: tuple[str, ...]
    counts: np.ndarray = None

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros((len(self.class_names), len(self.class_names) + 1),
                                   dtype=np.int64)

    def add(self, truth: str, predicted: Optional[str]) -> None:
        row = self.class_names.index(truth)
        col = len(self.class_names) if predicted is None else self.class_names.index(predicted)
        self.counts[row, col] += 1

    def to_lists(self) -> list[list[int]]:
        return self.counts.tolist()

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["truth\\pred", *self.class_names, NONE_LABEL])
            for name, row in zip(self.class_names, self.counts):
                writer.writerow([name, *row.tolist()])


def evaluate(
    manifest: DatasetManifest,
    split: SplitPlan,
    predictions: Mapping[str, Optional[str]],
) -> tuple[float, ConfusionMatrix]:
    """Top-1 accuracy and confusion matrix over the split's test set.

    A "none" prediction counts as incorrect. Every test id must be present in
    the predictions map.
    """
    missing = sorted(split.test_ids - set(predictions))
    if missing:
        raise ConfigError(f"missing predictions for: {missing[:10]}"
                          + ("..." if len(missing) > 10 else ""))
    labels = manifest.labels()
    cm = ConfusionMatrix(class_names=manifest.class_names)
    correct = 0
    for vid in sorted(split.test_ids):
        truth = labels[vid]
        pred = predictions[vid]
        cm.add(truth, pred)
        if pred == truth:
            correct += 1
    return correct / len(split.test_ids), cm


def average_splits(top1_scores: Sequence[float]) -> float:
    if len(top1_scores) != 3:
        raise ConfigError(f"expected scores for exactly 3 splits, got {len(top1_scores)}")
    return sum(top1_scores) / 3.0


def video_decision(period_decisions: Sequence[Optional[str]]) -> Optional[str]:
    """Majority over a video's finalized period decisions.

    "none" periods don't vote; ties go to the class decided earliest; a video
    with no decided period maps to None.
    """
    votes = Counter(d for d in period_decisions if d is not None)
    if not votes:
        return None
    best = max(votes.values())
    tied = {label for label, c in votes.items() if c == best}
    if len(tied) == 1:
        return tied.pop()
    for d in period_decisions:
        if d in tied:
            return d
    return None  # pragma: no cover
