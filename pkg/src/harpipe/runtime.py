"""Staged streaming runtime: replay, stage workers, bounded queues, metrics.

The flow is ingest -> perceive (simplify + lift to 3D) -> track -> crop/resize
-> window-schedule/fuse. Stages run either as threads connected by bounded
in-process queues, or inline in a single worker for deterministic debugging.
Only the ingest queue may drop (oldest first, real-time mode only); windowing
queues block, so a window whose frames were dropped upstream is simply never
formed.
"""

from __future__ import annotations

import json
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np
from PIL import Image

from .camera import CameraIntrinsics, DepthImage
from .classifier import (ClassifierGateway, MockClassifier, RemoteClassifier,
                         WindowTensor, resize_crop)
from .errors import ConfigError, StreamError, WindowFailure
from .evaluation import FIXTURE_CLASSES
from .kernels import NUMBA_ENABLED
from .skeleton import crop_image, lift_to_3d, simplify, user_bbox
from .tracking import IdentityEvent, TrackerConfig, TrackState, TrackStatus, track_step
from .windowing import WindowConfig, WindowScheduler, sample_stride
from .errors import DegenerateSkeletonError

DEFAULT_CLASS_NAMES = tuple(c[0] for c in FIXTURE_CLASSES)


# ---------------------------------------------------------------------------
# Depth image files: binary PGM (P5), maxval 65535, big-endian.

def write_pgm16(path, data: np.ndarray) -> None:
    data = np.asarray(data, dtype=np.uint16)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(data.astype(">u2").tobytes())


def read_pgm16(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    try:
        fields: list[bytes] = []
        pos = 0
        while len(fields) < 4:
            while pos < len(blob) and blob[pos:pos + 1].isspace():
                pos += 1
            if blob[pos:pos + 1] == b"#":
                while blob[pos:pos + 1] not in (b"\n", b""):
                    pos += 1
                continue
            start = pos
            while pos < len(blob) and not blob[pos:pos + 1].isspace():
                pos += 1
            fields.append(blob[start:pos])
        pos += 1  # single whitespace after maxval
        magic, w, h, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
        if magic != b"P5" or maxval != 65535:
            raise ValueError(f"not a 16-bit P5 PGM: magic={magic!r} maxval={maxval}")
        data = np.frombuffer(blob, dtype=">u2", offset=pos, count=w * h)
        return data.reshape(h, w).astype(np.uint16)
    except (ValueError, IndexError) as exc:
        raise StreamError(f"corrupt depth file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Configuration

@dataclass(frozen=True)
class PipelineConfig:
    stream_dir: str
    window: WindowConfig
    tracker: TrackerConfig
    classifier_kind: str = "mock"              # mock | remote
    classifier_rule: str = "mean-pixel-bucket"
    classifier_endpoint: Optional[str] = None  # host:port for remote
    classifier_timeout_s: float = 2.0
    classifier_delay_s: float = 0.0            # mock only, for latency experiments
    input_hw: tuple[int, int] = (256, 256)
    pad_frac: float = 0.1
    queue_capacity: int = 8
    real_time: bool = False
    single_worker: bool = False

    def __post_init__(self):
        if self.queue_capacity < 1:
            raise ConfigError("queue capacity must be >= 1")
        if self.classifier_kind not in ("mock", "remote"):
            raise ConfigError(f"unknown classifier kind {self.classifier_kind!r}")
        if self.classifier_kind == "remote" and not self.classifier_endpoint:
            raise ConfigError("remote classifier needs an endpoint")


def load_config(path: str, real_time: Optional[bool] = None) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc

    try:
        win = raw.get("window", {})
        window = WindowConfig(
            class_names=tuple(win.get("class_names", DEFAULT_CLASS_NAMES)),
            n=int(win.get("n", 16)), sr=float(win.get("sr", 5)),
            m=int(win.get("m", 4)), theta=float(win.get("theta", 0.4)),
            majority_vote=bool(win.get("majority_vote", False)),
        )
        trk = raw.get("tracker", {})
        tracker = TrackerConfig(
            user_id=trk.get("user_id", "user-1"),
            diameter=float(trk.get("diameter", 1.0)),
            tolerance=int(trk.get("tolerance", 5)),
        )
        cls = raw.get("classifier", {})
        kind = cls.get("kind", "mock")
        endpoint = cls.get("endpoint")
        override = os.environ.get("PIPELINE_CLASSIFIER", "")
        if override:
            if override == "mock":
                kind, endpoint = "mock", None
            elif override.startswith("remote:"):
                kind, endpoint = "remote", override.split(":", 1)[1]
            else:
                raise ConfigError(f"bad PIPELINE_CLASSIFIER value {override!r}")
        hw = cls.get("input_size", [window.n, 256, 256])
        if len(hw) == 3 and int(hw[0]) != window.n:
            raise ConfigError("classifier input_size n must match window n")
        cfg = PipelineConfig(
            stream_dir=raw["stream_dir"],
            window=window,
            tracker=tracker,
            classifier_kind=kind,
            classifier_rule=cls.get("rule", "mean-pixel-bucket"),
            classifier_endpoint=endpoint,
            classifier_timeout_s=float(cls.get("timeout_s", 2.0)),
            classifier_delay_s=float(cls.get("delay_s", 0.0)),
            input_hw=(int(hw[-2]), int(hw[-1])),
            pad_frac=float(raw.get("pad_frac", 0.1)),
            queue_capacity=int(raw.get("queue_capacity", 8)),
            real_time=bool(raw.get("real_time", False)) if real_time is None else real_time,
            single_worker=bool(raw.get("single_worker", False)),
        )
    except KeyError as exc:
        raise ConfigError(f"config missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if not Path(cfg.stream_dir).is_dir():
        raise ConfigError(f"stream directory {cfg.stream_dir} does not exist")
    return cfg


def build_gateway(cfg: PipelineConfig) -> ClassifierGateway:
    num = len(cfg.window.class_names)
    if cfg.classifier_kind == "mock":
        backend = MockClassifier(cfg.classifier_rule, num, delay_s=cfg.classifier_delay_s)
    else:
        host, _, port = cfg.classifier_endpoint.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"bad classifier endpoint {cfg.classifier_endpoint!r}")
        backend = RemoteClassifier(host, int(port), num, timeout_s=cfg.classifier_timeout_s)
        backend.connect()
    return ClassifierGateway(backend, cfg.window.class_names,
                             (cfg.window.n, *cfg.input_hw))


# ---------------------------------------------------------------------------
# Stream replay

@dataclass
class FrameBundle:
    index: int
    timestamp: float
    rgb: np.ndarray                 # (H, W, 3) uint8
    depth: DepthImage
    people: list[np.ndarray]        # (25, 3) raw keypoints per person
    events: list[IdentityEvent]


def _load_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        raise StreamError(f"missing stream file {path.name}")
    records = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise StreamError(f"{path.name}:{ln + 1}: bad JSON: {exc}") from exc
    return records


def stream_meta(directory) -> dict:
    meta_path = Path(directory) / "meta.json"
    if not meta_path.exists():
        raise StreamError("missing stream file meta.json")
    with open(meta_path, encoding="utf-8") as fh:
        return json.load(fh)


def replay_stream(directory, real_time: bool = False) -> Iterator[FrameBundle]:
    """Yield synchronized per-frame bundles from a recorded stream directory.

    Expects rgb_%06d.png, depth_%06d.pgm, skeletons.jsonl, identities.jsonl,
    intrinsics.json, meta.json. A frame absent from skeletons.jsonl means no
    detections. In real_time mode emission is paced at the recorded fps.
    """
    root = Path(directory)
    meta = stream_meta(root)
    fps = float(meta["fps"])

    indices = sorted(int(p.stem.split("_")[1]) for p in root.glob("rgb_*.png"))
    for pos, idx in enumerate(indices):
        if idx != pos:
            raise StreamError(f"stream gap: missing frame {pos}")

    skel_by_frame: dict[int, list] = {}
    for rec in _load_jsonl(root / "skeletons.jsonl"):
        skel_by_frame[int(rec["frame"])] = [
            np.asarray(p["keypoints"], dtype=np.float64) for p in rec.get("people", [])
        ]
    events_by_frame: dict[int, list[IdentityEvent]] = {}
    for rec in _load_jsonl(root / "identities.jsonl"):
        events_by_frame.setdefault(int(rec["frame"]), []).append(IdentityEvent(
            frame_index=int(rec["frame"]),
            person_index=int(rec["person_index"]),
            person_id=str(rec["person_id"]),
        ))

    start = time.monotonic()
    for idx in indices:
        depth_path = root / f"depth_{idx:06d}.pgm"
        if not depth_path.exists():
            raise StreamError(f"missing stream file {depth_path.name}")
        rgb = np.asarray(Image.open(root / f"rgb_{idx:06d}.png").convert("RGB"))
        depth_data = read_pgm16(depth_path)
        depth = DepthImage(width=depth_data.shape[1], height=depth_data.shape[0],
                           data=depth_data)
        if real_time:
            target = start + idx / fps
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        yield FrameBundle(
            index=idx, timestamp=idx / fps, rgb=rgb, depth=depth,
            people=skel_by_frame.get(idx, []),
            events=events_by_frame.get(idx, []),
        )


# ---------------------------------------------------------------------------
# Queues and metrics

class BoundedQueue:
    """FIFO with a hard capacity. drop_oldest=True evicts the head on overflow
    (and counts it) instead of blocking the producer."""

    _SENTINEL = object()

    def __init__(self, capacity: int, drop_oldest: bool = False):
        self._items: deque = deque()
        self._capacity = capacity
        self._drop_oldest = drop_oldest
        self._cond = threading.Condition()
        self.drops = 0
        self._closed = False

    def put(self, item) -> None:
        with self._cond:
            if self._drop_oldest:
                if len(self._items) >= self._capacity:
                    self._items.popleft()
                    self.drops += 1
            else:
                while len(self._items) >= self._capacity:
                    self._cond.wait()
            self._items.append(item)
            self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def __iter__(self):
        while True:
            with self._cond:
                while not self._items and not self._closed:
                    self._cond.wait()
                if not self._items:
                    return
                item = self._items.popleft()
                self._cond.notify_all()
            yield item


STAGES = ("ingest", "perceive", "track", "crop", "window")


@dataclass
class StageMetrics:
    latencies: dict[str, list[float]] = field(default_factory=lambda: {s: [] for s in STAGES})
    frames_in: int = 0
    frames_out: int = 0
    drops: int = 0
    wall_s: float = 0.0

    @property
    def fps(self) -> float:
        return self.frames_in / self.wall_s if self.wall_s > 0 else 0.0

    def record(self, stage: str, seconds: float) -> None:
        self.latencies[stage].append(seconds)

    def summary(self) -> dict:
        stages = {}
        for name, vals in self.latencies.items():
            if vals:
                arr = np.array(vals) * 1000.0
                stages[name] = {
                    "count": len(vals),
                    "p50_ms": float(np.percentile(arr, 50)),
                    "p95_ms": float(np.percentile(arr, 95)),
                }
            else:
                stages[name] = {"count": 0, "p50_ms": 0.0, "p95_ms": 0.0}
        return {
            "stages": stages,
            "frames_in": self.frames_in,
            "frames_out": self.frames_out,
            "drops": self.drops,
            "wall_s": self.wall_s,
            "fps": self.fps,
        }


# ---------------------------------------------------------------------------
# Stage bodies (shared by single-worker and threaded modes)

class _Perceiver:
    def __init__(self, intr: CameraIntrinsics):
        self.intr = intr

    def __call__(self, bundle: FrameBundle):
        reduced = [simplify(raw) for raw in bundle.people]
        lifted = [
            lift_to_3d(sk, bundle.depth, self.intr,
                       frame_index=bundle.index, person_index=i)
            for i, sk in enumerate(reduced)
        ]
        return bundle, reduced, lifted


class _TrackerStage:
    def __init__(self, cfg: TrackerConfig):
        self.cfg = cfg
        self.state = TrackState()
        self.records: list[dict] = []

    def __call__(self, bundle: FrameBundle, reduced, lifted):
        self.state = track_step(self.state, self.cfg, lifted, bundle.events)
        self.records.append({
            "type": "track",
            "frame": bundle.index,
            "status": self.state.status.value,
            "times_untracked": self.state.times_untracked,
            "person": self.state.matched_person,
        })
        return self.state


class _CropStage:
    """Turns tracked frames into sampled classifier-input frames.

    Emits (sample_index, frame-or-None) pairs, filling gaps with None so the
    scheduler's sample indexing stays contiguous even across dropped frames.
    """

    def __init__(self, cfg: PipelineConfig, stride: int):
        self.cfg = cfg
        self.stride = stride
        self.next_sample = 0

    def __call__(self, bundle: FrameBundle, reduced, state) -> list[tuple[int, Optional[np.ndarray]]]:
        if bundle.index % self.stride != 0:
            return []
        s = bundle.index // self.stride
        out: list[tuple[int, Optional[np.ndarray]]] = []
        while self.next_sample < s:  # upstream drops
            out.append((self.next_sample, None))
            self.next_sample += 1
        frame = None
        if state.status is TrackStatus.KNOWN and state.matched_person is not None:
            sk2d = reduced[state.matched_person]
            try:
                box = user_bbox(sk2d, bundle.rgb.shape[1], bundle.rgb.shape[0],
                                self.cfg.pad_frac)
                frame = resize_crop(crop_image(bundle.rgb, box), *self.cfg.input_hw)
            except (DegenerateSkeletonError, ValueError):
                frame = None
        out.append((s, frame))
        self.next_sample = s + 1
        return out


class _WindowStage:
    def __init__(self, cfg: PipelineConfig, gateway: ClassifierGateway):
        self.cfg = cfg
        self.records: list[dict] = []

        def classify(frames):
            try:
                return gateway.classify(WindowTensor.from_frames(frames))
            except WindowFailure:
                return None

        self.scheduler = WindowScheduler(cfg.window, classify)

    def _emit(self, periods, flushed: bool = False) -> None:
        for p in periods:
            self.records.append({
                "type": "decision",
                "period": p.period_index,
                "t_start": p.t_start(self.cfg.window),
                "t_end": p.t_end(self.cfg.window),
                "decision": p.decision,
                "mean_probs": [] if p.mean_probs is None else list(p.mean_probs),
                "num_contributions": len(p.contributions),
                "_decided_at_sample": p.decided_at_sample,
                "_flushed": flushed,
            })

    def __call__(self, sample_index: int, frame) -> bool:
        """Returns True when this sample completed (and resolved) a window."""
        periods = self.scheduler.feed(sample_index, frame)
        self._emit(periods)
        return bool(periods)

    def flush(self) -> None:
        self._emit(self.scheduler.flush(), flushed=True)


def _merge_events(track_records: list[dict], decision_records: list[dict],
                  stride: int) -> list[dict]:
    """Deterministic interleaving: a decision lands right after the frame whose
    sample triggered it; flushed decisions follow the last frame."""
    events: list[tuple[tuple, dict]] = []
    for rec in track_records:
        events.append(((rec["frame"], 0, 0), rec))
    for rec in decision_records:
        rec = dict(rec)
        flushed = rec.pop("_flushed")
        decided_at = rec.pop("_decided_at_sample")
        if flushed or decided_at is None:
            key = (float("inf"), 1, rec["period"])
        else:
            key = ((decided_at - 1) * stride, 1, rec["period"])
        events.append((key, rec))
    events.sort(key=lambda kv: kv[0])
    return [rec for _, rec in events]


# ---------------------------------------------------------------------------
# Entry points

def run(cfg: PipelineConfig) -> tuple[list[dict], StageMetrics]:
    """Execute the full pipeline over the recorded stream.

    Returns (ordered event records, metrics). Event records are the run's
    output log: one "track" record per processed frame and one "decision"
    record per finalized prediction period.
    """
    intr = CameraIntrinsics.from_json(str(Path(cfg.stream_dir) / "intrinsics.json"))
    meta = stream_meta(cfg.stream_dir)
    stride = sample_stride(float(meta["fps"]), cfg.window.sr)
    gateway = build_gateway(cfg)

    metrics = StageMetrics()
    perceive = _Perceiver(intr)
    tracker = _TrackerStage(cfg.tracker)
    cropper = _CropStage(cfg, stride)
    windower = _WindowStage(cfg, gateway)

    t_begin = time.perf_counter()
    try:
        if cfg.single_worker:
            _run_sequential(cfg, metrics, perceive, tracker, cropper, windower)
        else:
            _run_threaded(cfg, metrics, perceive, tracker, cropper, windower)
    finally:
        gateway.close()
    metrics.wall_s = time.perf_counter() - t_begin
    metrics.frames_out = sum(1 for r in tracker.records)
    events = _merge_events(tracker.records, windower.records, stride)
    return events, metrics


def _run_sequential(cfg, metrics, perceive, tracker, cropper, windower) -> None:
    for bundle in replay_stream(cfg.stream_dir, real_time=cfg.real_time):
        metrics.frames_in += 1
        t0 = time.perf_counter()
        bundle, reduced, lifted = perceive(bundle)
        t1 = time.perf_counter()
        metrics.record("perceive", t1 - t0)
        state = tracker(bundle, reduced, lifted)
        t2 = time.perf_counter()
        metrics.record("track", t2 - t1)
        samples = cropper(bundle, reduced, state)
        t3 = time.perf_counter()
        metrics.record("crop", t3 - t2)
        for s, frame in samples:
            t_w = time.perf_counter()
            if windower(s, frame):
                metrics.record("window", time.perf_counter() - t_w)
    windower.flush()


def _run_threaded(cfg, metrics, perceive, tracker, cropper, windower) -> None:
    q_ingest = BoundedQueue(cfg.queue_capacity, drop_oldest=cfg.real_time)
    q_perceived = BoundedQueue(cfg.queue_capacity)
    q_samples = BoundedQueue(cfg.queue_capacity)
    errors: list[BaseException] = []

    def guard(fn):
        def wrapped():
            try:
                fn()
            except BaseException as exc:  # surfaced to the caller below
                errors.append(exc)
                for q in (q_ingest, q_perceived, q_samples):
                    q.close()
        return wrapped

    def ingest_worker():
        for bundle in replay_stream(cfg.stream_dir, real_time=cfg.real_time):
            metrics.frames_in += 1
            q_ingest.put(bundle)
        q_ingest.close()

    def perceive_worker():
        for bundle in q_ingest:
            t0 = time.perf_counter()
            q_perceived.put(perceive(bundle))
            metrics.record("perceive", time.perf_counter() - t0)
        q_perceived.close()

    def track_crop_worker():
        for bundle, reduced, lifted in q_perceived:
            t0 = time.perf_counter()
            state = tracker(bundle, reduced, lifted)
            t1 = time.perf_counter()
            metrics.record("track", t1 - t0)
            for pair in cropper(bundle, reduced, state):
                q_samples.put(pair)
            metrics.record("crop", time.perf_counter() - t1)
        q_samples.close()

    def window_worker():
        for s, frame in q_samples:
            t0 = time.perf_counter()
            if windower(s, frame):
                metrics.record("window", time.perf_counter() - t0)
        windower.flush()

    threads = [threading.Thread(target=guard(t), name=t.__name__, daemon=True)
               for t in (ingest_worker, perceive_worker, track_crop_worker, window_worker)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    metrics.drops = q_ingest.drops
    if errors:
        raise errors[0]


def write_events(events: Sequence[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in events:
            fh.write(json.dumps(rec) + "\n")


def bench(cfg: PipelineConfig) -> dict:
    """Run the stream and report per-stage p50/p95 latency plus end-to-end FPS."""
    events, metrics = run(cfg)
    report = metrics.summary()
    report["decisions"] = sum(1 for e in events if e["type"] == "decision")
    report["numba"] = NUMBA_ENABLED
    return report
