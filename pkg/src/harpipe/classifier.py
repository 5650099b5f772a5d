"""Classifier boundary: deterministic mock backends and the remote TCP client.

Real video-classification models live out of process behind the wire protocol
(see protocol.py); in-process they are replaced by mock rules so the whole
pipeline stays testable.
"""

from __future__ import annotations

import math
import socket
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ClassifierError, ProtocolError, WindowFailure
from .kernels import bilinear_resize
from .protocol import decode_response, encode_request


@dataclass(frozen=True)
class WindowTensor:
    """n stacked RGB frames, the unit of classification."""

    data: np.ndarray  # (n, h, w, 3) uint8

    def __post_init__(self):
        if self.data.ndim != 4 or self.data.shape[3] != 3 or self.data.dtype != np.uint8:
            raise ValueError("expected (n, h, w, 3) uint8 data")

    @property
    def shape(self) -> tuple[int, int, int]:
        n, h, w, _ = self.data.shape
        return n, h, w

    @classmethod
    def from_frames(cls, frames: Sequence[np.ndarray]) -> "WindowTensor":
        return cls(data=np.stack([np.asarray(f, dtype=np.uint8) for f in frames]))


def resize_crop(crop: np.ndarray, h: int, w: int) -> np.ndarray:
    """Stretch-resize a bbox crop to the classifier's (h, w) input plane."""
    if crop.size == 0 or crop.shape[0] == 0 or crop.shape[1] == 0:
        raise ValueError("degenerate crop")
    return bilinear_resize(crop, h, w)


def mean_pixel_bucket(data: np.ndarray, num_classes: int) -> int:
    """Class index from mean pixel intensity: [0,36) -> 0, [36,72) -> 1, ...

    Shared rule definition with the sidecar stub; the integer byte sum divided
    by the count is exact in float64, so both sides bucket identically.
    """
    mean = int(data.sum(dtype=np.int64)) / data.size
    return min(int(math.floor(mean / 36.0)), num_classes - 1)


def smoothed_one_hot(index: int, num_classes: int, top: float = 0.94) -> np.ndarray:
    if num_classes == 1:
        return np.array([1.0])
    probs = np.full(num_classes, (1.0 - top) / (num_classes - 1))
    probs[index] = top
    return probs


class MockClassifier:
    """Pure function of the window bytes, selected by a rule id.

    Rules: ``constant-uniform``, ``mean-pixel-bucket``, and
    ``echo-constant:p1,p2,...`` (a fixed vector).
    """

    def __init__(self, rule: str, num_classes: int, delay_s: float = 0.0):
        self.rule = rule
        self.num_classes = num_classes
        self.delay_s = delay_s
        if rule.startswith("echo-constant:"):
            self._vector = np.array([float(x) for x in rule.split(":", 1)[1].split(",")])
            if len(self._vector) != num_classes:
                raise ClassifierError("echo-constant vector length != class count")
        elif rule not in ("constant-uniform", "mean-pixel-bucket"):
            raise ClassifierError(f"unknown mock rule {rule!r}")

    def classify(self, window: WindowTensor) -> np.ndarray:
        if self.delay_s > 0:
            import time
            time.sleep(self.delay_s)
        if self.rule == "constant-uniform":
            return np.full(self.num_classes, 1.0 / self.num_classes)
        if self.rule == "mean-pixel-bucket":
            return smoothed_one_hot(mean_pixel_bucket(window.data, self.num_classes),
                                    self.num_classes)
        return self._vector.copy()

    def close(self):
        pass


class RemoteClassifier:
    """Client for an out-of-process classifier speaking the wire protocol.

    One outstanding window at a time per connection; responses for other ids
    (out-of-order delivery) are buffered. A failed connection is retried once;
    after that, and on timeout, the window is reported failed rather than
    blocking the scheduler.
    """

    def __init__(self, host: str, port: int, num_classes: int, timeout_s: float = 2.0):
        self.host = host
        self.port = port
        self.num_classes = num_classes
        self.timeout_s = timeout_s
        self._sock: Optional[socket.socket] = None
        self._buf = b""
        self._pending: dict[int, tuple[Optional[list[float]], Optional[str]]] = {}
        self._next_id = 0

    def connect(self) -> None:
        """Open the connection, retrying once. Raises ClassifierError on failure."""
        last = None
        for _ in range(2):
            try:
                self._sock = socket.create_connection((self.host, self.port),
                                                      timeout=self.timeout_s)
                return
            except OSError as exc:
                last = exc
        raise ClassifierError(f"cannot reach classifier at {self.host}:{self.port}: {last}")

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None
                self._buf = b""
                self._pending.clear()

    def _read_line(self) -> bytes:
        while b"\n" not in self._buf:
            chunk = self._sock.recv(65536)
            if not chunk:
                raise ConnectionError("classifier closed the connection")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line

    def _await_response(self, req_id: int) -> tuple[Optional[list[float]], Optional[str]]:
        while req_id not in self._pending:
            rid, probs, err = decode_response(self._read_line())
            self._pending[rid] = (probs, err)
        return self._pending.pop(req_id)

    def classify(self, window: WindowTensor) -> np.ndarray:
        req_id = self._next_id
        self._next_id += 1
        request = encode_request(req_id, window.data)
        attempts = 0
        while True:
            try:
                if self._sock is None:
                    try:
                        self.connect()
                    except ClassifierError as exc:
                        raise WindowFailure(str(exc)) from exc
                self._sock.sendall(request)
                probs, err = self._await_response(req_id)
                break
            except socket.timeout as exc:
                self.close()
                raise WindowFailure(f"classifier timed out after {self.timeout_s}s") from exc
            except (OSError, ConnectionError) as exc:
                self.close()
                attempts += 1
                if attempts > 1:
                    raise WindowFailure(f"classifier connection failed: {exc}") from exc
        if err is not None:
            raise WindowFailure(f"classifier error: {err}")
        return np.asarray(probs, dtype=np.float64)


class ClassifierGateway:
    """Uniform front for any backend: validates shape, normalizes the output.

    Every vector leaving the gateway has length len(class_names), no negative
    components, and sums to 1 exactly as produced by a single renormalizing
    division, regardless of backend.
    """

    def __init__(self, backend, class_names: Sequence[str], input_size: tuple[int, int, int]):
        self.backend = backend
        self.class_names = tuple(class_names)
        self.input_size = tuple(input_size)

    def classify(self, window: WindowTensor) -> np.ndarray:
        if window.shape != self.input_size:
            raise ValueError(f"window shape {window.shape} != configured {self.input_size}")
        probs = np.asarray(self.backend.classify(window), dtype=np.float64)
        if probs.shape != (len(self.class_names),):
            raise ProtocolError(
                f"backend returned {probs.shape[0] if probs.ndim == 1 else probs.shape} "
                f"probabilities, expected {len(self.class_names)}")
        if (probs < 0).any():
            raise ProtocolError("backend returned a negative probability")
        total = probs.sum()
        if total <= 0:
            raise ProtocolError("backend returned an all-zero vector")
        return probs / total

    def close(self):
        self.backend.close()
