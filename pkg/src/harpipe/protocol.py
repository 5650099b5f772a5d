"""Newline-delimited JSON classifier wire protocol.

One JSON object per line, UTF-8, LF terminated. Request:
``{"id", "n", "h", "w", "frames_b64"}`` where frames_b64 encodes n*h*w*3 RGB
bytes, frame-major row-major. Response: ``{"id", "probs"}`` or
``{"id", "error"}``. Ids are strictly increasing per connection; responses may
arrive out of order.
"""

from __future__ import annotations

import base64
import json
from typing import Optional, Union

import numpy as np

from .errors import ProtocolError


def encode_request(req_id: int, frames: np.ndarray) -> bytes:
    """Serialize an (n, h, w, 3) uint8 tensor into one request line."""
    n, h, w, _ = frames.shape
    payload = {
        "id": req_id,
        "n": n,
        "h": h,
        "w": w,
        "frames_b64": base64.b64encode(frames.tobytes()).decode("ascii"),
    }
    return (json.dumps(payload) + "\n").encode("utf-8")


def decode_request(line: Union[bytes, str]) -> tuple[int, np.ndarray]:
    """Parse a request line back into (id, tensor). Raises ProtocolError."""
    try:
        msg = json.loads(line)
        req_id = int(msg["id"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ProtocolError(f"unparseable request: {exc}") from exc
    try:
        n, h, w = int(msg["n"]), int(msg["h"]), int(msg["w"])
        raw = base64.b64decode(msg["frames_b64"], validate=True)
    except (ValueError, KeyError, TypeError) as exc:
        raise ProtocolError(f"bad request {req_id}: {exc}") from exc
    expected = n * h * w * 3
    if len(raw) != expected:
        raise ProtocolError(f"request {req_id}: payload is {len(raw)} bytes, declared {expected}")
    return req_id, np.frombuffer(raw, dtype=np.uint8).reshape(n, h, w, 3)


def encode_response(req_id: int, probs=None, error: Optional[str] = None) -> bytes:
    if error is not None:
        payload = {"id": req_id, "error": error}
    else:
        payload = {"id": req_id, "probs": [float(p) for p in probs]}
    return (json.dumps(payload) + "\n").encode("utf-8")


def decode_response(line: Union[bytes, str]) -> tuple[int, Optional[list[float]], Optional[str]]:
    """Parse a response line into (id, probs, error)."""
    try:
        msg = json.loads(line)
        req_id = int(msg["id"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ProtocolError(f"unparseable response: {exc}") from exc
    if "error" in msg:
        return req_id, None, str(msg["error"])
    probs = msg.get("probs")
    if not isinstance(probs, list) or not probs:
        raise ProtocolError(f"response {req_id} carries neither probs nor error")
    return req_id, [float(p) for p in probs], None
