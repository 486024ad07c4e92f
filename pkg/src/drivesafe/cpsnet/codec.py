"""Length-prefixed envelope codec for the layered message fabric.

A frame is a 4-byte big-endian body length followed by a canonical JSON
body with the fixed fields version, msg_type, driver_id, seq, sent_at and
payload.  ``decode(encode(e)) == e`` holds bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from enum import Enum

from ..errors import DecodeError

WIRE_VERSION = 1
_HEADER = struct.Struct(">I")


class MsgType(str, Enum):
    SENSOR_BATCH = "SensorBatch"
    ACTIVITY_EVENT = "ActivityEvent"
    MOOD_RESULT = "MoodResult"
    TRANSACTION_BATCH = "TransactionBatch"
    RULE_SET = "RuleSet"
    REPAIR_PLAN = "RepairPlanMsg"
    SAFETY_NOTIFICATION = "SafetyNotification"
    CATALOG_REQUEST = "CatalogRequest"
    CATALOG_RESPONSE = "CatalogResponse"


_FIELDS = ("version", "msg_type", "driver_id", "seq", "sent_at", "payload")


@dataclass(frozen=True)
class Envelope:
    msg_type: MsgType
    driver_id: str
    seq: int
    sent_at: int
    payload: dict = field(default_factory=dict)
    version: int = WIRE_VERSION

    def body(self) -> dict:
        return {
            "version": self.version,
            "msg_type": self.msg_type.value,
            "driver_id": self.driver_id,
            "seq": self.seq,
            "sent_at": self.sent_at,
            "payload": self.payload,
        }

    def payload_digest(self) -> str:
        blob = json.dumps(self.payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def encode(env: Envelope) -> bytes:
    body = json.dumps(env.body(), sort_keys=True, separators=(",", ":")).encode()
    return _HEADER.pack(len(body)) + body


def decode(frame: bytes) -> Envelope:
    if len(frame) < _HEADER.size:
        raise DecodeError(f"frame of {len(frame)} bytes lacks a length prefix", field="length")
    (length,) = _HEADER.unpack_from(frame)
    body = frame[_HEADER.size:]
    if len(body) < length:
        raise DecodeError(
            f"length prefix {length} exceeds body of {len(body)} bytes", field="length"
        )
    if len(body) > length:
        raise DecodeError(
            f"body of {len(body)} bytes overruns length prefix {length}", field="length"
        )
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(f"body is not valid JSON: {exc}", field="payload") from exc
    if not isinstance(obj, dict):
        raise DecodeError("body must be a JSON object", field="payload")
    for name in _FIELDS:
        if name not in obj:
            raise DecodeError(f"missing field {name!r}", field=name)
    if obj["version"] != WIRE_VERSION:
        raise DecodeError(f"unsupported version {obj['version']!r}", field="version")
    try:
        msg_type = MsgType(obj["msg_type"])
    except ValueError as exc:
        raise DecodeError(f"unknown msg_type {obj['msg_type']!r}", field="msg_type") from exc
    if not isinstance(obj["seq"], int) or isinstance(obj["seq"], bool):
        raise DecodeError(f"seq must be an integer, got {obj['seq']!r}", field="seq")
    if not isinstance(obj["sent_at"], int) or isinstance(obj["sent_at"], bool):
        raise DecodeError(f"sent_at must be an integer, got {obj['sent_at']!r}", field="sent_at")
    if not isinstance(obj["driver_id"], str):
        raise DecodeError("driver_id must be a string", field="driver_id")
    if not isinstance(obj["payload"], dict):
        raise DecodeError("payload must be an object", field="payload")
    return Envelope(
        msg_type=msg_type,
        driver_id=obj["driver_id"],
        seq=obj["seq"],
        sent_at=obj["sent_at"],
        payload=obj["payload"],
        version=obj["version"],
    )
