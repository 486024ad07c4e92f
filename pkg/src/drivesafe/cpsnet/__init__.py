"""Layered message fabric: codec, scheduler, node actors, scenario runner."""

from .codec import Envelope, MsgType, decode, encode
from .fabric import Fabric, Link, LinkConfig, Node, envelopes_from_events, events_to_jsonl
from .nodes import (
    ActivityTimeline,
    BANSink,
    CameraNode,
    CloudNode,
    EdgeNode,
    EnvGateway,
    MiningConfig,
    OnVehicleNode,
    PlannerConfig,
)
from .runner import ScenarioResult, load_manifest, run_scenario

__all__ = [
    "ActivityTimeline",
    "BANSink",
    "CameraNode",
    "CloudNode",
    "EdgeNode",
    "EnvGateway",
    "Envelope",
    "Fabric",
    "Link",
    "LinkConfig",
    "MiningConfig",
    "MsgType",
    "Node",
    "OnVehicleNode",
    "PlannerConfig",
    "ScenarioResult",
    "decode",
    "encode",
    "envelopes_from_events",
    "events_to_jsonl",
    "load_manifest",
    "run_scenario",
]
