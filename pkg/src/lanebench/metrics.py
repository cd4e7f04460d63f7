"""Planning metrics computed from closed-loop episode logs.

All functions are pure over the log; episodes can be scored in parallel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

INFRACTION_KINDS = ("collision", "red-light", "stop-sign", "timeout",
                    "off-route-termination")

# Multiplicative penalty per infraction event; kinds without an entry only
# terminate or flag the episode, they do not scale the score.
PENALTIES = {
    "collision": 0.6,
    "red-light": 0.8,
    "stop-sign": 0.8,
    "timeout": 0.7,
}

TERMINATION_KINDS = ("completion", "timeout", "blocked")

ACCEL_COMFORT_LIMIT = 3.0   # m/s^2
JERK_COMFORT_LIMIT = 5.0    # m/s^3
REFERENCE_SPEED_FLOOR = 0.1  # m/s


@dataclass(frozen=True)
class InfractionEvent:
    kind: str
    frame_index: int
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "frame_index": self.frame_index,
                "detail": self.detail}

    @classmethod
    def from_dict(cls, doc: dict) -> "InfractionEvent":
        return cls(kind=doc["kind"], frame_index=int(doc["frame_index"]),
                   detail=doc.get("detail", ""))


@dataclass(frozen=True)
class EfficiencySample:
    """One checkpoint: the ego speed against the reference it should match."""
    frame_index: int
    ego_speed: float
    reference_speed: float
    has_traffic: bool = False

    def to_dict(self) -> dict:
        return {"frame_index": self.frame_index, "ego_speed": self.ego_speed,
                "reference_speed": self.reference_speed,
                "has_traffic": self.has_traffic}

    @classmethod
    def from_dict(cls, doc: dict) -> "EfficiencySample":
        return cls(frame_index=int(doc["frame_index"]),
                   ego_speed=float(doc["ego_speed"]),
                   reference_speed=float(doc["reference_speed"]),
                   has_traffic=bool(doc.get("has_traffic", False)))


@dataclass
class EpisodeLog:
    scenario: str
    seed: int = 0
    episode_id: str = ""
    dt: float = 0.1
    ego_speeds: list[float] = field(default_factory=list)
    checkpoints: list[EfficiencySample] = field(default_factory=list)
    traffic_speed_samples: list[float] = field(default_factory=list)
    infractions: list[InfractionEvent] = field(default_factory=list)
    route_completion: float = 0.0
    terminated: str = "completion"

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "episode_id": self.episode_id,
            "dt": self.dt,
            "ego_speeds": list(self.ego_speeds),
            "checkpoints": [c.to_dict() for c in self.checkpoints],
            "traffic_speed_samples": list(self.traffic_speed_samples),
            "infractions": [e.to_dict() for e in self.infractions],
            "route_completion": self.route_completion,
            "terminated": self.terminated,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EpisodeLog":
        return cls(
            scenario=doc["scenario"],
            seed=int(doc.get("seed", 0)),
            episode_id=doc.get("episode_id", ""),
            dt=float(doc.get("dt", 0.1)),
            ego_speeds=[float(v) for v in doc.get("ego_speeds", [])],
            checkpoints=[EfficiencySample.from_dict(c)
                         for c in doc.get("checkpoints", [])],
            traffic_speed_samples=[float(v)
                                   for v in doc.get("traffic_speed_samples", [])],
            infractions=[InfractionEvent.from_dict(e)
                         for e in doc.get("infractions", [])],
            route_completion=float(doc["route_completion"]),
            terminated=doc.get("terminated", "completion"),
        )


@dataclass(frozen=True)
class MetricReport:
    driving_score: float
    success: bool
    efficiency: float
    comfort: float

    def to_dict(self) -> dict:
        return {"driving_score": self.driving_score, "success": self.success,
                "efficiency": self.efficiency, "comfort": self.comfort}


def driving_score(log: EpisodeLog) -> float:
    score = 100.0 * log.route_completion
    for event in log.infractions:
        score *= PENALTIES.get(event.kind, 1.0)
    return score


def success(log: EpisodeLog) -> bool:
    return log.route_completion >= 1.0 and not log.infractions


def efficiency(log: EpisodeLog) -> float:
    if not log.checkpoints:
        return 0.0
    total = 0.0
    for sample in log.checkpoints:
        reference = max(sample.reference_speed, REFERENCE_SPEED_FLOOR)
        total += sample.ego_speed / reference
    return 100.0 * total / len(log.checkpoints)


def comfort(log: EpisodeLog) -> float:
    """Share of ticks with comfortable acceleration and jerk, in percent."""
    speeds = log.ego_speeds
    if len(speeds) < 3:
        raise ValueError("comfort needs at least 3 ticks of speed history")
    dt = log.dt
    accel = [(speeds[i] - speeds[i - 1]) / dt for i in range(1, len(speeds))]
    passed = 0
    total = len(accel) - 1
    for i in range(1, len(accel)):
        jerk = (accel[i] - accel[i - 1]) / dt
        if abs(accel[i]) <= ACCEL_COMFORT_LIMIT and abs(jerk) <= JERK_COMFORT_LIMIT:
            passed += 1
    return 100.0 * passed / total


def compute_report(log: EpisodeLog) -> MetricReport:
    return MetricReport(
        driving_score=driving_score(log),
        success=success(log),
        efficiency=efficiency(log),
        comfort=comfort(log),
    )
