"""
Data models for the multiregeneration engine.

Dataclasses for tracker settings, path outcomes and the per-run reports.
Algebraic objects (polynomials, slices, witness sets) live next to the code
that operates on them.
"""

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

import config

SliceKey = Tuple[int, ...]


@dataclass(frozen=True)
class TrackerSettings:
    """Numerical knobs for one run of the path tracker."""
    step_initial: float = config.STEP_INITIAL
    step_min: float = config.STEP_MIN
    step_max: float = config.STEP_MAX
    step_growth: float = config.STEP_GROWTH
    step_growth_after: int = config.STEP_GROWTH_AFTER
    newton_iterations_max: int = config.NEWTON_ITERATIONS_MAX
    tol_track: float = config.TOL_TRACK
    tol_final: float = config.TOL_FINAL
    endgame_start: float = config.ENDGAME_START
    endgame_cycle_max: int = config.ENDGAME_CYCLE_MAX
    endgame_samples_per_loop: int = config.ENDGAME_SAMPLES_PER_LOOP
    endgame_radius_ratio: float = config.ENDGAME_RADIUS_RATIO
    endgame_radius_levels: int = config.ENDGAME_RADIUS_LEVELS
    condition_max: float = config.CONDITION_MAX
    divergence_norm: float = config.DIVERGENCE_NORM
    max_steps: int = config.MAX_STEPS
    workers: int = config.WORKERS
    show_progress: bool = config.SHOW_PROGRESS

    def __post_init__(self):
        if not 0 < self.step_min < self.step_initial <= 1:
            raise ValueError("need 0 < step_min < step_initial <= 1")
        if self.tol_track <= 0 or self.tol_final <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.endgame_start < 1:
            raise ValueError("endgame_start must lie in (0, 1)")

    @classmethod
    def from_config(cls, **overrides) -> "TrackerSettings":
        """Defaults from config.py, with None-valued overrides ignored."""
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in overrides.items() if k in known and v is not None})


class PathStatus(Enum):
    SUCCESS = "success"
    SINGULAR = "singular"
    FAILURE = "failure"


class FailureReason(Enum):
    STEP_MIN = "step_min"
    ILL_CONDITIONED = "ill_conditioned"
    DIVERGING = "diverging"
    MAX_STEPS = "max_steps"
    ENDGAME = "endgame"
    START_NEWTON = "start_newton"


@dataclass
class PathOutcome:
    """Result of tracking one path from t=1 to t=0."""
    endpoint: np.ndarray
    status: PathStatus
    residual: float = float("inf")
    condition: float = float("inf")
    steps: int = 0
    cycle_number: int = 1
    reason: Optional[FailureReason] = None

    @property
    def success(self) -> bool:
        return self.status is PathStatus.SUCCESS

    @property
    def singular(self) -> bool:
        return self.status is PathStatus.SINGULAR

    @property
    def failed(self) -> bool:
        return self.status is PathStatus.FAILURE

    def describe(self) -> str:
        if self.failed:
            return f"failure ({self.reason.value})"
        if self.singular:
            return f"singular (cycle {self.cycle_number})"
        return "success"


@dataclass
class StageReport:
    """Counts for one multiregeneration stage (one new equation)."""
    stage: int
    codim: int
    degree: SliceKey = ()
    start_points: Dict[SliceKey, int] = field(default_factory=dict)
    union_paths: int = 0
    witness_points: Dict[SliceKey, int] = field(default_factory=dict)
    carried: Dict[SliceKey, int] = field(default_factory=dict)
    nonsolutions: Dict[SliceKey, int] = field(default_factory=dict)
    nonisolated: Dict[SliceKey, int] = field(default_factory=dict)
    inconclusive: Dict[SliceKey, int] = field(default_factory=dict)
    rejected: Dict[SliceKey, int] = field(default_factory=dict)
    failures: int = 0

    @property
    def total_starts(self) -> int:
        return sum(self.start_points.values())

    @property
    def total_witness_points(self) -> int:
        return sum(self.witness_points.values())

    @property
    def total_nonsolutions(self) -> int:
        return sum(self.nonsolutions.values())

    @property
    def total_nonisolated(self) -> int:
        return sum(self.nonisolated.values())

    def bump(self, table: str, key: SliceKey, amount: int = 1) -> None:
        counts = getattr(self, table)
        counts[key] = counts.get(key, 0) + amount


class Verdict(Enum):
    MEMBER = "member"
    NOT_MEMBER = "not member"
    INCONCLUSIVE = "inconclusive"


@dataclass
class MembershipResult:
    """Outcome of the membership test for one point."""
    verdict: Verdict
    slice_type: Optional[SliceKey] = None
    skipped: List[SliceKey] = field(default_factory=list)
    endpoints: Dict[SliceKey, List[np.ndarray]] = field(default_factory=dict)
    failures: int = 0
    diagnostics: List[str] = field(default_factory=list)

    @property
    def is_member(self) -> bool:
        return self.verdict is Verdict.MEMBER


@dataclass(frozen=True)
class TraceSample:
    """Mean of the general coordinate over tracked points at one t."""
    t: float
    value: complex
    poisoned: bool = False


@dataclass
class RunConfig:
    """Everything that determines a CLI run."""
    seed: int = config.DEFAULT_SEED
    settings: TrackerSettings = field(default_factory=TrackerSettings)
    randomize: bool = False
    perturb: bool = False
    order: str = "input"
    slice_types: Optional[List[SliceKey]] = None
    target_dimension: Optional[int] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    report: str = "table"

    def __post_init__(self):
        if self.order not in ("input", "degree"):
            raise ValueError(f"unknown equation order {self.order!r}")
        if self.report not in ("table", "json"):
            raise ValueError(f"unknown report kind {self.report!r}")


@dataclass
class SolveOptions:
    """Choices for one multiregeneration run."""
    randomize: bool = False
    order: str = "input"
    target_dimension: Optional[int] = None
    slice_types: Optional[List[SliceKey]] = None
    junk_filter: bool = True

    def __post_init__(self):
        if self.order not in ("input", "degree"):
            raise ValueError(f"unknown equation order {self.order!r}")
        if self.target_dimension is not None and self.target_dimension < 0:
            raise ValueError("target_dimension must be nonnegative")
