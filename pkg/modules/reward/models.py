"""
Reward Models
Reward weights, score breakdown and training records
"""
import math
from dataclasses import asdict, dataclass
from datetime import date
from enum import Enum
from typing import Optional

from modules.shared.errors import WeightInvariantError

WEIGHT_TOLERANCE = 1e-9


class RecordKind(str, Enum):
    SFT = 'sft'
    GSPO_CANDIDATE = 'gspo_candidate'


@dataclass(frozen=True)
class RewardWeights:
    alpha: float = 0.8
    beta: float = 0.2
    w1: float = 1 / 3
    w5: float = 1 / 3
    w20: float = 1 / 3

    def __post_init__(self):
        values = asdict(self)
        negative = [name for name, value in values.items() if value < 0]
        if negative:
            raise WeightInvariantError(f"negative reward weights: {', '.join(negative)}")
        if not math.isclose(self.alpha + self.beta, 1.0, rel_tol=0, abs_tol=WEIGHT_TOLERANCE):
            raise WeightInvariantError(f"alpha + beta = {self.alpha + self.beta}, expected 1")
        if not math.isclose(self.w1 + self.w5 + self.w20, 1.0, rel_tol=0, abs_tol=WEIGHT_TOLERANCE):
            raise WeightInvariantError(f"w1 + w5 + w20 = {self.w1 + self.w5 + self.w20}, expected 1")

    def horizon_weight(self, k):
        return {1: self.w1, 5: self.w5, 20: self.w20}[k]


@dataclass(frozen=True)
class FormatScore:
    basic: float
    fields: float
    numeric: float
    total: float


@dataclass(frozen=True)
class RewardBreakdown:
    i1: int
    i5: int
    i20: int
    correctness: float
    format_basic: float
    format_fields: float
    format_numeric: float
    format_score: float
    reward: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TrainingRecord:
    record_kind: RecordKind
    fund_code: str
    date: date
    group_id: str
    candidate_index: int
    input_payload: dict
    text: str
    labels: dict
    reward: Optional[RewardBreakdown] = None

    def to_dict(self):
        return {
            'record_kind': self.record_kind.value,
            'group_id': self.group_id,
            'candidate_index': self.candidate_index,
            'metadata': {'fund_code': self.fund_code, 'date': self.date.isoformat()},
            'input_payload': self.input_payload,
            'target_or_candidate_text': self.text,
            'labels': self.labels,
            'reward': self.reward.to_dict() if self.reward else None,
        }
