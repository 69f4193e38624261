"""
Prediction Models
Multi-horizon direction probabilities and the validation policy shared with reward scoring
"""
from dataclasses import dataclass, field
from enum import Enum

from modules.shared.errors import ConfigError
from modules.shared.models import Direction, HORIZONS, HORIZON_KEYS

PROBABILITY_FIELDS = ('up', 'down', 'side')
HORIZON_FIELDS = PROBABILITY_FIELDS + ('confidence',)


class FormatErrorCode(str, Enum):
    NO_JSON = 'no_json'
    MISSING_HORIZON = 'missing_horizon'
    MISSING_FIELD = 'missing_field'
    CONFIDENCE_RANGE = 'confidence_range'
    SUM_VIOLATION = 'sum_violation'
    BELOW_P_MIN = 'below_p_min'
    DOMINANT_OUT_OF_RANGE = 'dominant_out_of_range'


@dataclass(frozen=True)
class ValidationPolicy:
    sum_tol: float = 0.01
    p_min: float = 0.01
    dominant_lo: float = 0.34
    dominant_hi: float = 0.95

    def __post_init__(self):
        if not 0 < self.p_min < 1 / 3:
            raise ConfigError('validation.p_min', "must lie in (0, 1/3)")
        if not 1 / 3 < self.dominant_lo <= self.dominant_hi <= 1:
            raise ConfigError('validation.dominant_range', "must lie within (1/3, 1]")
        if self.sum_tol < 0:
            raise ConfigError('validation.sum_tol', "must be >= 0")


@dataclass(frozen=True)
class HorizonPrediction:
    up: float
    down: float
    side: float
    confidence: float

    def probability(self, direction):
        return getattr(self, Direction(direction).value)

    def to_dict(self):
        return {'up': self.up, 'down': self.down, 'side': self.side, 'confidence': self.confidence}


@dataclass(frozen=True)
class PredictionSet:
    t1: HorizonPrediction
    t5: HorizonPrediction
    t20: HorizonPrediction
    raw_text: str = field(default='', compare=False)
    # False when the JSON was found without a think block
    tags_present: bool = field(default=True, compare=False)

    def horizon(self, k):
        key = k if isinstance(k, str) else f"t{k}"
        if key not in HORIZON_KEYS:
            raise KeyError(f"unknown horizon {k}")
        return getattr(self, key)

    def horizons(self):
        return [(k, self.horizon(k)) for k in HORIZONS]

    def to_dict(self):
        return {key: getattr(self, key).to_dict() for key in HORIZON_KEYS}
