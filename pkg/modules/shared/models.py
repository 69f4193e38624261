"""
Shared Models for the REITs agents application
Contains enumerations used across modules
"""
from enum import Enum


class Sentiment(str, Enum):
    POSITIVE = 'positive'
    NEUTRAL = 'neutral'
    NEGATIVE = 'negative'


class Direction(str, Enum):
    """Direction label for a horizon (up / down / side)"""
    UP = 'up'
    DOWN = 'down'
    SIDE = 'side'


# Fixed argmax tie-break order
DIRECTION_ORDER = (Direction.UP, Direction.SIDE, Direction.DOWN)

HORIZONS = (1, 5, 20)
HORIZON_KEYS = ('t1', 't5', 't20')

SCHEMA_VERSION = '1.0'
