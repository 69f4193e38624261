"""
Reward scoring
R = alpha * correctness + beta * FormatScore, both terms within [0, 1]
"""
from modules.prediction.models import HORIZON_FIELDS, ValidationPolicy
from modules.prediction.parser import (
    dominant_direction, extract_json, extract_probabilities, numeric_checks,
)
from modules.reward.models import FormatScore, RewardBreakdown, RewardWeights
from modules.shared.models import DIRECTION_ORDER, Direction, HORIZONS, HORIZON_KEYS

# FormatScore component weights in tenths (basic, fields, numeric)
FORMAT_WEIGHTS = (3, 3, 4)
FIELD_COUNT = len(HORIZON_KEYS) * len(HORIZON_FIELDS)


def _argmax(probs):
    by_direction = dict(zip((Direction.UP, Direction.DOWN, Direction.SIDE), probs))
    best = max(probs)
    return next(d for d in DIRECTION_ORDER if by_direction[d] == best)


def predicted_directions(prediction):
    """Dominant direction per horizon key from a PredictionSet or a parsed JSON document"""
    if isinstance(prediction, dict):
        return {key: _argmax(probs) if probs else None
                for key, probs in extract_probabilities(prediction).items()}
    return {key: dominant_direction(prediction.horizon(key)) for key in HORIZON_KEYS}


def correctness(prediction, labels, weights=None):
    """Weighted share of horizons whose dominant direction equals the label

    labels maps horizon k (1/5/20) to a Direction. Returns (value, {k: indicator}).
    """
    weights = weights or RewardWeights()
    directions = predicted_directions(prediction)
    indicators = {}
    for k, key in zip(HORIZONS, HORIZON_KEYS):
        label = labels.get(k)
        indicators[k] = int(label is not None and directions[key] == Direction(label))
    value = sum(weights.horizon_weight(k) * i for k, i in indicators.items())
    return min(1.0, max(0.0, value)), indicators


def _fields_present(document):
    if not isinstance(document, dict):
        return 0
    present = 0
    for key in HORIZON_KEYS:
        horizon = document.get(key)
        if not isinstance(horizon, dict):
            continue
        for name in HORIZON_FIELDS:
            value = horizon.get(name)
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                present += 1
    return present


def format_score(raw_text, policy=None):
    """Think tags and JSON (basic), field completeness and numeric constraints"""
    policy = policy or ValidationPolicy()
    document, tags = extract_json(raw_text or '')
    basic = 0.5 * tags + 0.5 * (document is not None)
    fields = _fields_present(document) / FIELD_COUNT
    checks = numeric_checks(document, policy) if document is not None else []
    numeric = sum(checks) / 9 if checks else 0.0
    wb, wf, wn = FORMAT_WEIGHTS
    total = (wb * basic + wf * fields + wn * numeric) / 10
    return FormatScore(basic=basic, fields=fields, numeric=numeric, total=total)


def reward(correctness_value, format_total, weights=None):
    weights = weights or RewardWeights()
    value = weights.alpha * correctness_value + weights.beta * format_total
    return min(1.0, max(0.0, value))


def score_text(raw_text, labels, weights=None, policy=None):
    """Full breakdown for one candidate text against realized labels"""
    weights = weights or RewardWeights()
    document, _ = extract_json(raw_text or '')
    value, indicators = correctness(document or {}, labels, weights)
    fmt = format_score(raw_text, policy)
    return RewardBreakdown(
        i1=indicators[1], i5=indicators[5], i20=indicators[20],
        correctness=value,
        format_basic=fmt.basic, format_fields=fmt.fields, format_numeric=fmt.numeric,
        format_score=fmt.total,
        reward=reward(value, fmt.total, weights),
    )
