"""
Prediction output parsing
"<think>reasoning</think>" followed by the strict horizon JSON
"""
import json
import math

from modules.prediction.models import (
    FormatErrorCode, HORIZON_FIELDS, HorizonPrediction, PROBABILITY_FIELDS, PredictionSet,
    ValidationPolicy,
)
from modules.shared.errors import PredictionFormatError
from modules.shared.models import DIRECTION_ORDER, HORIZON_KEYS

THINK_OPEN = '<think>'
THINK_CLOSE = '</think>'

_decoder = json.JSONDecoder()


def has_think_block(text):
    start = text.find(THINK_OPEN)
    return start >= 0 and text.find(THINK_CLOSE, start + len(THINK_OPEN)) >= 0


def extract_json(text):
    """First JSON object after the think block (or anywhere when the block is absent)

    Returns (document or None, tags_present).
    """
    text = text or ''
    tags = has_think_block(text)
    start = text.rfind(THINK_CLOSE) + len(THINK_CLOSE) if tags else 0
    pos = text.find('{', start)
    while pos >= 0:
        try:
            document, _ = _decoder.raw_decode(text, pos)
        except ValueError:
            document = None
        if isinstance(document, dict):
            return document, tags
        pos = text.find('{', pos + 1)
    return None, tags


def _number(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def extract_probabilities(document):
    """Lenient read of (up, down, side) per horizon key; None where not numeric"""
    result = {}
    for key in HORIZON_KEYS:
        horizon = document.get(key) if isinstance(document, dict) else None
        probs = None
        if isinstance(horizon, dict):
            values = [_number(horizon.get(f)) for f in PROBABILITY_FIELDS]
            if all(v is not None for v in values):
                probs = tuple(values)
        result[key] = probs
    return result


def numeric_checks(document, policy):
    """Per horizon: probability sum, dominant range and p_min (9 checks, in that order)"""
    checks = []
    for key, probs in extract_probabilities(document).items():
        if probs is None:
            checks.extend([False, False, False])
            continue
        checks.append(abs(sum(probs) - 1.0) <= policy.sum_tol)
        checks.append(policy.dominant_lo <= max(probs) <= policy.dominant_hi)
        checks.append(min(probs) >= policy.p_min)
    return checks


def _validate_horizon(key, horizon, policy):
    if not isinstance(horizon, dict):
        raise PredictionFormatError(FormatErrorCode.MISSING_HORIZON, f"horizon {key} missing")
    values = {}
    for name in HORIZON_FIELDS:
        value = _number(horizon.get(name))
        if value is None:
            raise PredictionFormatError(FormatErrorCode.MISSING_FIELD, f"{key}.{name} missing or not numeric")
        values[name] = value
    if not 0 <= values['confidence'] <= 1:
        raise PredictionFormatError(FormatErrorCode.CONFIDENCE_RANGE,
                                    f"{key}.confidence {values['confidence']} outside [0, 1]")
    probs = [values[name] for name in PROBABILITY_FIELDS]
    total = sum(probs)
    if abs(total - 1.0) > policy.sum_tol:
        raise PredictionFormatError(FormatErrorCode.SUM_VIOLATION, f"{key} probabilities sum to {total:g}")
    if min(probs) < policy.p_min:
        raise PredictionFormatError(FormatErrorCode.BELOW_P_MIN,
                                    f"{key} probability {min(probs):g} below {policy.p_min:g}")
    if not policy.dominant_lo <= max(probs) <= policy.dominant_hi:
        raise PredictionFormatError(
            FormatErrorCode.DOMINANT_OUT_OF_RANGE,
            f"{key} dominant probability {max(probs):g} outside [{policy.dominant_lo:g}, {policy.dominant_hi:g}]")
    return HorizonPrediction(**values)


def parse_prediction(text, policy=None):
    """Typed PredictionSet from model output; raises PredictionFormatError with a code"""
    policy = policy or ValidationPolicy()
    document, tags = extract_json(text)
    if document is None:
        raise PredictionFormatError(FormatErrorCode.NO_JSON, "no parseable JSON object in output")
    horizons = {key: _validate_horizon(key, document.get(key), policy) for key in HORIZON_KEYS}
    return PredictionSet(raw_text=text, tags_present=tags, **horizons)


def dominant_direction(horizon):
    """Argmax direction; ties resolved in the order up, side, down"""
    best = max(horizon.probability(d) for d in DIRECTION_ORDER)
    return next(d for d in DIRECTION_ORDER if horizon.probability(d) == best)


def serialize_prediction(prediction, reasoning=''):
    """Model-output form of a PredictionSet (think block plus pinned JSON)"""
    return f"{THINK_OPEN}\n{reasoning}\n{THINK_CLOSE}\n{json.dumps(prediction.to_dict())}"
