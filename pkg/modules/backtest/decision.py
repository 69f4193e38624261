"""
Decision layer
Maps multi-horizon predictions to a position adjustment signal, through the
gateway or through a deterministic rule policy
"""
import logging
import re

from llm_integration import ChatRequest, canonical_json
from modules.backtest.models import ActionSignal
from modules.prediction.models import HorizonPrediction, PredictionSet
from modules.prediction.parser import THINK_CLOSE, dominant_direction, extract_json
from modules.shared.errors import DecisionParseError
from modules.shared.models import Direction, HORIZON_KEYS

_ACTION_TOKEN = re.compile(r'\b(' + '|'.join(s.value for s in ActionSignal) + r')\b')


def parse_decision(text):
    """ActionSignal declared in the model output (JSON 'action' field or a bare token)"""
    text = text or ''
    document, _ = extract_json(text)
    if document is not None and 'action' in document:
        try:
            return ActionSignal(str(document['action']).strip())
        except ValueError:
            raise DecisionParseError(f"unrecognized action {document['action']!r}")
    answer = text[text.rfind(THINK_CLOSE) + len(THINK_CLOSE):] if THINK_CLOSE in text else text
    match = _ACTION_TOKEN.search(answer)
    if match is None:
        raise DecisionParseError(f"no action token in decision output: {answer.strip()[:80]!r}")
    return ActionSignal(match.group(1))


def prediction_from_dict(data):
    return PredictionSet(**{key: HorizonPrediction(**data[key]) for key in HORIZON_KEYS})


class RuleDecisionPolicy:
    """Acts on the T+5 dominant direction when it is confident enough; T+20 agreement doubles the step"""

    def __init__(self, min_probability=0.55):
        self.min_probability = min_probability

    def decide(self, prediction):
        t5 = prediction.t5
        direction = dominant_direction(t5)
        p = t5.probability(direction)
        if direction is Direction.SIDE or p < self.min_probability:
            return ActionSignal.HOLD, f"T+5 {direction.value} at {p:.2f}: hold"
        confirmed = dominant_direction(prediction.t20) is direction
        if direction is Direction.UP:
            signal = ActionSignal.INCREASE_40 if confirmed else ActionSignal.INCREASE_20
        else:
            signal = ActionSignal.REDUCE_40 if confirmed else ActionSignal.REDUCE_20
        reason = f"T+5 {direction.value} at {p:.2f}{', confirmed by T+20' if confirmed else ''}: {signal.value}"
        return signal, reason

    def decide_from_payload(self, payload):
        return self.decide(prediction_from_dict(payload['prediction']))


class DecisionAgent:
    """Asks the gateway for an action; parse failures are retried, then raised"""

    def __init__(self, gateway, prompts=None, format_retries=2):
        self.gateway = gateway
        self.prompts = prompts
        self.format_retries = format_retries
        self._system = None

    def system_prompt(self):
        if self._system is None:
            signals = [s.value for s in ActionSignal]
            self._system = self.prompts.render('decision', signals=signals) if self.prompts else ''
        return self._system

    def decide(self, prediction, account, price, config, fund_code, day):
        payload = {
            'fund_code': fund_code,
            'as_of': day.isoformat(),
            'prediction': prediction.to_dict(),
            'position': {
                'cash': account.cash,
                'shares': account.shares,
                'price': price,
                'position_fraction': account.shares * price / account.nav(price) if account.nav(price) else 0.0,
            },
            'risk': {
                'step_notional': config.step_notional,
                'max_position_fraction': config.max_position_fraction,
                'lot_size': config.lot_size,
            },
        }
        system = self.system_prompt()
        user = canonical_json(payload)
        last_error = None
        for attempt in range(self.format_retries + 1):
            tag = f"decision|{fund_code}|{day.isoformat()}"
            if attempt:
                tag = f"{tag}|retry{attempt}"
            try:
                return parse_decision(self.gateway.complete(ChatRequest(system=system, user=user, tag=tag)))
            except DecisionParseError as e:
                last_error = e
                logging.warning(f"⚠️ {tag}: {e}")
        raise last_error
