"""
Prediction agent
Assembles the prediction input from the four agent reports and queries the gateway
"""
import logging

from llm_integration import ChatRequest, canonical_json
from modules.agent_context.models import AGENT_ORDER
from modules.prediction.models import ValidationPolicy
from modules.prediction.parser import parse_prediction
from modules.shared.errors import DataError, PredictionFormatError
from modules.shared.models import SCHEMA_VERSION
from modules.threshold_labeler.models import HorizonThresholds

RECENT_CLOSES = 20


def build_price_context(bars, threshold):
    """Recent closes, 1/5/20-day changes (fractions) and the horizon thresholds at the last bar"""
    bars = list(bars)
    if len(bars) < 21:
        raise DataError("price context needs 21 bars")
    closes = [b.close for b in bars]
    theta = threshold.theta
    eps = HorizonThresholds.from_theta(theta)
    return {
        'as_of': bars[-1].date.isoformat(),
        'close': closes[-1],
        'recent_closes': closes[-RECENT_CLOSES:],
        'chg_1d': closes[-1] / closes[-2] - 1.0,
        'chg_5d': closes[-1] / closes[-6] - 1.0,
        'chg_20d': closes[-1] / closes[-21] - 1.0,
        'theta': theta,
        'eps1': eps.eps1,
        'eps5': eps.eps5,
        'eps20': eps.eps20,
    }


def assemble_prediction_input(reports, price_context):
    """Deterministic prediction payload: agent sections in fixed order plus price context"""
    by_kind = {r.agent: r for r in reports}
    missing = [kind.value for kind in AGENT_ORDER if kind not in by_kind]
    if missing:
        raise DataError(f"prediction input lacks agent report(s): {', '.join(missing)}")
    dates = {r.as_of for r in reports}
    if len(dates) != 1:
        raise DataError(f"agent reports span several dates: {sorted(d.isoformat() for d in dates)}")
    as_of = dates.pop()
    if price_context.get('as_of') not in (None, as_of.isoformat()):
        raise DataError(f"price context dated {price_context['as_of']} does not match reports {as_of.isoformat()}")
    funds = {r.fund_code for r in reports if r.fund_code}
    if len(funds) > 1:
        raise DataError(f"agent reports cover several funds: {sorted(funds)}")

    return {
        'schema_version': SCHEMA_VERSION,
        'fund_code': funds.pop() if funds else '',
        'as_of': as_of.isoformat(),
        'agents': {
            kind.value: {'payload': by_kind[kind].payload, 'narrative': by_kind[kind].narrative}
            for kind in AGENT_ORDER
        },
        'price_context': price_context,
    }


class PredictionAgent:
    """Queries the gateway for multi-horizon probabilities and validates the answer"""

    def __init__(self, gateway, prompts=None, policy=None, format_retries=2):
        self.gateway = gateway
        self.prompts = prompts
        self.policy = policy or ValidationPolicy()
        self.format_retries = format_retries
        self._system = None

    def system_prompt(self):
        if self._system is None:
            self._system = self.prompts.render('prediction', policy=self.policy) if self.prompts else ''
        return self._system

    def predict(self, payload):
        """PredictionSet for an assembled payload; the last format error is raised after retries"""
        user = canonical_json(payload)
        system = self.system_prompt()
        last_error = None
        for attempt in range(self.format_retries + 1):
            tag = f"prediction|{payload['fund_code']}|{payload['as_of']}"
            if attempt:
                tag = f"{tag}|retry{attempt}"
            text = self.gateway.complete(ChatRequest(system=system, user=user, tag=tag))
            try:
                return parse_prediction(text, self.policy)
            except PredictionFormatError as e:
                last_error = e
                logging.warning(f"⚠️ {tag}: unusable prediction output {e}")
        raise last_error
