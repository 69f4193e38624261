"""
Strategies
The analysis, prediction and decision pipeline for one fund-date
"""
import logging

from modules.backtest.decision import DecisionAgent, RuleDecisionPolicy
from modules.backtest.models import ActionSignal
from modules.prediction.assembler import PredictionAgent, assemble_prediction_input, build_price_context
from modules.shared.errors import DecisionParseError, PredictionFormatError

PAYLOAD_CACHE = 'prediction_payload'


class FixedSignalStrategy:
    """Emits the same signal every day"""

    def __init__(self, signal=ActionSignal.HOLD):
        self.signal = ActionSignal(signal)

    def decide(self, view, fund_code, account, price, config):
        return self.signal


class AgentStrategy:
    """Agents -> prediction -> decision; unusable model output falls back to hold"""

    def __init__(self, runner, predictor, decider=None, use_rule_policy=False):
        self.runner = runner
        self.predictor = predictor
        self.decider = decider
        self.rule_policy = RuleDecisionPolicy() if use_rule_policy or decider is None else None

    def prediction_payload(self, view, fund_code):
        """Prediction input of a fund-date, cached on the store for strategies running the same agents"""
        return view.store.memo(
            (PAYLOAD_CACHE, fund_code, view.as_of, self.runner.cache_key),
            lambda: assemble_prediction_input(
                self.runner.run(view, fund_code),
                build_price_context(view.fund_bars(fund_code), self.runner.latest_theta(view, fund_code))))

    def decide(self, view, fund_code, account, price, config):
        day = view.as_of
        try:
            prediction = self.predictor.predict(self.prediction_payload(view, fund_code))
        except PredictionFormatError as e:
            logging.warning(f"⚠️ {fund_code} {day.isoformat()}: prediction unusable ({e}), holding")
            return ActionSignal.HOLD
        if self.rule_policy is not None:
            signal, _ = self.rule_policy.decide(prediction)
            return signal
        try:
            return self.decider.decide(prediction, account, price, config, fund_code, day)
        except DecisionParseError as e:
            logging.warning(f"⚠️ {fund_code} {day.isoformat()}: decision unusable ({e}), holding")
            return ActionSignal.HOLD


def build_agent_strategy(runner, gateway, prompts=None, policy=None, format_retries=2):
    """Agent strategy whose decision layer goes through the same gateway"""
    predictor = PredictionAgent(gateway, prompts, policy, format_retries)
    return AgentStrategy(runner, predictor, DecisionAgent(gateway, prompts, format_retries))
