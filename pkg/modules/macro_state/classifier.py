"""
Four-quadrant macro classifier
Rate trend (20-day bp change) x equity market state (20-day change, RSI)
"""
import math

from modules.macro_state.models import (
    EQUITY_UP, EquityState, MacroQuadrant, Quadrant, RATE_DOWN, RATE_UP, RateTrend,
)
from modules.shared.errors import DataError

QUADRANT_RATIONALE = {
    Quadrant.Q1: "rates down, equities up: cautiously optimistic",
    Quadrant.Q2: "rates up, equities up: double squeeze on REITs",
    Quadrant.Q3: "rates down, equities weak: best allocation window for REITs",
    Quadrant.Q4: "rates up, equities weak: defensive",
}


def classify_rate_trend(bp_change_20d):
    if not math.isfinite(bp_change_20d):
        raise DataError(f"rate change is not finite: {bp_change_20d}")
    if bp_change_20d < -20:
        return RateTrend.CLEARLY_DOWN
    if bp_change_20d < -5:
        return RateTrend.SLOWLY_DOWN
    if bp_change_20d <= 5:
        return RateTrend.SIDEWAYS
    if bp_change_20d <= 20:
        return RateTrend.SLOWLY_UP
    return RateTrend.CLEARLY_UP


def classify_equity_state(chg_20d_pct, rsi):
    """Rules in precedence order bull, bear, osc_strong, osc_weak, oscillation"""
    if not 0 <= rsi <= 100:
        raise DataError(f"RSI out of range: {rsi}")
    if chg_20d_pct > 5 and rsi > 60:
        return EquityState.BULL
    if chg_20d_pct < -5 and rsi < 40:
        return EquityState.BEAR
    if 0 <= chg_20d_pct <= 5 and 50 <= rsi <= 60:
        return EquityState.OSC_STRONG
    if -5 <= chg_20d_pct <= 0 and 40 <= rsi <= 50:
        return EquityState.OSC_WEAK
    if -2 <= chg_20d_pct <= 2 and 40 <= rsi <= 60:
        return EquityState.OSCILLATION
    return EquityState.INDETERMINATE


def quadrant(rate, equity):
    rate = RateTrend(rate)
    equity = EquityState(equity)

    def result(value, rationale=None):
        return MacroQuadrant(value=value, rationale=rationale or QUADRANT_RATIONALE[value],
                             rate=rate, equity=equity)

    if rate is RateTrend.SIDEWAYS:
        return result(Quadrant.TRANSITION, "rates sideways: transition zone")
    if equity is EquityState.INDETERMINATE:
        return result(Quadrant.TRANSITION, "equity state indeterminate: transition zone")
    if rate in RATE_DOWN:
        return result(Quadrant.Q1 if equity in EQUITY_UP else Quadrant.Q3)
    if rate in RATE_UP and equity in EQUITY_UP:
        return result(Quadrant.Q2)
    if equity is EquityState.OSCILLATION:
        return result(Quadrant.TRANSITION, "rates up, equities oscillating: transition zone")
    return result(Quadrant.Q4)
