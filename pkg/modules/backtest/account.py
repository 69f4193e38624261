"""
Account ledger
Signal-to-target sizing and fee-aware execution in board lots
"""
import logging

from modules.backtest.models import ActionSignal, Trade
from modules.shared.errors import AccountInvariantError

CASH_TOLERANCE = 1e-6


def floor_lot(shares, lot_size):
    if shares <= 0:
        return 0
    return int(shares // lot_size) * lot_size


def max_affordable(cash, price, config):
    """Largest lot multiple whose cost including the fee fits in cash"""
    return floor_lot(cash / (price * (1 + config.fee_rate)), config.lot_size)


def target_shares(signal, account, price, config, in_building_phase=False, steps_today=0):
    """Share count the account should hold after acting on the signal

    Steps are fixed notional amounts of step_fraction x initial capital.
    Increases are capped by cash and by max_position_fraction x NAV; during
    the building phase at most building_max_daily_steps steps are added per day.
    """
    if price <= 0:
        raise ValueError(f"price must be positive, got {price}")
    signal = ActionSignal(signal)
    lot = config.lot_size
    shares = account.shares

    if signal is ActionSignal.HOLD:
        return shares
    if signal is ActionSignal.CLOSE_POSITION:
        return 0
    if signal.steps is not None and signal.steps < 0:
        sell = floor_lot(-signal.steps * config.step_notional / price, lot)
        return max(0, shares - sell)

    affordable = shares + max_affordable(account.cash, price, config)
    cap = floor_lot(config.max_position_fraction * account.nav(price) / price, lot)
    upper = max(shares, min(affordable, cap))

    steps = signal.steps
    if in_building_phase:
        allowed = max(0, config.building_max_daily_steps - steps_today)
        steps = allowed if steps is None else min(steps, allowed)
    if steps is None:
        target = upper
    else:
        target = shares + floor_lot(steps * config.step_notional / price, lot)
    return min(target, upper)


def execute(account, target, price, config, day):
    """Move the account to target shares at price; returns the Trade or None"""
    if target < 0 or target % config.lot_size:
        raise AccountInvariantError(f"{account.fund_code}: target {target} is not a non-negative lot multiple")
    delta = target - account.shares
    if delta == 0:
        return None

    notional = abs(delta) * price
    fee = notional * config.fee_rate
    if delta > 0:
        cost = notional + fee
        if cost > account.cash + CASH_TOLERANCE:
            raise AccountInvariantError(
                f"{account.fund_code}: buying {delta} @ {price} costs {cost:.2f}, cash {account.cash:.2f}")
        account.cash = max(0.0, account.cash - cost)
        side = 'buy'
    else:
        account.cash += notional - fee
        side = 'sell'
    account.shares = target

    trade = Trade(date=day, side=side, shares=abs(delta), price=price, fee=fee,
                  cash_after=account.cash, shares_after=account.shares)
    account.trades.append(trade)
    logging.debug(f"{account.fund_code} {day.isoformat()}: {side} {abs(delta)} @ {price} (fee {fee:.2f})")
    return trade
