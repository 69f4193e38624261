"""
Backtest engine
Daily single-fund loop: decide on day t from data dated <= t, execute at the
next trading day's close, mark NAV every day
"""
import logging

from modules.backtest.account import execute, max_affordable, target_shares
from modules.backtest.metrics import compute_metrics
from modules.backtest.models import Account, ActionSignal, BacktestResult, RiskConfig, Strategy
from modules.shared.errors import DataError, DataGapError


def period_bars(store, fund_code, period, config):
    """Bars of the fund inside [start, end]; aborts on gaps longer than max_gap_sessions"""
    start, end = period
    bars = [b for b in store.fund_series(fund_code) if start <= b.date <= end]
    if not bars:
        raise DataError(f"{fund_code}: no bars between {start.isoformat()} and {end.isoformat()}")
    for prev, cur in zip(bars, bars[1:]):
        missing = store.calendar.sessions_between(prev.date, cur.date)
        if missing > config.max_gap_sessions:
            raise DataGapError(f"{fund_code}: {missing} trading sessions missing between "
                               f"{prev.date.isoformat()} and {cur.date.isoformat()}")
    return bars


def run_backtest(store, fund_code, period, strategy, config=None, strategy_name=Strategy.AGENT_A.value):
    config = config or RiskConfig()
    bars = period_bars(store, fund_code, period, config)
    account = Account(fund_code=fund_code, cash=config.initial_capital)
    signals = []
    pending = None
    peak = config.initial_capital
    stopped = False

    def act(signal, index, bar):
        if stopped and signal.is_increase:
            signal = ActionSignal.HOLD
        target = target_shares(signal, account, bar.close, config,
                               in_building_phase=index < config.building_phase_days)
        execute(account, target, bar.close, config, bar.date)

    for i, bar in enumerate(bars):
        if pending is not None:
            act(pending, i, bar)
            pending = None

        signal = None
        last_day = i == len(bars) - 1
        if not (config.execute_next_day and last_day):
            signal = strategy.decide(store.as_of(bar.date), fund_code, account, bar.close, config)
            signals.append((bar.date, signal))
            if not config.execute_next_day:
                act(signal, i, bar)

        nav = account.mark(bar.date, bar.close)
        peak = max(peak, nav)
        if config.execute_next_day:
            pending = signal
        if config.drawdown_stop is not None and not stopped and nav / peak - 1.0 <= -config.drawdown_stop:
            # Extension: close out and block further increases
            stopped = True
            pending = ActionSignal.CLOSE_POSITION
            logging.warning(f"⚠️ {fund_code} {bar.date.isoformat()}: drawdown stop hit, closing position")

    metrics = compute_metrics(account.nav_series, initial=config.initial_capital)
    logging.info(f"✅ {strategy_name} {fund_code}: {len(account.trades)} trades, CR {metrics.cr:.4%}")
    return BacktestResult(strategy=strategy_name, fund_code=fund_code, account=account,
                          metrics=metrics, signals=signals)


def buy_and_hold(store, fund_code, period, config=None):
    """All capital into the fund at the first close, then marked daily"""
    config = config or RiskConfig()
    bars = period_bars(store, fund_code, period, config)
    account = Account(fund_code=fund_code, cash=config.initial_capital)
    first = bars[0]
    execute(account, max_affordable(account.cash, first.close, config), first.close, config, first.date)
    for bar in bars:
        account.mark(bar.date, bar.close)
    metrics = compute_metrics(account.nav_series, initial=config.initial_capital)
    logging.info(f"✅ buy_and_hold {fund_code}: CR {metrics.cr:.4%}")
    return BacktestResult(strategy=Strategy.BUY_AND_HOLD.value, fund_code=fund_code,
                          account=account, metrics=metrics)
