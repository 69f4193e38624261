"""
Agent runner
Builds the four agent reports for one fund-date from a point-in-time view
"""
import logging
from concurrent.futures import ThreadPoolExecutor

from llm_integration import ChatRequest, GatewayMode, canonical_json
from modules.agent_context.builders import (
    announcement_impact_table, build_announcement_context, build_event_context,
    build_market_context, build_momentum_context, quarterly_warning, recent_trend_summary,
)
from modules.agent_context.models import AGENT_ORDER, AgentKind, ContextParams
from modules.indicators.engine import compute_snapshot, indicator_columns
from modules.indicators.models import IndicatorParams
from modules.macro_state.snapshot import market_snapshot
from modules.shared.errors import InsufficientHistoryError
from modules.threshold_labeler.models import ThresholdParams
from modules.threshold_labeler.thresholds import breach_flags, compute_theta


class FundDay:
    """Bars and causal columns of one fund at one date, shared by the builders"""

    def __init__(self, view, fund_code):
        self.view = view
        self.fund_code = fund_code
        self.bars = view.fund_bars(fund_code)
        self.columns = view.fund_columns(fund_code, 'indicators', indicator_columns)
        closes = self.columns['close']
        self.returns = closes[1:] / closes[:-1] - 1.0


class AgentRunner:

    def __init__(self, gateway=None, prompts=None, threshold_params=None, context_params=None,
                 macro_params=None, indicator_params=None):
        self.gateway = gateway
        self.prompts = prompts
        self.threshold_params = threshold_params or ThresholdParams()
        self.context_params = context_params or ContextParams()
        self.macro_params = macro_params
        self.indicator_params = indicator_params or IndicatorParams()

    @property
    def wants_narratives(self):
        return self.gateway is not None and self.prompts is not None and self.gateway.mode is not GatewayMode.STUB

    @property
    def cache_key(self):
        """Everything the reports depend on besides the fund-date"""
        narrator = self.gateway.config if self.wants_narratives else None
        return (self.threshold_params, self.context_params, self.macro_params, self.indicator_params, narrator)

    def theta_at(self, day, t):
        """Threshold at bar t of the fund, from the returns r[:t]; cached per fund-date on the store"""
        bar_date = day.bars[t].date
        return day.view.store.memo(
            ('theta', day.fund_code, bar_date, self.threshold_params),
            lambda: compute_theta(self.threshold_params, day.returns[:t], as_of=bar_date))

    def latest_theta(self, view, fund_code):
        day = FundDay(view, fund_code)
        return self.theta_at(day, len(day.bars) - 1)

    def theta_history(self, day, n):
        """Thresholds of the last n bars that have enough history, oldest first"""
        start = max(self.threshold_params.min_returns, len(day.bars) - n)
        return [self.theta_at(day, t) for t in range(start, len(day.bars))]

    def momentum(self, day):
        snapshot = compute_snapshot(day.bars, day.view.as_of, day.fund_code, self.indicator_params, day.columns)
        thetas = self.theta_history(day, self.context_params.theta_history)
        returns = day.returns[len(day.returns) - len(thetas):]
        return build_momentum_context(snapshot, thetas, breach_flags(returns, [t.theta for t in thetas]))

    def announcement(self, day):
        params = self.context_params
        history = day.view.announcements(day.fund_code)
        key_types = {a.ann_type for a in history if a.ann_type in params.key_announcement_types}

        def impact_theta(t):
            try:
                return self.theta_at(day, t).theta
            except InsufficientHistoryError:
                return None

        stats = announcement_impact_table(history, day.bars, sorted(key_types), day.view.as_of,
                                          self.threshold_params, impact_theta)
        theta = self.theta_at(day, len(day.bars) - 1).theta
        return build_announcement_context(day.fund_code, history, stats, recent_trend_summary(day.bars, theta),
                                          day.view.as_of, params)

    def event(self, day):
        params = self.context_params
        view = day.view
        releases = view.release_dates(day.fund_code)
        warning = quarterly_warning(view.as_of, releases, params.warning_window_days) if releases else None
        return build_event_context(day.fund_code, view.news(), view.reports(day.fund_code), warning,
                                   view.as_of, params.news_window_days)

    def market(self, day):
        return build_market_context(market_snapshot(day.view, self.macro_params), day.fund_code)

    def narrate(self, report):
        request = ChatRequest(
            system=self.prompts.render(report.agent.value),
            user=canonical_json(report.payload),
            tag=f"{report.agent.value}|{report.fund_code}|{report.as_of.isoformat()}",
        )
        return report.with_narrative(self.gateway.complete(request))

    def run(self, view, fund_code):
        """Reports in the fixed order momentum, announcement, event, market"""
        day = FundDay(view, fund_code)
        builders = {
            AgentKind.MOMENTUM: self.momentum,
            AgentKind.ANNOUNCEMENT: self.announcement,
            AgentKind.EVENT: self.event,
            AgentKind.MARKET: self.market,
        }
        reports = [builders[kind](day) for kind in AGENT_ORDER]
        if self.wants_narratives:
            with ThreadPoolExecutor(max_workers=len(reports)) as pool:
                reports = list(pool.map(self.narrate, reports))
        logging.debug(f"Agent reports ready for {fund_code} at {view.as_of.isoformat()}")
        return reports
