"""
Agent Context Models
Structured reports of the four analytical agents
"""
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Optional

from modules.shared.models import SCHEMA_VERSION, Sentiment


class AgentKind(str, Enum):
    MOMENTUM = 'momentum'
    ANNOUNCEMENT = 'announcement'
    EVENT = 'event'
    MARKET = 'market'


# Merge order of the four reports
AGENT_ORDER = (AgentKind.MOMENTUM, AgentKind.ANNOUNCEMENT, AgentKind.EVENT, AgentKind.MARKET)


@dataclass(frozen=True)
class AgentReport:
    agent: AgentKind
    fund_code: str
    as_of: date
    payload: dict
    narrative: Optional[str] = None
    schema_version: str = SCHEMA_VERSION

    def with_narrative(self, narrative):
        return AgentReport(agent=self.agent, fund_code=self.fund_code, as_of=self.as_of,
                           payload=self.payload, narrative=narrative, schema_version=self.schema_version)

    def to_dict(self):
        return {
            'agent': self.agent.value,
            'fund_code': self.fund_code,
            'as_of': self.as_of.isoformat(),
            'schema_version': self.schema_version,
            'payload': self.payload,
            'narrative': self.narrative,
        }


@dataclass(frozen=True)
class AnnouncementImpactStats:
    ann_type: str
    sentiment_group: Sentiment
    n: int
    p_up_1: Optional[float] = None
    p_up_5: Optional[float] = None
    p_up_20: Optional[float] = None
    avg_chg_1: Optional[float] = None
    avg_chg_5: Optional[float] = None
    avg_chg_20: Optional[float] = None
    sig_freq_1: Optional[float] = None
    sig_freq_5: Optional[float] = None
    sig_freq_20: Optional[float] = None

    def to_dict(self):
        data = {'ann_type': self.ann_type, 'sentiment_group': self.sentiment_group.value, 'n': self.n}
        if self.n:
            for k in (1, 5, 20):
                data[f"p_up_{k}"] = getattr(self, f"p_up_{k}")
                data[f"avg_chg_{k}"] = getattr(self, f"avg_chg_{k}")
                data[f"sig_freq_{k}"] = getattr(self, f"sig_freq_{k}")
        return data


@dataclass(frozen=True)
class QuarterlyWarning:
    active: bool
    next_release: Optional[date]
    days_until: Optional[int]

    def to_dict(self):
        return {
            'active': self.active,
            'next_release': self.next_release.isoformat() if self.next_release else None,
            'days_until': self.days_until,
        }


@dataclass(frozen=True)
class ContextParams:
    announcement_window_days: int = 7
    news_window_days: int = 14
    warning_window_days: int = 10
    key_announcement_types: tuple = field(
        default=('distribution', 'quarterly_report', 'expansion', 'unitholder_meeting'))
    theta_history: int = 5
