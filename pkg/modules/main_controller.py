"""
Main Controller to integrate all modules
Provides a unified interface to register all module command groups
"""
import logging

from flask import Flask

from modules.backtest.commands import backtest_bp
from modules.indicators.commands import indicators_bp
from modules.macro_state.commands import macro_state_bp
from modules.market_data.commands import market_data_bp
from modules.reward.commands import reward_bp
from modules.threshold_labeler.commands import labeler_bp

BLUEPRINTS = (market_data_bp, indicators_bp, labeler_bp, macro_state_bp, reward_bp, backtest_bp)


def register_modules(app: Flask):
    """Register all module blueprints with the Flask app"""
    for blueprint in BLUEPRINTS:
        app.register_blueprint(blueprint)
    logging.debug(f"✅ Registered modules: {', '.join(b.name for b in BLUEPRINTS)}")


def get_module_info():
    """Get information about available modules"""
    return {
        'market_data': {
            'name': 'Market Data',
            'description': 'Validated loading and point-in-time access for prices, indices, yields and disclosures',
            'models': ['DailyBar', 'IndexBar', 'YieldPoint', 'Announcement', 'NewsItem', 'OperationalReport',
                       'FundMeta', 'TradingCalendar'],
            'commands': ['ingest'],
        },
        'indicators': {
            'name': 'Technical Indicators',
            'description': 'Moving averages, RSI, MACD, Bollinger bands, volume ratio and price levels',
            'models': ['IndicatorSnapshot'],
            'commands': ['indicators'],
        },
        'threshold_labeler': {
            'name': 'Dynamic Threshold Labeler',
            'description': 'Volatility-scaled sideways thresholds and up/side/down horizon labels',
            'models': ['ThresholdParams', 'ThresholdValue', 'HorizonThresholds', 'LabeledSample'],
            'commands': ['label'],
        },
        'macro_state': {
            'name': 'Macro Quadrant',
            'description': 'Interest-rate trend x equity state regime and the REITs market snapshot',
            'models': ['MacroQuadrant', 'MarketSnapshot'],
            'commands': ['quadrant'],
        },
        'agent_context': {
            'name': 'Agent Context',
            'description': 'Momentum, announcement, event and market agent reports',
            'models': ['AgentReport', 'AnnouncementImpactStats', 'QuarterlyWarning'],
            'commands': [],
        },
        'prediction': {
            'name': 'Prediction',
            'description': 'Multi-horizon probability prediction and output validation',
            'models': ['PredictionSet', 'HorizonPrediction', 'ValidationPolicy'],
            'commands': [],
        },
        'reward': {
            'name': 'Reward',
            'description': 'Correctness and format reward plus SFT / GSPO training records',
            'models': ['RewardWeights', 'RewardBreakdown', 'TrainingRecord'],
            'commands': ['reward'],
        },
        'backtest': {
            'name': 'Backtest',
            'description': 'Single-fund accounts, trade execution, metrics and reports',
            'models': ['ActionSignal', 'RiskConfig', 'Account', 'Trade', 'Metrics'],
            'commands': ['backtest', 'report'],
        },
        'shared': {
            'name': 'Shared Components',
            'description': 'Common enums, the error hierarchy and command plumbing used across modules',
            'models': ['Direction', 'Sentiment'],
            'commands': [],
        },
    }
