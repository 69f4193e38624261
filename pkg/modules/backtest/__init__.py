# Backtest module initialization
