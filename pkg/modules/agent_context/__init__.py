# Agent context module initialization
