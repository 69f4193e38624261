# Indicators module initialization
