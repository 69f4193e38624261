# Market data module initialization
