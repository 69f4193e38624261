# Macro state module initialization
