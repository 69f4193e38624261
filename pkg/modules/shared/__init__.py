# Shared module initialization