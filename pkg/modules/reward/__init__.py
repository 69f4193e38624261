# Reward module initialization
