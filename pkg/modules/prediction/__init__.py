# Prediction module initialization
