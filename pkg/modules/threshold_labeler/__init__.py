# Threshold labeler module initialization
