# Exact LOPC core
