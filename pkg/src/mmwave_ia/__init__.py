"""Beam selection for millimeter-wave initial access.

A simulator for a 24-beam transmitter serving receivers in a square area,
a conventional beam sweep baseline, and a small numpy neural network that
predicts the best of all 24 beams from a partial sweep.
"""

__version__ = "0.1.0"
