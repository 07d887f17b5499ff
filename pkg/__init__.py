"""
kpsolitons - KP line-solitons from the totally nonnegative Grassmannian.

This package computes tropical contour plots of KP tau functions, reads off
soliton graphs and their positroid data, builds plabic graphs from
Le-diagrams and triangulations, and reconstructs points from observed plots.
"""

# Version information
__version__ = "0.1.0"
