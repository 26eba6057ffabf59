"""Texture-classification toolkit for grey granite imagery.

Pipeline: synthetic Boolean-model textures -> morphological and colour
feature extraction (granulometry curves, size-intensity diagrams, HLS
histograms) -> k-NN classification -> genetic-algorithm feature selection,
with PCA scatter exports for inspection.
"""

__version__ = "0.1.0"
