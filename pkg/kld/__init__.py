"""
KL-divergence-based concept drift detection over chunked labeled streams
"""

__version__ = "1.0.0"
