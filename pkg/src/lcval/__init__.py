"""Land-cover map validation toolkit.

Stratified sample design, automated label retrieval from harmonized raster
products, dual-expert ground-truth annotation with confidence levels, and
confidence-weighted accuracy statistics.
"""

__version__ = "0.1.0"
