"""Size grid selection pipeline.

Generates a synthetic retail corpus, cleans it, turns size grids into
neighbor-aware feature rows, trains four classifiers from scratch and serves
the resulting per-grid selection decisions over HTTP.
"""

__version__ = "0.1.0"
