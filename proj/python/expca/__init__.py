"""Experiment-aware principal component analysis.

Thin package wrapper around the ``_expca`` native extension: axes fitted on
designed training data, design-driven centering, scaled component scores,
projection and classification of new observations, ANOVA variable filtering,
binomial keyword enrichment, and Ward clustering.
"""

try:
    from ._expca import *  # noqa: F401,F403
    from ._expca import __doc__ as _native_doc  # noqa: F401
except ImportError:  # pragma: no cover - build-tree layout
    from _expca import *  # noqa: F401,F403

__version__ = "1.0.0"
