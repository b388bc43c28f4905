"""Online long-term interest analytics for scholarly articles.

Derives the Online Age of articles from altmetric-style mention records,
clusters publication years, and trains/evaluates from-scratch regression and
classification models that predict how long an article stays mentioned.
"""

from onlineage.platforms import PLATFORMS, N_PLATFORMS

__version__ = "0.1.0"

__all__ = ["PLATFORMS", "N_PLATFORMS", "__version__"]
