"""Exact tools for counting rational points on smooth plane cubics."""
from .curve import CubicForm, ProjPoint, enumerate_rational_points, normalize_point, smoothness_verdict
from .group import GroupContext

__all__ = ["CubicForm", "ProjPoint", "GroupContext", "enumerate_rational_points", "normalize_point", "smoothness_verdict"]
__version__ = "0.1.0"
