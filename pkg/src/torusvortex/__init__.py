"""Quantized vortex dynamics of the NLSE on flat tori with non-vanishing momentum."""
from ._backend import BACKEND
from .green import TorusGeometry, GreenEvaluator
from .renorm import VortexConfiguration, CoreConstant

__all__ = ["BACKEND", "TorusGeometry", "GreenEvaluator", "VortexConfiguration", "CoreConstant"]
__version__ = "0.1.0"
