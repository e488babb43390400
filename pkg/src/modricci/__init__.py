"""Numerical certificates for comparison geometry under a modified Ricci lower bound."""

from .certificate import BoundCertificate
from .models import Model, ModelSpec, build_model, list_models

__all__ = ["BoundCertificate", "Model", "ModelSpec", "build_model", "list_models"]
__version__ = "0.1.0"
