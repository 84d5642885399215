"""Verified integration of piecewise analytic functions by adaptive bisection."""

from .errors import DomainError, IterationCapExceeded, PetrasError, PreconditionError
from .geometry import (EngineConfig, Interval, RegionSpec, RhoRectangle,
                       ellipse_minor_axis, rect_in_region, region_boundary_point,
                       rho_rectangle)

__version__ = "0.1.0"
