"""Rotation numbers and Arnold tongues of dx/dt = (cos x + a + b cos t) / mu."""
from .errors import BracketFailure, DegenerateFit, NumericFailure, StepUnderflow
from .integrator import (DEFAULT_CONFIG, IntegratorConfig, LiftedTrajectory, integrate,
                         integrate_with_variations, propagate, propagate_with_variations)
from .model import Params, State, reflect, vector_field
from .poincare import MapClass, MobiusMap, RotationResult, classify, fit_mobius, rotation_number
from .slowfast import Region, SlowCurve, classify_region, fold_points, slow_curve
from .tongues import (BoundaryCurve, BoundarySample, Bridge, TraceConfig, boundary_at,
                      boundary_condition, find_bridges, gap_near_point, initial_a,
                      tongue_gap, trace_boundary, validate_start)
from .asymptotics import bessel_j, boundary_asymptote, residual_scan

__version__ = "0.1.0"
