"""imcflab: numerical geometry of spherical annuli foliated by inverse mean
curvature flow -- metrics, Hawking mass, geodesics, and stability estimators."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .fields import (AnnulusField, ClassBounds, average_H2, build_delta,
                     euler_characteristic, hawking_mass, integrate_leaf,
                     l2_metric_gap, leaf_area, perturbed_delta,
                     rotsym_field_from_h)
from .grids import SphereGrid, TimeGrid, fibonacci_sphere, sample_points
from .rotsym import (FamilyParams, RotSymProfile, hawking_mass_profile,
                     make_profile, mean_curvature_profile, reparam_to_imcf_time,
                     scalar_curvature_profile, validate_class_membership)
from .christoffel import ChristoffelAt, ChristoffelField, christoffel_at
from .geodesics import (DistanceSample, GeodesicState, distance_sample,
                        graph_distance, integrate_geodesic, shoot_distance)
from .estimators import (Curve, curve_length, diameter_bound_check,
                         distance_lower_bound_check, embedding_constant,
                         hls_bounds, length_gap_dt, length_gap_leaf,
                         select_parallel_curve, swif_excision_bound,
                         swif_pair_bound, uniform_distance, volume_bound_check,
                         well_embedded_gap)
from .diagnostics import (CurvatureFields, gotozero_report, h_inverse_floor_check,
                          max_principle_bound, pinching_quantity,
                          weak_ricci_identity_residual)
from .experiments import ConvergenceReport, emit_report, run_sequence
from .io import load_field, save_field

__version__ = "0.1.0"
