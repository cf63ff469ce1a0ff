"""Planar Hamiltonian flows, Hofer-length certificates, and constructive
displacement words."""

__version__ = "0.1.0"

from .errors import (CertificateRefusedError, DisjointnessError,
                     EnergyBudgetError, FeasibilityError, GeometryError,
                     HoferflowError, HypothesisError, IntegrationError,
                     MassError, ScenarioError, SupportViolationError,
                     ToleranceError, UnsupportedRegionError)
from .geometry import (BBox, Disk, EmptyRegion, ImageRegion, Rectangle,
                       Region, RoundedRectangle, Strip, UnionRegion,
                       hausdorff_distance, min_cloud_distance, shoelace_area,
                       winding_number)
from .profiles import (BoxBump, Polynomial2D, ProfileOfQ, RadialBump,
                       RadialFunction, SmoothProfile, make_bump)
from .quadrature import CumulativeIntegral, TimeGrid, integrate_time
from .flow import (AutonomousHamiltonian, ConjugatedHamiltonian, Diffeo,
                   FlowConfig, TimeDependentHamiltonian, ZeroHamiltonian,
                   compose, conjugate, conjugate_hamiltonian,
                   estimate_support, flow_map, flow_point, flow_points,
                   flow_trajectory, hamiltonian_vector_field,
                   inverse_hamiltonian, jacobian_determinant,
                   map_sup_distance)
from .hofer import (MINUS, PLUS, ZERO, NormCertificate, SignClass,
                    compose_disjoint, concat, hofer_length, oscillation,
                    restricted_certificate)
from .reparam import (CallableProfile, Diffeo01, PiecewiseConstantProfile,
                      Profile1D, SampledProfile, equalize, tail_threshold,
                      tame)
from .transport import (Density1D, RadialDensity2D, SeparableDensity2D,
                        ball_rearrange, compact_translation,
                        mass_transport_1d, moser_separable_2d,
                        point_transport, radial_normalize)
from .constructions import (DiskMoverResult, NiceSubsetSystem, disk_mover,
                            nice_subsets, render_system)
from .decomposition import (DecompositionReport, SliceData, decompose,
                            time_slice, verify_word)
from .spectrum import (ActionValue, FixedPointSearch, PeriodicPoint, action,
                       action_spectrum, actions_for, check_concatenation,
                       fixed_points, spectral_diagnostic)
