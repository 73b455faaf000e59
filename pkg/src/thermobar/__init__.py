"""Simulation and spectral analysis of an elastic/thermoelastic/elastic bar.

The middle segment carries heat by Cattaneo's law (second sound) or by
Fourier's law; the outer segments are purely elastic and clamped at the
far ends.
"""

__version__ = "0.1.0"

from .discretization import (DofLayout, Discretization, Fields, SegmentGrid, StaggeredSbp,
                             build_discretization, h_inner_product, pack, sbp_operator, unpack)
from .equilibria import (EquilibriumDecomposition, check_equivalence, discrete_kernel, project,
                         range_condition)
from .evolution import DecayReport, StepCache, Trajectory, cn_step, fit_decay, simulate
from .generator import (GeneratorSystem, StructureReport, assemble_generator, dissipation_rate,
                        energy, verify_structure)
from .initial import (ConstantTheta, Custom, GaussianDisplacement, InitialDataSpec, KernelVector,
                      RandomSeeded, Zero, make_initial_state)
from .model import KernelFunctions, Law, ModelConfig, kernel_functions, reference_config, validate_config
from .spectral import (DeflatedOperator, ResolventSweep, SpectrumReport, compute_spectrum, deflate,
                       resolvent_norm, resolvent_sweep, slowest_mode, spectral_abscissa)

__all__ = [name for name in dir() if not name.startswith("_")]
