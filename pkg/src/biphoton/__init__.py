"""Simulation and analysis of spatially entangled photon pairs.

Thin-crystal biphoton states, off-axis holographic reconstruction, modal
decomposition, phase-matching fits and time-tagged coincidence processing.
"""
from .errors import (BiphotonWarning, CarrierNotFoundError, ConvergenceError,
                     EventParseError, FitError, GridMismatchError, SingularFitError)
from .fields import (HG, LG, ComplexField, GridSpec, OAMGauss, RasterImage, Superposition,
                     evaluate_mode, fourier_transform, inner_product, load_cfield, overlap,
                     save_cfield)
from .spdc import (BiphotonState, CoincidenceImage, PhaseMatchingParams, ReferenceSpec,
                   coincidence_diagonal, far_field_singles, synthesize_hologram_pair,
                   thin_crystal_state)
from .holography import SidebandFilter, reconstruct_offaxis, reconstruct_state
from .modal import (bell_state_coefficients, conservation_diagnostics, correlation_matrix,
                    fidelity, hg_decompose, lg_decompose, oam_coefficients)
from .fitting import derive_crystal_length, fit_phase_matching
from .events import (RegionLayout, background_filter, find_coincidences, parse_events,
                     synthesize_event_stream)

__version__ = "0.1.0"
