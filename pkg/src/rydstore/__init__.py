"""Storage, mutual interaction, and retrieval of two slow-light pulses in
parallel interacting atomic ensembles: a 1D mean-field simulator and CLI."""

from .config import ResolvedConfig, load_config, resolve_config
from .diagnostics import (PolaritonView, accumulated_phase, adiabaticity_rate,
                          asymmetry_ratio, mixing_angle, phase_spread,
                          polariton_view, retrieved_energy, storage_efficiency,
                          transmission_fraction)
from .engine import (FieldState, SnapshotSeries, field_solve, matter_step,
                     retrieval_gain, run_retrieval_sweep, run_scenario)
from .errors import (BlowUpError, ConfigError, Diagnostic, DomainError,
                     EmptySeriesError, GeometryError, GridError, OutputError,
                     UndefinedDiagnosticError)
from .kernels import (KernelTable, TransverseMode, build_kernel,
                      homogeneity_metric, load_kernel, potential_profile,
                      save_kernel)
from .model import (ControlSchedule, Geometry, GridSpec, PhysicalParams,
                    PulseSpec, boundary_field, control_field, default_coupling,
                    group_velocity, input_pulse, validate_bundle)
from .presets import PRESETS, Preset, get_preset, preset_keys
from .response import (SusceptibilityCurve, eit_window_and_vg, inset_curve_set,
                       peak_positions, susceptibility)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
