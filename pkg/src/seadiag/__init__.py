"""seadiag: series-elastic joint simulation and model-based sensor diagnostics.

A ground-truth nonlinear plant, a noisy/faulty sensor layer, three analytical
constraint residuals (torsional spring, joint dynamics, electrical motor),
second-order low-pass residual smoothing, and threshold-based fault flagging,
plus a scenario-driven CLI harness.

Hot loops run on a compiled kernel core when available and fall back to pure
Python otherwise; both backends produce bit-identical results.
"""

from ._backend import available as available_backends
from ._backend import backend_name, use as use_backend
from .detector import (DiagnosticReport, Thresholds, VERDICT_FAULT,
                       VERDICT_NOMINAL, evaluate, tune_thresholds)
from .dsp import BandLimitedNoise, LowPass2, band_limited_noise, lowpass_step, tustin
from .errors import ConfigurationError, IntegrationFailure, ScenarioError
from .harness import (RunResult, Scenario, bundled_scenario, export_csv,
                      load_scenario, run, save_scenario)
from .plant import (Excitation, JointParams, PlantState, plant_derivatives,
                    simulate, step, true_spring_torque)
from .residuals import (CONSTRAINTS, DiscreteTF, ResidualFrame, ResidualLog,
                        compute_residuals, dynamics_residual,
                        electrical_residual, make_dynamics_filters,
                        torsional_residual)
from .sensors import (CHANNELS, FaultInjector, FaultSpec, NoiseSpec,
                      SensorSuite, TelemetryFrame, TelemetryLog, apply_faults,
                      inject_fault)

__version__ = "0.1.0"

__all__ = [
    "available_backends", "backend_name", "use_backend",
    "DiagnosticReport", "Thresholds", "VERDICT_FAULT", "VERDICT_NOMINAL",
    "evaluate", "tune_thresholds",
    "BandLimitedNoise", "LowPass2", "band_limited_noise", "lowpass_step", "tustin",
    "ConfigurationError", "IntegrationFailure", "ScenarioError",
    "RunResult", "Scenario", "bundled_scenario", "export_csv",
    "load_scenario", "run", "save_scenario",
    "Excitation", "JointParams", "PlantState", "plant_derivatives",
    "simulate", "step", "true_spring_torque",
    "CONSTRAINTS", "DiscreteTF", "ResidualFrame", "ResidualLog",
    "compute_residuals", "dynamics_residual", "electrical_residual",
    "make_dynamics_filters", "torsional_residual",
    "CHANNELS", "FaultInjector", "FaultSpec", "NoiseSpec", "SensorSuite",
    "TelemetryFrame", "TelemetryLog", "apply_faults", "inject_fault",
]
