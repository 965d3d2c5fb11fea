"""Desk-scale simulator of an ensemble-NV Ramsey magnetometer signal chain.

Spin-resonance model, DQ 4-Ramsey lock-in sequence, measurement-chain noise
synthesis, conducting-sphere current-dipole forward model, and the DSP used to
extract sensitivity and phantom-signal amplitude.
"""

from .dsp import FilterSpec, ToneFit, fit_tone, lockin_demodulate, narrowband_filter, rms_from_asd, snr, welch_asd
from .noise import LowFreqExcess, NoiseModel, Scenario, analytic_asd, calibrated_model, current_view, field_view, synthesize
from .phantom import (
    DipoleScene,
    PhantomDrive,
    SensorAperture,
    averaged_field,
    dipole_field,
    geometric_attenuation,
    phantom_map,
    phantom_timeseries,
    sarvas_F,
    sarvas_gradF,
)
from .sequence import SequenceConfig, SequenceTimeline, build_dq4_sequence, field_responsivity, response_curve
from .spin_model import (
    BiasField,
    EnsembleParams,
    FitConvergenceError,
    RamseyFringeParams,
    fit_ramsey,
    odmr_spectrum,
    optimal_tau,
    ramsey_fringe,
    ramsey_slope,
    resonance_lines,
    shot_noise_sensitivity,
)
from .timeseries import Spectrum, TimeSeries

__version__ = "0.1.0"
