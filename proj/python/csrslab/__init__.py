"""Python bindings for the csrslab simulation and analysis library."""

import json as _json
import os as _os
from pathlib import Path as _Path

_here = _Path(__file__).resolve().parent
if (_here / "data").is_dir():
    _os.environ.setdefault("CSRSLAB_DATA_DIR", str(_here / "data"))

from . import _core  # noqa: E402
from ._core import (  # noqa: E402
    ConfigError,
    DomainError,
    InputError,
    SaturationError,
    contrast,
    dead_time_correct,
    derive_seed,
    fidelity,
    gaussian_overlap,
    implied_input_angle,
    linewidth,
    number_density,
    observed_rate,
    plane_wave_overlap,
    refractivity,
    resonance_center,
    sample_counts,
    sine_peak_angle,
)

__version__ = _core.__version__


def default_config():
    """Built-in configuration document as a dict."""
    return _json.loads(_core.default_config_json())


def _config_arg(config):
    return "" if config is None else _json.dumps(config)


def efficiency_scan(process, pressures_bar, config=None):
    """On-resonance internal/external efficiency over a pressure grid."""
    return _json.loads(_core.efficiency_scan_json(process, list(pressures_bar), _config_arg(config)))


def simulate_spectrum(process, pressure_bar, seed=None, noise=True, config=None):
    """One resonance scan as a dict of columns."""
    return _json.loads(_core.simulate_spectrum_json(process, pressure_bar, seed, noise, _config_arg(config)))


def fit_lorentzian(x, y, sigma=None):
    """Lorentzian fit; sigma defaults to sqrt(max(y, 1))."""
    return _json.loads(_core.fit_lorentzian_json(list(x), list(y), None if sigma is None else list(sigma)))


def fit_center_vs_pressure(pressure_bar, center_thz, sigma_thz):
    return _json.loads(_core.fit_center_json(list(pressure_bar), list(center_thz), list(sigma_thz)))


def fit_dicke_width(pressure_bar, width_mhz, sigma_mhz):
    return _json.loads(_core.fit_dicke_json(list(pressure_bar), list(width_mhz), list(sigma_mhz)))


def fit_sine(angles_deg, counts, period_deg, sigma=None):
    return _json.loads(
        _core.fit_sine_json(list(angles_deg), list(counts), period_deg, None if sigma is None else list(sigma))
    )


def simulate_polarization_scan(basis, angles_deg, preset="ideal", input_angle_deg=0.0, amplitude=1.0,
                               background_d1=0.0, background_d2=0.0):
    """Expected two-detector counts for a basis scan."""
    return _json.loads(
        _core.simulate_scan_json(basis, list(angles_deg), preset, input_angle_deg, amplitude, background_d1,
                                 background_d2)
    )


def run_cli(*args):
    """Run the command-line tool in-process. Returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
