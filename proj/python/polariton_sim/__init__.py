# Copyright 2026 The polariton-sim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Driven-dissipative molecule-cavity simulations (C++ core)."""

from ._core import (
    CavityFrame,
    ConfigError,
    DriveSpec,
    InvalidArgument,
    NumericalError,
    Propagator,
    RunResult,
    SystemParams,
    Tone,
    __version__,
    convergence_check,
    cooperativity,
    damped_rabi_frequency,
    default_config,
    experiment_names,
    field_harmonics,
    g2_correlation,
    photons_per_lifetime,
    power_for_photons_per_lifetime,
    power_to_flux,
    probe_transmission,
    run,
    steady_state,
)

__all__ = [
    "CavityFrame",
    "ConfigError",
    "DriveSpec",
    "InvalidArgument",
    "NumericalError",
    "Propagator",
    "RunResult",
    "SystemParams",
    "Tone",
    "__version__",
    "convergence_check",
    "cooperativity",
    "damped_rabi_frequency",
    "default_config",
    "experiment_names",
    "field_harmonics",
    "g2_correlation",
    "photons_per_lifetime",
    "power_for_photons_per_lifetime",
    "power_to_flux",
    "probe_transmission",
    "run",
    "steady_state",
]
