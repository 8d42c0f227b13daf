# hybridq/services/presets.py
"""Built-in parameter sets for the protection experiments."""
from typing import Callable, Dict

from hybridq.core.enums import FrameEnum, PresetNameEnum, PropagatorMethodEnum, RunModeEnum
from hybridq.core.errors import ConfigError
from hybridq.model import SystemParams
from hybridq.models import PropagatorConfig, RunConfig

KAPPA_DESK = 7.0
DESK_NOTE = (
    "desk scale: 4 explicit spins stand in for an ensemble of 100; "
    "trends are comparable, absolute fidelities are not"
)


def _fig2a() -> RunConfig:
    # cavity protection in the mean-field limit, lossless, one width, three drives
    return RunConfig(
        mode=RunModeEnum.SEMICLASSICAL,
        params=SystemParams(delta_c=70000.0, omega_coll=40.0, delta_width=60.0, n_spins=10000),
        n_classes=200,
        r_values=[0.0, 1.0, 2.0],
        t_end=0.3,
        dt_out=5e-4,
    )


def _fig2b() -> RunConfig:
    return RunConfig(
        mode=RunModeEnum.SWEEP,
        params=SystemParams(delta_c=70000.0, omega_coll=40.0, delta_width=60.0, n_spins=10000),
        n_classes=200,
        r_values=[0.0, 0.4, 0.8, 1.2, 1.6, 2.0, 2.4],
        delta_values=[60.0, 70.0, 80.0],
        t_end=0.3,
        dt_out=5e-4,
    )


def _fig3_desk() -> RunConfig:
    return RunConfig(
        mode=RunModeEnum.QUANTUM,
        params=SystemParams(
            delta_c=70000.0, omega_coll=40.0, delta_width=30.0,
            kappa=KAPPA_DESK, gamma_h=KAPPA_DESK / 8, gamma_p=KAPPA_DESK / 16,
        ),
        n_spins_quantum=4,
        fock_cutoff=10,
        frame=FrameEnum.SQUEEZED_RWA,
        r_values=[0.0, 1.0, 2.0],
        propagator=PropagatorConfig(method=PropagatorMethodEnum.TROTTER2, dt=1e-4),
        initial_state="1,2",
        t_end=0.3,
        dt_out=5e-4,
        peak_prominence=0.05,
        note=DESK_NOTE,
    )


PRESETS: Dict[PresetNameEnum, Callable[[], RunConfig]] = {
    PresetNameEnum.FIG2A: _fig2a,
    PresetNameEnum.FIG2B: _fig2b,
    PresetNameEnum.FIG3_DESK: _fig3_desk,
}


def preset(name: str) -> RunConfig:
    try:
        key = PresetNameEnum(str(name).strip().lower())
    except ValueError as e:
        known = ", ".join(p.value for p in PresetNameEnum)
        raise ConfigError(f"unknown preset {name!r}; known presets: {known}", key="preset") from e
    return PRESETS[key]()
