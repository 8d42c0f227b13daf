# hybridq/core/enums.py
"""
Enums shared by the models, the numerical modules and the command line.
"""
import enum


class RunModeEnum(str, enum.Enum):
    """What a run computes"""
    SEMICLASSICAL = "semiclassical"
    QUANTUM = "quantum"
    WIGNER = "wigner"
    SWEEP = "sweep"


class FrameEnum(str, enum.Enum):
    """Hamiltonian used for the quantum evolution"""
    LAB = "lab"
    SQUEEZED = "squeezed"
    SQUEEZED_RWA = "squeezed-rwa"


class PropagatorMethodEnum(str, enum.Enum):
    """How the superket is stepped in time"""
    DENSE_EXPM = "dense-expm"
    TROTTER2 = "trotter2"
    TROTTER2_TRUNCATED = "trotter2-truncated"


class DiscretizationEnum(str, enum.Enum):
    """Placement of the spin frequency classes"""
    QUANTILE = "quantile"
    RANDOM = "random"


class PresetNameEnum(str, enum.Enum):
    """Built-in parameter sets"""
    FIG2A = "fig2a"
    FIG2B = "fig2b"
    FIG3_DESK = "fig3-desk"


class StorageEnum(str, enum.Enum):
    """How an operator matrix is held"""
    SPARSE = "sparse"
    DENSE = "dense"


# short aliases
RunMode = RunModeEnum
Frame = FrameEnum
PropagatorMethod = PropagatorMethodEnum
Discretization = DiscretizationEnum
