"""ergolab: numerical thermodynamic formalism on exactly solvable systems.

Computes topological pressure brackets, entropy gaps, finite-time Lyapunov
exponents, prefix/core/suffix orbit-segment decompositions, Bowen-property
distortion bounds, specification gluing, expansivity diagnostics and
foliation minimality checks, and assembles them into a uniqueness-criterion
report.
"""

__version__ = "0.1.0"

from .systems import (  # noqa: F401
    BACKWARD,
    FORWARD,
    CocycleToy,
    ExpandingCircle,
    FullShift,
    Profile,
    ShiftPoint,
    SystemModel,
    ToralAuto,
    builtin_system,
    builtin_system_names,
    load_system,
    system_from_spec,
)
from .potentials import (  # noqa: F401
    Potential,
    birkhoff_sum,
    certify_holder,
    constant_potential,
    locally_constant_potential,
    oscillation,
    potential_from_spec,
    tent_potential,
    trig_potential,
    zero_potential,
)
from .grids import GridSpec  # noqa: F401
from .bowen import (  # noqa: F401
    SamplingSpec,
    SeparatedSet,
    bowen_distance,
    build_separated_set,
    in_bowen_ball,
    phi_eps,
    sample_bowen_ball,
)
from .pressure import (  # noqa: F401
    EmpiricalMeasure,
    PressureEstimate,
    empirical_equilibrium,
    partition_function,
    pressure_at_scale,
    transfer_pressure_oracle,
)
