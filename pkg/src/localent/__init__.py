"""Local entanglement densities of two-mode continuous-variable states."""

from .errors import (
    BudgetError,
    ConsistencyError,
    LocalEntError,
    NumericalError,
    ParameterError,
)
from .state_model import (
    DerivBlock,
    GaussianCV,
    OscillatorSystem,
    ReducedADerivs,
    StateEvaluator,
    derivative_block,
    eval_density,
    ground_state,
    make_system,
    reduced_A_derivs,
    thermal_state,
)
from .local_measures import (
    concurrence_density,
    epsilon_filter,
    negativity_coeffs,
    negativity_density,
    optimal_ratio,
)
from .qubit_reduction import Region, TwoQubitState, leading_two_qubit, project_two_qubit
from .two_qubit import concurrence, negativity4

__version__ = "0.1.0"
