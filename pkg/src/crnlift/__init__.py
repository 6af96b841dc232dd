"""crnlift: reaction network analysis with species lifting and bifurcation scans."""

from .network import (
    CRN,
    Complex,
    DegenerateReactionError,
    NetworkError,
    NetworkSyntaxError,
    Reaction,
    StoichMatrix,
    conservation_laws,
    format_network,
    homogenise,
    induced_subnetwork,
    is_homogeneous,
    network_rank,
    parse_network,
    stoichiometric_matrix,
)
from .kinetics import (
    DomainError,
    ExponentMatrix,
    KineticModel,
    mass_action_exponents,
    mass_action_model,
    model_from_network,
    ode_jacobian,
    ode_rhs,
    rate_vector,
)
from .lifting import (
    LiftError,
    LiftSpec,
    LiftedFamily,
    epsilon_bound,
    lift_species,
    reduced_lifted_jacobian,
    reduced_lifted_rhs,
    scaled_rate_constants,
    selected_class_level,
)
from .dynamics import (
    ConvergenceError,
    EquilibriumRecord,
    PeriodicOrbitRecord,
    ReducedSystem,
    Trajectory,
    find_all_equilibria,
    find_equilibrium,
    find_periodic_orbit,
    integrate,
    reduce_to_class,
)
from .bifurcation import (
    BifurcationPoint,
    BranchLostError,
    BrusselatorDiagram,
    BrusselatorParams,
    boundary_equilibrium_check,
    brusselator_L1_closed_form,
    brusselator_P,
    brusselator_bifurcation_sets,
    brusselator_gh_candidates,
    focal_sign_grid,
    focal_value_L1,
    fold_scan,
    hopf_scan,
    lotka_first_integral,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
