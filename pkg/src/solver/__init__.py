from src.solver.factorization import Factorization, factorize
from src.solver.system import Projections, System, assemble, lumped_masses, strain_operators, topology_key
from src.solver.pd import FitState, local_step, pd_iterate, pd_solve
from src.solver.fit import FitResult, Template, fit, load_template, mean_surface_distance, template_from_tet

__all__ = [
    "Factorization",
    "factorize",
    "Projections",
    "System",
    "assemble",
    "lumped_masses",
    "strain_operators",
    "topology_key",
    "FitState",
    "local_step",
    "pd_iterate",
    "pd_solve",
    "FitResult",
    "Template",
    "fit",
    "load_template",
    "mean_surface_distance",
    "template_from_tet",
]
