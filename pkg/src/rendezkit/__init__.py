"""rendezkit: a numerical workbench for potential-theoretic quantities on
finite kernel spaces — energies, n-point diameters, Chebyshev-type values and
rendezvous/average intervals — with a property-verification suite."""

__version__ = "0.1.0"

from .extcore import (
    EXT_INF,
    EXT_ZERO,
    ExtendedValue,
    ExtInterval,
    ext,
    ext_weighted_sum,
    intersect_intervals,
    make_interval,
)
from .space import (
    DiscreteSpace,
    SubsetRef,
    build_circle_grid,
    build_from_matrix,
    build_interval_grid,
    kernel_eval,
)
from .measure import (
    ProbabilityMeasure,
    energy,
    inf_potential,
    measure_interval,
    mutual_energy,
    potential,
    sup_potential,
)
from .game import (
    GameSolution,
    duality_gap,
    q_lower,
    q_value,
    u_value,
    v_value,
)
from .confopt import (
    SequenceEstimate,
    TupleWitness,
    cheb_limits_via_games,
    cheb_n,
    dual_cheb_n,
    fekete_limit,
    modified_cheb_n,
    nth_diameter,
)
from .energyopt import EnergyResult, energy_chain_check, max_principle_check, w_energy
from .rendezvous import (
    RendezvousReport,
    average_interval,
    compare_R_A,
    rendezvous_interval,
    rendezvous_interval_n,
)
from .verify import InstanceSpec, PropertyReport, SuiteConfig, gen_instance, run_suite
