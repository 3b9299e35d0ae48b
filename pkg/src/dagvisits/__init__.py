"""Visit rules, boundary complexity, pebbling and I/O lower bounds for DAGs."""

from .dag import Dag, GraphError, reverse, topological_depth, descendants, ancestors, induced_subdag
from .families import (
    Pyramid, ReversePyramid, Tree, Diamond, ChainArborescence, Explicit, Random,
    generate, parse_family, random_dag,
)
from .rules import (
    VisitRule, RuleError, top_rule, singleton_rule, diamond_blocked_rule, explicit_rule,
    is_r_sequence, is_r_visit, boundary, boundary_complexity_of_sequence, enabled_reach,
    restrict_rule, entering_boundary,
)
from .builders import (
    BuiltVisit, build_depth_visit, build_singleton_visit, build_topological_visit,
    build_chain_first_visit, build_diamond_blocked_visit, blocked_side,
)
from .flows import min_post_dominator, min_dominator, max_disjoint_paths
from .oracles import (
    OracleLimits, SizeLimitError, OracleTimeout, exact_boundary_complexity,
    exact_pebbling_number, minimum_set, min_s_partition_k, exact_visit_partition_bound,
)
from .machine import (
    Compute, Read, Write, Place, Remove, IoComputation, PebbleSchedule, ComputationError,
    validate_computation, validate_pebbling, io_counts, computation_to_visit,
    pebbling_to_visit, visit_to_pebbling, greedy_computation, random_computation,
    run_diamond_astar, astar_upper_bound,
)
from .bounds import (
    SegmentPartition, BoundReport, write_bound_for_partition, read_bound_for_partition,
    best_partition, diamond_lower_bound, diamond_witness_partition, hong_kung_bound,
    check_s_partition, variant_bound, closed_form_catalog,
)

__all__ = [name for name in dir() if not name.startswith("_")]
