"""Kitchen layout synthesis for human-robot collaborative cooking.

Jointly anneals counter placement and task/path assignments under a layout
and path cost model, emitting a Pareto set of designs with collision-free
timed paths for both agents.
"""

from .geometry import (
    AgentDisc,
    Counter,
    CounterKind,
    Layout,
    Point2,
    Quarter,
    Room,
    clearance_left_right,
    nearest_wall,
    point_clear,
    segment_clear,
    service_configuration,
    validate_layout,
)
from .recipe import (
    ActionSequence,
    Agent,
    AgentState,
    DwellTimes,
    Event,
    Mode,
    Recipe,
    SubTask,
    TaskPool,
    expand_recipes,
    fsm_step,
    next_sub_task,
    to_action_sequence,
)
from .planner import (
    Belief,
    PlannerParams,
    Policy,
    SimOutcome,
    TimedNode,
    TimedPath,
    belief_init,
    belief_update,
    check_dynamic_collision,
    plan_single,
    plan_tour,
    simulate,
    virtual_human_path,
)
from .cost import (
    CostVector,
    Solution,
    Weights,
    dominates,
    evaluate,
    layout_distance_cost,
    layout_rotation_cost,
    path_length_cost,
    path_narrowness_cost,
    path_time_cost,
    total_cost,
)
from .optimizer import (
    AnnealConfig,
    OptimizeMode,
    ParetoSet,
    Problem,
    accept,
    anneal,
    objective,
    pareto_insert,
    propose_layout_move,
    propose_path_move,
)
from .config import ProblemConfig, default_config, load_config, problem_from_config

__version__ = "0.1.0"
