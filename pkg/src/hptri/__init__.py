"""Half-planar triangulations via peeling: exact enumeration, the
one-parameter peeling law, map construction, samplers, and experiment
harness."""

from .enumeration import (
    Q_CRIT,
    catalan,
    log_phi,
    log_z,
    phi_closed,
    phi_recurrence,
    q_of_theta,
    quad_count,
    ratio_limit,
    theta_of_q,
    z_closed,
    z_series,
)
from .errors import (
    DomainError,
    NumericAnomaly,
    ResourceError,
    StructuralError,
    TailBoundUnavailable,
)
from .peeling_law import (
    PeelEvent,
    PeelLaw,
    QSummary,
    conditional_k,
    event_probability,
    law_from_alpha,
    p_i,
    p_ik,
    quad_event_probability,
    quad_limit_constants,
    sample_event,
    tail_exponent,
    total_mass_partial,
)
from .planar_map import (
    EventLog,
    FiniteMap,
    HalfPlaneMap,
    bfs_distance,
    dump_json,
    from_event_log,
    from_json_dict,
    load_json,
    to_event_log,
    to_json_dict,
    to_svg,
    validate,
)
from .sampler import (
    NonSimpleParams,
    Schedule,
    boltzmann_polygon,
    build_ball,
    core,
    expand_nonsimple,
    make_rng,
    peel_steps,
    pendant_loop_patch,
    uniform_polygon,
)

__version__ = "0.1.0"
