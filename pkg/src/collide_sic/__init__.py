"""Protocol sequences for the slotted collision channel, with exhaustive
zero-error verification under successive interference cancellation."""

from .budget import DEFAULT_WORK_BUDGET, resolve_budget
from .channel import (
    BasicReport,
    ChannelTrace,
    Contributor,
    SicReport,
    SlotKind,
    SlotObservation,
    SteadyReport,
    UserConfig,
    basic_receive,
    default_horizon,
    generate_source_block,
    identify_shifts,
    sic_receive,
    simulate_trace,
    steady_state_receive,
)
from .construction import (
    ConstructionLayout,
    DutyFactorPlan,
    build_si_set,
    enumerate_plans,
    min_period_bound,
    parse_rate,
    plan_duty_factors,
)
from .correlation import (
    CorrelationQuery,
    SiViolation,
    SiWitnessReport,
    check_si_witness_equivalence,
    correlation_at,
    correlation_tensor,
    cross_correlation,
    find_si_violation,
    is_si_for,
    is_si_set,
    is_ti_set,
    marks_partition_total,
    verify_complement_identity,
    verify_shift_sum_identity,
)
from .erasure import (
    CodedBlock,
    CodingParams,
    SourceBlock,
    can_decode,
    decode,
    encode,
    reencode_from_source,
)
from .errors import (
    AmbiguousIdentificationError,
    BoundaryViolationError,
    BudgetExceededError,
    ConfigurationError,
    FieldCapacityError,
    InsufficientPacketsError,
    InternalConsistencyError,
    InvalidQueryError,
    LayoutError,
    ParameterError,
    PeriodMismatchError,
    SequenceFormatError,
    ToolkitError,
    TraceMismatchError,
)
from .sequences import (
    BinarySequence,
    SequenceSet,
    expand_to_common_period,
    load_sequence_file,
    parse_sequence_obj,
    reduce_shifts,
    save_sequence_file,
    sequence_set_from_rows,
    sequence_set_to_obj,
)
from .verification import (
    AchievabilityReport,
    BaselineReport,
    MinPeriodSearchReport,
    RegionData,
    ShiftOutcome,
    VerificationReport,
    achievability_check,
    baseline_throughput,
    codings_for_rates,
    min_period_search,
    necessity_falsifier,
    region_boundary,
    sweep_all_shifts,
)

__version__ = "0.1.0"
