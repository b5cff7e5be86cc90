"""Conclusive dual-rail state transfer across randomly coupled spin chains."""

from .hamiltonians import (
    ChainSpec,
    DisorderConfig,
    SingleExcitationHamiltonian,
    build_chain,
    load_chain,
    sample_disorder,
    save_chain,
    single_excitation_matrix,
)
from .dynamics import (
    ExcitationState,
    ProjectedTrace,
    SpectralPropagator,
    TraceBuilder,
    amplitude,
    norm_identities,
    diagonalize,
    projected_trace,
)
from .scheduler import (
    MeasurementSchedule,
    SchedulerConfig,
    build_schedule,
    find_next_time,
)
from .protocol import (
    LogicalQubit,
    TransferRecord,
    encode,
    run_round,
    run_transfer,
    transfer_rng,
)
from .tomography import (
    EndpointFunctions,
    certify,
    estimate_endpoints,
    failure_probabilities,
    reconstruct_F_G,
)
from .harness import (
    ScalingFit,
    SweepConfig,
    SweepRecord,
    collect_scaling_curves,
    emit_report,
    fit_scaling,
    propagator_pair,
    run_sweep,
    summarize,
)

__version__ = "0.1.0"
