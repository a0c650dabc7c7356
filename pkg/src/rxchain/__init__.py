"""rxchain: receive-chain budget analysis.

Cascaded gain / noise figure / third-order intercept / SFDR math for
superheterodyne receive chains, with a two-tone time-domain simulator that
independently validates the intercept arithmetic, frequency-plan and spur
bookkeeping, Touchstone import, operating-point sweeps, tolerance analysis,
and attenuator flatness calibration. The `rxchain` console script exposes the
same operations on chain description files.
"""

from .cascade import (
    CascadeResult,
    CascadeRow,
    NoiseModel,
    analyze,
    bottleneck_report,
    cascade_from_resolved,
    cascade_gain,
    cascade_iip3,
    cascade_noise_figure,
    noise_floor,
    resolve_chain,
    sfdr,
)
from .errors import RxChainError
from .intermod import (
    ImProduct,
    PlanTable,
    SpurEntry,
    frequency_plan_table,
    im3_level,
    in_band,
    mixer_spur_table,
    spur_table_csv,
    two_tone_products,
)
from .model import (
    Chain,
    FrequencyPlan,
    GainTable,
    OperatingPoint,
    ResolvedStage,
    StageKind,
    StageSpec,
    build_chain,
    derive_ip3,
    load_chain,
    load_reference_chain,
    reference_chain_path,
    resolve_stage,
    validate_document,
)
from .sweeps import (
    CalibrationResult,
    Interferer,
    MonteCarloSummary,
    SweepGrid,
    SweepRow,
    WorstCase,
    calibrate_attenuator,
    interferer_margin,
    monte_carlo,
    run_sweep,
    sweep_csv,
    sweep_plot_csv,
    worst_case,
)
from .touchstone import (
    ParamTable,
    TwoPortNetwork,
    gain_at,
    load_param_table,
    parse_touchstone,
    write_touchstone,
)
from .twotone import (
    PolyNonlinearity,
    ToneMeasurement,
    compose,
    design_nonlinearity,
    extract_ip3,
    simulate_two_tone,
    slope_scan,
)

__version__ = "0.1.0"
