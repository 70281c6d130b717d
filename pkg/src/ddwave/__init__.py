"""ddwave: doubly-dispersive channel simulation with OTFS and AFDM modems,
LMMSE BER benchmarking, and delay-Doppler radar parameter estimation."""

__version__ = "0.1.0"

from .afdm import (
    AfdmConfig,
    afdm_demodulate,
    afdm_effective_channel,
    afdm_modulate,
    cyclic_diagonal_energies,
    predicted_band_offset,
)
from .analysis import (
    ComparisonRow,
    DiversityProbeResult,
    GuardPolicy,
    ModulationCost,
    comparison_table,
    default_guard_policy,
    diversity_probe,
    guard_overhead,
    modulation_cost,
    support_count_per_row,
)
from .channel import (
    SPEED_OF_LIGHT,
    ChannelMatrix,
    NoiseModel,
    Path,
    PathFactors,
    PathSet,
    ScenarioConfig,
    apply_channel,
    build_channel_matrix,
    chirp_prefix_phases,
    cir_time_delay,
    cir_time_frequency,
    cyclic_shift_matrix,
    delay_doppler_spread,
    random_path_set,
    transfer_function_grid,
    vehicular_scenario,
)
from .detection import (
    Constellation,
    DetectionReport,
    EqualizationError,
    constellation,
    count_bit_errors,
    demap,
    lmmse_equalize,
    map_bits,
)
from .experiments import (
    Experiment,
    run_ber_sweep,
    run_experiment,
    run_sensing_sweep,
    viz_channel,
    waveform_config,
)
from .otfs import OtfsConfig, OtfsFrame, otfs_demodulate, otfs_effective_channel, otfs_modulate
from .sensing import (
    EstimatedPath,
    EstimationResult,
    SensingProblem,
    SensingReport,
    conditional_channel,
    estimate_grid_sic,
    ml_objective,
    path_signature,
    sensing_metrics,
)
from .transforms import (
    DaftOperator,
    OpCounter,
    chirp_diagonal,
    chirp_phases,
    daft_apply,
    devectorize,
    dft_apply,
    dft_matrix,
    isfft,
    isfft_inverse,
    vectorize,
)
