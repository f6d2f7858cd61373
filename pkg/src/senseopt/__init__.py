"""Qubit magnetometry protocol optimization and landscape-aging diagnostics."""

from .fields import GYRO_RAD_PER_S_UT, MultiToneField, PhotocurrentField
from .noise import (
    NoisePool,
    NoiseTrace,
    PowerSpectralDensity,
    build_pool,
    default_bath_psd,
    draw_minibatch,
    evaluate_psd,
    sample_noise_trace,
)
from .pipulse import (
    BlindProtocolError,
    PiPulseProtocol,
    accumulated_phase,
    cp_protocol,
    decoherence_chi,
    filter_function,
    filter_parseval_integral,
    pi_sensitivity,
    pi_sensitivity_gradient,
    project_pulse_times,
    switching_function,
)

__version__ = "0.1.0"

from .adadelta import (  # noqa: E402
    AdadeltaState,
    CallbackFailure,
    RunRecord,
    adadelta_update,
    run_sgd,
)
from .contdrive import (  # noqa: E402
    ContinuousProtocol,
    DegenerateFisherError,
    QubitState,
    cd_gradient,
    cd_loss_and_gradient,
    cd_sensitivity,
    embed_pulse_protocol,
    evolve,
    fisher_information,
    step_unitary,
)
from .glass import (  # noqa: E402
    ProtocolTrajectory,
    SpinVector,
    delta_series,
    ensemble_delta,
    fit_growth,
    to_spin_vector,
    two_time_autocorr,
)
from .pumpprobe import (  # noqa: E402
    PumpProbeConfig,
    PumpSchedule,
    cp_probe,
    default_pump_schedule,
    front_loaded_probe,
    optimize_pump,
    pump_sensitivity,
    reference_cp_inverse_sensitivity,
)
