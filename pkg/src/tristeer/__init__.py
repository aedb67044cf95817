"""Tripartite Bell, steering and biseparability analysis of three-qubit correlations."""
from .boxes import (
    BipartiteBox,
    Relabeling,
    PartyRelabeling,
    TripartiteBox,
    bb84_family,
    born_bipartite,
    born_tripartite,
    check_no_signaling,
    chsh_family,
    correlator,
    lro_apply,
    lro_equivalent,
    mermin_family,
    svetlichny_family,
)
from .inequalities import (
    InequalityReport,
    chsh_prime_value,
    chsh_value,
    classify,
    mermin_value,
    steering_two_setting_value,
    svetlichny_chsh_identity_check,
    svetlichny_value,
)
from .lhv import mf_steering_model, reconstruct, svf_steering_model
from .states import (
    DensityMatrix,
    DichotomicObservable,
    MeasurementSettings,
    ghz_witness_value,
    mermin_settings,
    noisy_ghz,
    psi_lambda,
    svetlichny_settings,
)

__version__ = "0.1.0"
