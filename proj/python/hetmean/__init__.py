"""Mean estimation when every observation has its own unknown noise scale."""

from ._core import (
    AcceptDecision,
    AdaptiveReport,
    Constants,
    Interval,
    ModalResult,
    accept,
    adaptive_bound,
    adaptive_estimate,
    calibrate_constants,
    candidate_lengths,
    chierichetti_style_bound,
    count_in,
    expected_count,
    gen_sample,
    gordon_moment_bound,
    is_admissible,
    m_of_s,
    make_profile,
    max_count_excluding,
    median_interval,
    median_interval_alpha,
    median_interval_bound,
    modal_interval,
    modal_mean,
    phi_mass,
    s_bar,
    sample_mean,
    sample_median,
    simulate,
    weighted_mean_oracle,
    xia_bound,
)

__version__ = "0.1.0"
