"""Omori aftershocks in a non-stationary Student-t model of intraday returns."""

from ._core import (
    AftershockError,
    ConfigError,
    DataError,
    DependencyError,
    DomainError,
    FitError,
    ModelParams,
    OmoriParams,
    ParseError,
    aftershock_probability_closed_form,
    aggregate_pdf,
    calibrate,
    empirical_counts,
    fit_omori,
    joint_logpdf,
    main_shock_magnitudes,
    mixing_density,
    omori_cumulative,
    predict_average,
    predict_single,
    run,
    sample_ensemble,
    scale_coefficients,
    scaling_function_g,
    sigma_m_for_frequency,
)

__version__ = "0.1.0"
