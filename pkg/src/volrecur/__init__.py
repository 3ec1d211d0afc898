"""Recurrence intervals of extreme intraday volatility.

Volatility preprocessing, threshold recurrence intervals, maximum
likelihood fits of five interval families, the q-exponential hazard, alarm
prediction with ROC scoring, rolling-window estimates and synthetic oracles.
"""
__version__ = "0.1.0"

from .distributions import DistFamily
from .errors import ConfigError, DataError, NumericalError, VolrecurError
from .fitting import DistributionFit, fit_all_and_rank, fit_family, ks_statistic
from .hazard import HazardQuery, hazard_curve, hazard_qexp
from .intervals import IntervalSample, intervals_for_tau, sweep_tau, threshold_for_mean_interval
from .io import PriceSeries, load_price_csv
from .predictor import predict, roc_curve
from .rolling import WindowSpec, rolling_fit, slope_vs_tau
from .synthetic import GeneratorSpec, clustered_volatility, renewal_event_series
from .volatility import VolatilitySeries, preprocess
