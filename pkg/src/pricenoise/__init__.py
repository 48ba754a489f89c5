"""Integral white noise model of log-price dynamics."""
from .errors import PriceNoiseError
from .estimate import (
    AcfEstimate,
    PsdEstimate,
    SlopeFit,
    WhitenessResult,
    averaged_psd,
    dc_component,
    ensemble_acf,
    fit_loglog_slope,
    periodogram,
    sample_acf,
    sample_mean,
    whiteness_test,
)
from .ingest import PriceTable, calibrate_n0, load_prices, price_to_logprice
from .noisegen import generate_ensemble, generate_noise
from .pricemodel import (
    SwitchWindow,
    apply_switch,
    average_speed,
    integrate,
    log_returns,
    trend_component,
)
from .series import Ensemble, NoiseSpec, SampleSeries, make_series
from .theory import (
    TheoryParams,
    acf_noise,
    acf_price,
    angular_frequency,
    main_lobe_fraction,
    ordinary_frequency,
    psd_noise,
    psd_price,
    sinc,
)

__all__ = [name for name in dir() if not name.startswith("_")]
