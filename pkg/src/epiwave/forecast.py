"""Next-wave prediction bands from previously fitted wave parameters.

The central curve uses the arithmetic mean of the prior parameters; the
lower and upper curves use the R0-minimizing (min beta, max eta) and
R0-maximizing (max beta, min eta) corners of the prior envelope.  Epsilon
and kappa take their prior means in all three bands.
"""
from __future__ import annotations

import datetime as dt

from dataclasses import dataclass

import numpy as np

from .calibration import FitCandidate
from .epidemic import (
    DEFAULT_SEED,
    DEFAULT_STEP,
    SeirParams,
    daily_deaths,
    initial_state,
    integrate,
)
from .series import DailyCountSeries


@dataclass
class ForecastBand:
    central: DailyCountSeries
    lower: DailyCountSeries
    upper: DailyCountSeries
    assumptions: dict


def _band_curve(
    params: SeirParams,
    kappa: float,
    start_date: dt.date,
    horizon_days: int,
    step: float,
    seed: float,
) -> DailyCountSeries:
    traj = integrate("seir", initial_state("seir", seed), params, horizon_days, step)
    return daily_deaths(traj, kappa, start_date=start_date)


def predict_wave(
    priors: list[FitCandidate],
    start_date: dt.date,
    horizon_days: int,
    *,
    step: float = DEFAULT_STEP,
    seed: float = DEFAULT_SEED,
) -> ForecastBand:
    """Central/lower/upper daily-deaths curves over the forecast horizon."""
    if not priors:
        raise ValueError("need at least one prior candidate")
    if horizon_days < 14:
        raise ValueError("horizon must be >= 14 days")

    betas = [c.params.beta for c in priors]
    etas = [c.params.eta for c in priors]
    epsilon = float(np.mean([c.params.epsilon for c in priors]))
    kappa = float(np.mean([c.kappa for c in priors]))

    central_p = SeirParams(float(np.mean(betas)), float(np.mean(etas)), epsilon)
    lower_p = SeirParams(min(betas), max(etas), epsilon)
    upper_p = SeirParams(max(betas), min(etas), epsilon)

    curves = {
        name: _band_curve(p, kappa, start_date, horizon_days, step, seed)
        for name, p in (("central", central_p), ("lower", lower_p), ("upper", upper_p))
    }
    # Repair any pointwise ordering violations across the three curves.
    stacked = np.vstack([curves[k].values for k in ("lower", "central", "upper")])
    lower_vals = stacked.min(axis=0)
    upper_vals = stacked.max(axis=0)

    def describe(p: SeirParams) -> dict:
        return {
            "beta": p.beta,
            "eta": p.eta,
            "epsilon": p.epsilon,
            "kappa": kappa,
            "r0": p.beta / p.eta,
        }

    return ForecastBand(
        central=curves["central"],
        lower=DailyCountSeries(start=start_date, values=lower_vals),
        upper=DailyCountSeries(start=start_date, values=upper_vals),
        assumptions={
            "central": describe(central_p),
            "lower": describe(lower_p),
            "upper": describe(upper_p),
            "n_priors": len(priors),
        },
    )
