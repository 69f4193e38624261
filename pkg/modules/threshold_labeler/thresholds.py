"""
Dynamic volatility threshold and direction labeling
"""
import logging

import numpy as np

from modules.shared.errors import DataError, InsufficientHistoryError
from modules.shared.models import Direction, HORIZONS
from modules.threshold_labeler.models import (
    ClampState, HorizonThresholds, LabeledSample, ThresholdParams, ThresholdValue,
)


def _std(values):
    return float(np.std(values, ddof=1))


def compute_theta(params, returns, as_of=None):
    """Threshold from the return series ending at the evaluation date

    sigma over n_v returns, scaled by an adaptive multiplier picked from the
    short/long volatility ratio, then clamped between the q_lo/q_hi quantiles
    of |r| over the last n_b returns.
    """
    r = np.asarray(returns, dtype=float)
    if len(r) < params.min_returns:
        raise InsufficientHistoryError(
            f"threshold needs {params.min_returns} returns, got {len(r)}", missing=['theta'])

    sigma = _std(r[-params.n_v:])
    sigma_short = _std(r[-params.n_short:])
    sigma_long = _std(r[-params.n_long:])

    ratio_undefined = sigma_long == 0
    if ratio_undefined:
        multiplier = params.m0
    else:
        ratio = sigma_short / sigma_long
        if ratio > params.tau_high:
            multiplier = params.m0 * params.a_high
        elif ratio < params.tau_low:
            multiplier = params.m0 * params.a_low
        else:
            multiplier = params.m0

    q_lo, q_hi = (float(q) for q in np.quantile(np.abs(r[-params.n_b:]), [params.q_lo_pct, params.q_hi_pct]))
    raw = sigma * multiplier
    if raw < q_lo:
        theta, clamped = q_lo, ClampState.FLOOR
    elif raw > q_hi:
        theta, clamped = q_hi, ClampState.CEILING
    else:
        theta, clamped = raw, ClampState.NONE

    return ThresholdValue(theta=theta, sigma=sigma, sigma_short=sigma_short, sigma_long=sigma_long,
                          multiplier=multiplier, q_lo=q_lo, q_hi=q_hi, clamped=clamped,
                          ratio_undefined=ratio_undefined, as_of=as_of)


def horizon_thresholds(theta):
    if theta <= 0:
        raise DataError(f"horizon thresholds need a positive theta, got {theta}")
    return HorizonThresholds.from_theta(theta)


def classify(r_cum, eps_k):
    """up iff r >= eps, down iff r <= -eps, else side; a zero move is side even at eps = 0"""
    if eps_k < 0:
        raise ValueError(f"negative threshold {eps_k}")
    if eps_k == 0 and r_cum == 0:
        return Direction.SIDE
    if r_cum >= eps_k:
        return Direction.UP
    if r_cum <= -eps_k:
        return Direction.DOWN
    return Direction.SIDE


def _returns(closes):
    return closes[1:] / closes[:-1] - 1.0


def theta_series(bars, params=None, last=None):
    """ThresholdValue for every bar with enough history (or only the last n), oldest first"""
    params = params or ThresholdParams()
    bars = list(bars)
    closes = np.asarray([b.close for b in bars], dtype=float)
    r = _returns(closes)
    start = params.min_returns if last is None else max(params.min_returns, len(bars) - last)
    # bar t closes the return series r[:t]
    return [compute_theta(params, r[:t], as_of=bars[t].date) for t in range(start, len(bars))]


def breach_flags(returns, thetas, n=5):
    """Whether each of the last n days moved beyond its own threshold"""
    pairs = list(zip(returns, thetas))[-n:]
    return [bool(abs(r) > theta) for r, theta in pairs]


def _eps(theta):
    if theta > 0:
        return horizon_thresholds(theta)
    # Flat history: every threshold collapses to zero
    return HorizonThresholds(eps1=0.0, eps5=0.0, eps20=0.0)


def annotate(bars, params=None, fund_code='', listing_date=None, min_listing_days=365):
    """Labeled samples for every date with a computable threshold

    Dates lacking k forward bars carry no label for horizon k and list k in
    missing_horizons. With a listing date, dates at which the fund has been
    listed for fewer than min_listing_days natural days are skipped.
    """
    params = params or ThresholdParams()
    bars = list(bars)
    closes = np.asarray([b.close for b in bars], dtype=float)
    r = _returns(closes)
    samples = []
    for t in range(params.min_returns, len(bars)):
        day = bars[t].date
        if listing_date is not None and (day - listing_date).days < min_listing_days:
            continue
        value = compute_theta(params, r[:t], as_of=day)
        eps = _eps(value.theta)
        fields = {}
        missing = []
        for k in HORIZONS:
            if t + k < len(bars):
                r_fwd = float((closes[t + k] - closes[t]) / closes[t])
                fields[f"r_fwd_{k}"] = r_fwd
                fields[f"label_{k}"] = classify(r_fwd, eps.for_horizon(k))
            else:
                missing.append(k)
        samples.append(LabeledSample(fund_code=fund_code, date=day, theta=value.theta,
                                     eps1=eps.eps1, eps5=eps.eps5, eps20=eps.eps20,
                                     missing_horizons=tuple(missing), **fields))
    logging.info(f"🏷️ Labeled {len(samples)} samples for {fund_code or 'series'}")
    return samples


def sideways_fraction(bars, params=None):
    """Share of classifiable days whose own move |r_t| stays within theta_t"""
    params = params or ThresholdParams()
    bars = list(bars)
    needed = params.n_b + params.n_long
    if len(bars) < needed:
        raise InsufficientHistoryError(f"sideways fraction needs {needed} bars, got {len(bars)}",
                                       missing=['sideways_fraction'])
    closes = np.asarray([b.close for b in bars], dtype=float)
    r = _returns(closes)
    flags = [abs(r[t - 1]) <= compute_theta(params, r[:t]).theta
             for t in range(params.min_returns, len(r) + 1)]
    return float(np.mean(flags))
