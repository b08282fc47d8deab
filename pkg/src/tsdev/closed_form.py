"""Analytic shift curves for a unit sine observed through a finite window.

The model is ``x1(t) = sin(w t)`` and ``x2(t) = sin(w (t - tau0))`` with the
window ``[t0, t0 + tw)``. Each function accepts scalar or array ``tau`` and
returns the continuous-time window average that the discrete curves in
:mod:`tsdev.estimators` approximate.
"""

import numpy as np


def sine_cc_closed_form(omega, tau0, t0, tw, tau):
    """Windowed cross-correlation of two unit sines.

    ``1/2 cos(w d) - sin(w tw) cos(2 w t0 + w tw + w d) / (2 w tw)`` with
    ``d = tau - tau0``. The second term vanishes when ``tw`` is a whole number
    of half periods.
    """
    _check_tw(tw)
    d = np.asarray(tau, dtype=float) - tau0
    return (0.5 * np.cos(omega * d)
            - np.sin(omega * tw) * np.cos(2 * omega * t0 + omega * tw + omega * d)
            / (2 * omega * tw))


def sine_tsdev_mean(omega, tau0, t0, tw, tau):
    """Window mean ``C(tau)`` of ``sin(w t) - sin(w (t + tau - tau0))``."""
    _check_tw(tw)
    d = np.asarray(tau, dtype=float) - tau0
    t1 = t0 + tw
    return (np.cos(omega * t0) - np.cos(omega * t1)
            + np.cos(omega * (t1 + d)) - np.cos(omega * (t0 + d))) / (omega * tw)


def sine_tsdev_closed_form(omega, tau0, t0, tw, tau):
    """Windowed TSDEV of two unit sines, ``A sin^2(w d/2) + B sin(w d/2) + C^2``.

    ``A`` and ``B`` are the window-dependent coefficients of the arbitrary
    window case, with the window start ``t0`` and length ``tw``::

        A = (2 w tw + sin(w (2 t0 + 2 tw + d)) - sin(w (2 t0 + d))) / (w tw)
        B = 4 C (sin(w (t0 + tw + d/2)) - sin(w (t0 + d/2))) / (w tw)

    Since ``B sin(w d/2) = -2 C^2`` this equals ``A sin^2(w d/2) - C^2``. It is
    zero at ``tau = tau0`` for every window and reduces to ``1 - cos(w d)``
    when ``tw`` is a whole number of periods.
    """
    _check_tw(tw)
    d = np.asarray(tau, dtype=float) - tau0
    wt = omega * tw
    a = (2 * wt + np.sin(omega * (2 * t0 + 2 * tw + d)) - np.sin(omega * (2 * t0 + d))) / wt
    c = sine_tsdev_mean(omega, tau0, t0, tw, tau)
    b = 4 * c * (np.sin(omega * (t0 + tw + d / 2)) - np.sin(omega * (t0 + d / 2))) / wt
    half = np.sin(omega * d / 2)
    return a * half ** 2 + b * half + c ** 2


def sine_tsdev_full_period(omega, tau0, tau):
    """``1 - cos(w (tau - tau0))``, the whole-period limit of the TSDEV curve."""
    return 1.0 - np.cos(omega * (np.asarray(tau, dtype=float) - tau0))


def sine_average_power(omega, t0, tw):
    """Mean of ``sin^2(w t)`` over ``[t0, t0 + tw)``.

    ``1/2 - (sin(2 w (t0 + tw)) - sin(2 w t0)) / (4 w tw)``; exactly 1/2 when
    ``tw`` is a whole number of half periods.
    """
    _check_tw(tw)
    return 0.5 - (np.sin(2 * omega * (t0 + tw)) - np.sin(2 * omega * t0)) / (4 * omega * tw)


def _check_tw(tw):
    if not np.all(np.asarray(tw) > 0):
        raise ValueError(f"window length must be > 0, got {tw}")
