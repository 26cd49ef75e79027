"""Degree-class mean-field dynamics of the mixed SIS/SIR/SIRS process.

For each degree class ``k`` with weight ``P(k)``::

    ds_k/dt = -lam k s_k theta + u i_k + w sigma r_k
    di_k/dt =  lam k s_k theta - i_k
    dr_k/dt = (w + q) i_k - w sigma r_k

with ``theta = sum_k k P(k) i_k / <k>``. Integration is fixed-step RK4.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "DegreeClassField",
    "IntegrationError",
    "MeanFieldParams",
    "ThresholdReport",
    "Trajectory",
    "fixed_point_map",
    "fixed_point_slope_at_zero",
    "integrate",
    "normalize_pk",
    "power_law_pk",
    "rhs",
    "solve_theta_fixed_point",
    "steady_state_field",
    "steady_state_i_k",
    "theta",
    "threshold",
]

log = logging.getLogger(__name__)

BOUND_TOL = 1e-6


class IntegrationError(RuntimeError):
    """Integration left the physical range; a smaller step is needed."""


@dataclass(frozen=True)
class MeanFieldParams:
    lam: float
    u: float
    w: float
    q: float
    sigma: float

    def __post_init__(self):
        for name in ("lam", "u", "w", "q", "sigma"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0 and name != "lam":
                raise ValueError(f"{name} must lie in [0, 1], got {val}")
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        if abs(self.u + self.w + self.q - 1.0) > 1e-12:
            raise ValueError(f"mixture must sum to 1, got {self.u + self.w + self.q}")

    @property
    def w_sigma(self) -> float:
        return self.w * self.sigma

    def with_lam(self, lam: float) -> "MeanFieldParams":
        return MeanFieldParams(lam, self.u, self.w, self.q, self.sigma)


@dataclass
class DegreeClassField:
    degrees: np.ndarray
    pk: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.degrees = np.asarray(self.degrees, dtype=float)
        self.pk = np.asarray(self.pk, dtype=float)
        if np.any(np.diff(self.degrees) <= 0):
            raise ValueError("degrees must be strictly increasing")
        if abs(self.pk.sum() - 1.0) > 1e-12:
            raise ValueError(f"P(k) must sum to 1, got {self.pk.sum()!r}")
        for name in ("s", "i", "r"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).copy())

    @classmethod
    def uniform_start(cls, degrees, pk, i0: float) -> "DegreeClassField":
        """``i_k = i0``, ``s_k = 1 - i0``, ``r_k = 0`` for every class."""
        n = len(degrees)
        return cls(degrees, pk, np.full(n, 1.0 - i0), np.full(n, i0), np.zeros(n))

    @property
    def mean_degree(self) -> float:
        return float(np.dot(self.degrees, self.pk))

    @property
    def theta(self) -> float:
        return theta(self)

    def total_i(self) -> float:
        return float(np.dot(self.pk, self.i))


def normalize_pk(degrees, weights, k_min: float = 1, k_max: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Truncate to ``[k_min, k_max]``, drop zero weights, renormalise."""
    degrees = np.asarray(degrees, dtype=float)
    weights = np.asarray(weights, dtype=float)
    keep = (degrees >= k_min) & (weights > 0)
    if k_max is not None:
        keep &= degrees <= k_max
    degrees, weights = degrees[keep], weights[keep]
    if weights.size == 0:
        raise ValueError("empty degree support after truncation")
    return degrees, weights / weights.sum()


def _theta(degrees, pk, i) -> float:
    kmean = float(np.dot(degrees, pk))
    if kmean == 0:
        raise ValueError("mean degree is zero")
    return float(np.dot(degrees * pk, i) / kmean)


def theta(field: DegreeClassField) -> float:
    """Probability that an edge points at a spreader."""
    return _theta(field.degrees, field.pk, field.i)


def _derivs(degrees, pk, s, i, r, params: MeanFieldParams):
    th = _theta(degrees, pk, i)
    infect = params.lam * degrees * s * th
    ws = params.w_sigma
    ds = -infect + params.u * i + ws * r
    di = infect - i
    dr = (params.w + params.q) * i - ws * r
    return ds, di, dr


def rhs(field: DegreeClassField, params: MeanFieldParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return _derivs(field.degrees, field.pk, field.s, field.i, field.r, params)


@dataclass
class Trajectory:
    degrees: np.ndarray
    pk: np.ndarray
    t: np.ndarray
    s: np.ndarray  # shape (len(t), len(degrees))
    i: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    clamp_events: int = 0

    def final(self) -> DegreeClassField:
        return DegreeClassField(self.degrees, self.pk, self.s[-1], self.i[-1], self.r[-1])

    def total_i(self) -> np.ndarray:
        return self.i @ self.pk


def integrate(
    field0: DegreeClassField,
    params: MeanFieldParams,
    t_max: float,
    dt: float,
    record_every: int = 1,
) -> Trajectory:
    """Fixed-step RK4; theta is recomputed inside every stage.

    Densities are clamped to ``[0, 1]`` after each step (clamps are counted and
    logged). Any excursion beyond ``BOUND_TOL`` raises :class:`IntegrationError`.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_max < 0:
        raise ValueError(f"t_max must be non-negative, got {t_max}")
    k, pk = field0.degrees, field0.pk
    y = np.stack([field0.s, field0.i, field0.r])
    n_steps = int(math.ceil(t_max / dt - 1e-12))

    def f(state):
        return np.stack(_derivs(k, pk, state[0], state[1], state[2], params))

    ts, rows = [0.0], [y.copy()]
    clamps = 0
    for step in range(1, n_steps + 1):
        h = min(dt, t_max - (step - 1) * dt)
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.any(y < -BOUND_TOL) or np.any(y > 1 + BOUND_TOL) or not np.all(np.isfinite(y)):
            raise IntegrationError(f"density left [0, 1] at t={step * dt:.6g}; reduce dt (now {dt})")
        out = (y < 0) | (y > 1)
        if out.any():
            clamps += int(out.sum())
            log.debug("clamped %d densities at t=%.6g", int(out.sum()), step * dt)
            y = np.clip(y, 0.0, 1.0)
        if step % record_every == 0 or step == n_steps:
            ts.append(min(step * dt, t_max))
            rows.append(y.copy())
    arr = np.stack(rows)
    thetas = np.array([_theta(k, pk, row[1]) for row in arr])
    if clamps:
        log.info("integration clamped %d density values", clamps)
    return Trajectory(k, pk, np.array(ts), arr[:, 0], arr[:, 1], arr[:, 2], thetas, clamps)


# -- stationary state ---------------------------------------------------------


def steady_state_i_k(k, th: float, params: MeanFieldParams):
    """Stationary spreader density of class ``k`` given the field ``th``."""
    k = np.asarray(k, dtype=float)
    ws = params.w_sigma
    num = params.lam * ws * k * th
    den = params.lam * (1.0 - params.u + ws) * k * th + ws
    if np.any(den == 0):
        log.warning("stationary density undefined (theta = 0 and w*sigma = 0); returning 0")
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den == 0, 0.0, num / np.where(den == 0, 1.0, den))
    return float(out) if out.ndim == 0 else out


def steady_state_field(degrees, pk, th: float, params: MeanFieldParams) -> DegreeClassField:
    """Consistent ``(s_k, i_k, r_k)`` at a stationary field value ``th``."""
    degrees = np.asarray(degrees, dtype=float)
    i = steady_state_i_k(degrees, th, params)
    ws = params.w_sigma
    r = (params.w + params.q) * i / ws if ws > 0 else np.zeros_like(i)
    s = 1.0 - i - r
    return DegreeClassField(degrees, pk, s, i, r)


def fixed_point_map(th: float, degrees, pk, params: MeanFieldParams) -> float:
    """Field produced by the stationary densities at ``th``."""
    degrees = np.asarray(degrees, dtype=float)
    return _theta(degrees, pk, steady_state_i_k(degrees, th, params))


def fixed_point_slope_at_zero(degrees, pk, params: MeanFieldParams) -> float:
    """Derivative of :func:`fixed_point_map` at 0.

    The ``w sigma`` factors cancel: the slope is ``lam <k^2> / <k>`` whenever
    ``w sigma > 0`` and 0 otherwise.
    """
    if params.w_sigma == 0:
        return 0.0
    degrees = np.asarray(degrees, dtype=float)
    k1 = float(np.dot(degrees, pk))
    k2 = float(np.dot(degrees**2, pk))
    return params.lam * k2 / k1


def solve_theta_fixed_point(
    degrees,
    pk,
    params: MeanFieldParams,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    damping: float = 0.5,
) -> float:
    """Largest ``theta`` in (0, 1] with ``F(theta) = theta``, or 0 if none.

    Damped fixed-point iteration from ``theta = 1``; falls back to bisection of
    ``F(theta) - theta`` when the iteration stalls near the threshold.
    """
    if fixed_point_slope_at_zero(degrees, pk, params) <= 1.0 + 1e-12:
        return 0.0
    F = lambda x: fixed_point_map(x, degrees, pk, params)  # noqa: E731
    th = 1.0
    for _ in range(min(max_iter, 10_000)):
        nxt = (1 - damping) * th + damping * F(th)
        if abs(nxt - th) < tol * 1e-2:
            th = nxt
            break
        th = nxt
    if abs(F(th) - th) <= tol:
        return th
    # bisection: G = F - theta is positive just above 0 and non-positive at 1
    lo, hi = 0.0, 1.0
    g_lo_probe = 1e-300
    while F(g_lo_probe) - g_lo_probe <= 0:
        g_lo_probe *= 1e10
        if g_lo_probe >= 1:
            return 0.0
    lo = g_lo_probe
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if F(mid) - mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            return 0.5 * (lo + hi)
    raise RuntimeError("fixed-point search did not converge")


# -- thresholds -----------------------------------------------------------------


@dataclass
class ThresholdReport:
    """Propagation thresholds and the moments they are built from.

    ``lambda_c_empirical`` is the moment threshold at which the stationary map
    acquires slope 1 at zero (``<k>/<k^2>``). ``lambda_c_printed`` keeps the
    extra ``1/(w sigma)`` factor of the published moment formula.
    ``lambda_c_closedform`` is the continuum approximation built from the
    small-world moments ``upsilon`` and ``psi``.
    """

    lambda_c_empirical: float
    lambda_c_printed: float
    lambda_c_closedform: float
    upsilon: float
    psi: float
    k_mean: float
    k2_mean: float
    M: float
    m: float
    branch: str
    w_sigma: float
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(x):
            return "infinite" if isinstance(x, float) and math.isinf(x) else x

        ratio = (
            self.lambda_c_closedform / self.lambda_c_printed
            if math.isfinite(self.lambda_c_printed) and self.lambda_c_printed > 0
            else None
        )
        return {
            "lambda_c_empirical": enc(self.lambda_c_empirical),
            "lambda_c_printed": enc(self.lambda_c_printed),
            "lambda_c_closedform": enc(self.lambda_c_closedform),
            "closedform_over_printed": ratio,
            "upsilon": self.upsilon,
            "psi": self.psi,
            "k_mean": self.k_mean,
            "k2_mean": self.k2_mean,
            "M": self.M,
            "m": self.m,
            "branch": self.branch,
            "w_sigma": self.w_sigma,
            **self.extras,
        }


def threshold(
    degrees,
    pk,
    w: float,
    sigma: float,
    m: float,
    M: Optional[float] = None,
    a: float = 0.0,
    ws_degrees=None,
    ws_pk=None,
) -> ThresholdReport:
    """Thresholds for the distribution ``(degrees, pk)``.

    ``ws_degrees``/``ws_pk`` give the small-world component used for
    ``upsilon = <k^2>_s / <k>_s`` and ``psi = m (1-a) / <k>_s``; they default
    to the full distribution. The closed form uses the pure small-world branch
    when ``a == 0`` and the hybrid branch otherwise.
    """
    degrees = np.asarray(degrees, dtype=float)
    pk = np.asarray(pk, dtype=float)
    k1 = float(np.dot(degrees, pk))
    k2 = float(np.dot(degrees**2, pk))
    if ws_degrees is None:
        ws_degrees, ws_pk = degrees, pk
    ws_degrees = np.asarray(ws_degrees, dtype=float)
    ws_pk = np.asarray(ws_pk, dtype=float)
    s1 = float(np.dot(ws_degrees, ws_pk))
    s2 = float(np.dot(ws_degrees**2, ws_pk))
    upsilon = s2 / s1
    psi = m * (1.0 - a) / s1
    if M is None:
        M = float(degrees[pk > 0].max())
    ws = w * sigma
    branch = "small_world" if a == 0 else "hybrid"
    if ws <= 0:
        inf = math.inf
        return ThresholdReport(inf, inf, inf, upsilon, psi, k1, k2, M, m, branch, ws)
    if branch == "small_world":
        inv = ws * upsilon
    else:
        inv = ws * (upsilon + 1.0 + 2.0 * psi * math.log(M / m)) / (1.0 + 2.0 * psi)
    return ThresholdReport(
        lambda_c_empirical=k1 / k2,
        lambda_c_printed=k1 / (k2 * ws),
        lambda_c_closedform=1.0 / inv,
        upsilon=upsilon,
        psi=psi,
        k_mean=k1,
        k2_mean=k2,
        M=M,
        m=m,
        branch=branch,
        w_sigma=ws,
    )


def power_law_pk(k_min: int, k_max: int, exponent: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
    """``P(k) ~ k^-exponent`` on the integers ``k_min..k_max``, normalised."""
    k = np.arange(k_min, k_max + 1, dtype=float)
    w = k**-exponent
    return k, w / w.sum()
