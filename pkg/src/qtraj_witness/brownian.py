"""Brownian motion of the mobile particle between two reflecting walls."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RngStream


@dataclass(frozen=True)
class LangevinParams:
    """Parameters of ``dv = -v/tau dt + sqrt(w) dW`` confined to ``[wall_lo, wall_hi]``.

    Give either ``w`` or ``D``; the other follows from ``D = w tau**2 / 2``.
    """

    D: float | None = None
    tau: float = 1e-6
    w: float | None = None
    wall_lo: float = -math.inf
    wall_hi: float = math.inf
    overdamped: bool = True

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.D is None and self.w is None:
            raise ValueError("one of D or w is required")
        if self.D is None:
            object.__setattr__(self, "D", 0.5 * self.w * self.tau**2)
        elif self.w is None:
            object.__setattr__(self, "w", 2.0 * self.D / self.tau**2)
        elif abs(self.D - 0.5 * self.w * self.tau**2) > 1e-12 * max(1.0, abs(self.D)):
            raise ValueError(f"inconsistent D={self.D} and w*tau^2/2={0.5 * self.w * self.tau**2}")
        if self.D < 0:
            raise ValueError("diffusivity must be non-negative")
        if not self.wall_lo < self.wall_hi:
            raise ValueError(f"walls must satisfy wall_lo < wall_hi, got {self.wall_lo}, {self.wall_hi}")

    @classmethod
    def corridor(cls, D: float, L: float = 1.0, epsilon: float = 0.1, **kwargs) -> LangevinParams:
        """Walls at ``epsilon*L`` and ``(1-epsilon)*L``, keeping clear of the static spins."""
        if not 0 <= epsilon < 0.5:
            raise ValueError(f"epsilon must lie in [0, 0.5), got {epsilon}")
        return cls(D=D, wall_lo=epsilon * L, wall_hi=(1 - epsilon) * L, **kwargs)

    @property
    def velocity_variance(self) -> float:
        """Stationary velocity variance ``w tau / 2``."""
        return 0.5 * self.w * self.tau


@dataclass
class BrownianPath:
    times: np.ndarray
    positions: np.ndarray


def reflect(x, wall_lo: float, wall_hi: float):
    """Fold ``x`` back into ``[wall_lo, wall_hi]`` by mirror reflections.

    Works elementwise on arrays. Infinite walls leave ``x`` untouched.
    """
    if not wall_lo < wall_hi:
        raise ValueError("walls must satisfy wall_lo < wall_hi")
    x = np.asarray(x, dtype=float)
    if math.isinf(wall_lo) and math.isinf(wall_hi):
        out = x
    elif math.isinf(wall_lo) or math.isinf(wall_hi):
        wall = wall_hi if math.isinf(wall_lo) else wall_lo
        sign = 1.0 if math.isinf(wall_lo) else -1.0
        # single wall: mirror whatever crossed it
        out = np.where(sign * (x - wall) > 0, 2 * wall - x, x)
    else:
        width = wall_hi - wall_lo
        y = np.mod(x - wall_lo, 2 * width)
        out = wall_lo + np.where(y > width, 2 * width - y, y)
        # keep in-range inputs bit-identical
        out = np.where((x >= wall_lo) & (x <= wall_hi), x, out)
    return float(out) if out.ndim == 0 else out


def brownian_step(x, dt: float, params: LangevinParams, rng: RngStream, v=None):
    """Advance the particle by ``dt``.

    Overdamped mode returns the new position. Full mode needs the velocity
    ``v`` and returns ``(x, v)`` after the exact Ornstein-Uhlenbeck update;
    a wall collision flips the velocity.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.asarray(x, dtype=float)
    if params.overdamped:
        n = rng.normal(x.shape or None)
        return reflect(x + math.sqrt(2.0 * params.D * dt) * n, params.wall_lo, params.wall_hi)

    if v is None:
        raise ValueError("full Langevin mode requires the current velocity")
    v = np.asarray(v, dtype=float)
    tau = params.tau
    s2 = params.velocity_variance
    e1 = math.exp(-dt / tau)
    e2 = math.exp(-2.0 * dt / tau)
    var_v = s2 * (1.0 - e2)
    var_x = s2 * tau**2 * (2.0 * dt / tau - 3.0 + 4.0 * e1 - e2)
    cov = s2 * tau * (1.0 - e1) ** 2
    n1 = rng.normal(x.shape or None)
    n2 = rng.normal(x.shape or None)
    # Cholesky factor of the (x, v) conditional covariance
    sx = math.sqrt(max(var_x, 0.0))
    if sx > 0:
        rho_xv = cov / sx
        sv = math.sqrt(max(var_v - rho_xv**2, 0.0))
    else:
        rho_xv, sv = 0.0, math.sqrt(var_v)
    x_new = x + v * tau * (1.0 - e1) + sx * n1
    v_new = v * e1 + rho_xv * n1 + sv * n2
    folded = reflect(x_new, params.wall_lo, params.wall_hi)
    # odd number of reflections reverses the velocity
    lo, hi = params.wall_lo, params.wall_hi
    if math.isfinite(lo) or math.isfinite(hi):
        width = hi - lo
        if math.isfinite(width):
            bounces = np.where((x_new >= lo) & (x_new <= hi), 0, np.floor((x_new - lo) / width))
        else:
            bounces = np.where((x_new >= lo) & (x_new <= hi), 0, 1)
        v_new = np.where(np.mod(bounces, 2) == 1, -v_new, v_new)
    if np.ndim(folded) == 0:
        return float(folded), float(v_new)
    return folded, v_new


def brownian_path(x0: float, dt: float, n_steps: int, params: LangevinParams, rng: RngStream) -> BrownianPath:
    """Overdamped path sampled on ``n_steps + 1`` grid points.

    Draws the whole noise block at once; the classical engine consumes the
    same block so its positions match this path exactly.
    """
    if not params.overdamped:
        raise ValueError("brownian_path samples the overdamped process only")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    noise = rng.normal(n_steps)
    sigma = math.sqrt(2.0 * params.D * dt)
    pos = np.empty(n_steps + 1)
    pos[0] = x = x0
    for k in range(n_steps):
        x = reflect(x + sigma * noise[k], params.wall_lo, params.wall_hi)
        pos[k + 1] = x
    return BrownianPath(np.arange(n_steps + 1) * dt, pos)
