"""Damaged cross-section, wind load and sag-based horizontal tension."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

G = 9.80665


class GeometryError(ValueError):
    pass


class DragTableWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CableGeometry:
    length: float = 200.0     # L, m
    diameter: float = 0.04    # D, m
    a_sigma: float = math.inf  # spread of the initial damage; inf = pristine

    def __post_init__(self):
        if self.length <= 0 or self.diameter <= 0:
            raise GeometryError("length and diameter must be positive")
        if self.a_sigma <= 0:
            raise GeometryError("a_sigma must be positive")
        # the profile is deepest at mid-span
        if area_depth(self.a_sigma) >= 1.0:
            raise GeometryError(f"damage exceeds section (a_sigma={self.a_sigma})")

    @property
    def area0(self) -> float:
        return math.pi * self.diameter ** 2 / 4.0

    @property
    def perimeter(self) -> float:
        return math.pi * self.diameter


def area_depth(a_sigma: float) -> float:
    """Relative area loss at mid-span, 1/(a_sigma sqrt(2 pi))."""
    if math.isinf(a_sigma):
        return 0.0
    return 1.0 / (a_sigma * math.sqrt(2.0 * math.pi))


def area_profile(geom: CableGeometry, x):
    """A(x) = A0 (1 - exp(-(x - L/2)^2 / (2 s^2)) / (s sqrt(2 pi)))."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-12) or np.any(x > geom.length * (1 + 1e-12)):
        raise GeometryError("x outside [0, L]")
    if math.isinf(geom.a_sigma):
        out = np.full(x.shape, geom.area0)
    else:
        s = geom.a_sigma
        bump = np.exp(-((x - geom.length / 2.0) ** 2) / (2.0 * s * s))
        out = geom.area0 * (1.0 - area_depth(s) * bump)
    if np.any(out <= 0):
        raise GeometryError("damage exceeds section")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SagParams:
    h0: float                 # initial pre-tension, N
    w_b: float                # self weight per unit length, N/m
    alpha_l: float = 2.3e-5   # thermal expansion, 1/K
    span: float = 200.0       # S_L, m
    theta_ref: float = 293.15  # K

    def __post_init__(self):
        if self.h0 <= 0 or self.w_b <= 0 or self.span <= 0:
            raise GeometryError("h0, w_b and span must be positive")

    @classmethod
    def from_strength(cls, ultimate: float, density: float, geom: CableGeometry,
                      fraction: float = 0.2, **kw) -> "SagParams":
        """Pre-tension as a fraction of the ultimate strength; weight from rho g A0."""
        return cls(h0=fraction * ultimate, w_b=density * G * geom.area0, span=geom.length, **kw)


# (Re_min, Re_max, C_D); smooth-cylinder stand-in, same bands as the Nusselt table
DEFAULT_DRAG_TABLE: tuple[tuple[float, float, float], ...] = (
    (0.4, 4.0, 6.0),
    (4.0, 40.0, 2.5),
    (40.0, 4.0e3, 1.2),
    (4.0e3, 4.0e4, 1.0),
    (4.0e4, 4.0e5, 1.0),
)


@dataclass(frozen=True)
class WindLoadParams:
    rho_air: float = 1.225
    drag_table: tuple[tuple[float, float, float], ...] = DEFAULT_DRAG_TABLE
    theta_w: float = math.pi / 2
    alpha_span: float = 1.0

    def __post_init__(self):
        if self.rho_air <= 0:
            raise GeometryError("rho_air must be positive")
        check_drag_table(self.drag_table)


def check_drag_table(table):
    if not table:
        raise GeometryError("empty drag table")
    prev_hi = None
    for lo, hi, cd in table:
        if not lo < hi or cd < 0:
            raise GeometryError(f"bad drag band ({lo}, {hi}, {cd})")
        if prev_hi is not None and not math.isclose(lo, prev_hi):
            raise GeometryError("drag bands must be contiguous and increasing")
        prev_hi = hi


def drag_coefficient(table, re: float) -> float:
    """Piecewise-constant C_D(Re); out-of-range Re is clamped with a warning."""
    if not re > 0:
        raise ValueError("Reynolds number must be positive")
    if re < table[0][0]:
        warnings.warn(f"Re={re:.3g} below drag table, using lowest band", DragTableWarning, stacklevel=2)
        return float(table[0][2])
    for lo, hi, cd in table:
        if lo <= re < hi:
            return float(cd)
    if re == table[-1][1]:
        return float(table[-1][2])
    warnings.warn(f"Re={re:.3g} above drag table, using highest band", DragTableWarning, stacklevel=2)
    return float(table[-1][2])


def wind_pressure(rho_air, v):
    return 0.5 * rho_air * np.square(v)


def wind_load(params: WindLoadParams, p_w, diameter: float, c_d: float | None = None, v: float | None = None,
              nu: float = 15e-6):
    """W_w = P_w C_D D sin^2(theta_w) alpha.

    ``c_d`` may be given directly; otherwise it is looked up from the wind
    speed ``v`` through the Reynolds number.
    """
    if c_d is None:
        if v is None:
            raise ValueError("need c_d or v")
        if v <= 0:
            return 0.0
        c_d = drag_coefficient(params.drag_table, v * diameter / nu)
    return p_w * c_d * diameter * math.sin(params.theta_w) ** 2 * params.alpha_span


def sag_chain(sag: SagParams, theta_mean: float, w_w: float = 0.0) -> dict:
    """Initial sag, cable length, thermal elongation, new sag and tension."""
    if theta_mean <= 0:
        raise GeometryError("theta_mean must be positive (K)")
    s_l = sag.span
    s0 = sag.w_b * s_l ** 2 / (8.0 * sag.h0)
    if s0 <= 0:
        raise GeometryError("zero initial sag")
    l0 = s_l + 8.0 * s0 ** 2 / (3.0 * s_l)
    length = l0 * (1.0 + sag.alpha_l * (theta_mean - sag.theta_ref))
    if length <= s_l:
        raise GeometryError(f"taut-cable regime at theta_mean={theta_mean:.2f} K")
    sag_now = math.sqrt(3.0 * s_l * (length - s_l) / 8.0)
    w = math.hypot(sag.w_b, w_w)
    return {"s0": s0, "l0": l0, "length": length, "sag": sag_now, "w": w,
            "tension": w * s_l ** 2 / (8.0 * sag_now)}


def horizontal_tension(sag: SagParams, theta_mean: float, w_w: float = 0.0) -> float:
    return sag_chain(sag, theta_mean, w_w)["tension"]
