"""Weather ingestion, Fourier synthesis of the yearly cycle and current demand.

Monthly samples are placed at ``t_k = k / 12`` years (k = 0 is January) and
the synthesized signals are periodic with a period of one year.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FT_TO_M = 0.3048
N_MONTHS = 12


class WeatherDataError(ValueError):
    pass


@dataclass(frozen=True)
class WeatherSeries:
    state_name: str
    wind: tuple[float, ...]          # ft/s
    ambient_temp: tuple[float, ...]  # K

    def __post_init__(self):
        for label, values in (("wind", self.wind), ("ambient_temp", self.ambient_temp)):
            if len(values) != N_MONTHS:
                raise WeatherDataError(f"{label}: expected {N_MONTHS} samples, got {len(values)}")
        if any(w < 0 for w in self.wind):
            raise WeatherDataError("wind speeds must be non-negative")
        if any(t <= 0 for t in self.ambient_temp):
            raise WeatherDataError("ambient temperatures must be positive (K)")


@dataclass(frozen=True)
class FourierModel:
    """Truncated real Fourier series ``A0 + sum A_n cos + B_n sin``."""

    a0: float
    a: tuple[float, ...]  # A_1..A_6
    b: tuple[float, ...]  # B_1..B_6
    period: float = 1.0

    @property
    def n_harmonics(self) -> int:
        return len(self.a)

    def scaled_mean(self, factor: float) -> "FourierModel":
        """Same harmonics, mean multiplied by ``factor``."""
        return FourierModel(self.a0 * factor, self.a, self.b, self.period)

    def shifted_mean(self, offset: float) -> "FourierModel":
        return FourierModel(self.a0 + offset, self.a, self.b, self.period)


@dataclass(frozen=True)
class CurrentLoad:
    base: float           # I_b, A
    amplitude: float = 0.0  # I_a, A

    def __post_init__(self):
        if self.base <= 0:
            raise ValueError("base current must be positive")
        if self.amplitude < 0:
            raise ValueError("current amplitude must be non-negative")


@dataclass(frozen=True)
class LoadSample:
    t: float
    wind_speed: float    # m/s, clamped >= 0
    ambient_temp: float  # K
    current: float       # A


def dft_coefficients(samples) -> FourierModel:
    x = np.asarray(samples, dtype=float)
    if x.shape != (N_MONTHS,):
        raise WeatherDataError(f"expected {N_MONTHS} samples, got shape {x.shape}")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise WeatherDataError(f"non-finite sample at index {int(bad[0])}")
    n = x.size
    spec = np.fft.rfft(x)
    a0 = spec[0].real / n
    a = 2.0 * spec[1:].real / n
    b = -2.0 * spec[1:].imag / n
    # Nyquist term carries half weight and has no sine part
    a[-1] = spec[-1].real / n
    b[-1] = 0.0
    return FourierModel(float(a0), tuple(float(v) for v in a), tuple(float(v) for v in b))


def synthesize(model: FourierModel, t):
    """Evaluate the series at time(s) ``t`` in years. Accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, model.a0)
    omega = 2.0 * math.pi / model.period
    for n, (an, bn) in enumerate(zip(model.a, model.b), start=1):
        out = out + an * np.cos(omega * n * t) + bn * np.sin(omega * n * t)
    return float(out) if out.ndim == 0 else out


def current_at(load: CurrentLoad, t):
    """Magnitude of I(t) = -I_b - I_a sin(4 pi t)."""
    t = np.asarray(t, dtype=float)
    out = load.base + load.amplitude * np.sin(4.0 * math.pi * t)
    return float(out) if out.ndim == 0 else out


def to_si(v_ft_s):
    """ft/s -> m/s."""
    out = np.asarray(v_ft_s, dtype=float) * FT_TO_M
    return float(out) if out.ndim == 0 else out


def ingest_weather_csv(path, state_name: str | None = None) -> WeatherSeries:
    """Read ``month,wind_ft_s,temp_K`` with exactly 12 data rows."""
    path = Path(path)
    wind, temp = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise WeatherDataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if header != ["month", "wind_ft_s", "temp_K"]:
            raise WeatherDataError(f"{path}: bad header {header!r}, expected month,wind_ft_s,temp_K")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            line = reader.line_num
            if len(row) != 3:
                raise WeatherDataError(f"{path}:{line}: expected 3 columns, got {len(row)}")
            try:
                w = float(row[1])
                th = float(row[2])
            except ValueError as exc:
                raise WeatherDataError(f"{path}:{line}: parse error: {exc}") from None
            if not (math.isfinite(w) and math.isfinite(th)):
                raise WeatherDataError(f"{path}:{line}: non-finite value")
            if w < 0:
                raise WeatherDataError(f"{path}:{line}: negative wind speed {w}")
            if th <= 0:
                raise WeatherDataError(f"{path}:{line}: non-positive temperature {th}")
            wind.append(w)
            temp.append(th)
    if len(wind) != N_MONTHS:
        raise WeatherDataError(f"{path}: expected {N_MONTHS} rows, got {len(wind)}")
    return WeatherSeries(state_name or path.stem, tuple(wind), tuple(temp))


@dataclass(frozen=True)
class LoadingModel:
    """Continuous yearly loading built from a WeatherSeries.

    The stochastic layer perturbs channel means through
    ``FourierModel.scaled_mean``/``shifted_mean``; harmonics stay fixed.
    """

    wind_ft: FourierModel
    temp_k: FourierModel
    current: CurrentLoad

    @classmethod
    def from_weather(cls, weather: WeatherSeries, current: CurrentLoad) -> "LoadingModel":
        return cls(dft_coefficients(weather.wind), dft_coefficients(weather.ambient_temp), current)

    def wind_si(self, t):
        v = to_si(synthesize(self.wind_ft, t))
        return np.maximum(v, 0.0) if np.ndim(v) else max(v, 0.0)

    def ambient(self, t):
        return synthesize(self.temp_k, t)

    def sample(self, t: float) -> LoadSample:
        return LoadSample(float(t), float(self.wind_si(t)), float(self.ambient(t)),
                          float(current_at(self.current, t)))

    def series(self, times):
        """Vectorised wind (m/s), ambient (K) and current (A) at ``times``."""
        times = np.asarray(times, dtype=float)
        return self.wind_si(times), self.ambient(times), current_at(self.current, times)
