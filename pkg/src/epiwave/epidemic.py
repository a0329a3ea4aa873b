"""SIR and SEIR compartmental models with a fixed-step RK4 integrator.

Compartments are population fractions.  R0 = beta/eta.  The observation
map renders daily deaths as the daily increment of the removed compartment
scaled by a fitted constant kappa (deaths per unit removed fraction).
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .series import DailyCountSeries

DEFAULT_STEP = 0.05  # days
DEFAULT_SEED = 1e-5  # initial infected/exposed fraction
_EPOCH = dt.date(2020, 1, 1)  # nominal anchor when no calendar date applies


class IntegrationError(RuntimeError):
    """Non-finite state encountered during integration (parameter blow-up)."""


@dataclass(frozen=True)
class SeirParams:
    beta: float  # transmission rate, 1/day
    eta: float  # removal rate, 1/day
    epsilon: float  # exposed -> infectious rate, 1/day

    def __post_init__(self):
        if not (self.beta > 0 and self.eta > 0 and self.epsilon > 0):
            raise ValueError("all rates must be > 0")

    @property
    def incubation_days(self) -> float:
        return 1.0 / self.epsilon


def basic_reproduction(params: SeirParams) -> float:
    """R0 = beta / eta."""
    return params.beta / params.eta


def _check_fractions(components, total):
    if any(not -1e-9 <= c <= 1.0 + 1e-9 for c in components):
        raise ValueError("compartments must lie in [0, 1]")
    if abs(total - 1.0) > 1e-9:
        raise ValueError("compartments must sum to 1")


@dataclass(frozen=True)
class SirState:
    S: float
    I: float
    R: float

    def __post_init__(self):
        _check_fractions((self.S, self.I, self.R), self.S + self.I + self.R)

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.I, self.R])


@dataclass(frozen=True)
class SeirState:
    S: float
    E: float
    I: float
    R: float

    def __post_init__(self):
        _check_fractions(
            (self.S, self.E, self.I, self.R), self.S + self.E + self.I + self.R
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.E, self.I, self.R])


def sir_rhs(state: SirState, params: SeirParams) -> np.ndarray:
    """(dS, dI, dR); components sum to zero by construction."""
    force = params.beta * state.S * state.I
    removal = params.eta * state.I
    return np.array([-force, force - removal, removal])


def seir_rhs(state: SeirState, params: SeirParams) -> np.ndarray:
    """(dS, dE, dI, dR); components sum to zero by construction."""
    force = params.beta * state.S * state.I
    transfer = params.epsilon * state.E
    removal = params.eta * state.I
    return np.array([-force, force - transfer, transfer - removal, removal])


def initial_state(system: str, seed: float = DEFAULT_SEED):
    """Default seeding: symmetric E/I seed for SEIR, single I seed for SIR."""
    if system == "seir":
        return SeirState(S=1.0 - 2.0 * seed, E=seed, I=seed, R=0.0)
    if system == "sir":
        return SirState(S=1.0 - seed, I=seed, R=0.0)
    raise ValueError(f"unknown system {system!r}")


@dataclass
class Trajectory:
    """Uniformly sampled compartment states; times in days from wave start."""

    times: np.ndarray  # (n,)
    states: np.ndarray  # (n, k)
    labels: tuple[str, ...]
    step: float

    def __len__(self):
        return self.times.size

    def compartment(self, label: str) -> np.ndarray:
        return self.states[:, self.labels.index(label)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("t," + ",".join(self.labels) + "\n")
            for t, row in zip(self.times, self.states):
                cols = ",".join(f"{x:.12g}" for x in row)
                fh.write(f"{t:.12g},{cols}\n")


def _array_rhs(y: np.ndarray, params: SeirParams, seir: bool) -> np.ndarray:
    if seir:
        S, E, I, _ = y
        force = params.beta * S * I
        transfer = params.epsilon * E
        removal = params.eta * I
        return np.array([-force, force - transfer, transfer - removal, removal])
    S, I, _ = y
    force = params.beta * S * I
    removal = params.eta * I
    return np.array([-force, force - removal, removal])


def integrate(
    system: str,
    initial,
    params: SeirParams,
    t_end: float,
    step: float = DEFAULT_STEP,
) -> Trajectory:
    """Classical 4th-order fixed-step integration from t=0 to t_end."""
    if step <= 0:
        raise ValueError("step must be > 0")
    if t_end < step:
        raise ValueError("t_end must be >= step")
    seir = system == "seir"
    if not seir and system != "sir":
        raise ValueError(f"unknown system {system!r}")
    labels = ("S", "E", "I", "R") if seir else ("S", "I", "R")

    n_steps = int(np.floor(t_end / step + 1e-9))
    y = initial.as_array().astype(float)
    states = np.empty((n_steps + 1, y.size))
    states[0] = y
    h = step
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n_steps + 1):
            k1 = _array_rhs(y, params, seir)
            k2 = _array_rhs(y + 0.5 * h * k1, params, seir)
            k3 = _array_rhs(y + 0.5 * h * k2, params, seir)
            k4 = _array_rhs(y + h * k3, params, seir)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            states[i] = y
    if not np.all(np.isfinite(states)):
        raise IntegrationError("non-finite state encountered; check step and rates")
    times = np.arange(n_steps + 1) * step
    return Trajectory(times=times, states=states, labels=labels, step=step)


def daily_deaths(
    traj: Trajectory,
    scale: float,
    start_date: dt.date = _EPOCH,
) -> DailyCountSeries:
    """Daily deaths = scale * daily increment of the removed compartment.

    Day d covers the increment R(d+1) - R(d); values are clipped at zero
    against round-off.
    """
    if scale < 0:
        raise ValueError("scale must be >= 0")
    t_end = traj.times[-1]
    n_days = int(np.floor(t_end + 1e-9))
    if n_days < 1:
        raise ValueError("trajectory must cover at least one day")
    removed = traj.compartment("R")
    idx = np.rint(np.arange(n_days + 1) / traj.step).astype(int)
    daily_r = removed[idx]
    values = scale * np.maximum(np.diff(daily_r), 0.0)
    return DailyCountSeries(start=start_date, values=values)
