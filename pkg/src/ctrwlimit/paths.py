"""Cadlag step paths with a position part and a clock part, and the time changes Phi and Psi.

A ``StepPath`` stores the value ``(positions[i], clocks[i])`` taken on
``[times[i], times[i+1])``. For a non-decreasing clock the generalized
inverse ``inf{s : clock(s) > t}`` is the epoch ``times[k]`` with
``k = searchsorted(clocks, t, 'right')``. The two time changes then reduce to
index arithmetic:

* Psi, ``alpha o inverse``, takes the value at index ``k``;
* Phi, the right-continuous version of ``alpha^- o inverse^-``, takes the
  value at index ``k - 1`` (or 0 when the clock starts above ``t``).

No arithmetic is done on the selected values, so both maps return exactly
the stored partial sums.
"""

from __future__ import annotations

import io

import numpy as np

from .errors import ConfigError, HorizonError


class StepPath:
    """Piecewise-constant path ``u -> (position(u), clock(u))``.

    Parameters
    ----------
    times : array_like, shape (m,)
        Strictly increasing epochs, starting at 0.
    positions : array_like, shape (m,) or (m, d)
    clocks : array_like, shape (m,)
        Non-decreasing clock values.
    horizon : float
        Query bound for the clock. Unless ``bounded_ok`` is set, the final
        clock value must exceed it, so every inverse query ``t <= horizon``
        has an answer.
    validate : bool
        Check the invariants (including that consecutive values differ).
    bounded_ok : bool
        Allow a final clock value ``<= horizon`` (used for Phi outputs, whose
        clock never exceeds the query time).
    """

    __slots__ = ("times", "positions", "clocks", "horizon", "bounded_ok")

    def __init__(self, times, positions, clocks, horizon, validate=True, bounded_ok=False):
        times = np.ascontiguousarray(times, dtype=float)
        positions = np.asarray(positions, dtype=float)
        if positions.ndim == 1:
            positions = positions[:, None]
        clocks = np.ascontiguousarray(clocks, dtype=float)
        self.times = times
        self.positions = np.ascontiguousarray(positions)
        self.clocks = clocks
        self.horizon = float(horizon)
        self.bounded_ok = bool(bounded_ok)
        if validate:
            self._validate()
        for arr in (self.times, self.positions, self.clocks):
            arr.setflags(write=False)

    def _validate(self):
        t, p, c = self.times, self.positions, self.clocks
        m = t.shape[0]
        if m == 0 or t.ndim != 1:
            raise ConfigError("need a non-empty 1-d array of epochs", "times")
        if p.shape[0] != m or c.shape != (m,):
            raise ConfigError("times, positions and clocks must have matching lengths", "positions")
        if t[0] != 0.0:
            raise ConfigError("first epoch must be 0", "times")
        if np.any(np.diff(t) <= 0):
            raise ConfigError("epochs must be strictly increasing", "times")
        if np.any(np.diff(c) < 0):
            raise ConfigError("clock must be non-decreasing", "clocks")
        same = (np.diff(c) == 0) & np.all(np.diff(p, axis=0) == 0, axis=1)
        if np.any(same):
            raise ConfigError(f"no jump at epoch index {int(np.argmax(same)) + 1}", "values")
        if not self.bounded_ok and not c[-1] > self.horizon:
            raise ConfigError("final clock value must exceed the horizon", "horizon")
        if not np.all(np.isfinite(p)) or not np.all(np.isfinite(c)):
            raise ConfigError("values must be finite", "values")

    # ------------------------------------------------------------------ basics
    @property
    def d(self) -> int:
        return self.positions.shape[1]

    def __len__(self):
        return self.times.shape[0]

    def __repr__(self):
        return f"StepPath(m={len(self)}, d={self.d}, horizon={self.horizon})"

    @property
    def strictly_increasing(self) -> bool:
        """Whether the clock strictly increases at every epoch."""
        return bool(np.all(np.diff(self.clocks) > 0))

    @property
    def domain_end(self) -> float:
        return max(self.times[-1], self.horizon)

    def _check_time(self, t):
        t = float(t)
        if t < 0:
            raise HorizonError(f"query time {t} is negative")
        if t > self.domain_end:
            raise HorizonError(f"query time {t} exceeds horizon {self.domain_end}")
        return t

    def index(self, t) -> int:
        """Segment index containing ``t``."""
        t = self._check_time(t)
        return int(np.searchsorted(self.times, t, side="right")) - 1

    def index_left(self, t) -> int:
        t = self._check_time(t)
        return max(int(np.searchsorted(self.times, t, side="left")) - 1, 0)

    def eval(self, t):
        """Right-continuous value ``(position, clock)`` at ``t``."""
        i = self.index(t)
        return self.positions[i].copy(), float(self.clocks[i])

    def eval_left(self, t):
        """Left limit at ``t``; equals ``eval(0)`` at ``t = 0``."""
        i = self.index_left(t)
        return self.positions[i].copy(), float(self.clocks[i])

    def jump_at(self, u):
        """Jump ``(delta position, delta clock)`` at time ``u``."""
        p, c = self.eval(u)
        pl, cl = self.eval_left(u)
        return p - pl, c - cl

    # ---------------------------------------------------------- inverse clock
    def first_exceeding(self, t) -> int:
        """Index of the first clock value strictly above ``t``."""
        t = float(t)
        if t > self.horizon:
            raise HorizonError(f"clock query {t} exceeds horizon {self.horizon}")
        k = int(np.searchsorted(self.clocks, t, side="right"))
        if k >= len(self):
            raise HorizonError(f"clock never exceeds {t} on this path")
        return k

    def inverse_index(self, ts):
        """Vectorised ``first_exceeding`` over an array of query times."""
        ts = np.asarray(ts, dtype=float)
        if np.any(ts > self.horizon):
            raise HorizonError(f"clock query {ts.max()} exceeds horizon {self.horizon}")
        k = np.searchsorted(self.clocks, ts, side="right")
        if np.any(k >= len(self)):
            raise HorizonError("clock never exceeds some query times on this path")
        return k

    def generalized_inverse(self, t) -> float:
        """``inf{s >= 0 : clock(s) > t}``."""
        return float(self.times[self.first_exceeding(t)])

    def psi_at(self, t):
        """Psi(path) at physical time t: the value at the inverse time."""
        k = self.first_exceeding(t)
        return self.positions[k].copy(), float(self.clocks[k])

    def phi_at(self, t):
        """Phi(path) at physical time t: the value just before the inverse time."""
        k = max(self.first_exceeding(t) - 1, 0)
        return self.positions[k].copy(), float(self.clocks[k])

    def _physical_epochs(self):
        levels = self.clocks[self.clocks <= self.horizon]
        epochs = np.unique(np.concatenate(([0.0], levels[levels > 0.0])))
        k = np.searchsorted(self.clocks, epochs, side="right")
        return epochs, k

    def _compose(self, idx, epochs, bounded_ok):
        pos = self.positions[idx]
        clk = self.clocks[idx]
        keep = np.ones(len(idx), dtype=bool)
        keep[1:] = (clk[1:] != clk[:-1]) | np.any(pos[1:] != pos[:-1], axis=1)
        return StepPath(epochs[keep], pos[keep], clk[keep], self.horizon,
                        validate=False, bounded_ok=bounded_ok)

    def apply_Psi(self) -> "StepPath":
        """The path ``t -> Psi(path)(t)`` on ``[0, horizon]``; its clock is ``>= t``."""
        epochs, k = self._physical_epochs()
        return self._compose(k, epochs, bounded_ok=False)

    def apply_Phi(self) -> "StepPath":
        """The path ``t -> Phi(path)(t)`` on ``[0, horizon]``; its clock is ``<= t``."""
        epochs, k = self._physical_epochs()
        return self._compose(np.maximum(k - 1, 0), epochs, bounded_ok=True)

    # ------------------------------------------------------------------- dump
    def to_csv(self, dest=None) -> str | None:
        """Write columns ``u_time, clock, pos_1..pos_d`` with 17 significant digits."""
        header = ",".join(["u_time", "clock"] + [f"pos_{j + 1}" for j in range(self.d)])
        table = np.column_stack([self.times, self.clocks, self.positions])
        buf = io.StringIO()
        np.savetxt(buf, table, delimiter=",", fmt="%.17g", header=header, comments="")
        text = buf.getvalue()
        if dest is None:
            return text
        with open(dest, "w", newline="") as fh:
            fh.write(text)
        return None


def remark_paths(n, horizon=3.0, h=None):
    """The pair ``(beta_n, sigma_n)`` whose Psi image does not converge.

    ``beta`` is 1 on ``[1, 2)`` and 0 elsewhere; ``sigma_n`` is ``2 - 1/n`` on
    ``[0, 1)``, ``2 + 1/n`` on ``[1, 2 + 1/n)`` and the identity afterwards.
    The identity part is represented on a step grid of width ``h``.
    ``n = None`` (or ``inf``) gives the limit pair, with clock 2 on ``[0, 2)``.
    """
    if h is None:
        h = 1.0 / 64
    if n is None or n == np.inf:
        times = [0.0]
        clocks = [2.0]
        pos = [0.0]
        # beta jumps at 1 while the clock stays flat
        times.append(1.0)
        clocks.append(2.0)
        pos.append(1.0)
        start = 2.0
    else:
        times = [0.0, 1.0]
        clocks = [2.0 - 1.0 / n, 2.0 + 1.0 / n]
        pos = [0.0, 1.0]
        start = 2.0 + 1.0 / n
    grid = start + h * np.arange(int(np.ceil((horizon + 1.0 - start) / h)) + 1)
    for u in grid:
        times.append(u)
        clocks.append(u)
        pos.append(1.0 if u < 2.0 else 0.0)
    return StepPath(times, pos, clocks, horizon)
