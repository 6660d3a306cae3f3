"""Smooth compactly supported cutoff phi^2 with closed-form derivatives.

phi^2 equals 1 on [-R, R], 0 for |x| >= S, and crosses over with the C^inf
blend s(t) = h(t) / (h(t) + h(1 - t)), h(t) = exp(-1/t) for t > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# exp(-1/t) underflows to 0.0 below this t; skipping it avoids inf * 0
_UNDERFLOW = 1.0 / 745.0


def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > _UNDERFLOW
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _h1(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > _UNDERFLOW
    tp = t[pos]
    out[pos] = np.exp(-1.0 / tp) / tp**2
    return out


def _h2(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > _UNDERFLOW
    tp = t[pos]
    out[pos] = np.exp(-1.0 / tp) * (1.0 - 2.0 * tp) / tp**4
    return out


def blend(t):
    """Smooth step from 0 (t <= 0) to 1 (t >= 1) and its first two derivatives."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 2.0)
    a, a1, a2 = _h(t), _h1(t), _h2(t)
    b, b1, b2 = _h(1.0 - t), -_h1(1.0 - t), _h2(1.0 - t)
    d = a + b
    d1 = a1 + b1
    num = a1 * b - a * b1
    num1 = a2 * b - a * b2
    s = a / d
    s1 = num / d**2
    s2 = num1 / d**2 - 2.0 * num * d1 / d**3
    return s, s1, s2


@dataclass(frozen=True)
class Cutoff:
    R: float
    S: float

    def __call__(self, x):
        return eval_cutoff(self, x)[0]

    def fits(self, half_length: float) -> bool:
        """True when the support lies strictly inside ``(-half_length, half_length)``."""
        return self.S < half_length


def make_cutoff(R: float, S: float) -> Cutoff:
    if not (0.0 < R < S):
        raise ValueError(f"cutoff needs 0 < R < S, got R={R}, S={S}")
    return Cutoff(float(R), float(S))


def eval_cutoff(c: Cutoff, x):
    """Return ``(phi2, d/dx phi2, d2/dx2 phi2)`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    width = c.S - c.R
    t = (np.abs(x) - c.R) / width
    s, s1, s2 = blend(t)
    sgn = np.sign(x)
    phi2 = 1.0 - s
    d1 = -s1 * sgn / width
    d2 = -s2 / width**2
    if phi2.ndim == 0:
        return float(phi2), float(d1), float(d2)
    return phi2, d1, d2
