"""Log-scaled complex numbers.

The density values computed here scale like exp(-(4/3)*L^(3/2)); at L = 100
that is e^-1333, far below the double-precision floor.  A LogScaledValue
stores a real log-magnitude together with a unit-modulus phase (or +-1 for
real quantities), so such values survive multiplication, division and
max-shifted addition without underflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = ["LogScaledValue", "log_sum"]

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class LogScaledValue:
    """A complex number stored as (log-magnitude, unit phase).

    Represents phase * exp(log_mag).  ``phase`` has modulus one except for
    the exact zero, which is stored as (log_mag=-inf, phase=0).
    """

    log_mag: float
    phase: complex

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "LogScaledValue":
        return LogScaledValue(_NEG_INF, 0j)

    @staticmethod
    def from_complex(z: complex, log_shift: float = 0.0) -> "LogScaledValue":
        """Represent z * exp(log_shift) without forming the product."""
        if z == 0:
            return LogScaledValue.zero()
        r = abs(z)
        return LogScaledValue(math.log(r) + log_shift, z / r)

    @staticmethod
    def from_log(log_mag: float, sign: float = 1.0) -> "LogScaledValue":
        if sign == 0.0:
            return LogScaledValue.zero()
        return LogScaledValue(log_mag, complex(sign / abs(sign)))

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.log_mag == _NEG_INF

    @property
    def sign(self) -> int:
        """Sign of the real part of the phase (0 for the zero value)."""
        if self.is_zero():
            return 0
        return 1 if self.phase.real >= 0 else -1

    def imag_ratio(self) -> float:
        """|Im phase| / |Re phase|; large means the value is not real."""
        if self.is_zero():
            return 0.0
        if self.phase.real == 0.0:
            return math.inf
        return abs(self.phase.imag) / abs(self.phase.real)

    def value(self) -> complex:
        """Linear-space value; may over/underflow for extreme log_mag."""
        if self.is_zero():
            return 0j
        return self.phase * math.exp(self.log_mag)

    def real_strict(self, tol: float = 1e-6) -> tuple[int, float]:
        """Collapse to (sign, log_mag), requiring the phase to be real.

        Raises ValueError if the relative imaginary part exceeds tol.
        """
        if self.is_zero():
            return (0, _NEG_INF)
        if self.imag_ratio() > tol:
            raise ValueError(
                f"value is not real: phase={self.phase!r} "
                f"(imag ratio {self.imag_ratio():.3e} > {tol:.1e})"
            )
        return (self.sign, self.log_mag)

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, LogScaledValue):
            if self.is_zero() or other.is_zero():
                return LogScaledValue.zero()
            return LogScaledValue(self.log_mag + other.log_mag,
                                  _renorm(self.phase * other.phase))
        return self * LogScaledValue.from_complex(complex(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LogScaledValue):
            if other.is_zero():
                raise ZeroDivisionError("division by LogScaledValue zero")
            if self.is_zero():
                return LogScaledValue.zero()
            return LogScaledValue(self.log_mag - other.log_mag,
                                  _renorm(self.phase / other.phase))
        return self / LogScaledValue.from_complex(complex(other))

    def __neg__(self):
        if self.is_zero():
            return self
        return LogScaledValue(self.log_mag, -self.phase)

    def __add__(self, other):
        if not isinstance(other, LogScaledValue):
            other = LogScaledValue.from_complex(complex(other))
        return log_sum([self, other])

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, log_shift: float) -> "LogScaledValue":
        if self.is_zero():
            return self
        return LogScaledValue(self.log_mag + log_shift, self.phase)

    def ratio_to(self, other: "LogScaledValue") -> complex:
        """Linear-space self/other; safe whenever the ratio is moderate."""
        q = self / other
        return q.value()


def _renorm(p: complex) -> complex:
    a = abs(p)
    return p if a == 0 else p / a


def log_sum(values: list[LogScaledValue]) -> LogScaledValue:
    """Sum with the common max log-magnitude factored out first."""
    finite = [v for v in values if not v.is_zero()]
    if not finite:
        return LogScaledValue.zero()
    m = max(v.log_mag for v in finite)
    acc = 0j
    for v in finite:
        acc += v.phase * math.exp(v.log_mag - m)
    if acc == 0:
        return LogScaledValue.zero()
    return LogScaledValue.from_complex(acc, log_shift=m)
