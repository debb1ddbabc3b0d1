"""
Logistic-map keystream.

All arithmetic is plain Python float (IEEE binary64, round-to-nearest) with
the fixed association (a * x) * (1 - x), so a key regenerates the same digits
on every machine.
"""
import math
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.utils.exceptions import DegenerateKeystreamError, DomainError, ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)

X0_RANGE = (0.1, 0.9)
A_RANGE = (3.7, 4.0)      # half-open: 4.0 excluded
K_RANGE = (100, 1000)
D_RANGE = (2, 20)

FIXED_POINT_TOLERANCE = 1e-12
MIN_DISTINCT_DIGITS = 5

# exact powers of ten as binary64 (exact up to 10**22)
_POW10 = [float(10 ** i) for i in range(D_RANGE[1] + 1)]


class ChaosParams(BaseModel):
    """Encryption parameters (x0, a, k, d)."""

    model_config = ConfigDict(frozen=True)

    x0: float = Field(ge=X0_RANGE[0], le=X0_RANGE[1])
    a: float = Field(ge=A_RANGE[0], lt=A_RANGE[1])
    k: int = Field(ge=K_RANGE[0], le=K_RANGE[1])
    d: int = Field(ge=D_RANGE[0], le=D_RANGE[1])

    @model_validator(mode="after")
    def _reject_fixed_point(self):
        # x* = 1 - 1/a is a fixed point of the map
        if abs(self.x0 - (1.0 - 1.0 / self.a)) < FIXED_POINT_TOLERANCE:
            raise ValueError(f"x0={self.x0!r} sits on the fixed point 1 - 1/a of a={self.a!r}")
        return self


class DigitKeystream(BaseModel):
    model_config = ConfigDict(frozen=True)

    digits: List[int]

    def __len__(self) -> int:
        return len(self.digits)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.digits, dtype=np.int64)

    def to_bytes(self) -> bytes:
        return bytes(self.digits)


def logistic_step(x: float, a: float) -> float:
    if not 0.0 < x < 1.0:
        raise DomainError(f"logistic map state must lie in (0, 1), got {x!r}")
    if not A_RANGE[0] <= a < A_RANGE[1]:
        raise DomainError(f"map parameter must lie in [3.7, 4.0), got {a!r}")
    return (a * x) * (1.0 - x)


def digit_extract(x: float, d: int) -> int:
    """d-th decimal digit of x: floor(x * 10^d) mod 10."""
    if not 0.0 < x < 1.0:
        raise ParameterError(f"value must lie in (0, 1), got {x!r}")
    if not D_RANGE[0] <= d <= D_RANGE[1]:
        raise ParameterError(f"digit index must lie in [{D_RANGE[0]}, {D_RANGE[1]}], got {d!r}")
    return math.floor(x * _POW10[d]) % 10


def _iterate(x: float, a: float, steps: int) -> float:
    for _ in range(steps):
        x = (a * x) * (1.0 - x)
        if x <= 0.0 or x >= 1.0:
            raise DegenerateKeystreamError(
                f"logistic map collapsed to {x!r}; choose other parameters"
            )
    return x


def keystream(p: ChaosParams, count: int) -> DigitKeystream:
    """Digits of x_k, x_(k+1), ..., x_(k+count-1)."""
    if count < 1:
        raise ParameterError(f"keystream length must be positive, got {count}")

    # --- Step 1: warm-up，丟掉前 k 個值 ---
    x = _iterate(p.x0, p.a, p.k)

    # --- Step 2: 取每個值的第 d 位數 ---
    scale = _POW10[p.d]
    digits = []
    for _ in range(count):
        digits.append(math.floor(x * scale) % 10)
        x = _iterate(x, p.a, 1)

    if not is_chaotic(p.a, x0=p.x0, k=p.k):
        logger.warning(f"a={p.a!r} lies in a periodic window (non-positive Lyapunov exponent)")

    distinct = len(set(digits))
    if count > 1 and distinct == 1:
        raise DegenerateKeystreamError(
            f"all {count} keystream digits equal {digits[0]}; choose other parameters"
        )
    if count >= 64 and distinct < MIN_DISTINCT_DIGITS:
        logger.warning(
            f"Keystream for a={p.a!r} uses only {distinct} distinct digits; "
            "the map is probably inside a periodic window"
        )
    return DigitKeystream(digits=digits)


def lyapunov_exponent(a: float, x0: float = 0.1, k: int = 100, count: int = 2000) -> float:
    """Mean of log|a(1 - 2x)| along the orbit after k warm-up steps."""
    x = _iterate(x0, a, k)
    total = 0.0
    for _ in range(count):
        total += math.log(max(abs(a * (1.0 - 2.0 * x)), 1e-300))
        x = _iterate(x, a, 1)
    return total / count


def is_chaotic(a: float, x0: float = 0.1, k: int = 100) -> bool:
    return lyapunov_exponent(a, x0=x0, k=k) > 0.0


def bifurcation(a_values: Sequence[float], x0: float = 0.1, k: int = 100, count: int = 200) -> np.ndarray:
    """
    Orbit samples for a bifurcation diagram.

    Returns an array of shape (len(a_values), count) holding x_k ... x_(k+count-1)
    for each map parameter. Parameters below 3.7 are accepted here on purpose:
    the diagram shows the transition into chaos.
    """
    if count < 1:
        raise ParameterError(f"sample count must be positive, got {count}")
    if not 0.0 < x0 < 1.0:
        raise DomainError(f"x0 must lie in (0, 1), got {x0!r}")

    rows = []
    for a in a_values:
        if not 0.0 < a < 4.0:
            raise ParameterError(f"map parameter must lie in (0, 4), got {a!r}")
        x = x0
        for _ in range(k):
            x = (a * x) * (1.0 - x)
        row = []
        for _ in range(count):
            row.append(x)
            x = (a * x) * (1.0 - x)
        rows.append(row)
    return np.asarray(rows, dtype=np.float64)
