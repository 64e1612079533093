"""Damping coefficients alpha(t) with closed-form time integrals.

Families
--------
zero          alpha = 0
constant      alpha = M
saturating    alpha = M (1 - e^{-r t})
exponential   alpha = e^{c t}
tabulated     monotone cubic (PCHIP) through user knots, held constant
              outside the knot range

Literal syntax used by configs and the CLI: ``zero``, ``const:M``,
``sat:M,r``, ``exp:c``, ``tab:path.csv``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError

FAMILIES = ("zero", "constant", "saturating", "exponential", "tabulated")


@dataclass(frozen=True)
class SupBound:
    """sup_{t>=0} alpha(t), or the reason it is not available.

    kind is one of ``bounded``, ``unbounded``, ``undamped`` or
    ``tabulated_range`` (sup taken over the knots only).
    """

    value: Optional[float]
    kind: str

    @property
    def is_finite(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class DampingProfile:
    family: str
    params: tuple = ()
    literal: str = ""
    _interp: object = field(default=None, repr=False, compare=False)
    _antider: object = field(default=None, repr=False, compare=False)

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls) -> "DampingProfile":
        return cls("zero", (), "zero")

    @classmethod
    def constant(cls, M: float) -> "DampingProfile":
        M = float(M)
        if not M > 0:
            raise DomainError(f"constant damping needs M > 0, got {M}")
        return cls("constant", (M,), f"const:{M:g}")

    @classmethod
    def saturating(cls, M: float, r: float) -> "DampingProfile":
        M, r = float(M), float(r)
        if not (M > 0 and r > 0):
            raise DomainError(f"saturating damping needs M > 0 and r > 0, got {M}, {r}")
        return cls("saturating", (M, r), f"sat:{M:g},{r:g}")

    @classmethod
    def exponential(cls, c: float) -> "DampingProfile":
        c = float(c)
        if not c > 0:
            raise DomainError(f"exponential damping needs c > 0, got {c}")
        return cls("exponential", (c,), f"exp:{c:g}")

    @classmethod
    def tabulated(cls, times, values, literal: str = "tab") -> "DampingProfile":
        t = np.asarray(times, dtype=float)
        a = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != a.shape or t.size < 2:
            raise DomainError("tabulated damping needs two equal-length 1-D arrays (>= 2 knots)")
        if np.any(np.diff(t) <= 0):
            raise DomainError("tabulated knots must be strictly increasing in t")
        if t[0] < 0 or np.any(a < 0) or not np.all(np.isfinite(a)):
            raise DomainError("tabulated knots need t >= 0 and finite alpha >= 0")
        interp = PchipInterpolator(t, a, extrapolate=False)
        return cls(
            "tabulated",
            (tuple(t.tolist()), tuple(a.tolist())),
            literal,
            interp,
            interp.antiderivative(),
        )

    # evaluation -----------------------------------------------------------

    def alpha(self, t: float) -> float:
        t = _check_time(t)
        fam = self.family
        if fam == "zero":
            return 0.0
        if fam == "constant":
            return self.params[0]
        if fam == "saturating":
            M, r = self.params
            return -M * math.expm1(-r * t)
        if fam == "exponential":
            return _safe_exp(self.params[0] * t)
        knots, vals = self.params
        if t <= knots[0]:
            return vals[0]
        if t >= knots[-1]:
            return vals[-1]
        return float(self._interp(t))

    def alpha_integral(self, t: float) -> float:
        """int_0^t alpha(s) ds."""
        t = _check_time(t)
        fam = self.family
        if fam == "zero":
            return 0.0
        if fam == "constant":
            return self.params[0] * t
        if fam == "saturating":
            M, r = self.params
            # M (t - (1 - e^{-rt})/r)
            return M * (t + math.expm1(-r * t) / r)
        if fam == "exponential":
            c = self.params[0]
            return (_safe_exp(c * t) - 1.0) / c if c * t > 1.0 else math.expm1(c * t) / c
        knots, vals = self.params
        t0, t1 = knots[0], knots[-1]
        head = vals[0] * min(t, t0)
        if t <= t0:
            return head
        mid = float(self._antider(min(t, t1)) - self._antider(t0))
        tail = vals[-1] * (t - t1) if t > t1 else 0.0
        return head + mid + tail

    def sup_bound(self) -> SupBound:
        fam = self.family
        if fam == "zero":
            return SupBound(None, "undamped")
        if fam in ("constant", "saturating"):
            return SupBound(self.params[0], "bounded")
        if fam == "exponential":
            return SupBound(None, "unbounded")
        # PCHIP never overshoots the knot values
        peak = max(self.params[1])
        if peak <= 0:
            return SupBound(None, "undamped")
        return SupBound(peak, "tabulated_range")

    def derivative_at_zero(self) -> float:
        fam = self.family
        if fam in ("zero", "constant"):
            return 0.0
        if fam == "saturating":
            M, r = self.params
            return M * r
        if fam == "exponential":
            return self.params[0]
        raise DomainError("alpha'(0) is not defined for tabulated damping")

    def __str__(self) -> str:
        return self.literal or self.family


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _check_time(t: float) -> float:
    t = float(t)
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    return t


def parse_damping(literal: str) -> DampingProfile:
    """Parse ``zero``, ``const:M``, ``sat:M,r``, ``exp:c`` or ``tab:path.csv``."""
    text = literal.strip()
    if text == "zero":
        return DampingProfile.zero()
    head, sep, body = text.partition(":")
    if not sep:
        raise DomainError(f"unrecognized damping literal {literal!r}")
    try:
        if head == "const":
            return DampingProfile.constant(float(body))
        if head == "sat":
            M, r = (float(p) for p in body.split(","))
            return DampingProfile.saturating(M, r)
        if head == "exp":
            return DampingProfile.exponential(float(body))
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed damping literal {literal!r}") from exc
    if head == "tab":
        t, a = _read_table(Path(body))
        return DampingProfile.tabulated(t, a, literal=text)
    raise DomainError(f"unrecognized damping literal {literal!r}")


def _read_table(path: Path):
    times, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                t, a = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                # header line
                if not times:
                    continue
                raise DomainError(f"bad row in {path}: {row!r}")
            times.append(t)
            values.append(a)
    return times, values
