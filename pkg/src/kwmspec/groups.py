"""Discrete abelian index groups and their compact character duals.

Two families are supported.  The integer group ``Z`` has the unit circle as
its dual, parametrized by ``theta`` in ``[0, 2*pi)`` with normalized Haar
measure ``dtheta / (2*pi)``; the circle is discretized on ``dual_grid_size``
evenly spaced points and densities are treated as piecewise constant on the
grid cells.  Finite products ``Z_{n_1} x ... x Z_{n_d}`` are self-dual, each
dual point carrying Haar weight ``1/(n_1*...*n_d)``.

Group elements are plain ``int`` for ``Z`` and length-``d`` tuples of ints
for the finite products (a bare int is accepted when ``d == 1``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi

KIND_INTEGER = "Z"
KIND_CYCLIC = "ZN"


@dataclass(frozen=True)
class GroupDescriptor:
    """The index group of a stationary process.

    kind ``"Z"`` is the integers (``moduli`` must be empty); kind ``"ZN"``
    is ``Z_{n_1} x ... x Z_{n_d}`` with ``moduli = (n_1, ..., n_d)``.
    ``dual_grid_size`` only applies to ``"Z"`` and must be even so that
    ``theta`` and ``2*pi - theta`` both lie on the grid.

    Instances are immutable and safe to share across threads.
    """

    kind: str
    moduli: tuple = ()
    dual_grid_size: int = 256

    def __post_init__(self):
        if self.kind not in (KIND_INTEGER, KIND_CYCLIC):
            raise DomainError(f"unknown group kind {self.kind!r}")
        object.__setattr__(self, "moduli", tuple(int(n) for n in self.moduli))
        if self.kind == KIND_CYCLIC:
            if not self.moduli:
                raise DomainError("a finite cyclic product needs at least one modulus")
            if any(n < 1 for n in self.moduli):
                raise DomainError("moduli must all be >= 1")
        else:
            if self.moduli:
                raise DomainError("the integer group takes no moduli")
            if self.dual_grid_size < 2 or self.dual_grid_size % 2 != 0:
                raise DomainError("dual_grid_size must be even and >= 2")

    # -- basic structure ---------------------------------------------------

    @property
    def is_integer(self) -> bool:
        return self.kind == KIND_INTEGER

    @property
    def order(self) -> int:
        """Number of elements (finite groups only)."""
        if self.is_integer:
            raise DomainError("the integer group is infinite")
        return int(np.prod(self.moduli))

    def element(self, a):
        """Canonical form of a group element (ints for Z, reduced tuples for ZN)."""
        if self.is_integer:
            if isinstance(a, (tuple, list)):
                raise DomainError(f"elements of Z are integers, got {a!r}")
            return int(a)
        if isinstance(a, (int, np.integer)):
            if len(self.moduli) != 1:
                raise DomainError(
                    f"elements of this group are {len(self.moduli)}-tuples, got {a!r}"
                )
            a = (a,)
        if len(a) != len(self.moduli):
            raise DomainError(f"element {a!r} has wrong length for moduli {self.moduli}")
        return tuple(int(x) % n for x, n in zip(a, self.moduli))

    def require_element(self, a):
        """Like :meth:`element` but rejects out-of-range coordinates."""
        if self.is_integer:
            return self.element(a)
        canonical = self.element(a)
        raw = (int(a),) if isinstance(a, (int, np.integer)) else tuple(int(x) for x in a)
        if raw != canonical:
            raise DomainError(f"element {a!r} out of range for moduli {self.moduli}")
        return canonical

    def negate(self, a):
        a = self.element(a)
        if self.is_integer:
            return -a
        return tuple((-x) % n for x, n in zip(a, self.moduli))

    def subtract(self, b, a):
        """Canonical form of b - a."""
        b = self.element(b)
        a = self.element(a)
        if self.is_integer:
            return b - a
        return tuple((xb - xa) % n for xb, xa, n in zip(b, a, self.moduli))

    def zero(self):
        return 0 if self.is_integer else (0,) * len(self.moduli)

    def elements(self):
        """All elements of a finite group, in lexicographic order."""
        if self.is_integer:
            raise DomainError("the integer group cannot be enumerated")
        return [tuple(idx) for idx in itertools.product(*(range(n) for n in self.moduli))]

    # -- the dual group ----------------------------------------------------

    def grid_thetas(self) -> np.ndarray:
        """Dual grid points ``theta_j = 2*pi*j/G`` (integer group only)."""
        if not self.is_integer:
            raise DomainError("the dual grid applies to the integer group only")
        g = self.dual_grid_size
        return TWO_PI * np.arange(g) / g

    def dual_points(self):
        """Enumerate the dual of a finite group (same product group)."""
        return self.elements()

    def dual_index(self, m) -> int:
        """Position of dual point ``m`` in the :meth:`dual_points` order."""
        m = self.element(m)
        idx = 0
        for x, n in zip(m, self.moduli):
            idx = idx * n + x
        return idx

    def dual_element(self, point):
        """Canonical form of a dual point: angle mod 2*pi, or a group element."""
        if self.is_integer:
            return float(point) % TWO_PI
        return self.element(point)

    def require_dual(self, point):
        if self.is_integer:
            theta = float(point)
            if not 0.0 <= theta < TWO_PI:
                raise DomainError(f"dual point {point!r} outside [0, 2*pi)")
            return theta
        return self.require_element(point)

    def conjugate_dual(self, point):
        """The conjugation map ``chi -> chi^{-1}`` on the dual."""
        if self.is_integer:
            theta = self.dual_element(point)
            return (TWO_PI - theta) % TWO_PI
        return self.negate(point)

    def character(self, dual_point, a) -> complex:
        """Value of the character labelled ``dual_point`` at element ``a``."""
        a = self.element(a)
        if self.is_integer:
            theta = self.dual_element(dual_point)
            return complex(np.exp(1j * a * theta))
        m = self.element(dual_point)
        frac = sum(x * y / n for x, y, n in zip(a, m, self.moduli))
        return complex(np.exp(1j * TWO_PI * frac))

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        if self.is_integer:
            return {"kind": "Z", "moduli": [], "dual_grid_size": self.dual_grid_size}
        return {"kind": "ZN", "moduli": list(self.moduli)}

    @classmethod
    def from_dict(cls, data: dict) -> "GroupDescriptor":
        kind = data.get("kind")
        if kind == "Z":
            return cls(KIND_INTEGER, (), int(data.get("dual_grid_size", 256)))
        if kind == "ZN":
            return cls(KIND_CYCLIC, tuple(data.get("moduli", ())))
        raise DomainError(f"unknown group kind {kind!r}")


def integer_group(dual_grid_size: int = 256) -> GroupDescriptor:
    return GroupDescriptor(KIND_INTEGER, (), dual_grid_size)


def cyclic_group(*moduli: int) -> GroupDescriptor:
    return GroupDescriptor(KIND_CYCLIC, tuple(moduli))


def character_value(group: GroupDescriptor, dual_point, a) -> complex:
    """chi(a) for the character labelled by ``dual_point``; unit modulus.

    The dual point must be in range (angles in [0, 2*pi), finite dual
    points with canonical coordinates); the element ``a`` may be any
    representative and is canonicalized, since characters are constant on
    residue classes.
    """
    return group.character(group.require_dual(dual_point), group.element(a))


def haar_weight(group: GroupDescriptor, dual_subset) -> float:
    """Normalized Haar measure of a dual subset.

    For the integer group the subset is a list of ``(lo, hi)`` half-open
    interval pairs with ``0 <= lo <= hi <= 2*pi``; overlaps are rejected.
    For finite groups it is a list of dual points; duplicates are rejected.
    """
    if group.is_integer:
        intervals = [(float(lo), float(hi)) for lo, hi in dual_subset]
        for lo, hi in intervals:
            if not (0.0 <= lo <= hi <= TWO_PI):
                raise DomainError(f"interval ({lo}, {hi}) outside [0, 2*pi]")
        for (lo1, hi1), (lo2, hi2) in zip(sorted(intervals), sorted(intervals)[1:]):
            if lo2 < hi1:
                raise DomainError("overlapping intervals in dual subset")
        return sum(hi - lo for lo, hi in intervals) / TWO_PI
    points = [group.require_element(p) for p in dual_subset]
    if len(set(points)) != len(points):
        raise DomainError("duplicate dual points in subset")
    return len(points) / group.order
