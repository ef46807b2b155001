"""Points on the probability simplex.

A :class:`SimplexPoint` is a nonnegative vector summing to one. The same
type carries detector weights (where it is produced by quadrature) and
walk states (where it is produced by transfer steps), so the invariants
are enforced once, here.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigInvalid

SUM_TOL = 1e-12


class SimplexPoint:
    """Immutable nonnegative vector with components summing to 1 within 1e-12."""

    __slots__ = ("a",)

    def __init__(self, coords):
        if type(coords) is tuple or type(coords) is list:
            # fast path for the walk engine, which constructs millions of points
            s = 0.0
            try:
                for x in coords:
                    if not x >= 0.0 or x - x != 0.0:
                        raise ConfigInvalid(
                            f"component {x!r} is negative or non-finite", field="coords"
                        )
                    s += x
            except TypeError as exc:
                raise ConfigInvalid(f"non-numeric component: {exc}", field="coords") from exc
            if not coords or abs(s - 1.0) > SUM_TOL:
                raise ConfigInvalid(
                    f"components sum to {s!r}, not 1 within {SUM_TOL}", field="coords"
                )
            a = np.array(coords, dtype=float)
        else:
            a = np.asarray(coords, dtype=float)
            if a.ndim != 1 or a.size < 1:
                raise ConfigInvalid("simplex point must be a 1-d vector", field="coords")
            if not np.all(np.isfinite(a)):
                raise ConfigInvalid("simplex point has non-finite components", field="coords")
            if np.any(a < 0.0):
                raise ConfigInvalid(
                    f"negative component {a.min():.3e}", field="coords"
                )
            s = float(a.sum())
            if abs(s - 1.0) > SUM_TOL:
                raise ConfigInvalid(
                    f"components sum to {s!r}, not 1 within {SUM_TOL}", field="coords"
                )
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @classmethod
    def from_weights(cls, weights) -> "SimplexPoint":
        """Clamp raw weights into [0, 1] and renormalize so they sum to 1.

        The largest component absorbs the rounding residual, which keeps the
        sum at 1 up to one ulp without renormalizing a second time.
        """
        w = np.asarray(weights, dtype=float)
        if not np.all(np.isfinite(w)):
            raise ConfigInvalid("weights contain non-finite values", field="weights")
        w = np.clip(w, 0.0, 1.0)
        s = w.sum()
        if s <= 0.0:
            raise ConfigInvalid("weights sum to zero", field="weights")
        w = w / s
        k = int(np.argmax(w))
        w[k] = 1.0 - (w.sum() - w[k])
        return cls(w)

    @classmethod
    def vertex(cls, i: int, n: int) -> "SimplexPoint":
        """Unit vector e_i (1-based index) in dimension n."""
        a = np.zeros(n)
        a[i - 1] = 1.0
        return cls(a)

    @property
    def n(self) -> int:
        return self.a.size

    def __len__(self) -> int:
        return self.a.size

    def __getitem__(self, i):
        return self.a[i]

    def __iter__(self):
        return iter(self.a)

    def __eq__(self, other):
        if not isinstance(other, SimplexPoint):
            return NotImplemented
        return self.a.shape == other.a.shape and bool(np.all(self.a == other.a))

    def __hash__(self):
        return hash(self.a.tobytes())

    def __repr__(self):
        return f"SimplexPoint({self.a.tolist()!r})"

    def __setattr__(self, name, value):
        raise AttributeError("SimplexPoint is immutable")

    def tolist(self):
        return self.a.tolist()
