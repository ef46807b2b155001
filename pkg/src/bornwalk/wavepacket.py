"""Gaussian-packet wave functions and detector-region weights.

A wave function is a coherent superposition of Gaussian packets living on
the half-space z > 0 (it is treated as identically zero for z <= 0). Each
packet factorizes per axis as

    g(u) = (pi sigma^2)^(-1/4) * exp(-(u - u0)^2 / (2 sigma^2)) * exp(i k u)

so a packet with amplitude 1 has unit L2 norm over all of R^3, and the
squared modulus |g|^2 has per-axis density exp(-(u-u0)^2 / sigma^2).
Detector weights are integrals of |sum of packets|^2 over each cell's
half-space region, normalized by the total norm; cross terms between
packets are kept exactly (the sum is squared pointwise).

Integrals use a composite Gauss-Legendre rule on boxes truncated at a
configurable number of sigmas (default 8); mass outside the truncation
box is attributed to the catch-all region.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import ConfigInvalid, DegenerateState, NonFiniteResult
from .geometry import DetectorArray
from .simplex import SimplexPoint

__all__ = [
    "GaussianPacket",
    "WaveFunction",
    "QuadratureSpec",
    "SimplexPoint",
    "evaluate",
    "norm_squared",
    "born_weights",
    "born_weights_erf",
    "norm_squared_erf",
    "wavefunction_to_json",
    "wavefunction_from_json",
    "weights_to_csv",
]

_NORM_FLOOR = 1e-12  # below this the state is degenerate
_MAX_PANEL = 64  # Gauss-Legendre panel order cap of the composite rule


@dataclass(frozen=True)
class GaussianPacket:
    center: tuple[float, float, float]
    sigma: tuple[float, float, float]
    k: tuple[float, float, float] = (0.0, 0.0, 0.0)
    amp: complex = 1.0 + 0.0j

    def __post_init__(self):
        if len(self.center) != 3 or len(self.sigma) != 3 or len(self.k) != 3:
            raise ConfigInvalid("center, sigma, k must have 3 components", field="packet")
        if any(s <= 0 for s in self.sigma):
            raise ConfigInvalid("all packet widths must be positive", field="packet.sigma")
        if self.center[2] <= 0:
            raise ConfigInvalid("packet center must satisfy z0 > 0", field="packet.center")
        if not all(math.isfinite(v) for v in (*self.center, *self.sigma, *self.k)):
            raise ConfigInvalid("packet parameters must be finite", field="packet")


class WaveFunction:
    """Nonempty coherent superposition of Gaussian packets, zero for z <= 0."""

    __slots__ = ("packets",)

    def __init__(self, packets):
        packets = tuple(packets)
        if not packets:
            raise ConfigInvalid("wave function needs at least one packet", field="packets")
        for p in packets:
            if not isinstance(p, GaussianPacket):
                raise ConfigInvalid("packets must be GaussianPacket instances", field="packets")
        object.__setattr__(self, "packets", packets)

    def __setattr__(self, name, value):
        raise AttributeError("WaveFunction is immutable")

    def bounding_box(self, halfwidth: float):
        """Union of per-packet boxes center +- halfwidth*sigma, z clipped to >= 0."""
        lo = [math.inf] * 3
        hi = [-math.inf] * 3
        for p in self.packets:
            for a in range(3):
                lo[a] = min(lo[a], p.center[a] - halfwidth * p.sigma[a])
                hi[a] = max(hi[a], p.center[a] + halfwidth * p.sigma[a])
        lo[2] = max(lo[2], 0.0)
        return (lo[0], hi[0]), (lo[1], hi[1]), (lo[2], hi[2])


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre tensor rule on truncated boxes."""

    nodes: tuple[int, int, int] = (48, 48, 48)
    halfwidth: float = 8.0
    scheme: str = "gauss-legendre"

    def __post_init__(self):
        if any(int(n) != n or n < 8 for n in self.nodes):
            raise ConfigInvalid("per-axis node counts must be integers >= 8", field="quadrature.nodes")
        if self.halfwidth < 4:
            raise ConfigInvalid("truncation half-width must be >= 4 sigma", field="quadrature.halfwidth")
        if self.scheme != "gauss-legendre":
            raise ConfigInvalid(f"unknown scheme {self.scheme!r}", field="quadrature.scheme")

    def refined(self, factor: int) -> "QuadratureSpec":
        return QuadratureSpec(
            nodes=tuple(int(n) * factor for n in self.nodes),
            halfwidth=self.halfwidth,
            scheme=self.scheme,
        )


def _gauss_rule(a: float, b: float, n: int):
    """Composite Gauss-Legendre nodes/weights on [a, b] with n points total.

    Panels are capped at _MAX_PANEL points; the reference nodes are
    antisymmetrized so mirrored intervals produce exactly mirrored rules.
    """
    panels = (n + _MAX_PANEL - 1) // _MAX_PANEL
    base = n // panels
    orders = [base + (1 if i < n - base * panels else 0) for i in range(panels)]
    xs = []
    ws = []
    for i, order in enumerate(orders):
        xi, wi = np.polynomial.legendre.leggauss(order)
        xi = 0.5 * (xi - xi[::-1])
        wi = 0.5 * (wi + wi[::-1])
        pa = a + (b - a) * i / panels
        pb = a + (b - a) * (i + 1) / panels
        c = 0.5 * (pa + pb)
        h = 0.5 * (pb - pa)
        xs.append(c + h * xi)
        ws.append(h * wi)
    return np.concatenate(xs), np.concatenate(ws)


def _axis_factors(packets, u, axis: int) -> np.ndarray:
    """Per-packet axis factor g(u) evaluated on a node array; shape (P, len(u))."""
    out = np.empty((len(packets), u.size), dtype=complex)
    for p_idx, p in enumerate(packets):
        u0 = p.center[axis]
        s = p.sigma[axis]
        kk = p.k[axis]
        env = (math.pi * s * s) ** -0.25 * np.exp(-((u - u0) ** 2) / (2.0 * s * s))
        out[p_idx] = env * np.exp(1j * kk * u)
    return out


def evaluate(psi: WaveFunction, x, y, z):
    """Pointwise value of the superposition; identically 0 for z <= 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0 and z.ndim == 0
    x, y, z = np.broadcast_arrays(x, y, z)
    val = np.zeros(x.shape, dtype=complex)
    mask = z > 0
    if np.any(mask):
        xs, ys, zs = x[mask], y[mask], z[mask]
        acc = np.zeros(xs.shape, dtype=complex)
        for p in psi.packets:
            term = np.asarray(p.amp, dtype=complex)
            for u, axis in ((xs, 0), (ys, 1), (zs, 2)):
                u0, s, kk = p.center[axis], p.sigma[axis], p.k[axis]
                term = term * (
                    (math.pi * s * s) ** -0.25
                    * np.exp(-((u - u0) ** 2) / (2.0 * s * s))
                    * np.exp(1j * kk * u)
                )
            acc += term
        val[mask] = acc
    return complex(val[()]) if scalar else val


def _integrate_box(psi: WaveFunction, xbox, ybox, zbox, q: QuadratureSpec) -> float:
    """Integral of |psi|^2 over a box, z-slab by z-slab to bound memory."""
    if xbox[0] >= xbox[1] or ybox[0] >= ybox[1] or zbox[0] >= zbox[1]:
        return 0.0
    xn, xw = _gauss_rule(xbox[0], xbox[1], q.nodes[0])
    yn, yw = _gauss_rule(ybox[0], ybox[1], q.nodes[1])
    zn, zw = _gauss_rule(zbox[0], zbox[1], q.nodes[2])
    amps = np.array([p.amp for p in psi.packets], dtype=complex)
    gx = _axis_factors(psi.packets, xn, 0) * amps[:, None]
    gy = _axis_factors(psi.packets, yn, 1)
    gz = _axis_factors(psi.packets, zn, 2)
    wxy = np.outer(xw, yw)
    total = 0.0
    with np.errstate(over="ignore"):  # overflow surfaces as NonFiniteResult upstream
        for j in range(zn.size):
            slab = np.tensordot(gx * gz[:, j][:, None], gy, axes=(0, 0))
            total += zw[j] * float(np.sum(wxy * (slab.real**2 + slab.imag**2)))
    return total


def norm_squared(psi: WaveFunction, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Quadrature approximation of the squared L2 norm over z > 0."""
    xb, yb, zb = psi.bounding_box(q.halfwidth)
    val = _integrate_box(psi, xb, yb, zb, q)
    if not math.isfinite(val):
        raise NonFiniteResult("norm quadrature produced a non-finite value")
    return val


def born_weights(
    psi: WaveFunction, array: DetectorArray, q: QuadratureSpec = QuadratureSpec()
) -> SimplexPoint:
    """Weight of each detector region: normalized |psi|^2 mass above its cell.

    The catch-all region n collects the complement, including any mass
    outside the truncation box. Unnormalized input is fine; weights divide
    by the total norm.
    """
    xb, yb, zb = psi.bounding_box(q.halfwidth)
    norm2 = _integrate_box(psi, xb, yb, zb, q)
    if not math.isfinite(norm2):
        raise NonFiniteResult("norm quadrature produced a non-finite value")
    if norm2 < _NORM_FLOOR:
        raise DegenerateState(f"squared norm {norm2:.3e} is below {_NORM_FLOOR}")
    weights = np.zeros(array.n)
    for i, cell in enumerate(array.cells):
        cx = (max(cell.x_min, xb[0]), min(cell.x_max, xb[1]))
        cy = (max(cell.y_min, yb[0]), min(cell.y_max, yb[1]))
        raw = _integrate_box(psi, cx, cy, zb, q)
        if not math.isfinite(raw):
            raise NonFiniteResult(f"region {i + 1} quadrature produced a non-finite value")
        weights[i] = raw / norm2
    weights[-1] = max(0.0, 1.0 - weights[:-1].sum())
    return SimplexPoint.from_weights(weights)


def _erf_axis(lo: float, hi: float, u0: float, sigma: float) -> float:
    # integral of the per-axis |g|^2 density over [lo, hi]
    return 0.5 * (erf((hi - u0) / sigma) - erf((lo - u0) / sigma))


def norm_squared_erf(psi: WaveFunction) -> float:
    """Closed-form squared norm over z > 0 (single packet only)."""
    if len(psi.packets) != 1:
        raise ConfigInvalid("closed form applies to single-packet wave functions", field="packets")
    p = psi.packets[0]
    return abs(p.amp) ** 2 * 0.5 * (1.0 + erf(p.center[2] / p.sigma[2]))


def born_weights_erf(psi: WaveFunction, array: DetectorArray) -> SimplexPoint:
    """Separable error-function weights for a single packet; oracle for the quadrature.

    The z factor over (0, inf) cancels in the normalized weights, so each
    cell weight is the product of the x and y erf factors over the full
    (untruncated) cell.
    """
    if len(psi.packets) != 1:
        raise ConfigInvalid("closed form applies to single-packet wave functions", field="packets")
    p = psi.packets[0]
    weights = np.zeros(array.n)
    for i, cell in enumerate(array.cells):
        fx = _erf_axis(cell.x_min, cell.x_max, p.center[0], p.sigma[0])
        fy = _erf_axis(cell.y_min, cell.y_max, p.center[1], p.sigma[1])
        weights[i] = fx * fy
    weights[-1] = max(0.0, 1.0 - weights[:-1].sum())
    return SimplexPoint.from_weights(weights)


def wavefunction_to_json(psi: WaveFunction) -> str:
    doc = {
        "packets": [
            {
                "center": list(p.center),
                "sigma": list(p.sigma),
                "k": list(p.k),
                "amp": [complex(p.amp).real, complex(p.amp).imag],
            }
            for p in psi.packets
        ]
    }
    return json.dumps(doc, indent=2)


def wavefunction_from_json(text: str) -> WaveFunction:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"invalid JSON: {exc}", field="wave") from exc
    if not isinstance(doc, dict) or "packets" not in doc:
        raise ConfigInvalid("expected an object with a 'packets' list", field="wave")
    packets = []
    for rec in doc["packets"]:
        try:
            amp = rec.get("amp", [1.0, 0.0])
            packets.append(
                GaussianPacket(
                    center=tuple(rec["center"]),
                    sigma=tuple(rec["sigma"]),
                    k=tuple(rec.get("k", (0.0, 0.0, 0.0))),
                    amp=complex(amp[0], amp[1]),
                )
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise ConfigInvalid(f"bad packet record: {exc}", field="wave.packets") from exc
    return WaveFunction(packets)


def weights_to_csv(weights: SimplexPoint) -> str:
    lines = ["region_index,weight"]
    for i, w in enumerate(weights, start=1):
        lines.append(f"{i},{float(w)!r}")
    return "\n".join(lines) + "\n"
