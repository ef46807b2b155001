"""Shared helpers: random operators and an independent brute-force quadrature."""

from __future__ import annotations

import numpy as np
import pytest


def rand_hermitian(m: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return (a + a.conj().T) / 2.0


def rand_state(total: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=total) + 1j * rng.normal(size=total)
    return v / np.linalg.norm(v)


def midpoint_weights(psi, array, halfwidth=8.0, nodes=160):
    """Brute-force detector weights: pointwise |sum of packets|^2 on a uniform
    midpoint grid. Deliberately shares no code with the library integrator."""

    def packet_value(p, X, Y, Z):
        val = np.full(X.shape, complex(p.amp))
        for u, c, s, k in ((X, *_axis(p, 0)), (Y, *_axis(p, 1)), (Z, *_axis(p, 2))):
            val = val * (np.pi * s * s) ** -0.25 * np.exp(-((u - c) ** 2) / (2 * s * s))
            val = val * np.exp(1j * k * u)
        return val

    def _axis(p, a):
        return p.center[a], p.sigma[a], p.k[a]

    los = [min(p.center[a] - halfwidth * p.sigma[a] for p in psi.packets) for a in range(3)]
    his = [max(p.center[a] + halfwidth * p.sigma[a] for p in psi.packets) for a in range(3)]
    los[2] = max(los[2], 0.0)

    def box_integral(xlo, xhi, ylo, yhi):
        if xlo >= xhi or ylo >= yhi:
            return 0.0
        xs = np.linspace(xlo, xhi, nodes + 1)
        xs = 0.5 * (xs[1:] + xs[:-1])
        ys = np.linspace(ylo, yhi, nodes + 1)
        ys = 0.5 * (ys[1:] + ys[:-1])
        zs = np.linspace(los[2], his[2], nodes + 1)
        zs = 0.5 * (zs[1:] + zs[:-1])
        dv = (xs[1] - xs[0]) * (ys[1] - ys[0]) * (zs[1] - zs[0])
        total = 0.0
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        for z in zs:
            amp = np.zeros(X.shape, dtype=complex)
            for p in psi.packets:
                amp += packet_value(p, X, Y, np.full(X.shape, z))
            total += float(np.sum(amp.real**2 + amp.imag**2)) * dv
        return total

    norm2 = box_integral(los[0], his[0], los[1], his[1])
    weights = []
    for cell in array.cells:
        w = box_integral(
            max(cell.x_min, los[0]), min(cell.x_max, his[0]),
            max(cell.y_min, los[1]), min(cell.y_max, his[1]),
        )
        weights.append(w / norm2)
    weights.append(max(0.0, 1.0 - sum(weights)))
    return np.array(weights)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
