"""Finite-dimensional sector-preserving measurement operators.

The joint space is a direct sum of n sectors; sector i is the tensor
product of an m-dimensional apparatus factor with a d_i-dimensional
particle factor. A measurement operator acts on sector i as
(apparatus matrix i) tensor (identity on the particle factor), so it can
never move amplitude between sectors, and the per-sector squared norms
are conserved under the evolution it generates.

Joint vectors are stored sector-major; inside a sector the layout is
particle-major, index r*m + alpha, so the sector block of an assembled
operator is kron(I_d, H_m) and its d_i diagonal m x m sub-blocks all
equal the apparatus matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigInvalid,
    DegenerateState,
    DimensionMismatch,
    EigenFailure,
    NotHermitian,
)
from .simplex import SimplexPoint

HERMITIAN_TOL = 1e-12  # construction-time Hermiticity (max entry of B - B^dagger)
INVARIANCE_TOL = 1e-10  # sector-invariance and factorization checks
DEFAULT_DIM_CAP = 4096


@dataclass(frozen=True)
class Dims:
    """Sector layout: apparatus dimension m and particle sector dimensions d."""

    m: int
    d: tuple[int, ...]
    cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if self.m < 1 or any(di < 1 for di in self.d):
            raise ConfigInvalid("all dimensions must be >= 1", field="dims")
        object.__setattr__(self, "d", tuple(int(di) for di in self.d))
        if self.D < 2:
            raise ConfigInvalid("total particle dimension must be >= 2", field="dims.d")
        if self.m * self.D > self.cap:
            raise ConfigInvalid(
                f"joint dimension {self.m * self.D} exceeds cap {self.cap}", field="dims"
            )

    @property
    def n(self) -> int:
        return len(self.d)

    @property
    def D(self) -> int:
        return sum(self.d)

    @property
    def total(self) -> int:
        return self.m * self.D

    def sector_slices(self) -> list[slice]:
        out = []
        off = 0
        for di in self.d:
            out.append(slice(off, off + self.m * di))
            off += self.m * di
        return out

    def to_dict(self) -> dict:
        return {"m": self.m, "d": list(self.d)}

    @classmethod
    def from_dict(cls, doc: dict) -> "Dims":
        try:
            return cls(m=int(doc["m"]), d=tuple(int(x) for x in doc["d"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad dims record: {exc}", field="dims") from exc


def _hermitian_deviation(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


class BlockHamiltonian:
    """n Hermitian sector blocks, each of the product form kron(I_d, H_m)."""

    __slots__ = ("dims", "apparatus_blocks", "blocks")

    def __init__(self, dims: Dims, apparatus_blocks):
        blocks = [np.asarray(b, dtype=complex) for b in apparatus_blocks]
        if len(blocks) != dims.n:
            raise DimensionMismatch(
                f"expected {dims.n} apparatus blocks, got {len(blocks)}"
            )
        for i, b in enumerate(blocks):
            if b.shape != (dims.m, dims.m):
                raise DimensionMismatch(
                    f"apparatus block {i + 1} has shape {b.shape}, expected {(dims.m, dims.m)}"
                )
            dev = _hermitian_deviation(b)
            if dev > HERMITIAN_TOL:
                raise NotHermitian(i + 1, dev)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "apparatus_blocks", tuple(b.copy() for b in blocks))
        object.__setattr__(
            self,
            "blocks",
            tuple(np.kron(np.eye(di), b) for di, b in zip(dims.d, blocks)),
        )

    def __setattr__(self, name, value):
        raise AttributeError("BlockHamiltonian is immutable")

    def full_matrix(self) -> np.ndarray:
        """Dense operator on the whole joint space (block diagonal by sector)."""
        total = self.dims.total
        out = np.zeros((total, total), dtype=complex)
        for sl, blk in zip(self.dims.sector_slices(), self.blocks):
            out[sl, sl] = blk
        return out


def assemble(dims: Dims, apparatus_blocks) -> BlockHamiltonian:
    """Build the sector-preserving operator with the given per-sector apparatus blocks."""
    return BlockHamiltonian(dims, apparatus_blocks)


def uniform_block(hbar, dims: Dims) -> BlockHamiltonian:
    """Special case with the same apparatus block on every sector."""
    return BlockHamiltonian(dims, [hbar] * dims.n)


class JointState:
    """Unit vector on the joint space, sector-major layout."""

    __slots__ = ("dims", "v")

    def __init__(self, dims: Dims, v):
        v = np.asarray(v, dtype=complex)
        if v.shape != (dims.total,):
            raise DimensionMismatch(f"state has shape {v.shape}, expected ({dims.total},)")
        nrm = float(np.linalg.norm(v))
        if not math.isfinite(nrm) or abs(nrm - 1.0) > 1e-12:
            raise ConfigInvalid(f"state norm {nrm!r} is not 1 within 1e-12", field="state.v")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "v", v)

    def __setattr__(self, name, value):
        raise AttributeError("JointState is immutable")

    def sector(self, i: int) -> np.ndarray:
        """Slice of sector i (1-based), shape (m * d_i,)."""
        return self.v[self.dims.sector_slices()[i - 1]]


def product_state(g, phi_parts, dims: Dims) -> JointState:
    """Unentangled state: apparatus vector tensored with each particle part.

    The result is normalized globally, so only the direction of g and the
    relative magnitudes of the parts matter.
    """
    g = np.asarray(g, dtype=complex)
    if g.shape != (dims.m,):
        raise DimensionMismatch(f"apparatus vector has shape {g.shape}, expected ({dims.m},)")
    parts = [np.asarray(p, dtype=complex) for p in phi_parts]
    if len(parts) != dims.n:
        raise DimensionMismatch(f"expected {dims.n} particle parts, got {len(parts)}")
    for i, (p, di) in enumerate(zip(parts, dims.d)):
        if p.shape != (di,):
            raise DimensionMismatch(f"particle part {i + 1} has shape {p.shape}, expected ({di},)")
    if np.linalg.norm(g) == 0.0:
        raise DegenerateState("apparatus vector is zero")
    v = np.concatenate([np.kron(p, g) for p in parts])
    nrm = np.linalg.norm(v)
    if nrm < 1e-150:
        raise DegenerateState("all particle parts are zero")
    return JointState(dims, v / nrm)


def check_invariance(H, dims: Dims, w) -> bool:
    """True iff H maps the span of the sectors in w into itself.

    w is a subset of {1..n}; the test is that the off-block
    (complement rows, w columns) of H has max magnitude <= 1e-10.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (dims.total, dims.total):
        raise DimensionMismatch(f"operator has shape {H.shape}, expected square of size {dims.total}")
    w = set(int(k) for k in w)
    if not w <= set(range(1, dims.n + 1)):
        raise DimensionMismatch(f"subset {sorted(w)} not within 1..{dims.n}")
    if _hermitian_deviation(H) > 1e-10:
        raise ConfigInvalid("operator is not Hermitian within 1e-10", field="hamiltonian")
    slices = dims.sector_slices()
    inside = np.zeros(dims.total, dtype=bool)
    for k in w:
        inside[slices[k - 1]] = True
    if inside.all() or not inside.any():
        return True
    off = H[np.ix_(~inside, inside)]
    return float(np.max(np.abs(off))) <= INVARIANCE_TOL


def verify_form(H, dims: Dims) -> bool:
    """True iff H is sector-preserving and each sector block factors as I_d x H_m.

    The factor test reconstructs the block from the average of its d_i
    diagonal m x m sub-blocks and compares entrywise at 1e-10.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (dims.total, dims.total):
        raise DimensionMismatch(f"operator has shape {H.shape}, expected square of size {dims.total}")
    for i in range(1, dims.n + 1):
        if not check_invariance(H, dims, {i}):
            return False
    m = dims.m
    for sl, di in zip(dims.sector_slices(), dims.d):
        block = H[sl, sl]
        tiles = block.reshape(di, m, di, m)
        avg = tiles[np.arange(di), :, np.arange(di), :].mean(axis=0)
        recon = np.kron(np.eye(di), avg)
        if float(np.max(np.abs(block - recon))) > INVARIANCE_TOL:
            return False
    return True


def evolve(H: BlockHamiltonian, s: JointState, t: float) -> JointState:
    """Apply exp(-i H t) sector by sector via apparatus-block eigendecomposition."""
    if H.dims != s.dims:
        raise DimensionMismatch("operator and state dims differ")
    if not math.isfinite(t):
        raise ConfigInvalid("time must be finite", field="t")
    if t == 0.0:
        return s
    out = np.empty_like(s.v)
    for sl, di, hb in zip(s.dims.sector_slices(), s.dims.d, H.apparatus_blocks):
        try:
            lam, vec = np.linalg.eigh(hb)
        except np.linalg.LinAlgError as exc:
            raise EigenFailure(f"eigendecomposition failed: {exc}") from exc
        u = (vec * np.exp(-1j * lam * t)) @ vec.conj().T
        w = s.v[sl].reshape(di, s.dims.m)
        out[sl] = (w @ u.T).reshape(-1)
    return JointState(s.dims, out)


def simplex_map(s: JointState) -> SimplexPoint:
    """Per-sector squared norms as a point on the simplex."""
    a = np.array([float(np.vdot(s.v[sl], s.v[sl]).real) for sl in s.dims.sector_slices()])
    total = a.sum()
    return SimplexPoint(a / total)


def reduced_particle_state(s: JointState) -> np.ndarray:
    """Partial trace over the apparatus factor: a D x D density matrix."""
    dims = s.dims
    mats = [s.v[sl].reshape(di, dims.m) for sl, di in zip(dims.sector_slices(), dims.d)]
    rho = np.zeros((dims.D, dims.D), dtype=complex)
    offs = np.concatenate([[0], np.cumsum(dims.d)])
    for i, wi in enumerate(mats):
        for j, wj in enumerate(mats):
            rho[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] = wi @ wj.conj().T
    return rho


# --- serialization -----------------------------------------------------------

def _flat_pairs(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(a, dtype=complex).ravel()]


def _from_pairs(pairs, shape) -> np.ndarray:
    arr = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    if arr.size != int(np.prod(shape)):
        raise ConfigInvalid(
            f"expected {int(np.prod(shape))} complex entries, got {arr.size}", field="matrix"
        )
    return arr.reshape(shape)


def hamiltonian_to_json(H: BlockHamiltonian) -> str:
    doc = H.dims.to_dict()
    doc["apparatus_blocks"] = [_flat_pairs(b) for b in H.apparatus_blocks]
    return json.dumps(doc, indent=2)


def hamiltonian_from_json(text: str) -> BlockHamiltonian:
    doc = _load(text)
    dims = Dims.from_dict(doc)
    blocks = [_from_pairs(p, (dims.m, dims.m)) for p in doc.get("apparatus_blocks", [])]
    return BlockHamiltonian(dims, blocks)


def operator_to_json(H, dims: Dims) -> str:
    doc = dims.to_dict()
    doc["matrix"] = _flat_pairs(H)
    return json.dumps(doc, indent=2)


def operator_from_json(text: str, dims: Dims | None = None):
    """Load a dense operator; dims may come from the document or the caller."""
    doc = _load(text)
    if dims is None:
        dims = Dims.from_dict(doc)
    if "matrix" in doc:
        return np.asarray(_from_pairs(doc["matrix"], (dims.total, dims.total))), dims
    if "apparatus_blocks" in doc:
        blocks = [_from_pairs(p, (dims.m, dims.m)) for p in doc["apparatus_blocks"]]
        return BlockHamiltonian(dims, blocks).full_matrix(), dims
    raise ConfigInvalid("operator document needs 'matrix' or 'apparatus_blocks'", field="hamiltonian")


def state_to_json(s: JointState) -> str:
    doc = s.dims.to_dict()
    doc["v"] = _flat_pairs(s.v)
    return json.dumps(doc, indent=2)


def state_from_json(text: str) -> JointState:
    doc = _load(text)
    dims = Dims.from_dict(doc)
    return JointState(dims, _from_pairs(doc.get("v", []), (dims.total,)))


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"invalid JSON: {exc}", field="file") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid("expected a JSON object", field="file")
    return doc


def trajectory_csv(H: BlockHamiltonian, s: JointState, times) -> str:
    """CSV dump of the simplex coordinates along an evolution time grid."""
    n = s.dims.n
    lines = ["t," + ",".join(f"a_{i}" for i in range(1, n + 1))]
    for t in times:
        pt = simplex_map(evolve(H, s, float(t)))
        lines.append(f"{float(t)!r}," + ",".join(repr(float(x)) for x in pt))
    return "\n".join(lines) + "\n"
