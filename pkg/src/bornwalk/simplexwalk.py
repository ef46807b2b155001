"""Absorbing martingale random walks on the probability simplex.

Every kernel in the catalogue satisfies the same contract: one step
leaves the expectation of each coordinate unchanged, never produces a
negative coordinate or breaks the unit sum, and never touches a
coordinate that is exactly zero. Under those rules a walk almost surely
collapses onto a vertex, and by optional stopping the probability of
ending at vertex i equals the i-th starting coordinate, whatever the
step law. Two qualitatively different kernels exhibit the class:

* PairTransfer(h): pick an unordered pair of positive coordinates
  uniformly and move min(a_i, a_j, h) from one to the other, direction
  by fair coin. When the transfer consumes a coordinate the result is an
  exact 0.0 (x - x is exact in IEEE arithmetic).
* DirichletMix(gamma, beta): resample the positive sub-vector from a
  Dirichlet distribution with shape gamma * (current coordinates), whose
  mean is the current point, and mix the sample in with weight beta.
  Values that land below 1e-15 are clamped to exact zero; the clamped
  dust and the rounding residual are transferred to the largest
  coordinate, which keeps the sum exact and biases a coordinate mean by
  at most ~1e-15 per step.

When only one positive coordinate remains it is snapped to exactly 1.0,
so absorbed walks end bit-exactly on a vertex.

Per-walk randomness: walk index i of an ensemble with master seed s uses
the 64-bit seed formed from words 2i, 2i+1 of
numpy.random.SeedSequence(s).generate_state, and each walk owns a
private numpy Generator, so results do not depend on execution order or
parallelism.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, DegenerateExpected, NoActivePair, TooManyUnabsorbed
from .simplex import SimplexPoint
from .stats import chi_square

DEFAULT_MAX_STEPS = 1_000_000
UNABSORBED_LIMIT = 0.01
ZERO_FLOOR = 1e-15  # DirichletMix clamp threshold
_RAND_BLOCK = 2048  # uniforms buffered per refill; even, so pairs never straddle


@dataclass(frozen=True)
class PairTransfer:
    h: float

    def __post_init__(self):
        if not (0.0 < self.h <= 0.5):
            raise ConfigInvalid("step size h must be in (0, 0.5]", field="kernel.h")

    def spec(self) -> str:
        return f"pair:{self.h!r}"


@dataclass(frozen=True)
class DirichletMix:
    gamma: float
    beta: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ConfigInvalid("concentration gamma must be positive", field="kernel.gamma")
        if not (0.0 < self.beta <= 1.0):
            raise ConfigInvalid("mixing weight beta must be in (0, 1]", field="kernel.beta")

    def spec(self) -> str:
        return f"dirichlet:{self.gamma!r},{self.beta!r}"


WalkKernel = PairTransfer | DirichletMix


def parse_kernel(text: str) -> WalkKernel:
    """Parse 'pair:H' or 'dirichlet:GAMMA[,BETA]' kernel specifications."""
    name, _, args = text.partition(":")
    try:
        if name == "pair":
            return PairTransfer(float(args))
        if name == "dirichlet":
            parts = [float(x) for x in args.split(",")]
            return DirichletMix(*parts)
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid(f"bad kernel spec {text!r}: {exc}", field="kernel") from exc
    raise ConfigInvalid(f"unknown kernel {name!r} (expected pair|dirichlet)", field="kernel")


_PAIR_TABLES: dict[int, tuple] = {}


def _pair_table(na: int) -> tuple:
    t = _PAIR_TABLES.get(na)
    if t is None:
        t = tuple((p, q) for p in range(na) for q in range(p + 1, na))
        _PAIR_TABLES[na] = t
    return t


def _pair_step_core(a: list, active: list, h: float, u1: float, u2: float) -> None:
    """One PairTransfer update of a (mutates a and active)."""
    na = len(active)
    p, q = _pair_table(na)[int(u1 * (na * (na - 1) >> 1))]
    i = active[p]
    j = active[q]
    ai = a[i]
    aj = a[j]
    eps = ai if ai < aj else aj
    if h < eps:
        eps = h
    if u2 < 0.5:
        a[i] = ai + eps
        aj -= eps
        a[j] = aj
        if aj == 0.0:
            del active[q]
    else:
        ai -= eps
        a[i] = ai
        a[j] = aj + eps
        if ai == 0.0:
            del active[p]


def _dirichlet_step_core(a: list, active: list, gamma: float, beta: float, rng) -> None:
    """One DirichletMix update of a (mutates a and active)."""
    pa = np.array([a[i] for i in active])
    target = pa.sum()
    shapes = gamma * pa
    g = rng.standard_gamma(shapes)
    s = g.sum()
    while s == 0.0:  # all-underflow draw; astronomically rare but well-defined
        g = rng.standard_gamma(shapes)
        s = g.sum()
    new = (1.0 - beta) * pa + (beta * target / s) * g
    kmax = int(new.argmax())
    new[new < ZERO_FLOOR] = 0.0
    new[kmax] += target - new.sum()
    keep = []
    for idx, i in enumerate(active):
        v = float(new[idx])
        a[i] = v
        if v > 0.0:
            keep.append(i)
    active[:] = keep


def step(a: SimplexPoint, k: WalkKernel, rng: np.random.Generator) -> SimplexPoint:
    """Single kernel step from an unabsorbed point; zero coordinates stay zero."""
    lst = a.a.tolist()
    active = [i for i, x in enumerate(lst) if x > 0.0]
    if len(active) < 2:
        raise NoActivePair("need at least two positive coordinates to step")
    if isinstance(k, PairTransfer):
        u = rng.random(2)
        _pair_step_core(lst, active, k.h, float(u[0]), float(u[1]))
    elif isinstance(k, DirichletMix):
        _dirichlet_step_core(lst, active, k.gamma, k.beta, rng)
    else:
        raise ConfigInvalid(f"unknown kernel type {type(k).__name__}", field="kernel")
    if len(active) == 1:
        lst[active[0]] = 1.0
    return SimplexPoint(lst)


def is_absorbed(a: SimplexPoint) -> int | None:
    """Vertex index (1-based) if the point is exactly a vertex, else None."""
    hit = None
    for i, x in enumerate(a):
        if x == 0.0:
            continue
        if x == 1.0 and hit is None:
            hit = i + 1
        else:
            return None
    return hit


@dataclass(frozen=True)
class WalkRun:
    """One realized walk: the seed is the path label that picked this outcome."""

    seed: int
    start: SimplexPoint
    steps_taken: int
    absorbed_at: int | None
    path: tuple | None = None
    thin: int = 0

    def path_steps(self) -> tuple:
        """Step indices of the recorded path points (start, every thin-th, final)."""
        if self.path is None:
            return ()
        steps = [min(k * self.thin, self.steps_taken) for k in range(len(self.path))]
        if len(steps) >= 2:
            steps[-1] = self.steps_taken
        return tuple(steps)


def run_walk(
    start: SimplexPoint,
    k: WalkKernel,
    seed: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    thin: int = 0,
) -> WalkRun:
    """Iterate the kernel from start until absorption or max_steps.

    Deterministic in (start, k, seed). With thin > 0 the path records the
    start, every thin-th point, and the final point.
    """
    if max_steps < 1:
        raise ConfigInvalid("max_steps must be >= 1", field="max_steps")
    if thin < 0:
        raise ConfigInvalid("thin must be >= 0", field="thin")
    a = [float(x) for x in start]
    active = [i for i, x in enumerate(a) if x > 0.0]
    raw_path = [tuple(a)] if thin else None
    vertex = is_absorbed(start)
    if vertex is None and len(active) == 1:
        # a single positive coordinate that is not exactly 1.0: within the
        # simplex sum tolerance the point is the vertex plus dust, and no
        # pair exists to step, so it counts as absorbed where the mass is
        vertex = active[0] + 1
    if vertex is not None:
        return WalkRun(
            seed=int(seed),
            start=start,
            steps_taken=0,
            absorbed_at=vertex,
            path=(start,) if thin else None,
            thin=thin,
        )

    rng = np.random.default_rng(int(seed) % (1 << 64))
    steps = 0
    absorbed = None
    last_recorded = 0
    if isinstance(k, PairTransfer):
        h = k.h
        vals = rng.random(_RAND_BLOCK).tolist()
        pos = 0
        while steps < max_steps:
            if pos >= _RAND_BLOCK:
                vals = rng.random(_RAND_BLOCK).tolist()
                pos = 0
            _pair_step_core(a, active, h, vals[pos], vals[pos + 1])
            pos += 2
            steps += 1
            if len(active) == 1:
                a[active[0]] = 1.0
                absorbed = active[0] + 1
            if thin and steps % thin == 0:
                raw_path.append(tuple(a))
                last_recorded = steps
            if absorbed is not None:
                break
    elif isinstance(k, DirichletMix):
        gamma, beta = k.gamma, k.beta
        while steps < max_steps:
            _dirichlet_step_core(a, active, gamma, beta, rng)
            steps += 1
            if len(active) == 1:
                a[active[0]] = 1.0
                absorbed = active[0] + 1
            if thin and steps % thin == 0:
                raw_path.append(tuple(a))
                last_recorded = steps
            if absorbed is not None:
                break
    else:
        raise ConfigInvalid(f"unknown kernel type {type(k).__name__}", field="kernel")

    if thin and last_recorded != steps:
        raw_path.append(tuple(a))
    return WalkRun(
        seed=int(seed),
        start=start,
        steps_taken=steps,
        absorbed_at=absorbed,
        path=tuple(SimplexPoint(p) for p in raw_path) if thin else None,
        thin=thin,
    )


def derive_seeds(master_seed: int, count: int) -> np.ndarray:
    """Per-walk 64-bit seeds from the master seed's SeedSequence word stream."""
    ss = np.random.SeedSequence(int(master_seed))
    words = ss.generate_state(2 * count, np.uint32).astype(np.uint64)
    return (words[0::2] << np.uint64(32)) | words[1::2]


@dataclass(frozen=True)
class EnsembleReport:
    """Aggregate absorption statistics of independent walks from one start."""

    start: SimplexPoint
    kernel: WalkKernel
    count: int
    counts: tuple
    freq: tuple
    unabsorbed: int
    chi2: float | None
    p_value: float | None
    chi2_note: str | None
    master_seed: int
    runs: tuple | None = None

    def to_json(self) -> str:
        doc = {
            "counts": list(self.counts),
            "freq": list(self.freq),
            "unabsorbed": self.unabsorbed,
            "chi2": self.chi2,
            "p": self.p_value,
            "master_seed": self.master_seed,
            "count": self.count,
            "start": self.start.tolist(),
            "kernel": self.kernel.spec(),
        }
        if self.chi2_note:
            doc["chi2_note"] = self.chi2_note
        return json.dumps(doc, sort_keys=True, indent=2)


def ensemble(
    start: SimplexPoint,
    k: WalkKernel,
    count: int,
    master_seed: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    thin: int = 0,
    keep_runs: bool = False,
) -> EnsembleReport:
    """Run count independent walks and report per-vertex absorption statistics.

    Walks are aggregated in index order, so the report is bit-stable for a
    fixed master seed no matter how the walks are scheduled. Raises
    TooManyUnabsorbed when more than 1% of walks hit the step budget.
    """
    if count < 1:
        raise ConfigInvalid("count must be >= 1", field="count")
    seeds = derive_seeds(master_seed, count)
    n = len(start)
    counts = [0] * n
    unabsorbed = 0
    runs = [] if (keep_runs or thin) else None
    for i in range(count):
        run = run_walk(start, k, int(seeds[i]), max_steps=max_steps, thin=thin)
        if run.absorbed_at is None:
            unabsorbed += 1
        else:
            counts[run.absorbed_at - 1] += 1
        if runs is not None:
            runs.append(run)
    if unabsorbed > UNABSORBED_LIMIT * count:
        raise TooManyUnabsorbed(unabsorbed, count, max_steps)
    absorbed_total = count - unabsorbed
    freq = tuple(c / absorbed_total for c in counts)
    chi2 = p_value = None
    note = None
    try:
        chi2, p_value = chi_square(counts, start)
    except DegenerateExpected as exc:
        note = f"chi-square skipped: {exc}"
    return EnsembleReport(
        start=start,
        kernel=k,
        count=count,
        counts=tuple(counts),
        freq=freq,
        unabsorbed=unabsorbed,
        chi2=chi2,
        p_value=p_value,
        chi2_note=note,
        master_seed=int(master_seed),
        runs=tuple(runs) if runs is not None else None,
    )


def path_to_csv(run: WalkRun) -> str:
    """CSV dump (step, a_1..a_n) of a recorded walk path."""
    if run.path is None:
        raise ConfigInvalid("walk was run without path recording (thin=0)", field="thin")
    n = len(run.start)
    lines = ["step," + ",".join(f"a_{i}" for i in range(1, n + 1))]
    for s, pt in zip(run.path_steps(), run.path):
        lines.append(f"{s}," + ",".join(repr(float(x)) for x in pt))
    return "\n".join(lines) + "\n"
