"""End-to-end scenarios: wave function -> detector weights -> walk ensemble.

A scenario bundles everything one run needs (detector array, wave
function, walk kernel, walk count, master seed, quadrature settings, and
an optional block-operator consistency stanza). Running it computes the
detector weights, uses them as the walk starting point, runs the
ensemble, and emits a report plus a manifest with content digests so the
run is exactly reproducible from its artifacts.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import blockop
from .errors import ConfigInvalid
from .geometry import DetectorArray, strip_array
from .simplex import SimplexPoint
from .simplexwalk import (
    DEFAULT_MAX_STEPS,
    EnsembleReport,
    WalkKernel,
    ensemble,
    parse_kernel,
)
from .stats import chi_square  # noqa: F401  (part of this module's surface)
from .wavepacket import (
    GaussianPacket,
    QuadratureSpec,
    WaveFunction,
    born_weights,
    wavefunction_from_json,
    wavefunction_to_json,
)

__all__ = [
    "Scenario",
    "BlockCheck",
    "ScenarioReport",
    "run_scenario",
    "two_slit",
    "chi_square",
    "canonical_digest",
    "scenario_from_json",
    "scenario_to_json",
]


def canonical_digest(obj) -> str:
    """sha256 over a canonical JSON encoding; floats keep full precision."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class BlockCheck:
    """Optional operator-consistency stanza run alongside a scenario."""

    dims: blockop.Dims
    apparatus_blocks: tuple
    times: tuple

    def to_dict(self) -> dict:
        doc = self.dims.to_dict()
        doc["apparatus_blocks"] = [
            [[float(z.real), float(z.imag)] for z in np.asarray(b, dtype=complex).ravel()]
            for b in self.apparatus_blocks
        ]
        doc["times"] = [float(t) for t in self.times]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "BlockCheck":
        dims = blockop.Dims.from_dict(doc)
        blocks = []
        for pairs in doc.get("apparatus_blocks", []):
            arr = np.array([complex(re, im) for re, im in pairs], dtype=complex)
            blocks.append(arr.reshape(dims.m, dims.m))
        times = tuple(float(t) for t in doc.get("times", (0.1, 0.5, 1.0, 5.0)))
        return cls(dims=dims, apparatus_blocks=tuple(blocks), times=times)


@dataclass(frozen=True)
class Scenario:
    name: str
    array: DetectorArray
    wave: WaveFunction
    kernel: WalkKernel
    walks: int
    master_seed: int
    quadrature: QuadratureSpec = QuadratureSpec()
    max_steps: int = DEFAULT_MAX_STEPS
    block_check: BlockCheck | None = None

    def __post_init__(self):
        if self.walks < 1:
            raise ConfigInvalid("walk count must be >= 1", field="scenario.walks")
        if self.max_steps < 1:
            raise ConfigInvalid("max_steps must be >= 1", field="scenario.max_steps")
        if self.block_check is not None and self.block_check.dims.n != self.array.n:
            raise ConfigInvalid(
                f"block_check has {self.block_check.dims.n} sectors but the array has "
                f"{self.array.n} regions",
                field="scenario.block_check.d",
            )

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "array": json.loads(self.array.to_json()),
            "wave": json.loads(wavefunction_to_json(self.wave)),
            "kernel": self.kernel.spec(),
            "walks": self.walks,
            "master_seed": self.master_seed,
            "max_steps": self.max_steps,
            "quadrature": {
                "nodes": list(self.quadrature.nodes),
                "halfwidth": self.quadrature.halfwidth,
                "scheme": self.quadrature.scheme,
            },
        }
        if self.block_check is not None:
            doc["block_check"] = self.block_check.to_dict()
        return doc

    def digest(self) -> str:
        return canonical_digest(self.to_dict())


def scenario_to_json(s: Scenario) -> str:
    return json.dumps(s.to_dict(), sort_keys=True, indent=2)


def scenario_from_json(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"invalid JSON: {exc}", field="scenario") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid("expected a JSON object", field="scenario")
    try:
        quad_doc = doc.get("quadrature")
        quad = (
            QuadratureSpec(
                nodes=tuple(quad_doc.get("nodes", (48, 48, 48))),
                halfwidth=float(quad_doc.get("halfwidth", 8.0)),
                scheme=quad_doc.get("scheme", "gauss-legendre"),
            )
            if quad_doc
            else QuadratureSpec()
        )
        return Scenario(
            name=str(doc.get("name", "scenario")),
            array=DetectorArray.from_json(json.dumps(doc["array"])),
            wave=wavefunction_from_json(json.dumps(doc["wave"])),
            kernel=parse_kernel(doc["kernel"]),
            walks=int(doc["walks"]),
            master_seed=int(doc["master_seed"]),
            quadrature=quad,
            max_steps=int(doc.get("max_steps", DEFAULT_MAX_STEPS)),
            block_check=(
                BlockCheck.from_dict(doc["block_check"]) if "block_check" in doc else None
            ),
        )
    except KeyError as exc:
        raise ConfigInvalid(f"missing field {exc}", field="scenario") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(str(exc), field="scenario") from exc


@dataclass(frozen=True)
class ScenarioReport:
    """Expected weights next to the realized absorption statistics."""

    scenario_name: str
    scenario_digest: str
    expected: SimplexPoint
    ensemble: EnsembleReport
    bands_3sigma: tuple
    block_check: dict | None

    def to_dict(self) -> dict:
        e = self.ensemble
        return {
            "scenario": {"name": self.scenario_name, "digest": self.scenario_digest},
            "expected_weights": self.expected.tolist(),
            "counts": list(e.counts),
            "freq": list(e.freq),
            "unabsorbed": e.unabsorbed,
            "chi2": e.chi2,
            "p": e.p_value,
            "chi2_note": e.chi2_note,
            "bands_3sigma": [list(b) for b in self.bands_3sigma],
            "master_seed": e.master_seed,
            "walks": e.count,
            "kernel": e.kernel.spec(),
            "block_check": self.block_check,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        lines = ["region_index,expected_weight,count,freq,band_lo,band_hi"]
        for i in range(len(self.expected)):
            lo, hi = self.bands_3sigma[i]
            lines.append(
                f"{i + 1},{float(self.expected[i])!r},{self.ensemble.counts[i]},"
                f"{float(self.ensemble.freq[i])!r},{float(lo)!r},{float(hi)!r}"
            )
        return "\n".join(lines) + "\n"


def _run_block_check(check: BlockCheck, weights: SimplexPoint) -> dict:
    """Assemble the stanza's operator, verify its form, and evolve a state
    whose sector weights equal the detector weights, recording how much the
    sector norms drift (they should not, to 1e-10)."""
    H = blockop.assemble(check.dims, check.apparatus_blocks)
    full = H.full_matrix()
    ok_form = blockop.verify_form(full, check.dims)
    g = np.zeros(check.dims.m, dtype=complex)
    g[0] = 1.0
    parts = []
    for i, di in enumerate(check.dims.d):
        phi = np.zeros(di, dtype=complex)
        phi[0] = math.sqrt(weights[i])
        parts.append(phi)
    state = blockop.product_state(g, parts, check.dims)
    base = blockop.simplex_map(state).a
    drift = 0.0
    for t in check.times:
        moved = blockop.simplex_map(blockop.evolve(H, state, float(t))).a
        drift = max(drift, float(np.max(np.abs(moved - base))))
    return {
        "verify_form": bool(ok_form),
        "times": [float(t) for t in check.times],
        "max_simplex_drift": drift,
    }


def run_scenario(s: Scenario, out_dir: str | Path | None = None) -> ScenarioReport:
    """Full pipeline: weights, ensemble, statistics, optional block check.

    With out_dir set, writes report.json, report.csv, manifest.json, and
    report figures under it (creating it if needed); nothing is written
    anywhere else.
    """
    weights = born_weights(s.wave, s.array, s.quadrature)
    rep = ensemble(
        weights, s.kernel, s.walks, s.master_seed, max_steps=s.max_steps
    )
    absorbed = rep.count - rep.unabsorbed
    bands = []
    for w in weights:
        w = float(w)
        half = 3.0 * math.sqrt(max(w * (1.0 - w), 0.0) / absorbed)
        bands.append((w - half, w + half))
    block_result = (
        _run_block_check(s.block_check, weights) if s.block_check is not None else None
    )
    report = ScenarioReport(
        scenario_name=s.name,
        scenario_digest=s.digest(),
        expected=weights,
        ensemble=rep,
        bands_3sigma=tuple(bands),
        block_check=block_result,
    )
    if out_dir is not None:
        write_artifacts(s, report, Path(out_dir))
    return report


def write_artifacts(s: Scenario, report: ScenarioReport, out: Path) -> list[str]:
    """Persist report + manifest (+ figures) under out; returns written names."""
    from . import figures  # deferred: pulls in matplotlib

    out.mkdir(parents=True, exist_ok=True)
    written = []

    def _write(name: str, text: str):
        (out / name).write_text(text)
        written.append(name)

    _write("report.json", report.to_json())
    _write("report.csv", report.to_csv())
    _write("scenario.json", scenario_to_json(s))
    figures.scenario_figure(report, out / "report.png")
    written.append("report.png")
    manifest = {
        "scenario_digest": report.scenario_digest,
        "report_digest": canonical_digest(report.to_dict()),
        "master_seed": s.master_seed,
        "outputs": sorted(written),
    }
    _write("manifest.json", json.dumps(manifest, sort_keys=True, indent=2))
    return written


def two_slit(
    separation: float,
    sigma: float,
    kz: float = 0.0,
    strips: int = 8,
    extent: float = 8.0,
    kernel: WalkKernel | None = None,
    walks: int = 20_000,
    master_seed: int = 1,
    quadrature: QuadratureSpec = QuadratureSpec(),
) -> Scenario:
    """Two coherent equal-amplitude packets over a strip detector array.

    Packets sit at x = +-separation/2 with isotropic width sigma and common
    forward wave number kz; they start at z0 = 8 sigma so the z > 0
    truncation is negligible. The strips partition [-extent, extent] in x.
    """
    if separation < 0 or sigma <= 0 or extent <= 0:
        raise ConfigInvalid(
            "separation must be >= 0; sigma and extent must be positive", field="two_slit"
        )
    if strips < 2:
        raise ConfigInvalid("need at least 2 strips", field="two_slit.strips")
    from .simplexwalk import PairTransfer

    z0 = 8.0 * sigma
    array = strip_array(strips, extent, 8.0 * sigma)
    wave = WaveFunction(
        [
            GaussianPacket(
                center=(-separation / 2.0, 0.0, z0),
                sigma=(sigma, sigma, sigma),
                k=(0.0, 0.0, kz),
            ),
            GaussianPacket(
                center=(separation / 2.0, 0.0, z0),
                sigma=(sigma, sigma, sigma),
                k=(0.0, 0.0, kz),
            ),
        ]
    )
    return Scenario(
        name=f"two_slit(separation={separation:g}, sigma={sigma:g}, kz={kz:g}, "
        f"strips={strips}, extent={extent:g})",
        array=array,
        wave=wave,
        kernel=kernel if kernel is not None else PairTransfer(0.05),
        walks=walks,
        master_seed=master_seed,
        quadrature=quadrature,
    )
