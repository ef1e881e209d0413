"""Seed-keyed hopping of the Gaussian mixture parameters, one mixture per sub-region.

The random stream is BLAKE2b keyed with the 256-bit secret, run in counter mode.
Every draw consumes one 64-bit word.  The draw order is part of the format:

    for each sub-region n (row-major):
        for m in 0..M:
            for axis in (h, v):
                sign of mu, alpha, sign of sigma, beta
        M + 1 uniforms u, normalised to the mixture weights phi

Changing it changes every plan derived from a given key.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .geometry import FaceRegion
from .kernel import MAX_SUPPORT, KernelGrid, KernelSpec, discretize

PLAN_FORMAT_VERSION = 1
SEED_BYTES = 32

# sigma floor: relative to the optimal sigma, and an absolute minimum in px
SIGMA_FLOOR_REL = 0.05
SIGMA_FLOOR_PX = 0.3


def parse_seed(text: str) -> bytes:
    """Hex string (up to 64 digits, optional 0x prefix) to a 32-byte key."""
    text = text.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    if not text or len(text) > 2 * SEED_BYTES:
        raise ConfigError("seed must be 1 to 64 hex digits")
    try:
        value = int(text, 16)
    except ValueError as exc:
        raise ConfigError("seed is not valid hex") from exc
    return value.to_bytes(SEED_BYTES, "big")


def seed_fingerprint(seed: bytes) -> str:
    """Short non-reversible tag for reports; never the key itself."""
    return hashlib.sha256(b"ahgmm-seed-id" + seed).hexdigest()[:12]


class KeyedStream:
    """Deterministic stream of 64-bit words from a secret key."""

    _WORDS_PER_BLOCK = 8

    def __init__(self, key: bytes, domain: bytes = b"ahgmm/plan/v1"):
        if len(key) != SEED_BYTES:
            raise ConfigError(f"key must be {SEED_BYTES} bytes")
        self._key = key
        self._domain = domain
        self._counter = 0
        self._buf: list[int] = []

    def _refill(self):
        h = hashlib.blake2b(self._domain + self._counter.to_bytes(8, "little"),
                            key=self._key, digest_size=64)
        self._counter += 1
        d = h.digest()
        self._buf = [int.from_bytes(d[i:i + 8], "little") for i in range(56, -1, -8)]

    def word(self) -> int:
        if not self._buf:
            self._refill()
        return self._buf.pop()

    def uniform(self) -> float:
        """Uniform on [0, 1) with 53-bit resolution."""
        return (self.word() >> 11) * 2.0 ** -53

    def sign(self) -> float:
        return 1.0 if self.word() & 1 == 0 else -1.0


@dataclass(frozen=True)
class HoppingConfig:
    q_h: int = 4
    q_v: int = 4
    num_supplementary: int = 1
    gamma: float = 0.5
    seed: bytes = field(default=bytes(SEED_BYTES), repr=False)

    def __post_init__(self):
        if self.q_h < 1 or self.q_v < 1:
            raise ConfigError("sub-region size must be at least 1")
        if self.num_supplementary < 0:
            raise ConfigError("number of supplementary kernels cannot be negative")
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must lie in (0, 1]")
        if len(self.seed) != SEED_BYTES:
            raise ConfigError(f"seed must be {SEED_BYTES} bytes")


class Block(NamedTuple):
    """Sub-region rectangle in face-local coordinates."""

    x: int
    y: int
    width: int
    height: int


def partition(face: FaceRegion, cfg: HoppingConfig) -> list[Block]:
    blocks = []
    for y in range(0, face.height, cfg.q_v):
        for x in range(0, face.width, cfg.q_h):
            blocks.append(Block(x, y, min(cfg.q_h, face.width - x), min(cfg.q_v, face.height - y)))
    return blocks


def region_index_map(width: int, height: int, cfg: HoppingConfig) -> np.ndarray:
    """(height, width) array holding the row-major block index of every pixel."""
    per_row = math.ceil(width / cfg.q_h)
    rows = np.arange(height) // cfg.q_v
    cols = np.arange(width) // cfg.q_h
    return rows[:, None] * per_row + cols[None, :]


@dataclass(frozen=True, eq=False)
class HoppingPlan:
    """Per-region mixture parameters.

    Arrays are indexed ``[n, m, j]`` with ``j = 0`` horizontal and ``j = 1``
    vertical; ``phi`` is ``[n, m]``.
    """

    sigma_o: KernelSpec
    q_h: int
    q_v: int
    gamma: float
    mu: np.ndarray
    sigma: np.ndarray
    phi: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    sign_mu: np.ndarray
    sign_sigma: np.ndarray

    @property
    def n_regions(self) -> int:
        return self.mu.shape[0]

    @property
    def num_components(self) -> int:
        return self.mu.shape[1]

    def component(self, n: int, m: int) -> KernelSpec:
        return KernelSpec(float(self.mu[n, m, 0]), float(self.mu[n, m, 1]),
                          float(self.sigma[n, m, 0]), float(self.sigma[n, m, 1]))

    def to_dict(self) -> dict:
        so = self.sigma_o
        return {
            "format": "ahgmm-plan",
            "version": PLAN_FORMAT_VERSION,
            "sigma_o": [so.sigma_h, so.sigma_v],
            "q": [self.q_h, self.q_v],
            "gamma": self.gamma,
            "n_regions": self.n_regions,
            "num_components": self.num_components,
            **{name: getattr(self, name).tolist()
               for name in ("mu", "sigma", "phi", "alpha", "beta", "sign_mu", "sign_sigma")},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HoppingPlan":
        if d.get("format") != "ahgmm-plan" or d.get("version") != PLAN_FORMAT_VERSION:
            raise ConfigError("not a version-1 hopping plan")
        arrays = {name: np.asarray(d[name], dtype=np.float64)
                  for name in ("mu", "sigma", "phi", "alpha", "beta", "sign_mu", "sign_sigma")}
        return cls(KernelSpec.centered(*d["sigma_o"]), int(d["q"][0]), int(d["q"][1]),
                   float(d["gamma"]), **arrays)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "HoppingPlan":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def derive_plan(sigma_o: KernelSpec, n_regions: int, cfg: HoppingConfig,
                zero_hops: bool = False) -> HoppingPlan:
    """Draw the hopped parameters for ``n_regions`` sub-regions.

    ``zero_hops`` forces every alpha and beta to 0 (the stream is still
    consumed in the same order); with no supplementary kernels the plan then
    reproduces the optimal kernel everywhere.
    """
    if n_regions < 1:
        raise ValueError("need at least one sub-region")
    n_comp = cfg.num_supplementary + 1
    base = np.array([sigma_o.sigma_h, sigma_o.sigma_v])
    floor = np.maximum(SIGMA_FLOOR_REL * base, SIGMA_FLOOR_PX)
    shape = (n_regions, n_comp, 2)
    alpha, beta = np.zeros(shape), np.zeros(shape)
    s_mu, s_sigma = np.zeros(shape), np.zeros(shape)
    phi = np.zeros((n_regions, n_comp))
    stream = KeyedStream(cfg.seed)
    for n in range(n_regions):
        for m in range(n_comp):
            for j in range(2):
                s_mu[n, m, j] = stream.sign()
                alpha[n, m, j] = stream.uniform()
                s_sigma[n, m, j] = stream.sign()
                beta[n, m, j] = stream.uniform()
        u = np.array([stream.uniform() for _ in range(n_comp)])
        total = u.sum()
        phi[n] = u / total if total > 0 else 1.0 / n_comp
    if zero_hops:
        alpha[:] = 0.0
        beta[:] = 0.0
    scale = np.ones(n_comp)
    scale[1:] = cfg.gamma
    ref = base[None, None, :] * scale[None, :, None]
    mu = s_mu * alpha * ref
    sigma = np.maximum((1.0 + s_sigma * beta) * ref, floor[None, None, :])
    return HoppingPlan(sigma_o, cfg.q_h, cfg.q_v, cfg.gamma, mu, sigma, phi,
                       alpha, beta, s_mu, s_sigma)


def build_mixtures(plan: HoppingPlan, max_support: int = MAX_SUPPORT) -> list[KernelGrid]:
    """Weighted sum of each region's component grids on their union support."""
    mixtures = []
    for n in range(plan.n_regions):
        grids = [discretize(plan.component(n, m), max_support) for m in range(plan.num_components)]
        sv = max(g.support_v for g in grids)
        sh = max(g.support_h for g in grids)
        acc = np.zeros((sv, sh))
        for m, g in enumerate(grids):
            acc += plan.phi[n, m] * g.padded(sv, sh)
        mixtures.append(KernelGrid(acc))
    return mixtures
