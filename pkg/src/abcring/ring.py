"""Configurations of the ABC model on a ring and their elementary operations.

The ring has ``L = N_A + N_B + N_C = 2N + 1`` sites labelled ``-N..N``.  Site
``j`` is stored at index ``j + N`` of a contiguous ``int8`` array holding the
species code (A=0, B=1, C=2).  Edge ``k`` joins sites ``k`` and ``k + 1``; the
edge leaving site ``N`` wraps around to site ``-N``.

A swap across an edge carrying ``(a, a+1)`` (cyclic order A, B, C) happens at
rate ``exp(-beta)`` and such an edge is called red.  The reversed pair is blue
and swaps at rate one.  Equal species form a black edge that never swaps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction

import numpy as np


class Species(IntEnum):
    A = 0
    B = 1
    C = 2

    def succ(self) -> "Species":
        return Species((self + 1) % 3)

    def pred(self) -> "Species":
        return Species((self + 2) % 3)

    def __str__(self) -> str:
        return self.name


class EdgeClass(IntEnum):
    BLACK = 0
    RED = 1
    BLUE = 2


class ParamError(ValueError):
    """Invalid model parameters.  ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


@dataclass(frozen=True)
class ModelParams:
    """Block sizes and inverse temperature.

    ``beta`` only enters through the swap rates; the purely combinatorial
    helpers ignore it.
    """

    n_a: int
    n_b: int
    n_c: int
    beta: float = 0.0

    def __post_init__(self):
        for name in ("n_a", "n_b", "n_c"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ParamError(name, "must be a positive integer")
        if (self.n_a + self.n_b + self.n_c) % 2 == 0:
            raise ParamError("n_a+n_b+n_c", "ring size must be odd")
        b = self.beta
        if isinstance(b, bool) or not isinstance(b, (int, float, np.floating)):
            raise ParamError("beta", "must be a real number")
        if not math.isfinite(b) or b < 0:
            raise ParamError("beta", "must be finite and nonnegative")

    @property
    def counts(self) -> tuple[int, int, int]:
        return (int(self.n_a), int(self.n_b), int(self.n_c))

    @property
    def ring_size(self) -> int:
        return sum(self.counts)

    @property
    def N(self) -> int:
        return (self.ring_size - 1) // 2

    @property
    def M(self) -> int:
        return min(self.counts)

    @property
    def M_star(self) -> int:
        return max(self.counts)

    @property
    def minimal_species(self) -> tuple[Species, ...]:
        return tuple(s for s in Species if self.counts[s] == self.M)

    @property
    def d(self) -> int:
        return len(self.minimal_species)

    @property
    def q(self) -> float:
        return math.exp(-self.beta)

    @property
    def theta_beta(self) -> float:
        return math.exp(self.M * self.beta) * self.N ** 2 / (2 * self.d)

    def with_beta(self, beta: float) -> "ModelParams":
        return ModelParams(self.n_a, self.n_b, self.n_c, beta)

    def require_metastable(self):
        if self.M < 3:
            raise ParamError("n_a,n_b,n_c", "smallest block must have at least 3 particles")

    def wrap(self, k: int) -> int:
        """Map an integer to its representative in -N..N."""
        return (int(k) + self.N) % self.ring_size - self.N

    def block_offsets(self) -> tuple[int, int, int]:
        """Offsets of the first site of the A, B and C blocks in the reference configuration."""
        a, b, _ = self.counts
        return (0, a, a + b)


_LETTERS = "ABC"


class RingConfig:
    """An immutable occupation of the ring.

    ``sites`` is the storage array (index ``j + N`` holds site ``j``).
    """

    __slots__ = ("params", "sites", "_key")

    def __init__(self, params: ModelParams, sites):
        arr = np.array(sites, dtype=np.int8)
        if arr.shape != (params.ring_size,):
            raise ValueError(f"expected {params.ring_size} sites, got {arr.shape}")
        if arr.min() < 0 or arr.max() > 2:
            raise ValueError("site codes must be 0, 1 or 2")
        counts = tuple(int(c) for c in np.bincount(arr, minlength=3))
        if counts != params.counts:
            raise ValueError(f"species counts {counts} differ from {params.counts}")
        arr.flags.writeable = False
        self.params = params
        self.sites = arr
        self._key = arr.tobytes()

    @classmethod
    def _trusted(cls, params: ModelParams, arr: np.ndarray) -> "RingConfig":
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.int8)
        arr.flags.writeable = False
        obj.params = params
        obj.sites = arr
        obj._key = arr.tobytes()
        return obj

    @property
    def key(self) -> bytes:
        return self._key

    def __getitem__(self, j: int) -> Species:
        return Species(int(self.sites[self.params.wrap(j) + self.params.N]))

    def __eq__(self, other) -> bool:
        return isinstance(other, RingConfig) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"RingConfig({self.render()!r})"

    def render(self) -> str:
        """Letters for sites -N..N with ``|`` written just before site 0."""
        n = self.params.N
        s = "".join(_LETTERS[c] for c in self.sites)
        return s[:n] + "|" + s[n:]

    @classmethod
    def parse(cls, params: ModelParams, text: str) -> "RingConfig":
        if text.count("|") != 1:
            raise ValueError("rendering must contain exactly one '|' marking site 0")
        left, right = text.split("|")
        if len(left) != params.N:
            raise ValueError(f"site 0 marker must follow {params.N} letters")
        try:
            codes = [_LETTERS.index(ch) for ch in left + right]
        except ValueError:
            raise ValueError("letters must be A, B or C") from None
        return cls(params, codes)


def make_omega(params: ModelParams, k: int = 0) -> RingConfig:
    """Segregated configuration with the A block starting at site ``k``.

    Site ``j`` holds A, B or C according to the offset ``(j - k) mod L``; the
    modular reading keeps the three blocks contiguous when ``N_A + N_B > N + 1``.
    """
    L, n = params.ring_size, params.N
    a, b, _ = params.counts
    m = (np.arange(-n, n + 1) - k) % L
    arr = np.where(m < a, 0, np.where(m < a + b, 1, 2)).astype(np.int8)
    return RingConfig._trusted(params, arr)


def shift(config: RingConfig, k: int) -> RingConfig:
    """Rotation ``(Theta^k w)(i) = w(i - k)``."""
    return RingConfig._trusted(config.params, np.roll(config.sites, int(k)))


def transpose(config: RingConfig, i: int, j: int) -> RingConfig:
    """Exchange the particles at sites ``i`` and ``j``; ``i == j`` is the identity."""
    p = config.params
    a, b = p.wrap(i) + p.N, p.wrap(j) + p.N
    arr = config.sites.copy()
    arr[a], arr[b] = arr[b], arr[a]
    return RingConfig._trusted(p, arr)


def swap_edge(config: RingConfig, k: int) -> RingConfig:
    return transpose(config, k, k + 1)


def pair_class(x: int, y: int) -> EdgeClass:
    if x == y:
        return EdgeClass.BLACK
    return EdgeClass.RED if (x + 1) % 3 == y else EdgeClass.BLUE


def edge_classes(config: RingConfig) -> np.ndarray:
    """Class code of every edge in storage order (edge ``k`` at index ``k + N``)."""
    s = config.sites
    t = np.roll(s, -1)
    out = np.zeros(s.shape, dtype=np.int8)
    out[(s + 1) % 3 == t] = EdgeClass.RED
    out[(t + 1) % 3 == s] = EdgeClass.BLUE
    return out


def classify_edge(config: RingConfig, k: int) -> EdgeClass:
    return pair_class(int(config[k]), int(config[k + 1]))


def jump_rate(config: RingConfig, k: int, beta: float) -> float:
    c = classify_edge(config, k)
    if c is EdgeClass.RED:
        return math.exp(-beta)
    return 1.0 if c is EdgeClass.BLUE else 0.0


def edge_counts(config: RingConfig) -> tuple[int, int]:
    """Numbers of red and blue edges."""
    c = edge_classes(config)
    return int(np.count_nonzero(c == EdgeClass.RED)), int(np.count_nonzero(c == EdgeClass.BLUE))


def red_edges(config: RingConfig) -> list[int]:
    n = config.params.N
    return [int(e) - n for e in np.flatnonzero(edge_classes(config) == EdgeClass.RED)]


def blue_edges(config: RingConfig) -> list[int]:
    n = config.params.N
    return [int(e) - n for e in np.flatnonzero(edge_classes(config) == EdgeClass.BLUE)]


def total_rate(config: RingConfig, beta: float) -> float:
    r, b = edge_counts(config)
    return b + r * math.exp(-beta)


def in_omega0(config: RingConfig) -> bool:
    """Segregated iff there are no blue edges and exactly three red ones."""
    return edge_counts(config) == (3, 0)


def omega_anchor(config: RingConfig) -> int | None:
    """Return ``k`` with ``config == omega_k``, or None."""
    if not in_omega0(config):
        return None
    s = config.sites
    starts = np.flatnonzero((s == 0) & (np.roll(s, 1) != 0))
    return config.params.wrap(int(starts[0]) - config.params.N)


def hamiltonian_scaled(config: RingConfig) -> int:
    """``L * H``: the integer sum of ``i`` over red pairs at clockwise distance ``i``."""
    s = config.sites.astype(np.int64)
    total = 0
    for i in range(1, s.size):
        total += i * int(np.count_nonzero((s + 1) % 3 == np.roll(s, -i)))
    return total


def hamiltonian(config: RingConfig) -> Fraction:
    return Fraction(hamiltonian_scaled(config), config.params.ring_size)
