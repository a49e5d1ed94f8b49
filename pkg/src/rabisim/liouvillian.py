"""The dissipative generator of the dressed-state master equation.

Jump channels between dressed levels, the population-block rate matrix,
per-coherence complex decay rates, and the full vectorized superoperator.

Dissipator normalization: each channel contributes
gamma * { (1/2) L rho L^+ - (1/4) [L^+L, rho]_+ } with L = |to><from|,
so the population transfer rate per channel is gamma/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DressedLadder, DressedLevel, RateTable, frequency_gap

STANDARD_LABELS = ("gamma1", "gamma2", "gamma3", "gamma4", "gamma5", "gamma6",
                   "gamma7", "gamma8", "gamma_a", "gamma_b", "gamma_c", "gamma_e",
                   "generated")


@dataclass(frozen=True)
class JumpChannel:
    """A single irreversible transition source -> target at rate `rate`."""

    source: DressedLevel
    target: DressedLevel
    rate: float
    label: str

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"channel {self.label}: negative rate {self.rate}")
        if self.source == self.target:
            raise ValueError(f"channel {self.label}: source and target coincide")
        if self.label not in STANDARD_LABELS:
            raise ValueError(f"unknown channel label {self.label!r}")


def build_jump_channels(ladder: DressedLadder, rates: RateTable) -> list[JumpChannel]:
    """Enumerate the jump channels of the N-doublet model.

    N=1: the six channels coupling the first doublet and the ground state.
    N=2: the full twelve-channel scheme.
    N>2: pattern extension; each extra doublet n adds the four adjacent
    downward decays (reusing gamma4/6/7/8), the intra-doublet relaxation
    (gamma5) and its thermal upward partner at splitting 2*sqrt(n)*g.
    """
    lv = ladder.level
    channels = [
        JumpChannel(lv(1, "plus"), lv(0), rates.gamma1, "gamma1"),
        JumpChannel(lv(1, "minus"), lv(0), rates.gamma2, "gamma2"),
        JumpChannel(lv(1, "plus"), lv(1, "minus"), rates.gamma3, "gamma3"),
        JumpChannel(lv(0), lv(1, "plus"), rates.gamma_a, "gamma_a"),
        JumpChannel(lv(0), lv(1, "minus"), rates.gamma_b, "gamma_b"),
        JumpChannel(lv(1, "minus"), lv(1, "plus"), rates.gamma_c, "gamma_c"),
    ]
    if ladder.max_doublet >= 2:
        channels += [
            JumpChannel(lv(2, "plus"), lv(1, "plus"), rates.gamma4, "gamma4"),
            JumpChannel(lv(2, "plus"), lv(2, "minus"), rates.gamma5, "gamma5"),
            JumpChannel(lv(2, "plus"), lv(1, "minus"), rates.gamma6, "gamma6"),
            JumpChannel(lv(2, "minus"), lv(1, "plus"), rates.gamma7, "gamma7"),
            JumpChannel(lv(2, "minus"), lv(1, "minus"), rates.gamma8, "gamma8"),
            JumpChannel(lv(2, "minus"), lv(2, "plus"), rates.gamma_e, "gamma_e"),
        ]
    for n in range(3, ladder.max_doublet + 1):
        channels += [
            JumpChannel(lv(n, "plus"), lv(n - 1, "plus"), rates.gamma4, "generated"),
            JumpChannel(lv(n, "plus"), lv(n, "minus"), rates.gamma5, "generated"),
            JumpChannel(lv(n, "plus"), lv(n - 1, "minus"), rates.gamma6, "generated"),
            JumpChannel(lv(n, "minus"), lv(n - 1, "plus"), rates.gamma7, "generated"),
            JumpChannel(lv(n, "minus"), lv(n - 1, "minus"), rates.gamma8, "generated"),
            JumpChannel(lv(n, "minus"), lv(n, "plus"), rates.intra_doublet_up(n), "generated"),
        ]
    return channels


class ChannelSet:
    """Channel list with (source, target) -> rate lookup and out-rate sums."""

    def __init__(self, channels: list[JumpChannel]):
        self.channels = tuple(channels)
        self._rate = {}
        self._out = {}
        for ch in channels:
            key = (ch.source, ch.target)
            self._rate[key] = self._rate.get(key, 0.0) + ch.rate
            self._out[ch.source] = self._out.get(ch.source, 0.0) + ch.rate

    def rate(self, source: DressedLevel, target: DressedLevel) -> float:
        return self._rate.get((source, target), 0.0)

    def out(self, level: DressedLevel) -> float:
        """Total rate leaving `level`."""
        return self._out.get(level, 0.0)

    def __len__(self) -> int:
        return len(self.channels)


def coherence_decay_rate(a: DressedLevel, b: DressedLevel, channels: ChannelSet) -> complex:
    """Eigenvalue of the coherence |a><b|: -i(W_a - W_b) - (out(a)+out(b))/4."""
    if a == b:
        raise ValueError("populations are handled by the rate-matrix block")
    return -1j * frequency_gap(a, b) - 0.25 * (channels.out(a) + channels.out(b))


def population_generator(ladder: DressedLadder, channels: ChannelSet) -> np.ndarray:
    """Rate matrix G for the dressed-basis populations, d/dt p = G p.

    Per channel: G[to,from] += gamma/2 and G[from,from] -= gamma/2, so the
    columns sum to zero and the trace is conserved.
    """
    dim = ladder.dimension
    g_matrix = np.zeros((dim, dim))
    for ch in channels.channels:
        s = ladder.index_of(ch.source)
        t = ladder.index_of(ch.target)
        g_matrix[t, s] += 0.5 * ch.rate
        g_matrix[s, s] -= 0.5 * ch.rate
    return g_matrix


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Row-major (C order) vectorization; index of entry (a,b) is a*D + b."""
    return np.asarray(rho, dtype=complex).reshape(-1)


def unvectorize(vec: np.ndarray) -> np.ndarray:
    size = len(vec)
    dim = int(round(size**0.5))
    if dim * dim != size:
        raise ValueError(f"length {size} is not a perfect square")
    return np.asarray(vec, dtype=complex).reshape(dim, dim)


def superoperator(ladder: DressedLadder, channels: ChannelSet) -> np.ndarray:
    """Full vectorized generator acting on vec(rho), row-major convention.

    L = -i(W x I - I x W) + sum_ch gamma [ (1/2) E x E - (1/4)(E'E x I + I x E'E) ]
    with E = |to><from|. In the dressed basis this is block diagonal: one
    (2N+1)-dimensional population block plus a decoupled scalar per coherence.

    The commutator part is diagonal with entries -i*(W_a - W_b); the gaps are
    evaluated in decomposed form (see frequency_gap) so intra-doublet
    frequencies keep full precision next to the omega0 scale.
    """
    dim = ladder.dimension
    eye = np.eye(dim)
    gaps = np.array([frequency_gap(a, b) for a in ladder.levels for b in ladder.levels])
    sup = np.diag(-1j * gaps).astype(complex)
    for ch in channels.channels:
        s = ladder.index_of(ch.source)
        t = ladder.index_of(ch.target)
        jump = np.zeros((dim, dim))
        jump[t, s] = 1.0
        number = np.zeros((dim, dim))
        number[s, s] = 1.0
        sup += ch.rate * (0.5 * np.kron(jump, jump)
                          - 0.25 * (np.kron(number, eye) + np.kron(eye, number)))
    return sup


@dataclass(frozen=True)
class Liouvillian:
    """Assembled generator for one ladder and channel set.

    population_block is the real rate matrix G on the dressed populations;
    every off-diagonal matrix element of rho is an eigendirection whose
    eigenvalue comes from `coherence_rate`.
    """

    ladder: DressedLadder
    channels: ChannelSet
    population_block: np.ndarray
    superop: np.ndarray

    @property
    def dimension(self) -> int:
        return self.ladder.dimension

    def coherence_rate(self, a: DressedLevel, b: DressedLevel) -> complex:
        return coherence_decay_rate(a, b, self.channels)

    def coherence_pairs(self) -> list[tuple[int, int]]:
        dim = self.dimension
        return [(a, b) for a in range(dim) for b in range(dim) if a != b]

    def coherence_rates(self) -> np.ndarray:
        """Eigenvalues of all ordered coherences, in coherence_pairs order."""
        levels = self.ladder.levels
        return np.array([self.coherence_rate(levels[a], levels[b])
                         for a, b in self.coherence_pairs()])

    def max_total_rate(self) -> float:
        return max((self.channels.out(lv) for lv in self.ladder.levels), default=0.0)


def build_liouvillian(ladder: DressedLadder, rates: RateTable) -> Liouvillian:
    channels = ChannelSet(build_jump_channels(ladder, rates))
    return Liouvillian(ladder, channels, population_generator(ladder, channels),
                       superoperator(ladder, channels))
