"""Torus geometry: lattice sizes, site indexing, and toric distances."""

from dataclasses import dataclass

from .errors import ResourceLimitError

DEFAULT_AMPLITUDE_CAP = 2**24


@dataclass(frozen=True)
class LatticeSpec:
    """An l1 x l2 periodic lattice with bond dimension D and physical dimension d.

    Sites are (x, y) with x in [0, l1) (rows) and y in [0, l2) (columns); the
    successors of (x, y) are ((x+1) % l1, y) and (x, (y+1) % l2). Dense
    evaluation is allowed only while d**(l1*l2) stays within `cap`.
    """

    l1: int
    l2: int
    D: int
    d: int
    cap: int = DEFAULT_AMPLITUDE_CAP

    def __post_init__(self):
        if self.l1 < 2 or self.l2 < 2:
            raise ValueError("lattice sides must both be >= 2")
        if self.D < 2 or self.d < 2:
            raise ValueError("bond and physical dimensions must be >= 2")

    @property
    def n_sites(self):
        return self.l1 * self.l2

    @property
    def unitary_dim(self):
        return self.D * self.D * self.d

    def sites(self):
        for x in range(self.l1):
            for y in range(self.l2):
                yield (x, y)

    def amplitude_count(self):
        return self.d ** self.n_sites

    def check_cap(self):
        if self.amplitude_count() > self.cap:
            raise ResourceLimitError(
                f"d**(l1*l2) = {self.d}**{self.n_sites} exceeds the dense cap {self.cap}")

    def toric_manhattan(self, a, b):
        """Shortest |dx| + |dy| between sites, minimized over torus windings."""
        dx = abs(a[0] - b[0]) % self.l1
        dy = abs(a[1] - b[1]) % self.l2
        return min(dx, self.l1 - dx) + min(dy, self.l2 - dy)

    def monotone_distance(self, src, dst):
        """Steps from src to dst using only (x+1, y) / (x, y+1) moves (non-default metric)."""
        dx = (dst[0] - src[0]) % self.l1
        dy = (dst[1] - src[1]) % self.l2
        return dx + dy
