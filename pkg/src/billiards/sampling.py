"""Deterministic random sampling for scans.

Draws come from a splitmix64 stream so that any implementation can
reproduce a scan from its recorded seed.  The update rule, written out:

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    z = z XOR (z >> 31)
    uniform = (z >> 11) * 2^-53          # in [0, 1)
"""

from __future__ import annotations

import math

import numpy as np

from .billmap import BoundaryCoord, chart_to_line
from .supportfn import SupportSpec, eval_jet

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z = z ^ (z >> 31)
        return z

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


def scan_starts(spec: SupportSpec, profile, n: int, seed: int):
    """n seeded start lines inside the region below the invariant curve.

    Per start, in stream order: u1 then u2; psi = 2 pi u1; the delta cap is
    d(psi) when a profile is attached, pi/4 otherwise; delta fills the cap
    as cap * (1e-6 + (1 - 2e-6) u2), keeping clear of the grazing floor.
    Returns (psi, delta, p, phi) arrays.
    """
    rng = SplitMix64(seed)
    psis = np.empty(n)
    deltas = np.empty(n)
    ps = np.empty(n)
    phis = np.empty(n)
    for i in range(n):
        u1 = rng.next_float()
        u2 = rng.next_float()
        psi = 2.0 * math.pi * u1
        cap = profile.jet(psi)[0] if profile is not None else math.pi / 4
        delta = cap * (1e-6 + (1.0 - 2e-6) * u2)
        line = chart_to_line(spec, BoundaryCoord(psi, delta))
        psis[i] = psi
        deltas[i] = delta
        ps[i] = line.p
        phis[i] = line.phi
    return psis, deltas, ps, phis


def random_interior_lines(spec: SupportSpec, n: int, seed: int,
                          margin: float = 0.05):
    """n seeded lines strictly inside the phase cylinder.

    phi = 2 pi u1; p interpolates the cylinder section
    (-h(phi + pi), h(phi)) with `margin` kept off both ends so finite
    difference stencils stay interior.  Returns (p, phi) arrays.
    """
    rng = SplitMix64(seed)
    ps = np.empty(n)
    phis = np.empty(n)
    for i in range(n):
        u1 = rng.next_float()
        u2 = rng.next_float()
        phi = 2.0 * math.pi * u1
        hi = eval_jet(spec, phi).h
        lo = -eval_jet(spec, phi + math.pi).h
        frac = margin + (1.0 - 2.0 * margin) * u2
        ps[i] = lo + frac * (hi - lo)
        phis[i] = phi
    return ps, phis
