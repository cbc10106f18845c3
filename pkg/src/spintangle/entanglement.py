"""Makhlin invariants, one-tangles, and iteration-count search.

For the conditional gate U = |0><0| x R_{n0}(phi0) + |1><1| x R_{n1}(phi1)
the local invariants reduce to closed forms in the branch angles and the
axis dot product n01 = n0 . n1:

    G1 = (cos(phi0/2) cos(phi1/2) + n01 sin(phi0/2) sin(phi1/2))^2
    G2 = 1 + n01 sin(phi0) sin(phi1)
           + 2 (cos^2(phi0/2) cos^2(phi1/2) + n01^2 sin^2(phi0/2) sin^2(phi1/2))

Both are insensitive to the [0, pi] angle convention, so iterated values use
the raw accumulated angles N*phi directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spin_model import ConditionalRotation

MAX_PAIR_TANGLE = 2.0 / 9.0


def _half_angles(rot: ConditionalRotation, N: int) -> tuple[float, float, float]:
    """Accumulated half angles (N*phi0/2, N*phi1/2) and the raw axis dot."""
    out = []
    for r in (rot.r0, rot.r1):
        s = float(np.linalg.norm(r.v))
        out.append(N * math.atan2(s, r.w))
    s0 = float(np.linalg.norm(rot.r0.v))
    s1 = float(np.linalg.norm(rot.r1.v))
    if s0 < 1e-12 or s1 < 1e-12:
        n01 = 1.0
    else:
        n01 = float(rot.r0.v @ rot.r1.v) / (s0 * s1)
    return out[0], out[1], n01


def makhlin_g1(rot: ConditionalRotation, N: int) -> float:
    """First Makhlin invariant of the iterated conditional gate, in [0, 1]."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if N == 0:
        return 1.0
    h0, h1, n01 = _half_angles(rot, N)
    m = math.cos(h0) * math.cos(h1) + n01 * math.sin(h0) * math.sin(h1)
    return min(1.0, m * m)


def makhlin_g2(rot: ConditionalRotation, N: int) -> float:
    """Second Makhlin invariant, in [1, 3]."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if N == 0:
        return 3.0
    h0, h1, n01 = _half_angles(rot, N)
    g2 = (1.0 + n01 * math.sin(2.0 * h0) * math.sin(2.0 * h1)
          + 2.0 * (math.cos(h0) ** 2 * math.cos(h1) ** 2
                   + n01 ** 2 * math.sin(h0) ** 2 * math.sin(h1) ** 2))
    return min(3.0, max(1.0, g2))


def entangling_power(rot: ConditionalRotation, N: int) -> float:
    """Two-qubit entangling power (2/9)(1 - |G1|)."""
    return MAX_PAIR_TANGLE * (1.0 - abs(makhlin_g1(rot, N)))


def nuclear_one_tangle(rot: ConditionalRotation, N: int,
                       scaled: bool = False) -> float:
    """Average one-tangle of this nucleus against the rest, (2/9)(1 - G1)."""
    val = MAX_PAIR_TANGLE * (1.0 - makhlin_g1(rot, N))
    return val / MAX_PAIR_TANGLE if scaled else val


def electron_one_tangle(rots: list[ConditionalRotation], N: int,
                        scaled: bool = False) -> float:
    """Average electron one-tangle, 1/3 - 3^-n prod_i (1 + 2 G1_i)."""
    if not rots:
        raise ValueError("need at least one nuclear rotation")
    n = len(rots) + 1
    prod = 1.0
    for rot in rots:
        prod *= 1.0 + 2.0 * makhlin_g1(rot, N)
    val = 1.0 / 3.0 - prod / 3.0 ** n
    return val / (1.0 / 3.0) if scaled else val


def one_tangle_bound(n: int) -> float:
    """Upper bound of the single-qubit one-tangle in an n-qubit register.

    Enumerates all 2^n secondary bipartitions of the purification; each
    contributes the inverse of the smaller effective dimension.
    """
    if n < 2:
        raise ValueError("need n >= 2 qubits")
    total = 0.0
    for size in range(n + 1):
        dim = min(2 ** (n - 1 + size), 2 ** (1 + n - size))
        total += math.comb(n, size) / dim
    return 1.0 - (2.0 / 3.0) ** n * total


@dataclass(frozen=True)
class TangleProfile:
    """Per-nucleus G1 values with derived tangles for one (t, N) point."""

    g1_values: tuple
    scaled: bool = False

    @property
    def nuclear_tangles(self) -> tuple:
        scale = 1.0 if self.scaled else MAX_PAIR_TANGLE
        return tuple(scale * (1.0 - g) for g in self.g1_values)

    @property
    def electron_tangle(self) -> float:
        n = len(self.g1_values) + 1
        prod = 1.0
        for g in self.g1_values:
            prod *= 1.0 + 2.0 * g
        val = 1.0 / 3.0 - prod / 3.0 ** n
        return 3.0 * val if self.scaled else val


def tangle_profile(rots: list[ConditionalRotation], N: int,
                   scaled: bool = False) -> TangleProfile:
    return TangleProfile(tuple(makhlin_g1(r, N) for r in rots), scaled)


# ---------------------------------------------------------------------------
# iteration-count search

G1_MAXIMAL_THRESHOLD = 0.05


def g1_over_iterations(rot: ConditionalRotation, N_max: int) -> np.ndarray:
    """Vector of G1 values for N = 1..N_max (index 0 is N=1)."""
    h0u, h1u, n01 = _half_angles(rot, 1)
    n = np.arange(1, N_max + 1)
    m = (np.cos(n * h0u) * np.cos(n * h1u)
         + n01 * np.sin(n * h0u) * np.sin(n * h1u))
    return np.minimum(1.0, m * m)


def optimal_iterations(rot: ConditionalRotation, kappa_range=None,
                       N_max: int = 300,
                       threshold: float = G1_MAXIMAL_THRESHOLD) -> list[int]:
    """Iteration counts with nearly maximal one-tangle (G1 below threshold).

    Membership is decided by direct evaluation of G1 at every integer
    N <= N_max, which subsumes the closed-form minima estimates (see
    analytic_iteration_candidates) and also covers unequal-angle sequences.
    kappa_range, when given, restricts results to the corresponding angle
    revolutions: N*(phi0+phi1)/2 within [min, max+1] half-turn windows.
    """
    g1 = g1_over_iterations(rot, N_max)
    hits = np.nonzero(g1 < threshold)[0] + 1
    if kappa_range is not None:
        kmin, kmax = min(kappa_range), max(kappa_range)
        mean_angle = (rot.phi0 + rot.phi1) / 2.0
        if mean_angle > 0:
            # the kappa-th tangle maximum sits near N*mean_angle = kappa*pi
            lo = (kmin - 0.5) * math.pi / mean_angle
            hi = (kmax + 0.5) * math.pi / mean_angle
            hits = hits[(hits >= lo) & (hits <= hi)]
    return [int(v) for v in hits]


def analytic_iteration_candidates(rot: ConditionalRotation,
                                  kappa_range=range(1, 11),
                                  angle_tol: float = 1e-9) -> list[int]:
    """Closed-form G1-minimum estimates for equal-angle sequences.

    Valid when phi0 = phi1 (CPMG and symmetrized UDD3).  For n01 < 0 the
    minima sit at N = round[(2 kappa pi -/+ 2 atan sqrt(-1/n01)) / phi0]
    (offset by -pi between the two families); for n01 near 0 they follow
    N = round[(2 kappa + 1) pi / phi0].  For n01 > 0 G1 cannot vanish and
    no candidates are produced.
    """
    phi, phi1 = rot.phi0, rot.phi1
    n01 = rot.axis_dot
    if abs(phi - phi1) > angle_tol:
        raise ValueError("analytic minima require phi0 = phi1")
    if phi <= 0:
        return []
    out: set[int] = set()
    if n01 < -1e-9:
        delta = 2.0 * math.atan(math.sqrt(-1.0 / n01))
        for kappa in kappa_range:
            for val in ((2.0 * kappa * math.pi - delta) / phi,
                        ((2.0 * kappa - 1.0) * math.pi + delta) / phi):
                n = round(val)
                if n >= 1:
                    out.add(n)
    elif abs(n01) <= 1e-9:
        for kappa in kappa_range:
            n = round((2.0 * kappa + 1.0) * math.pi / phi)
            if n >= 1:
                out.add(n)
    return sorted(out)


def udd4_jump_locations(rot: ConditionalRotation, N_max: int) -> list[int]:
    """Predicted N where the iterated axis dot product jumps (unequal angles).

    The jumps cluster around N = round[2 kappa pi / (phi0 + phi1)]; sequences
    with identical branch angles have none.
    """
    h0u, h1u, _ = _half_angles(rot, 1)
    phi_sum = 2.0 * (min(h0u, math.pi - h0u) + min(h1u, math.pi - h1u))
    if abs(h0u - h1u) < 1e-12 or phi_sum <= 0:
        return []
    out = []
    kappa = 1
    while True:
        n = round(2.0 * kappa * math.pi / phi_sum)
        if n > N_max:
            break
        if n >= 1 and (not out or out[-1] != n):
            out.append(n)
        kappa += 1
    return out
