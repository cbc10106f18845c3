"""Multi-spin gate synthesis and register utilities.

Covers the common-iteration intersection search, the constrained register
optimization over (unit time, iteration count), unwanted-tangle
minimization, random-ensemble generation, hyperfine-to-position inversion,
and bath-size gate-error studies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import constants
from .entanglement import (G1_MAXIMAL_THRESHOLD, g1_over_iterations,
                           optimal_iterations)
from .fidelity import RegisterPartition, target_subspace_fidelity
from .spin_model import (ConditionalRotation, ElectronQubitSpec,
                         NuclearSpinParams, PulseSequence, build_sequence,
                         iterate, resonance_time, unit_propagator)


# ---------------------------------------------------------------------------
# common-iteration search


def find_common_iterations(spins: list[ConditionalRotation], N_max: int,
                           threshold: float = G1_MAXIMAL_THRESHOLD
                           ) -> tuple[int, list[int]]:
    """Find an iteration count entangling as many spins as possible.

    Each spin contributes the set of N with nearly maximal one-tangle at the
    shared unit time.  The first spin's set anchors a running intersection;
    spins whose sets do not meet the current intersection are dropped.
    Returns (N*, indices of participating spins); N* is the surviving N with
    the lowest mean G1 over participants (smallest N on ties).
    """
    if len(spins) < 2:
        raise ValueError("need at least two spins")
    sets = [set(optimal_iterations(r, N_max=N_max, threshold=threshold))
            for r in spins]
    if not sets[0]:
        raise ValueError("anchor spin has no entangling iteration count "
                         "at this unit time")
    common = set(sets[0])
    participants = [0]
    for j in range(1, len(spins)):
        nxt = common & sets[j]
        if nxt:
            common = nxt
            participants.append(j)
    candidates = sorted(common)
    g1 = np.zeros(len(candidates))
    for j in participants:
        prof = g1_over_iterations(spins[j], max(candidates))
        g1 += prof[np.asarray(candidates) - 1]
    best = candidates[int(np.argmin(g1))]
    return best, participants


# ---------------------------------------------------------------------------
# vectorized per-unit rotations (for grid scans)


def _vector_unit_quaternions(A: np.ndarray, B: np.ndarray, omega_L: float,
                             electron: ElectronQubitSpec,
                             spacings, t: float):
    """Per-spin branch quaternions of one unit, vectorized over a register."""

    def seg(s: float):
        wz = omega_L + s * A
        wx = s * B
        w = np.hypot(wz, wx)
        half = w * np.multiply.outer(np.asarray(spacings), np.full_like(A, t)) / 2.0
        return w, wx / w, wz / w, half  # axis is (nx, 0, nz)

    out = []
    for order in ((electron.s0, electron.s1), (electron.s1, electron.s0)):
        _, nx_a, nz_a, half_a = seg(order[0])
        _, nx_b, nz_b, half_b = seg(order[1])
        w = np.ones_like(A)
        vx = np.zeros_like(A)
        vy = np.zeros_like(A)
        vz = np.zeros_like(A)
        for i in range(len(spacings)):
            if i % 2 == 0:
                c, s_ = np.cos(half_a[i]), np.sin(half_a[i])
                ux, uz = nx_a, nz_a
            else:
                c, s_ = np.cos(half_b[i]), np.sin(half_b[i])
                ux, uz = nx_b, nz_b
            # left-multiply by the segment quaternion (c, s*(ux, 0, uz))
            w2 = c * w - s_ * (ux * vx + uz * vz)
            vx2 = c * vx + s_ * (ux * w - uz * vy)
            vy2 = c * vy + s_ * (uz * vx - ux * vz)
            vz2 = c * vz + s_ * (uz * w + ux * vy)
            w, vx, vy, vz = w2, vx2, vy2, vz2
        out.append((w, vx, vy, vz))
    return out


def _scaled_tangle_matrix(quats, N_values: np.ndarray) -> np.ndarray:
    """Scaled one-tangles, shape (n_spins, n_N), from branch quaternions."""
    (w0, x0, y0, z0), (w1, x1, y1, z1) = quats
    s0 = np.sqrt(x0 ** 2 + y0 ** 2 + z0 ** 2)
    s1 = np.sqrt(x1 ** 2 + y1 ** 2 + z1 ** 2)
    half0 = np.arctan2(s0, w0)
    half1 = np.arctan2(s1, w1)
    dot = x0 * x1 + y0 * y1 + z0 * z1
    safe = np.maximum(s0 * s1, 1e-300)
    n01 = np.where((s0 < 1e-12) | (s1 < 1e-12), 1.0, dot / safe)
    h0 = np.multiply.outer(half0, N_values)
    h1 = np.multiply.outer(half1, N_values)
    m = np.cos(h0) * np.cos(h1) + n01[:, None] * np.sin(h0) * np.sin(h1)
    return 1.0 - np.minimum(1.0, m * m)


# ---------------------------------------------------------------------------
# constrained register optimization


@dataclass(frozen=True)
class DesignConstraints:
    max_gate_time: float = 1.5e-3
    target_tangle_min: float = 0.8
    unwanted_tangle_max: float = 0.14
    unwanted_tangle_mean_max: float = 0.1
    time_window: float = 0.25e-6
    k_range: tuple = (1, 2, 3, 4, 5)
    N_max: int = 300

    def __post_init__(self) -> None:
        if not (0 < self.target_tangle_min <= 1):
            raise ValueError("target_tangle_min must be in (0, 1]")
        for name in ("unwanted_tangle_max", "unwanted_tangle_mean_max"):
            if not (0 <= getattr(self, name) < 1):
                raise ValueError(f"{name} must be in [0, 1)")
        if self.max_gate_time <= 0 or self.time_window <= 0 or self.N_max < 1:
            raise ValueError("time/iteration bounds must be positive")


@dataclass(frozen=True)
class GateDesign:
    unit_time: float
    iterations: int
    k: int
    anchor_label: str
    target_labels: tuple
    target_tangles: tuple          # scaled, same order as target_labels
    unwanted_tangles: dict         # label -> scaled tangle
    gate_time: float
    gate_error: float

    @property
    def mean_target_tangle(self) -> float:
        return float(np.mean(self.target_tangles))

    @property
    def mean_unwanted_tangle(self) -> float:
        if not self.unwanted_tangles:
            return 0.0
        return float(np.mean(list(self.unwanted_tangles.values())))


def _evaluate_candidate(A, B, omega_L, electron, spacings, t, N_values):
    quats = _vector_unit_quaternions(A, B, omega_L, electron, spacings, t)
    return _scaled_tangle_matrix(quats, N_values)


def evaluate_design(register: list[NuclearSpinParams],
                    electron: ElectronQubitSpec, t: float, N: int, k: int,
                    anchor_label: str, target_indices: list[int],
                    sequence_kind: str = "cpmg") -> GateDesign:
    """Recompute all GateDesign figures of merit from (t, N) alone."""
    seq = build_sequence(sequence_kind, t)
    rots = [iterate(unit_propagator(seq, s, electron), N) for s in register]
    tangles = _scaled_tangle_matrix(
        _vector_unit_quaternions(np.array([s.A for s in register]),
                                 np.array([s.B for s in register]),
                                 register[0].omega_L, electron,
                                 seq.spacings, t),
        np.array([N]))[:, 0]
    targets = sorted(target_indices)
    others = [i for i in range(len(register)) if i not in targets]
    part = RegisterPartition(tuple(rots[i] for i in targets),
                             tuple(rots[i] for i in others))
    error = 1.0 - target_subspace_fidelity(part)
    return GateDesign(
        unit_time=t, iterations=N, k=k, anchor_label=anchor_label,
        target_labels=tuple(register[i].label for i in targets),
        target_tangles=tuple(float(tangles[i]) for i in targets),
        unwanted_tangles={register[i].label: float(tangles[i]) for i in others},
        gate_time=N * t, gate_error=float(error))


def optimize_register_gate(register: list[NuclearSpinParams],
                           electron: ElectronQubitSpec,
                           constraints: DesignConstraints,
                           anchor_index: int, k: int,
                           sequence_kind: str = "cpmg",
                           time_step: float = 1e-9) -> GateDesign | None:
    """Search (t, N) near the anchor's k-th resonance for a feasible gate.

    The unit time is scanned on a fixed grid across the constraint window,
    then refined around the best grid point.  Feasibility: at least two
    targets above target_tangle_min, every bystander below
    unwanted_tangle_max, bystander mean below unwanted_tangle_mean_max, and
    gate time within max_gate_time.  Among the feasible (t, N) points, the
    target set feasible at the largest number of unit times wins (it is the
    most robust to timing errors); within that set, the point with the
    highest mean target tangle is kept, with shorter gate time and lower
    bystander mean as tie-breakers.
    """
    if not register:
        raise ValueError("empty register")
    anchor = register[anchor_index]
    seq0 = build_sequence(sequence_kind, resonance_time(anchor, electron, k))
    spacings = seq0.spacings
    t0 = seq0.unit_time
    A = np.array([s.A for s in register])
    B = np.array([s.B for s in register])
    omega_L = register[0].omega_L

    steps = int(round(constraints.time_window / time_step))
    times = t0 + np.arange(-steps, steps + 1) * time_step

    def feasibility(tangles: np.ndarray):
        """Per-N feasibility and scores from the (n_spins, n_N) tangle block."""
        is_target = tangles > constraints.target_tangle_min
        n_targets = is_target.sum(axis=0)
        unw_max = np.where(is_target, -np.inf, tangles).max(axis=0)
        unw_sum = np.where(is_target, 0.0, tangles).sum(axis=0)
        n_unw = tangles.shape[0] - n_targets
        unw_mean = np.where(n_unw > 0, unw_sum / np.maximum(n_unw, 1), 0.0)
        tgt_sum = np.where(is_target, tangles, 0.0).sum(axis=0)
        tgt_mean = np.where(n_targets > 0, tgt_sum / np.maximum(n_targets, 1), 0.0)
        ok = ((n_targets >= 2)
              & (unw_max < constraints.unwanted_tangle_max)
              & (unw_mean < constraints.unwanted_tangle_mean_max))
        return ok, tgt_mean, unw_mean, is_target

    # per target set: feasible unit times and the best (t, N) point within
    set_times: dict[tuple, set] = {}
    set_best: dict[tuple, tuple] = {}
    for t in times:
        if t <= 0:
            continue
        n_cap = min(constraints.N_max, int(constraints.max_gate_time / t))
        if n_cap < 1:
            continue
        N_values = np.arange(1, n_cap + 1)
        tangles = _evaluate_candidate(A, B, omega_L, electron, spacings,
                                      t, N_values)
        ok, tgt_mean, unw_mean, is_target = feasibility(tangles)
        for idx in np.nonzero(ok)[0]:
            n = int(N_values[idx])
            tset = tuple(np.nonzero(is_target[:, idx])[0])
            key = (-tgt_mean[idx], n * t, unw_mean[idx])
            set_times.setdefault(tset, set()).add(t)
            if tset not in set_best or key < set_best[tset][0]:
                set_best[tset] = (key, t, n)

    if not set_best:
        return None
    winner = max(set_best,
                 key=lambda s: (len(set_times[s]), -set_best[s][0][0]))
    _, t_best, n_best = set_best[winner]
    target_idx = list(winner)

    # local refinement of the unit time at fixed N and fixed target set
    lo, hi = t_best - time_step, t_best + time_step

    def objective(t: float) -> float:
        tangles = _evaluate_candidate(A, B, omega_L, electron, spacings,
                                      t, np.array([n_best]))[:, 0]
        return -float(np.mean(tangles[target_idx]))

    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    t_ref = float(res.x) if res.success else t_best
    tangles = _evaluate_candidate(A, B, omega_L, electron, spacings,
                                  t_ref, np.array([n_best]))[:, 0]
    ok, _, _, is_target = feasibility(tangles[:, None])
    if not (ok[0] and list(np.nonzero(is_target[:, 0])[0]) == target_idx
            and n_best * t_ref <= constraints.max_gate_time):
        t_ref = t_best

    return evaluate_design(register, electron, t_ref, n_best, k,
                           anchor.label, target_idx, sequence_kind)


# ---------------------------------------------------------------------------
# unwanted-tangle minimization (single target, single bystander)


def minimize_unwanted_tangle(target: NuclearSpinParams,
                             unwanted: NuclearSpinParams,
                             electron: ElectronQubitSpec,
                             k_range=range(1, 6), pulse_budget: int = 300,
                             sequence_kind: str = "cpmg"
                             ) -> tuple[int, int, float]:
    """Minimize the bystander's scaled one-tangle over the target's resonances.

    Scans the target's first resonances (k_range) and all iteration counts
    in the target's nearly-maximal set, limited by the pulse budget.
    Returns (k, N, scaled bystander tangle); the target's G1 stays below the
    maximal-tangle threshold at the returned point.
    """
    best = None
    for k in k_range:
        t = resonance_time(target, electron, k)
        seq = build_sequence(sequence_kind, t)
        n_max = max(1, pulse_budget // seq.pulse_count)
        rot_t = unit_propagator(seq, target, electron)
        good_n = optimal_iterations(rot_t, N_max=n_max)
        if not good_n:
            continue
        rot_u = unit_propagator(seq, unwanted, electron)
        g1_u = g1_over_iterations(rot_u, max(good_n))
        for n in good_n:
            tangle = 1.0 - float(g1_u[n - 1])
            if best is None or tangle < best[2]:
                best = (k, n, tangle)
    if best is None:
        raise ValueError("target has no entangling iteration count in range")
    return best


# ---------------------------------------------------------------------------
# random ensembles


def generate_random_ensemble(count: int,
                             A_range_khz: tuple[float, float] = (10.0, 200.0),
                             B_range_khz: tuple[float, float] = (10.0, 200.0),
                             distinctness_khz: float = 25.0,
                             seed: int = 0,
                             larmor_khz: float = 314.0,
                             max_attempts_per_spin: int = 1000
                             ) -> list[NuclearSpinParams]:
    """Uniformly sampled spins with pairwise-distinct hyperfine values.

    Two spins are distinct when at least one hyperfine component differs by
    distinctness_khz or more.  Candidates violating this against any
    accepted spin are rejected; generation fails once a spin exhausts its
    attempt budget (the range cannot host the requested density).
    """
    rng = np.random.Generator(np.random.Philox(seed))
    d = distinctness_khz
    # spatial hash on a d-sized grid: conflicts only involve neighbor cells
    cells: dict[tuple[int, int], list[tuple[float, float]]] = {}

    def conflicts(a: float, b: float) -> bool:
        ci, cj = int(a // d), int(b // d)
        for i in range(ci - 1, ci + 2):
            for j in range(cj - 1, cj + 2):
                for (pa, pb) in cells.get((i, j), ()):
                    if abs(pa - a) < d and abs(pb - b) < d:
                        return True
        return False

    spins = []
    for idx in range(count):
        for attempt in range(max_attempts_per_spin):
            a = rng.uniform(*A_range_khz)
            b = rng.uniform(*B_range_khz)
            if d > 0 and conflicts(a, b):
                continue
            cells.setdefault((int(a // d), int(b // d)) if d > 0 else (0, 0),
                             []).append((a, b))
            spins.append(NuclearSpinParams.from_khz(f"R{idx + 1}", a, b,
                                                    larmor_khz))
            break
        else:
            raise RuntimeError(
                f"could not place spin {idx + 1} of {count} after "
                f"{max_attempts_per_spin} attempts; range too dense for "
                f"distinctness {distinctness_khz} kHz")
    return spins


# ---------------------------------------------------------------------------
# hyperfine -> lattice position


def estimate_position(A: float, B: float) -> tuple[float, float]:
    """Invert the point-dipole hyperfine model to (R in Angstrom, theta in deg).

    The couplings (angular rad/s) decompose as A = A0 (3 cos^2 theta - 1),
    B = 3 A0 cos theta sin theta with A0 = mu0 gamma_n gamma_e hbar/(4 pi R^3).
    theta is eliminated by root finding; B >= 0 and (A, B) != (0, 0) required.
    """
    if B < 0 or (A == 0 and B == 0):
        raise ValueError("no dipolar solution for these couplings")
    prefactor = (constants.MU0 * constants.GAMMA_E * constants.GAMMA_C13
                 * constants.HBAR / (4.0 * math.pi))
    if B == 0:
        theta = 0.0 if A > 0 else math.pi / 2.0
        a0 = A / 2.0 if A > 0 else -A
    else:
        def g(theta: float) -> float:
            return (B * (3.0 * math.cos(theta) ** 2 - 1.0)
                    - 3.0 * A * math.sin(theta) * math.cos(theta))
        theta = brentq(g, 1e-12, math.pi / 2.0 - 1e-12, xtol=1e-15)
        a0 = B / (3.0 * math.sin(theta) * math.cos(theta))
    if a0 <= 0:
        raise ValueError("no dipolar solution for these couplings")
    r = (prefactor / a0) ** (1.0 / 3.0)
    return r / constants.ANGSTROM, math.degrees(theta)


def position_to_hyperfine(r_angstrom: float, theta_deg: float) -> tuple[float, float]:
    """Forward point-dipole model: (R, theta) -> (A, B) in angular rad/s."""
    theta = math.radians(theta_deg)
    r = r_angstrom * constants.ANGSTROM
    a0 = (constants.MU0 * constants.GAMMA_E * constants.GAMMA_C13
          * constants.HBAR / (4.0 * math.pi * r ** 3))
    return (a0 * (3.0 * math.cos(theta) ** 2 - 1.0),
            3.0 * a0 * math.cos(theta) * math.sin(theta))


# ---------------------------------------------------------------------------
# trivial-evolution helpers


def spins_on_trivial_circle(electron: ElectronQubitSpec, omega_L: float,
                            kappa_time: int, kappa_circle: int, count: int,
                            hf_cap: float = 2.0 * math.pi * 300e3
                            ) -> tuple[float, list[NuclearSpinParams]]:
    """Spins that decouple from both electron branches at one unit time.

    Requires one branch with projection 0 (its decoupling fixes the unit
    time t = 8 kappa pi / omega_L); the returned spins sit on the other
    branch's decoupling circle, restricted to hyperfine values below hf_cap.
    Returns (t, spins).
    """
    if electron.s0 == 0:
        s = electron.s1
    elif electron.s1 == 0:
        s = electron.s0
    else:
        raise ValueError("need one electron branch with projection 0")
    t = 8.0 * kappa_time * math.pi / omega_L
    radius = abs(8.0 * kappa_circle * math.pi / (s * t))
    center = -omega_L / s
    spins = []
    psi_values = np.linspace(1e-3, math.pi - 1e-3, 4 * count)
    for psi in psi_values:
        a = center + radius * math.cos(psi)
        b = radius * math.sin(psi)
        if b < 0 or abs(a) > hf_cap or b > hf_cap:
            continue
        spins.append(NuclearSpinParams(f"T{len(spins) + 1}", a, b, omega_L))
        if len(spins) == count:
            break
    if len(spins) < count:
        raise ValueError("circle does not host enough spins under the cap")
    return t, spins


# ---------------------------------------------------------------------------
# gate error vs bath size


def gate_error_vs_bath(targets: list[ConditionalRotation],
                       unwanted_pool: list[tuple[float, ConditionalRotation]],
                       tangle_bins: list[tuple[float, float]],
                       bath_sizes: list[int], n_ensembles: int, seed: int
                       ) -> list[dict]:
    """Mean gate error as the unwanted bath grows, per one-tangle bin.

    unwanted_pool holds (scaled one-tangle, iterated rotation) pairs.  For
    each bin, each ensemble draws a random ordering of the bin's spins and
    the error is evaluated on growing prefixes; bins holding fewer spins
    than requested report the largest available bath.  Returns one record
    per (bin, bath size) with the ensemble-mean error.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    records = []
    for lo, hi in tangle_bins:
        members = [rot for tangle, rot in unwanted_pool if lo <= tangle < hi]
        for size in bath_sizes:
            eff = min(size, len(members))
            if eff == 0:
                continue
            errors = []
            for _ in range(n_ensembles):
                order = rng.permutation(len(members))[:eff]
                part = RegisterPartition(tuple(targets),
                                         tuple(members[i] for i in order))
                errors.append(1.0 - target_subspace_fidelity(part))
            records.append({"bin": (lo, hi), "bath_size": eff,
                            "requested_size": size,
                            "mean_error": float(np.mean(errors)),
                            "n_ensembles": n_ensembles})
    return records
