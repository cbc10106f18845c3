"""Dense brute-force engine validating the analytic formulas on small registers.

Everything here is deliberately independent of the closed forms under test:
propagators are assembled from explicit matrix exponentials or Kronecker
products, entangling power is estimated by Monte-Carlo averaging over Haar
product states, Kraus operators are extracted numerically, and Makhlin
invariants come from the magic-basis construction.

Qubit ordering in dense states is (electron, nucleus 1, ..., nucleus n-1),
big-endian: the electron owns the most significant bit.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .spin_model import (ConditionalRotation, ElectronQubitSpec,
                         NuclearSpinParams, PulseSequence)

MAX_QUBITS = 14
MAX_KRAUS_ENV = 10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Magic (Bell) basis columns used for local-invariant extraction.
MAGIC_BASIS = np.array([[1, 0, 0, 1j],
                        [0, 1j, 1, 0],
                        [0, 1j, -1, 0],
                        [1, 0, 0, -1j]], dtype=complex) / math.sqrt(2.0)


def branch_hamiltonian(spin: NuclearSpinParams, s: float) -> np.ndarray:
    return 0.5 * ((spin.omega_L + s * spin.A) * SIGMA_Z + s * spin.B * SIGMA_X)


def segment_exponential_rotation(spin: NuclearSpinParams,
                                 electron: ElectronQubitSpec,
                                 seq: PulseSequence, branch: int) -> np.ndarray:
    """One branch's unit propagator by piecewise matrix exponentials."""
    pair = (electron.s0, electron.s1) if branch == 0 else (electron.s1, electron.s0)
    u = np.eye(2, dtype=complex)
    for i, q in enumerate(seq.spacings):
        s = pair[0] if i % 2 == 0 else pair[1]
        u = expm(-1j * branch_hamiltonian(spin, s) * q * seq.unit_time) @ u
    return u


def conditional_unitary(rots: list[ConditionalRotation]) -> np.ndarray:
    """Dense gate sum_j |j><j| x (x_l R_j^(l)) over the register list."""
    n = len(rots) + 1
    if n > MAX_QUBITS:
        raise ValueError(f"register of {n} qubits exceeds the {MAX_QUBITS}-qubit cap")
    blocks = []
    for branch in range(2):
        block = np.eye(1, dtype=complex)
        for rot in rots:
            r = rot.r0 if branch == 0 else rot.r1
            block = np.kron(block, r.matrix())
        blocks.append(block)
    dim = 2 ** (n - 1)
    u = np.zeros((2 * dim, 2 * dim), dtype=complex)
    u[:dim, :dim] = blocks[0]
    u[dim:, dim:] = blocks[1]
    return u


def dense_propagator(register: list[NuclearSpinParams],
                     electron: ElectronQubitSpec,
                     seq: PulseSequence, N: int) -> np.ndarray:
    """Full propagator of N sequence units over the whole register."""
    n = len(register) + 1
    if n > MAX_QUBITS:
        raise ValueError(f"register of {n} qubits exceeds the {MAX_QUBITS}-qubit cap")
    blocks = []
    for branch in range(2):
        block = np.eye(1, dtype=complex)
        for spin in register:
            block = np.kron(block,
                            segment_exponential_rotation(spin, electron, seq, branch))
        blocks.append(block)
    dim = 2 ** (n - 1)
    u = np.zeros((2 * dim, 2 * dim), dtype=complex)
    u[:dim, :dim] = np.linalg.matrix_power(blocks[0], N)
    u[dim:, dim:] = np.linalg.matrix_power(blocks[1], N)
    return u


# ---------------------------------------------------------------------------
# states and entropies


def reduced_single_qubit(state: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Reduced density matrix of one qubit from a pure n-qubit state."""
    psi = state.reshape((2,) * n)
    psi = np.moveaxis(psi, qubit, 0).reshape(2, -1)
    return psi @ psi.conj().T


def linear_entropy(state: np.ndarray, qubit: int) -> float:
    """One-tangle 1 - tr[rho^2] of a single qubit in a pure state."""
    n = int(round(math.log2(state.size)))
    rho = reduced_single_qubit(state, qubit, n)
    return float(1.0 - np.real(np.trace(rho @ rho)))


def haar_product_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Tensor product of independent Haar-random single-qubit states."""
    state = np.ones(1, dtype=complex)
    for _ in range(n):
        amp = rng.normal(size=2) + 1j * rng.normal(size=2)
        amp /= np.linalg.norm(amp)
        state = np.kron(state, amp)
    return state


def mc_bipartition_entangling_power(u: np.ndarray, qubit: int,
                                    samples: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo mean one-tangle of `qubit` over Haar product inputs.

    Uses a counter-based generator (Philox) so the stream is reproducible
    and can be partitioned deterministically.  Returns (mean, standard error).
    """
    n = int(round(math.log2(u.shape[0])))
    rng = np.random.Generator(np.random.Philox(seed))
    # draw all single-qubit states at once, then form product states in bulk
    amps = rng.normal(size=(samples, n, 2)) + 1j * rng.normal(size=(samples, n, 2))
    amps /= np.linalg.norm(amps, axis=2, keepdims=True)
    states = amps[:, 0, :]
    for q in range(1, n):
        states = np.einsum("si,sj->sij", states, amps[:, q, :]).reshape(samples, -1)
    out = states @ u.T
    psi = np.moveaxis(out.reshape((samples,) + (2,) * n), 1 + qubit, 1)
    psi = psi.reshape(samples, 2, -1)
    rho = np.einsum("sij,skj->sik", psi, psi.conj())
    purity = np.real(np.einsum("sik,ski->s", rho, rho))
    tangles = 1.0 - purity
    mean = float(np.mean(tangles))
    stderr = float(np.std(tangles, ddof=1) / math.sqrt(samples))
    return mean, stderr


# ---------------------------------------------------------------------------
# numeric Kraus fidelity


def numeric_kraus_fidelity(u: np.ndarray, target_gate: np.ndarray, K: int) -> float:
    """Average fidelity of the traced channel versus the target gate.

    The environment is the trailing L-K qubits, initialized to |0...0>;
    Kraus operators are the column blocks E_i = <e_i| U |e_0>.  Uses the
    average-fidelity formula F = 1/(m(m+1)) sum_k [ tr(E_k^dag E_k)
    + |tr(U0^dag E_k)|^2 ] with m = 2^(K+1).
    """
    m = 2 ** (K + 1)
    env = u.shape[0] // m
    if env > 2 ** MAX_KRAUS_ENV:
        raise ValueError("environment too large for numeric Kraus extraction")
    blocks = u.reshape(m, env, m, env)[:, :, :, 0]  # E_i[a, b] = U[(a,i),(b,0)]
    total = 0.0
    for i in range(env):
        e = blocks[:, i, :]
        total += np.real(np.trace(e.conj().T @ e))
        total += abs(np.trace(target_gate.conj().T @ e)) ** 2
    return float(total / (m * (m + 1)))


# ---------------------------------------------------------------------------
# magic-basis local invariants


def magic_basis_invariants(gate: np.ndarray) -> tuple[complex, complex]:
    """Makhlin local invariants (G1, G2) of a two-qubit gate."""
    if gate.shape != (4, 4):
        raise ValueError("expected a 4x4 gate")
    um = MAGIC_BASIS.conj().T @ gate @ MAGIC_BASIS
    m = um.T @ um
    det = np.linalg.det(um)
    tr = np.trace(m)
    g1 = tr ** 2 / (16.0 * det)
    g2 = (tr ** 2 - np.trace(m @ m)) / (4.0 * det)
    return complex(g1), complex(g2)
