"""Splitting numbers recomputed from omega-indices of explicit symplectic paths.

This is an independent route to the splitting table in ``normal_forms``.
For a basic block M we pick a path from I to M, perturb it to generic
nearby paths with nondegenerate endpoints, and count signed crossings of
omega with crossing forms.  The degenerate index is the minimum over the
perturbed paths; the indices at omega*exp(+-i eps) are stable under the
perturbation.  Their differences are the splitting numbers.

Paths used:
    2x2 blocks:  R(psi t) exp(t X)   with X traceless, psi in {0, pi}
    4x4 N2:      exp(t A)            with A = theta*diag(K, K) + c*[[0, I], [0, 0]]

Hamiltonian conventions here use J_L = [[0, -I], [I, 0]] with crossing
form S(t) = -J_L gamma' gamma^-1; it generates the same symplectic group.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .normal_forms import Hyperbolic, Shear, Rotation, JordanPair, SplittingPair

K2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def j_long(n):
    eye, zero = np.eye(n), np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def _random_hamiltonian(rng, order):
    n = order // 2
    sym = rng.standard_normal((order, order))
    sym = (sym + sym.T) / 2
    return j_long(n) @ sym


# 2x2 paths  R(psi t) exp(t X)

def _exp_coeffs(x, t):
    """exp(tX) = c(t) I + s(t) X for traceless 2x2 X."""
    disc = -(x[0, 0] * x[1, 1] - x[0, 1] * x[1, 0])
    t = np.asarray(t, dtype=float)
    if disc > 1e-300:
        r = np.sqrt(disc)
        return np.cosh(r * t), np.sinh(r * t) / r
    if disc < -1e-300:
        r = np.sqrt(-disc)
        return np.cos(r * t), np.sin(r * t) / r
    return np.ones_like(t), t


def _path2(psi, x, t):
    c, s = _exp_coeffs(x, t)
    rot = np.array([[np.cos(psi * t), -np.sin(psi * t)], [np.sin(psi * t), np.cos(psi * t)]])
    return rot @ (c * np.eye(2) + s * x)


def _trace2(psi, x, t):
    c, s = _exp_coeffs(x, t)
    return 2 * c * np.cos(psi * t) + s * np.sin(psi * t) * (x[0, 1] - x[1, 0])


def _form2(psi, x, t):
    rot = np.array([[np.cos(psi * t), -np.sin(psi * t)], [np.sin(psi * t), np.cos(psi * t)]])
    s = psi * np.eye(2) - K2 @ rot @ x @ rot.T
    return (s + s.T) / 2


_GRID = np.unique(np.concatenate([
    np.linspace(0.0, 1.0, 20001),
    1.0 - np.logspace(-9, -1.3, 400),
    np.logspace(-5, -1.3, 300),
]))


class IrregularPathError(ArithmeticError):
    """Sampled path hit a degenerate endpoint or an irregular crossing."""


def _half_signature(s):
    vals = np.linalg.eigvalsh(s)
    if np.min(np.abs(vals)) < 1e-12:
        raise IrregularPathError("degenerate start form")
    return (int(np.sum(vals > 0)) - int(np.sum(vals < 0))) / 2


def omega_index_2x2(psi, x, phi):
    """omega-index, omega = exp(i*phi), of R(psi t) exp(t X) on [0, 1]; nondegenerate end required."""
    target = 2 * np.cos(phi)
    omega = np.exp(1j * phi)
    end = target - _trace2(psi, x, 1.0)
    if abs(end) < 1e-12:
        raise IrregularPathError("endpoint degenerate at omega")
    at_one = abs(omega - 1) < 1e-14
    total = 0.0
    if at_one:
        total += _half_signature(_form2(psi, x, 0.0))
    grid = _GRID[_GRID > (1e-5 if at_one else 0.0)]
    f = target - _trace2(psi, x, grid)
    flips = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    for k in flips:
        root = brentq(lambda t: target - _trace2(psi, x, t), grid[k], grid[k + 1], xtol=1e-15)
        if root >= 1.0:
            continue
        mat = _path2(psi, x, root) - omega * np.eye(2)
        _, sv, vh = np.linalg.svd(mat)
        v = vh[-1].conj()
        gamma = float(np.real(v.conj() @ _form2(psi, x, root) @ v))
        if abs(gamma) < 1e-10:
            raise IrregularPathError("irregular crossing")
        total += 1 if gamma > 0 else -1
    return total


# constant-generator paths exp(t A)

def omega_index_exp(a, phi):
    """omega-index of exp(tA) on [0, 1] for a generic Hamiltonian A (simple eigenvalues)."""
    order = a.shape[0]
    s = -j_long(order // 2) @ a
    s = (s + s.T) / 2
    vals, vecs = np.linalg.eig(a)
    total = 0.0
    if abs(np.exp(1j * phi) - 1) < 1e-14:
        total += _half_signature(s)
    scale = max(1.0, float(np.max(np.abs(vals))))
    for mu, v in zip(vals, vecs.T):
        if abs(mu.real) > 1e-8 * scale:
            continue
        kappa = mu.imag
        if abs(kappa) < 1e-14:
            continue
        # endpoint
        phase = (kappa - phi) / (2 * np.pi)
        if abs(phase - round(phase)) < 1e-10:
            raise IrregularPathError("endpoint degenerate at omega")
        gamma = float(np.real(v.conj() @ s @ v))
        if abs(gamma) < 1e-14:
            raise IrregularPathError("irregular crossing")
        sign = 1 if gamma > 0 else -1
        # times t in (0, 1) with kappa t = phi + 2 pi k
        lo, hi = sorted((0.0, kappa))
        k_min = int(np.ceil((lo - phi) / (2 * np.pi)))
        k_max = int(np.floor((hi - phi) / (2 * np.pi)))
        for k in range(k_min, k_max + 1):
            t = (phi + 2 * np.pi * k) / kappa
            if 0 < t < 1:
                total += sign
    return total


# blocks

def _generator(block):
    """Return ('2x2', psi, X) or ('exp', A) with path endpoint equal to the block."""
    if isinstance(block, Shear):
        if block.lam == 1:
            return "2x2", 0.0, np.array([[0.0, float(block.b)], [0.0, 0.0]])
        return "2x2", np.pi, np.array([[0.0, -float(block.b)], [0.0, 0.0]])
    if isinstance(block, Rotation):
        return "2x2", 0.0, block.angle.radians * K2
    if isinstance(block, Hyperbolic):
        lam = float(block.lam)
        log = np.log(abs(lam))
        return "2x2", (0.0 if lam > 0 else np.pi), np.diag([log, -log])
    if isinstance(block, JordanPair):
        mat = np.array(block.matrix(), dtype=float)
        theta = block.angle.radians
        # B = c R(theta); read c from the upper-right block
        c = float(np.trace(mat[:2, :2].T @ mat[:2, 2:]) / 2)
        a = np.zeros((4, 4))
        a[:2, :2] = theta * K2
        a[2:, 2:] = theta * K2
        a[:2, 2:] = c * np.eye(2)
        return "exp", a
    raise TypeError(f"no path for {block!r}")


def block_path_endpoint(block):
    """Endpoint of the oracle path, for checking it reproduces the block."""
    gen = _generator(block)
    if gen[0] == "2x2":
        return _path2(gen[1], gen[2], 1.0)
    from scipy.linalg import expm
    return expm(gen[1])


@dataclass
class OracleResult:
    pair: SplittingPair
    index_at: float
    index_plus: float
    index_minus: float
    samples: int


def oracle_splitting(block, angle, samples=24, delta=None, eps=5e-2, seed=0):
    """Splitting numbers (S+, S-) of a basic block at ``angle`` (ratio to pi) via perturbed paths."""
    rng = np.random.default_rng(seed)
    gen = _generator(block)
    if delta is None:
        # Jordan pairs split like sqrt(delta); keep that well inside eps
        delta = 1e-4 if gen[0] == "2x2" else 1e-7
    phi = angle.radians
    at, plus, minus = [], set(), set()
    tries = 0
    while len(at) < samples:
        tries += 1
        if tries > 20 * samples:
            raise IrregularPathError("could not sample generic perturbations")
        try:
            if gen[0] == "2x2":
                x = gen[2] + delta * _random_hamiltonian(rng, 2)
                x = x - np.trace(x) / 2 * np.eye(2)
                vals = [omega_index_2x2(gen[1], x, p) for p in (phi, phi + eps, phi - eps)]
            else:
                a = gen[1] + delta * _random_hamiltonian(rng, 4)
                vals = [omega_index_exp(a, p) for p in (phi, phi + eps, phi - eps)]
        except IrregularPathError:
            continue
        at.append(vals[0])
        plus.add(vals[1])
        minus.add(vals[2])
    if len(plus) != 1 or len(minus) != 1:
        raise IrregularPathError(f"nearby indices not stable: {plus}, {minus}")
    base = min(at)
    p, m = plus.pop(), minus.pop()
    return OracleResult(SplittingPair(int(round(p - base)), int(round(m - base))), base, p, m, samples)
