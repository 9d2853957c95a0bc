"""Exact thermodynamics from the spectrum of H in a truncated oscillator basis.

H = p^2/2 + omega^2 x^2/2 + V_int(x) is represented in the eigenbasis of a
harmonic oscillator of frequency ``basis_frequency`` (unit mass).  Power-law
interactions are built from ladder operators and are exact within the
truncated space; other potentials use Gauss-Hermite quadrature.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg, optimize

from .errors import ConvergenceError, DomainError
from .models import OscillatorModel, ThermalPoint

log = logging.getLogger(__name__)

MIN_BASIS = 8
MAX_BASIS = 2048
# eigenvalue i counts as converged when |E_i(N) - E_i(2N)| <= this * max(1, |E_i|)
EIG_RTOL = 1e-9


@dataclass(frozen=True)
class BasisSpec:
    size: int
    basis_frequency: float

    def __post_init__(self):
        if int(self.size) != self.size or self.size < MIN_BASIS:
            raise DomainError(f"basis size must be an integer >= {MIN_BASIS}, got {self.size}")
        if not self.basis_frequency > 0:
            raise DomainError(f"basis frequency must be positive, got {self.basis_frequency}")


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    converged_count: int
    basis: Optional[BasisSpec]

    @property
    def converged(self) -> np.ndarray:
        return self.eigenvalues[: self.converged_count]


@dataclass(frozen=True)
class OracleThermo:
    lnZ: float
    F: float
    E: float
    truncation_bound: float
    basis: BasisSpec
    levels_used: int


# --------------------------------------------------------------------------
# matrix construction


def _position_matrix(size, freq):
    off = np.sqrt(np.arange(1, size) / (2.0 * freq))
    return np.diag(off, 1) + np.diag(off, -1)


def _power_interaction(model, basis):
    n, p = basis.size, model.p
    # x^(2p) couples n to n +- 2p through intermediate states up to n + p,
    # so building x on N + p states makes the N x N block exact.
    x = _position_matrix(n + p, basis.basis_frequency)
    x2 = x @ x
    xp = np.linalg.matrix_power(x2, p)
    return model.lam / math.factorial(2 * p) * xp[:n, :n]


def _hermite_node_vectors(size, nodes):
    """Gauss-Hermite nodes y and the matrix v[m, i] = sqrt(w_i) p_m(y_i), m < size.

    p_m are the orthonormal Hermite polynomials.  By the Christoffel identity
    w_i = 1 / sum_{j<K} p_j(y_i)^2, so every column is the vector of
    polynomial values normalised over the full K-term sum.  Building it from
    the three-term recurrence (rescaled per node to stay in range) keeps
    relative accuracy in the far tails, where eigenvector-based weights only
    carry absolute accuracy and get amplified by steep potentials.
    """
    k = nodes
    y = linalg.eigh_tridiagonal(np.zeros(k), np.sqrt(np.arange(1, k) / 2.0), eigvals_only=True)
    out = np.empty((size, k))
    prev = np.zeros(k)
    cur = np.ones(k)
    sumsq = np.zeros(k)
    big, shrink = 1e150, 1e-150
    for m in range(k):
        if m < size:
            out[m] = cur
        sumsq += cur * cur
        nxt = math.sqrt(2.0 / (m + 1)) * y * cur - math.sqrt(m / (m + 1)) * prev
        over = np.abs(nxt) > big
        if over.any():
            nxt[over] *= shrink
            cur = np.where(over, cur * shrink, cur)
            sumsq[over] *= shrink * shrink
            out[: min(m + 1, size), over] *= shrink
        prev, cur = cur, nxt
    return y, out / np.sqrt(sumsq)


def _quadrature_interaction(model, basis, nodes=None):
    n = basis.size
    k = nodes or 2 * n + 40
    y, v = _hermite_node_vectors(n, k)
    pot = np.asarray(model.interaction(y / math.sqrt(basis.basis_frequency)), dtype=float)
    if not np.all(np.isfinite(pot[np.abs(v).max(axis=0) > 0])):
        raise ConvergenceError("potential overflows at the quadrature nodes; reduce basis size")
    pot = np.where(np.isfinite(pot), pot, 0.0)
    return (v * pot) @ v.T


def build_hamiltonian(model: OscillatorModel, basis: BasisSpec) -> np.ndarray:
    n = basis.size
    freq = basis.basis_frequency
    w2 = model.omega**2
    idx = np.arange(n, dtype=float)
    diag = (freq / 4 + w2 / (4 * freq)) * (2 * idx + 1)
    off2 = (w2 / (4 * freq) - freq / 4) * np.sqrt((idx[:-2] + 1) * (idx[:-2] + 2))
    h = np.diag(diag) + np.diag(off2, 2) + np.diag(off2, -2)
    if model.lam != 0:
        if model.potential == "power":
            h += _power_interaction(model, basis)
        else:
            h += _quadrature_interaction(model, basis)
    return 0.5 * (h + h.T)


# --------------------------------------------------------------------------
# spectra


def _eigenvalues(a):
    """Ascending eigenvalues; positive-definite input goes through H^-1.

    Steep potentials make H strongly graded (diagonal entries spanning many
    decades), and a direct solver only resolves eigenvalues to eps * ||H||.
    For positive-definite H the low levels are instead taken as reciprocals
    of the top eigenvalues of H^-1, formed by a Cholesky factorisation of the
    unit-diagonal matrix D^-1/2 H D^-1/2; this keeps relative accuracy for
    the low-lying levels when the scaled matrix is well conditioned.
    """
    d = np.diag(a)
    if np.all(d > 0):
        s = 1.0 / np.sqrt(d)
        try:
            factor = linalg.cho_factor(a * np.outer(s, s), lower=True)
        except linalg.LinAlgError:
            pass
        else:
            inv = linalg.cho_solve(factor, np.eye(len(a))) * np.outer(s, s)
            mu = linalg.eigvalsh(0.5 * (inv + inv.T))
            if np.all(mu > 0):
                return np.sort(1.0 / mu)
    return np.sort(linalg.eigvalsh(a))


def diagonalize(matrix, reference=None, basis: Optional[BasisSpec] = None) -> SpectrumResult:
    """Eigenvalues of a real symmetric matrix, ascending.

    ``reference`` holds the eigenvalues of the same operator in a larger
    basis; leading eigenvalues that agree with it (see EIG_RTOL) count as
    converged.  Without a reference nothing is declared converged.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise DomainError("matrix is not symmetric")
    evals = _eigenvalues(a)
    count = 0
    if reference is not None:
        ref = np.asarray(reference, dtype=float)[: len(evals)]
        ok = np.abs(evals[: len(ref)] - ref) <= EIG_RTOL * np.maximum(1.0, np.abs(evals[: len(ref)]))
        bad = np.flatnonzero(~ok)
        count = int(bad[0]) if len(bad) else len(ref)
    return SpectrumResult(evals, count, basis)


def spectrum(model: OscillatorModel, basis: BasisSpec) -> SpectrumResult:
    """Spectrum in ``basis`` with convergence judged against a basis twice as large."""
    big = BasisSpec(2 * basis.size, basis.basis_frequency)
    reference = _eigenvalues(build_hamiltonian(model, big))
    return diagonalize(build_hamiltonian(model, basis), reference, basis)


# --------------------------------------------------------------------------
# thermodynamics


def _thermo_from_levels(levels, beta):
    e0 = levels[0]
    weights = np.exp(-beta * (levels - e0))
    s = math.fsum(weights)
    lnz = float(-beta * e0 + math.log(s))
    energy = math.fsum(levels * weights) / s
    if len(levels) >= 2:
        gap = float(np.min(np.diff(levels)))
        r = math.exp(-beta * gap) if gap > 0 else 1.0
        tail = math.exp(-beta * (levels[-1] - e0)) * (r / (1 - r) if r < 1 else math.inf)
    else:
        tail = math.inf
    return lnz, energy, tail / s


def oracle_thermo(model: OscillatorModel, point: ThermalPoint,
                  basis: Optional[BasisSpec] = None, tol: float = 1e-10) -> OracleThermo:
    """ln Z, F and E from the converged part of the spectrum.

    The neglected Boltzmann tail is bounded by assuming every level above
    the last converged one is at least the smallest converged gap higher
    than its predecessor; this holds for single-well potentials whose level
    spacing does not shrink (harmonic, x^(2p), cosh).  ``truncation_bound``
    bounds the resulting relative error of Z, hence the absolute error of
    ln Z.  With ``basis=None`` a basis is chosen by :func:`choose_basis`.
    """
    if basis is None:
        return _search(model, point, tol)[1]
    spec = spectrum(model, basis)
    if spec.converged_count < 1:
        raise ConvergenceError(
            f"no converged eigenvalues with basis {basis}; enlarge the basis"
        )
    lnz, energy, bound = _thermo_from_levels(spec.converged, point.beta)
    if bound > tol:
        raise ConvergenceError(
            f"Boltzmann tail bound {bound:.3g} exceeds tol={tol:g} with {spec.converged_count} "
            f"converged levels (basis {basis.size}); enlarge the basis or increase beta"
        )
    return OracleThermo(lnz, -lnz / point.beta, energy, bound, basis, spec.converged_count)


def variational_frequency(model: OscillatorModel) -> float:
    """Basis frequency that minimises the Gaussian ground-state energy of x^(2p).

    For the pure x^(2p) term the optimum is
    (4 p lam (2p-1)!! / ((2p)! 2^p))^(1/(p+1)); for p=2 this is
    (lam/4)^(1/3) = 6^(1/3) (lam/4!)^(1/3).  The result is never below omega.
    """
    if model.lam == 0:
        return model.omega
    p = model.p if model.potential == "power" else 2
    double_fact = math.prod(range(2 * p - 1, 0, -2))
    scale = (4 * p * model.lam * double_fact / (math.factorial(2 * p) * 2**p)) ** (1 / (p + 1))
    return max(model.omega, scale)


# levels up to about this many kT above the ground state carry the Boltzmann sum
THERMAL_SPAN = 35.0


def thermal_frequency(model: OscillatorModel, point: ThermalPoint) -> float:
    """Frequency whose basis matches the thermally populated phase space.

    With E_T = omega/2 + THERMAL_SPAN/beta and x_T the classical turning
    point V(x_T) = E_T, the returned sqrt(2 E_T)/x_T balances the momentum
    and position ranges the basis has to cover.  It equals omega for the
    free oscillator and grows with temperature for steeper potentials.
    """
    e_t = 0.5 * model.omega + THERMAL_SPAN / point.beta

    def excess(x):
        return 0.5 * model.omega**2 * x * x + float(model.interaction(x)) - e_t

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
    x_t = optimize.brentq(excess, 0.0, hi, xtol=1e-12 * hi)
    return math.sqrt(2 * e_t) / x_t


def _search(model, point, tol, frequency=None, n_start=MIN_BASIS, n_cap=MAX_BASIS):
    freq = frequency or max(variational_frequency(model), thermal_frequency(model, point))
    n = n_start
    last = None
    while n <= n_cap:
        basis = BasisSpec(n, freq)
        try:
            return basis, oracle_thermo(model, point, basis, tol)
        except ConvergenceError as exc:
            last = exc
            log.debug("basis %d rejected: %s", n, exc)
        n *= 2
    raise ConvergenceError(f"no basis up to size {n_cap} met tol={tol:g}: {last}")


def choose_basis(model: OscillatorModel, point: ThermalPoint, target_tol: float = 1e-10,
                 frequency: Optional[float] = None, n_cap: int = MAX_BASIS) -> BasisSpec:
    """Smallest power-of-two multiple of 8 whose thermodynamics meet ``target_tol``.

    Unless ``frequency`` is given, the basis frequency is the larger of
    :func:`variational_frequency` (ground state) and :func:`thermal_frequency`.
    Very steep non-polynomial potentials at low temperature can exhaust the
    dynamic range of double precision before converging; that is reported as
    a ConvergenceError rather than returned.
    """
    return _search(model, point, target_tol, frequency=frequency, n_cap=n_cap)[0]
