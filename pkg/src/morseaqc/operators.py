"""Hamiltonian families for adiabatic evolutions.

Builds the dense operator families analyzed elsewhere in the package: the
reduced two-level search Hamiltonian, collective spin operators on the
maximal-spin sector, and the stoquastic / non-stoquastic uniform p-spin
interpolation.  Also provides the small matrix services (Hermiticity
checks, eigenvalues, path evaluation) the landscape layer relies on.

A note on bases: the reduced search Hamiltonian is written in an
orthogonal but *unnormalized* two-state basis, so its matrix is not
entrywise symmetric even though the operator is self-adjoint.  Operators
therefore carry an optional SPD Gram matrix ``metric``; self-adjointness
then reads ``G @ A == (G @ A)^H`` and eigenvalues come from the
generalized symmetric problem ``(G A) x = lam G x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, InvalidArgumentError

HERMITICITY_ATOL = 1e-12


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

@dataclass
class HermitianOperator:
    """Dense square operator, self-adjoint w.r.t. an optional basis metric.

    Attributes
    ----------
    matrix : (d, d) array
        Operator entries in a fixed basis.
    metric : (d, d) SPD array or None
        Gram matrix of the basis.  ``None`` means orthonormal basis, in
        which case Hermiticity is the usual entrywise condition.
    """

    matrix: np.ndarray
    metric: np.ndarray | None = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float if np.isrealobj(self.matrix) else complex)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise InvalidArgumentError(f"operator matrix must be square, got shape {self.matrix.shape}")
        if self.matrix.shape[0] < 1:
            raise InvalidArgumentError("operator dimension must be >= 1")
        if self.metric is not None:
            self.metric = np.asarray(self.metric, dtype=float)
            if self.metric.shape != self.matrix.shape:
                raise InvalidArgumentError("metric shape must match operator shape")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_defect(self) -> float:
        """Max-abs deviation of (G A) from its conjugate transpose."""
        GA = self.matrix if self.metric is None else self.metric @ self.matrix
        return float(np.max(np.abs(GA - GA.conj().T)))

    def is_hermitian(self, atol: float = HERMITICITY_ATOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return self.hermiticity_defect() <= atol * scale


def eigenvalues(op: HermitianOperator) -> np.ndarray:
    """Ascending real eigenvalues of a (metric-)Hermitian operator.

    Raises InvalidArgumentError when the input fails the Hermiticity
    check, since real spectra are only guaranteed for self-adjoint input.
    """
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(np.asarray(op))
    if not op.is_hermitian():
        raise InvalidArgumentError(
            f"operator is not Hermitian within tolerance (defect={op.hermiticity_defect():.3e})")
    if op.metric is None:
        A = 0.5 * (op.matrix + op.matrix.conj().T)
        return np.linalg.eigvalsh(A)
    GA = op.metric @ op.matrix
    GA = 0.5 * (GA + GA.conj().T)
    return scipy.linalg.eigh(GA, op.metric, eigvals_only=True)


# ---------------------------------------------------------------------------
# Coefficient functions and paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Coefficient:
    """Smooth real coefficient c(s) with analytic first derivative.

    ``second`` defaults to zero, which is exact for the affine schedules
    used by every built-in family.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    second: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = "c"

    def __call__(self, s):
        return self.fn(s)

    def d(self, s):
        return self.derivative(s)

    def d2(self, s):
        if self.second is None:
            return np.zeros_like(np.asarray(s, dtype=float))
        return self.second(s)


def affine_coefficient(const: float, slope: float, label: str | None = None) -> Coefficient:
    """Coefficient c(s) = const + slope * s."""
    if label is None:
        label = f"{const:g}{slope:+g}s"
    return Coefficient(
        fn=lambda s, a=const, b=slope: a + b * np.asarray(s, dtype=float),
        derivative=lambda s, b=slope: np.full_like(np.asarray(s, dtype=float), b),
        label=label,
    )


@dataclass
class HamiltonianPath:
    """Smooth one-parameter operator family H(s) = sum_i c_i(s) A_i.

    All terms share the operator dimension and basis metric; the metric
    (possibly None) is constant along the path.
    """

    terms: list[tuple[Coefficient, HermitianOperator]]
    domain: tuple[float, float] = (0.0, 1.0)
    label: str = "path"

    def __post_init__(self):
        if self.domain[0] >= self.domain[1]:
            raise InvalidArgumentError(f"empty path domain {self.domain}")
        dims = {op.dim for _, op in self.terms}
        if len(dims) > 1:
            raise InvalidArgumentError(f"path terms disagree on dimension: {sorted(dims)}")
        metrics = [op.metric for _, op in self.terms]
        for g in metrics[1:]:
            a, b = metrics[0], g
            if (a is None) != (b is None) or (a is not None and not np.allclose(a, b)):
                raise InvalidArgumentError("path terms disagree on basis metric")

    @property
    def dim(self) -> int:
        if not self.terms:
            raise InvalidArgumentError("dimension of an empty path is undefined")
        return self.terms[0][1].dim

    @property
    def metric(self) -> np.ndarray | None:
        return self.terms[0][1].metric if self.terms else None

    def contains(self, s, pad: float = 0.0) -> bool:
        s = np.asarray(s, dtype=float)
        lo, hi = self.domain
        return bool(np.all(s >= lo - pad) and np.all(s <= hi + pad))

    @property
    def _dtype(self):
        return np.result_type(float, *[op.matrix.dtype for _, op in self.terms])

    def matrix_stack(self, s) -> np.ndarray:
        """H(s) for an array of parameter values; shape (..., d, d)."""
        s = np.asarray(s, dtype=float)
        d = self.dim
        out = np.zeros(s.shape + (d, d), dtype=self._dtype)
        for coeff, op in self.terms:
            out += coeff(s)[..., None, None] * op.matrix
        return out

    def derivative_stack(self, s) -> np.ndarray:
        """dH/ds for an array of parameter values; shape (..., d, d)."""
        s = np.asarray(s, dtype=float)
        d = self.dim
        out = np.zeros(s.shape + (d, d), dtype=self._dtype)
        for coeff, op in self.terms:
            out += coeff.d(s)[..., None, None] * op.matrix
        return out

    def second_derivative_stack(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        d = self.dim
        out = np.zeros(s.shape + (d, d), dtype=self._dtype)
        for coeff, op in self.terms:
            out += coeff.d2(s)[..., None, None] * op.matrix
        return out


def evaluate(path: HamiltonianPath, s: float) -> HermitianOperator:
    """Evaluate a path at a single parameter value inside its domain."""
    if not path.terms:
        raise InvalidArgumentError("cannot evaluate a path with no terms and unknown dimension")
    if not path.contains(s):
        raise DomainError(f"s={s} outside path domain {path.domain}")
    return HermitianOperator(path.matrix_stack(np.asarray(float(s))), metric=path.metric)


def zero_path(dim: int, domain=(0.0, 1.0), label: str = "zero") -> HamiltonianPath:
    """Path whose evaluation is the zero operator (empty sum with a shape)."""
    zero = HermitianOperator(np.zeros((dim, dim)))
    return HamiltonianPath([(affine_coefficient(0.0, 0.0), zero)], domain=domain, label=label)


# ---------------------------------------------------------------------------
# Reduced search Hamiltonian
# ---------------------------------------------------------------------------

def build_grover_reduced(N: int) -> HamiltonianPath:
    """Two-level reduction of the adiabatic search Hamiltonian.

    In the orthogonal (unnormalized) basis spanned by the uniform
    superposition minus its overlap with the marked state, and the marked
    state itself, the interpolated Hamiltonian (1-s) H_initial + s H_final
    restricts to

        [[ (1-s)(N-1)/N,   (s-1)(N-1)/N^(3/2) ],
         [ (s-1)/sqrt(N),  (1-s+sN)/N         ]]

    Parameters
    ----------
    N : int
        Database size; must be a power of two, N = 2**n with n >= 1.
    """
    if not isinstance(N, (int, np.integer)) or N < 2 or (N & (N - 1)) != 0:
        raise InvalidArgumentError(f"N must be a power of two >= 2, got {N!r}")
    N = int(N)
    rN = float(np.sqrt(N))
    # Entries are affine in s; split into the s=0 and s=1 endpoint matrices.
    m0 = np.array([[(N - 1) / N, -(N - 1) / (N * rN)],
                   [-1.0 / rN, 1.0 / N]])
    m1 = np.array([[0.0, 0.0],
                   [0.0, 1.0]])
    # Gram matrix of the basis: first vector has squared norm (N-1)/N after
    # rescaling the pair so G stays O(1); makes G @ H(s) symmetric.
    metric = np.diag([1.0, (N - 1) / N])
    a = HermitianOperator(m0, metric=metric)
    b = HermitianOperator(m1, metric=metric)
    return HamiltonianPath(
        [(affine_coefficient(1.0, -1.0, "1-s"), a),
         (affine_coefficient(0.0, 1.0, "s"), b)],
        domain=(0.0, 1.0),
        label=f"grover(N={N})",
    )


# ---------------------------------------------------------------------------
# Collective spin sector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpinSector:
    """Maximal-spin sector of n spin-1/2 particles.

    Basis states are |n/2, m> ordered by decreasing magnetic quantum
    number m = n/2, n/2-1, ..., -n/2, so dim = n + 1.
    """

    n: int
    spin: float = field(init=False)
    basis_labels: tuple = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError(f"need n >= 1 spins, got {self.n}")
        object.__setattr__(self, "spin", self.n / 2.0)
        object.__setattr__(self, "basis_labels",
                           tuple(self.spin - i for i in range(self.n + 1)))

    @property
    def dim(self) -> int:
        return self.n + 1


def build_spin_operators(n: int) -> tuple[HermitianOperator, HermitianOperator]:
    """Collective S_z and S_x on the maximal-spin sector of n qubits.

    S_z is diagonal with entries m.  S_x = (S_+ + S_-)/2 with the ladder
    matrix elements sqrt(S(S+1) - m(m +/- 1)); the standard convention
    S_+/- = S_x +/- i S_y is used, which is the one under which those
    matrix elements hold.
    """
    sector = SpinSector(n)
    m = np.array(sector.basis_labels)
    S = sector.spin
    sz = np.diag(m)
    # S_+ raises m by one: nonzero at (row m+1, col m) in descending-m order.
    raise_amp = np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1))
    sp = np.zeros((sector.dim, sector.dim))
    sp[np.arange(sector.dim - 1), np.arange(1, sector.dim)] = raise_amp
    sx = 0.5 * (sp + sp.T)
    return HermitianOperator(sz), HermitianOperator(sx)


def spin_ladder(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Raw (S_+, S_-) matrices on the maximal-spin sector, for checks."""
    sector = SpinSector(n)
    m = np.array(sector.basis_labels)
    S = sector.spin
    sp = np.zeros((sector.dim, sector.dim))
    sp[np.arange(sector.dim - 1), np.arange(1, sector.dim)] = \
        np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1))
    return sp, sp.T.copy()


def build_pspin(n: int, p: int, b: float, k: int = 2) -> HamiltonianPath:
    """Uniform ferromagnetic p-spin path on the maximal-spin sector.

    H_b(s) = -s b n (Sz_tot/n)^p + s (1-b) n (Sx_tot/n)^k - (1-s) Sx_tot

    with Sz_tot = 2 S_z and Sx_tot = 2 S_x; powers are matrix powers on
    the (n+1)-dimensional sector.  b = 1 is the fully stoquastic model;
    decreasing b turns on the non-stoquastic transverse interaction whose
    exponent k defaults to 2.
    """
    if n < 1 or p < 1 or k < 1:
        raise InvalidArgumentError(f"need n, p, k >= 1, got n={n}, p={p}, k={k}")
    if not (0.0 <= b <= 1.0):
        raise InvalidArgumentError(f"stoquasticity parameter b must lie in [0, 1], got {b}")
    sz, sx = build_spin_operators(n)
    mz = 2.0 * sz.matrix / n
    mx = 2.0 * sx.matrix / n
    ferro = HermitianOperator(n * np.linalg.matrix_power(mz, p))
    transverse = HermitianOperator(2.0 * sx.matrix)
    terms = [(affine_coefficient(0.0, -b, "-b s"), ferro)]
    if b < 1.0:
        nonstoq = HermitianOperator(n * np.linalg.matrix_power(mx, k))
        terms.append((affine_coefficient(0.0, 1.0 - b, "(1-b) s"), nonstoq))
    terms.append((affine_coefficient(-1.0, 1.0, "s-1"), transverse))
    return HamiltonianPath(terms, domain=(0.0, 1.0),
                           label=f"pspin(n={n},p={p},b={b:g},k={k})")
