"""Fourier representation of 1-periodic functions and weighted shift operators.

A function sampled on ``s_j = j / K`` is stored by its K Fourier series
coefficients for modes ``-K/2 .. K/2 - 1`` (plain series coefficients, so the
constant 1 has coefficient 1).

Operators act on the ``K - 1`` symmetric modes ``-(K/2 - 1) .. K/2 - 1``.
Dropping the unpaired mode ``-K/2`` keeps the bilinear pairing
``sum_k a_k b_{-k}`` closed, so the transpose of a shift is exactly the
opposite shift and reciprocity survives discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TWO_PI = 2.0 * np.pi


def modes(K: int) -> np.ndarray:
    return np.arange(-(K // 2), K // 2)


def op_modes(K: int) -> np.ndarray:
    return np.arange(-(K // 2) + 1, K // 2)


@dataclass
class FourierFn:
    coeffs: np.ndarray

    @property
    def K(self) -> int:
        return self.coeffs.size

    def __call__(self, s) -> np.ndarray:
        """Trigonometric interpolant at arbitrary points (mode -K/2 split as a cosine)."""
        s = np.asarray(s, dtype=float)
        K = self.K
        ks = modes(K)
        c = self.coeffs
        phase = np.exp(_TWO_PI * 1j * np.multiply.outer(s, ks[1:]))
        out = phase @ c[1:]
        out = out + c[0] * np.cos(np.pi * K * s)
        return out

    def refine(self, factor: int) -> np.ndarray:
        """Samples on the grid of ``factor * K`` points, by zero padding."""
        K = self.K
        n = factor * K
        padded = np.zeros(n, dtype=complex)
        c = self.coeffs
        padded[1:K // 2] = c[K // 2 + 1:]
        padded[0] = c[K // 2]
        padded[n - K // 2 + 1:] = c[1:K // 2]
        # split the unpaired mode between -K/2 and +K/2
        padded[K // 2] += 0.5 * c[0]
        padded[n - K // 2] += 0.5 * c[0]
        return np.fft.ifft(padded) * n

    def shifted(self, shift: float) -> "FourierFn":
        """The function ``s -> f(s + shift)``."""
        return FourierFn(self.coeffs * np.exp(_TWO_PI * 1j * modes(self.K) * shift))

    def scaled(self, c: complex) -> "FourierFn":
        return FourierFn(self.coeffs * c)

    def to_op(self) -> np.ndarray:
        """Coefficient vector on the operator modes."""
        return self.coeffs[1:].copy()

    @classmethod
    def from_op(cls, v: np.ndarray) -> "FourierFn":
        return cls(np.concatenate(([0.0 + 0j], np.asarray(v, dtype=complex))))

    def samples(self) -> np.ndarray:
        return from_fourier(self)


def to_fourier(samples) -> FourierFn:
    samples = np.asarray(samples, dtype=complex)
    K = samples.size
    if K < 2 or K & (K - 1):
        raise ValueError("number of samples must be a power of two")
    return FourierFn(np.fft.fftshift(np.fft.fft(samples)) / K)


def from_fourier(f: FourierFn, grid=None) -> np.ndarray:
    if grid is None:
        return np.fft.ifft(np.fft.ifftshift(f.coeffs)) * f.K
    return f(grid)


def shift_phases(K: int, delta: float) -> np.ndarray:
    """Diagonal of ``phi(s) -> phi(s - delta)`` on the operator modes."""
    return np.exp(-_TWO_PI * 1j * op_modes(K) * delta)


def multiplication_matrix(symbol: FourierFn) -> np.ndarray:
    """Matrix of ``phi -> b * phi``: coefficients convolved with wrap-around modulo K."""
    K = symbol.K
    km = op_modes(K)
    diff = (km[:, None] - km[None, :]) % K
    # index into fftshift ordering
    idx = (diff + K // 2) % K
    return symbol.coeffs[idx]


@dataclass
class ShiftOpMatrix:
    matrix: np.ndarray
    pattern: str
    side: str

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, other):
        return self.matrix @ other


def _side_sign(side: str) -> int:
    if side == "right":
        return 1
    if side == "left":
        return -1
    raise ValueError(f"bad side {side!r}")


def assemble_T(symbol: FourierFn, pattern: str, side: str, delta: float) -> ShiftOpMatrix:
    """Weighted shift operator of a local RtR symbol.

    With ``d = delta`` on the right and ``-delta`` on the left:
    ``00: b(s) phi(s)``, ``01: b(s-d) phi(s-d)``, ``10: b(s) phi(s+d)``, ``11: b(s-d) phi(s)``.
    """
    d = _side_sign(side) * delta
    mult = multiplication_matrix(symbol)
    D = shift_phases(symbol.K, d)
    if pattern == "00":
        A = mult
    elif pattern == "01":
        A = D[:, None] * mult
    elif pattern == "10":
        A = mult * D.conj()[None, :]
    elif pattern == "11":
        A = D[:, None] * mult * D.conj()[None, :]
    else:
        raise ValueError(f"bad pattern {pattern!r}")
    return ShiftOpMatrix(A, pattern, side)


def transpose_op(A) -> np.ndarray:
    """Transpose for the pairing ``int phi psi``: mode k pairs with mode -k."""
    M = A.matrix if isinstance(A, ShiftOpMatrix) else np.asarray(A)
    return M.T[::-1, ::-1].copy()


def weighted_shift_op(symbol: FourierFn, shift: float) -> np.ndarray:
    """Matrix of ``phi -> b(s - shift) phi(s - shift)``."""
    D = shift_phases(symbol.K, shift)
    return D[:, None] * multiplication_matrix(symbol)


@dataclass
class Pencil:
    MM: np.ndarray
    NN: np.ndarray
    side: str
    omega: float
    epsilon: float

    @property
    def n(self) -> int:
        return self.MM.shape[0] // 2


def assemble_pencil(T00, T01, T10, T11, side: str = "right", omega: float = float("nan"),
                    epsilon: float = float("nan")) -> Pencil:
    """``MM = [[T01, T11], [0, I]]`` and ``NN = [[I, 0], [T00, T10]]``."""
    mats = [t.matrix if isinstance(t, ShiftOpMatrix) else np.asarray(t) for t in (T00, T01, T10, T11)]
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise ValueError("operator blocks have mismatched sizes")
    I = np.eye(n, dtype=complex)
    Z = np.zeros((n, n), dtype=complex)
    MM = np.block([[mats[1], mats[3]], [Z, I]])
    NN = np.block([[I, Z], [mats[0], mats[2]]])
    return Pencil(MM, NN, side, omega, epsilon)


def local_operators(symbols, delta: float) -> dict[str, ShiftOpMatrix]:
    """The four local RtR operators of an ``RtRSymbols`` record."""
    return {p: assemble_T(to_fourier(v), p, symbols.side, delta) for p, v in symbols.as_dict().items()}


def pencil_from_symbols(symbols, delta: float) -> Pencil:
    T = local_operators(symbols, delta)
    return assemble_pencil(T["00"], T["01"], T["10"], T["11"], symbols.side, symbols.omega, symbols.epsilon)


def tail_energy_fraction(f: FourierFn) -> float:
    """Share of spectral energy in the top quartile of |mode|."""
    ks = np.abs(modes(f.K))
    e = np.abs(f.coeffs) ** 2
    total = e.sum()
    if total == 0:
        return 0.0
    return float(e[ks >= 3 * f.K // 8].sum() / total)
