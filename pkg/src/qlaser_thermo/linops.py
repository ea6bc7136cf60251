"""Dense complex operator algebra on labeled tensor-product Hilbert spaces.

Everything downstream (state builders, Hamiltonians, exact propagation,
tilted generators) is expressed in terms of three value types defined here:
``HilbertSpace`` (an ordered list of labeled factors), ``Operator`` (a dense
square matrix living on such a space) and ``Superoperator`` (a linear map on
operators, stored as a dim^2 x dim^2 matrix in the row-major vec convention).

All objects are immutable values; operations are pure functions.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla

__all__ = [
    "HilbertSpace",
    "Operator",
    "Superoperator",
    "DominantEigen",
    "LabelCollisionError",
    "UnknownLabelError",
    "tensor",
    "partial_trace",
    "expm_apply",
    "dominant_eigenvalue",
    "spre",
    "spost",
    "sandwich",
    "hamiltonian_super",
    "vec",
    "unvec",
]

# Structural tolerances (absolute); overridable per call.
HERMITICITY_ATOL = 1e-10
UNITARITY_ATOL = 1e-10
# Above this dimension the matrix exponential action is computed iteratively
# instead of through a full dense exponential.
DENSE_EXPM_MAX_DIM = 512


class LabelCollisionError(ValueError):
    """Raised when tensoring spaces that share a factor label."""


class UnknownLabelError(KeyError):
    """Raised when a label is not a factor of the space."""


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of labeled finite-dimensional factors."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise LabelCollisionError(f"duplicate factor labels in {labels}")
        for lab, d in self.factors:
            if d < 1:
                raise ValueError(f"factor {lab!r} has dimension {d} < 1")

    @staticmethod
    def single(label: str, dim: int) -> "HilbertSpace":
        return HilbertSpace(((label, dim),))

    @property
    def dim(self) -> int:
        d = 1
        for _, n in self.factors:
            d *= n
        return d

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    def axis(self, label: str) -> int:
        for i, (lab, _) in enumerate(self.factors):
            if lab == label:
                return i
        raise UnknownLabelError(label)

    def dim_of(self, label: str) -> int:
        return self.factors[self.axis(label)][1]

    def tensor(self, other: "HilbertSpace") -> "HilbertSpace":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LabelCollisionError(f"labels {sorted(clash)} appear on both sides")
        return HilbertSpace(self.factors + other.factors)

    def restrict(self, labels: Sequence[str]) -> "HilbertSpace":
        """Subspace keeping the given labels, in this space's factor order."""
        keep = set(labels)
        unknown = keep - set(self.labels)
        if unknown:
            raise UnknownLabelError(sorted(unknown))
        return HilbertSpace(tuple(f for f in self.factors if f[0] in keep))


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex square matrix on a labeled Hilbert space.

    Hermiticity / unitarity / trace are checked properties, never assumed.
    """

    space: HilbertSpace
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator data must be square, got shape {arr.shape}")
        if arr.shape[0] != self.space.dim:
            raise ValueError(
                f"data dim {arr.shape[0]} does not match space dim {self.space.dim}"
            )
        object.__setattr__(self, "data", arr)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def identity(space: HilbertSpace) -> "Operator":
        return Operator(space, np.eye(space.dim))

    @staticmethod
    def zeros(space: HilbertSpace) -> "Operator":
        return Operator(space, np.zeros((space.dim, space.dim)))

    # -- algebra ------------------------------------------------------------

    def _require_same_space(self, other: "Operator"):
        if self.space.factors != other.space.factors:
            raise ValueError("operators live on different spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.data + other.data)

    def __sub__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.data - other.data)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.data)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.data @ other.data)

    def dag(self) -> "Operator":
        return Operator(self.space, self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def norm_max(self) -> float:
        return float(np.max(np.abs(self.data)))

    # -- checked properties --------------------------------------------------

    def is_hermitian(self, atol: float = HERMITICITY_ATOL) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T)) <= atol)

    def is_unitary(self, atol: float = UNITARITY_ATOL) -> bool:
        d = self.data.shape[0]
        return bool(np.max(np.abs(self.data.conj().T @ self.data - np.eye(d))) <= atol)

    def expect(self, rho: "Operator") -> complex:
        self._require_same_space(rho)
        return complex(np.trace(self.data @ rho.data))


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product on the concatenated space; Tr[a (x) b] = Tr a * Tr b."""
    return Operator(a.space.tensor(b.space), np.kron(a.data, b.data))


def embed(op: Operator, space: HilbertSpace) -> Operator:
    """Lift an operator acting on a subset of factors to the full space.

    Factors of ``op.space`` must appear in ``space`` in the same relative
    order; identity acts on the remaining factors.
    """
    parts = []
    sub = {lab: None for lab in op.space.labels}
    sub_order = [lab for lab in space.labels if lab in sub]
    if tuple(sub_order) != op.space.labels:
        raise ValueError("factor order mismatch while embedding")
    # Build by tensoring op (as one block) with identities, assuming the
    # op factors are contiguous in `space`; otherwise fall back to einsum-free
    # permutation-safe path via sequential kron of per-factor blocks.
    idx = [space.axis(lab) for lab in op.space.labels]
    if idx == list(range(idx[0], idx[0] + len(idx))):
        before = space.factors[: idx[0]]
        after = space.factors[idx[-1] + 1 :]
        m = op.data
        if before:
            m = np.kron(np.eye(int(np.prod([d for _, d in before]))), m)
        if after:
            m = np.kron(m, np.eye(int(np.prod([d for _, d in after]))))
        return Operator(space, m)
    raise ValueError("embedding of non-contiguous factors is not supported")


def partial_trace(op: Operator, keep: Iterable[str]) -> Operator:
    """Trace out every factor not in ``keep``; preserves the total trace."""
    keep = set(keep)
    unknown = keep - set(op.space.labels)
    if unknown:
        raise UnknownLabelError(sorted(unknown))
    dims = op.space.dims
    n = len(dims)
    letters = string.ascii_letters
    if 2 * n > len(letters):
        raise ValueError("too many tensor factors")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    out_row, out_col = [], []
    for i, (lab, _) in enumerate(op.space.factors):
        if lab in keep:
            out_row.append(row[i])
            out_col.append(col[i])
        else:
            col[i] = row[i]
    spec = "".join(row) + "".join(col) + "->" + "".join(out_row + out_col)
    arr = op.data.reshape(dims + dims)
    reduced_space = op.space.restrict(keep)
    d = reduced_space.dim
    out = np.einsum(spec, arr).reshape(d, d) if keep else np.einsum(spec, arr).reshape(1, 1)
    if not keep:
        reduced_space = HilbertSpace((("scalar", 1),))
    return Operator(reduced_space, out)


def expm_apply(
    H,
    t: float,
    v,
    hermitian: bool = True,
    atol: float = HERMITICITY_ATOL,
    check_unitary: bool = False,
):
    """Apply e^{-i H t} to a vector or matrix.

    ``H`` may be an Operator or ndarray.  With ``hermitian=True`` the input is
    checked to tolerance and the action is computed through the (dense)
    eigendecomposition for moderate dimensions, or through the iterative
    exponential action for large ones.  With ``hermitian=False`` a general
    complex matrix is accepted (tilted generators).
    """
    M = H.data if isinstance(H, Operator) else np.asarray(H, dtype=complex)
    is_op = isinstance(v, Operator)
    V = v.data if is_op else np.asarray(v, dtype=complex)
    d = M.shape[0]
    if hermitian:
        herm_defect = float(np.max(np.abs(M - M.conj().T)))
        if herm_defect > atol:
            raise ValueError(f"generator not Hermitian to {atol:g} (defect {herm_defect:.3e})")
        if d <= DENSE_EXPM_MAX_DIM:
            w, P = la.eigh(M)
            U = (P * np.exp(-1j * w * t)) @ P.conj().T
            if check_unitary and np.max(np.abs(U.conj().T @ U - np.eye(d))) > UNITARITY_ATOL:
                raise ArithmeticError("propagator lost unitarity")
            out = U @ V
        else:
            out = spla.expm_multiply(-1j * t * M, V)
    else:
        if d <= DENSE_EXPM_MAX_DIM:
            out = la.expm(-1j * t * M) @ V
        else:
            out = spla.expm_multiply(-1j * t * M, V)
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("matrix exponential action did not converge")
    return Operator(v.space, out) if is_op else out


# -- superoperators ----------------------------------------------------------
#
# Row-major vec convention: vec(X) = X.reshape(-1), so the map rho -> A rho B
# has matrix kron(A, B.T).


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1)


def unvec(x: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(x).reshape(d, d)


def spre(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    return np.kron(a, np.eye(a.shape[0]))


def spost(b: np.ndarray) -> np.ndarray:
    b = np.asarray(b)
    return np.kron(np.eye(b.shape[0]), b.T)


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of rho -> A rho B."""
    return np.kron(np.asarray(a), np.asarray(b).T)


def hamiltonian_super(h: np.ndarray) -> np.ndarray:
    """Matrix of rho -> -i [H, rho]."""
    return -1j * (spre(h) - spost(h))


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map on operators over ``space``, stored as a dense matrix."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d2 = self.space.dim ** 2
        if m.shape != (d2, d2):
            raise ValueError(f"superoperator matrix must be {d2}x{d2}, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @staticmethod
    def from_function(space: HilbertSpace, fn: Callable[[np.ndarray], np.ndarray]) -> "Superoperator":
        """Build the matrix column by column from an action on basis matrices."""
        d = space.dim
        m = np.zeros((d * d, d * d), dtype=complex)
        for j in range(d):
            for l in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[j, l] = 1.0
                m[:, j * d + l] = vec(fn(e))
        return Superoperator(space, m)

    def apply(self, op: Operator) -> Operator:
        if op.space.factors != self.space.factors:
            raise ValueError("operator lives on a different space")
        d = self.space.dim
        return Operator(self.space, unvec(self.matrix @ vec(op.data), d))

    def adjoint(self) -> "Superoperator":
        return Superoperator(self.space, self.matrix.conj().T)

    def trace_defect(self, rng: np.random.Generator | None = None, samples: int = 8) -> float:
        """max |Tr L(rho)| over random operators; 0 for trace-annihilating maps."""
        rng = rng or np.random.default_rng(0)
        d = self.space.dim
        tr_row = vec(np.eye(d)) @ self.matrix
        worst = 0.0
        for _ in range(samples):
            x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            worst = max(worst, abs(tr_row @ vec(x)) / np.linalg.norm(x))
        return float(worst)

    def is_trace_annihilating(self, atol: float = 1e-10) -> bool:
        d = self.space.dim
        return bool(np.max(np.abs(vec(np.eye(d)) @ self.matrix)) <= atol)

    def choi(self) -> np.ndarray:
        """Choi matrix C[(i,a),(j,b)] = L(|i><j|)_{ab}."""
        d = self.space.dim
        return self.matrix.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)

    def is_completely_positive(self, floor: float = -1e-10) -> bool:
        w = la.eigvalsh((self.choi() + self.choi().conj().T) / 2.0)
        return bool(w.min() >= floor)

    def preserves_hermiticity(self, rng: np.random.Generator | None = None, atol: float = 1e-12) -> bool:
        rng = rng or np.random.default_rng(1)
        d = self.space.dim
        for _ in range(6):
            x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            h = (x + x.conj().T) / 2.0
            y = unvec(self.matrix @ vec(h), d)
            if np.max(np.abs(y - y.conj().T)) > atol * max(1.0, np.max(np.abs(y))):
                return False
        return True


@dataclass(frozen=True)
class DominantEigen:
    value: complex
    right: np.ndarray
    left: np.ndarray
    residual: float
    degenerate: bool
    gap: float


def dominant_eigenvalue(
    S,
    residual_tol: float = 1e-10,
    degeneracy_tol: float = 1e-9,
) -> DominantEigen:
    """Eigenvalue of largest real part with left/right eigenvectors.

    A near-degenerate dominant pair is reported through the ``degenerate``
    flag rather than silently broken.
    """
    m = S.matrix if isinstance(S, Superoperator) else np.asarray(S, dtype=complex)
    w, vl, vr = la.eig(m, left=True, right=True)
    order = np.argsort(-w.real)
    k = order[0]
    value = w[k]
    right = vr[:, k]
    left = vl[:, k]
    scale = max(1.0, float(np.max(np.abs(m))))
    residual = float(np.linalg.norm(m @ right - value * right)) / scale
    if residual > residual_tol:
        raise ArithmeticError(f"dominant eigenpair residual {residual:.3e} > {residual_tol:g}")
    gap = float(w[order[0]].real - w[order[1]].real) if len(w) > 1 else np.inf
    return DominantEigen(
        value=complex(value),
        right=right,
        left=left,
        residual=residual,
        degenerate=bool(gap < degeneracy_tol),
        gap=gap,
    )
