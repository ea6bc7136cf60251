"""Model parameters, Hamiltonians, dressed basis, Mollow and rotating frames.

Basis conventions used throughout:

* qubit factor, label "A": index 0 = ground |a>, index 1 = excited |b>,
  so sigma_z = diag(-1, +1);
* laser factor, label "L": Fock states |0..n_max>;
* bath factors, labels "B0".."B{k}": one truncated mode each;
* dressed qubit: index 0 = |1> (energy -Omega/2), index 1 = |2> (+Omega/2),
  with |2> = c_plus |b> + c_minus |a>, |1> = -c_minus |b> + c_plus |a>,
  c_pm = sqrt((Omega +- delta) / 2 Omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as la

from .bathrates import BathSpec
from .linops import HilbertSpace, Operator, tensor
from .states import annihilation, coherent_vector, displacement_operator, fock_space

__all__ = [
    "ModelParams",
    "DressedBasis",
    "qubit_space",
    "sigma_ops",
    "build_hamiltonians",
    "build_hx_replaced",
    "dressed_transform",
    "dressed_laser_hamiltonian",
    "mollow_transform",
    "floquet_states",
    "floquet_sigma",
    "rotating_frame",
    "drive_term",
]


def qubit_space() -> HilbertSpace:
    return HilbertSpace.single("A", 2)


def sigma_ops() -> dict:
    """Pauli-type qubit operators in the (|a>, |b>) ordering."""
    sp = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |b><a|
    return {
        "plus": sp,
        "minus": sp.conj().T,
        "z": np.diag([-1.0, 1.0]).astype(complex),
    }


@dataclass(frozen=True)
class ModelParams:
    """Single source of truth for every builder.

    Energies: omega_a (qubit splitting), omega_l (laser frequency),
    g0 (bare qubit-laser coupling).  The laser amplitude enters through
    alpha_abs and alpha_phase; the effective drive is g = g0 |alpha| and the
    Rabi frequency Omega = sqrt(delta^2 + g^2) with delta = omega_a - omega_l.
    """

    omega_a: float
    omega_l: float
    g0: float
    alpha_abs: float
    alpha_phase: float = 0.0
    beta_b: float = 1.0
    bath: BathSpec = field(default_factory=BathSpec)
    laser_n_max: int = 16
    bath_mode_n_max: int = 1

    def __post_init__(self):
        if self.omega_l <= 0:
            raise ValueError("omega_l must be positive")
        if self.alpha_abs < 0:
            raise ValueError("alpha_abs must be nonnegative")
        if self.omega_rabi == 0:
            raise ValueError("delta = g = 0 (Omega = 0) is out of model")
        if self.bath.beta != self.beta_b:
            object.__setattr__(self, "bath", replace(self.bath, beta=self.beta_b))

    # -- derived quantities ---------------------------------------------------

    @property
    def alpha(self) -> complex:
        return self.alpha_abs * np.exp(1j * self.alpha_phase)

    @property
    def delta(self) -> float:
        return self.omega_a - self.omega_l

    @property
    def g(self) -> float:
        return self.g0 * self.alpha_abs

    @property
    def omega_rabi(self) -> float:
        return math.sqrt(self.delta**2 + self.g**2)

    def bath_centered(self) -> BathSpec:
        return self.bath if self.bath.center is not None else self.bath.with_center(self.omega_a)

    # -- assumption flags -------------------------------------------------------

    @property
    def near_resonance_margin(self) -> float:
        """|delta| / omega_L; assumption 1 needs this << 1."""
        return abs(self.delta) / self.omega_l

    @property
    def macroscopic_margins(self) -> tuple[float, float]:
        """(<N>/sigma(N), sigma(N)) = (|alpha|, |alpha|); assumption 2 needs both >> 1."""
        return (self.alpha_abs, self.alpha_abs)


def _bath_spaces(p: ModelParams) -> list[HilbertSpace]:
    return [
        HilbertSpace.single(f"B{k}", p.bath_mode_n_max + 1)
        for k in range(p.bath_centered().n_modes)
    ]


def build_hamiltonians(p: ModelParams, rwa: bool = False) -> dict:
    """All Hamiltonians of the tripartite model on labeled spaces.

    Returns operators on A (2), L (laser Fock), B (bath modes) and their
    products: H_A, H_L, H_B, V_AL, V_AB, H_X (= H_A + V_AL + H_L on A*L) and
    the total H on A*L*B.  With ``rwa=True`` the qubit-laser coupling drops
    the off-resonant sigma+ a^dag and sigma- a terms.
    """
    sig = sigma_ops()
    sa = qubit_space()
    sl = fock_space(p.laser_n_max, "L")
    h_a = Operator(sa, (p.omega_a / 2.0) * sig["z"])
    a = annihilation(p.laser_n_max)
    h_l = Operator(sl, p.omega_l * (a.conj().T @ a + 0.5 * np.eye(p.laser_n_max + 1)))

    if rwa:
        v_al_x = (p.g0 / 2.0) * (np.kron(sig["plus"], a) + np.kron(sig["minus"], a.conj().T))
    else:
        v_al_x = (p.g0 / 2.0) * np.kron(sig["plus"] + sig["minus"], a + a.conj().T)
    sx = sa.tensor(sl)
    v_al = Operator(sx, v_al_x)
    h_x = tensor(h_a, Operator.identity(sl)) + tensor(Operator.identity(sa), h_l) + v_al

    spec = p.bath_centered()
    bspaces = _bath_spaces(p)
    freqs = spec.mode_frequencies()
    sb = bspaces[0]
    for s in bspaces[1:]:
        sb = sb.tensor(s)
    db = sb.dim
    nb = spec.n_modes
    d_mode = p.bath_mode_n_max + 1
    a_mode = annihilation(p.bath_mode_n_max)
    h_b = np.zeros((db, db), dtype=complex)
    b_coll = np.zeros((db, db), dtype=complex)
    for k in range(nb):
        left = np.eye(d_mode**k)
        right = np.eye(d_mode ** (nb - k - 1))
        ak = np.kron(np.kron(left, a_mode), right)
        h_b += freqs[k] * (ak.conj().T @ ak + 0.5 * np.eye(db))
        b_coll += (spec.g_bath / 2.0) * ak
    H_B = Operator(sb, h_b)
    B = Operator(sb, b_coll)

    s_full = sx.tensor(sb)
    sx_qubit = np.kron(sig["plus"] + sig["minus"], np.eye(sl.dim))
    v_ab = Operator(s_full, np.kron(sx_qubit, b_coll + b_coll.conj().T))
    h_total = (
        tensor(h_x, Operator.identity(sb))
        + v_ab
        + tensor(Operator.identity(sx), H_B)
    )
    return {
        "H_A": h_a,
        "H_L": h_l,
        "H_B": H_B,
        "B": B,
        "V_AL": v_al,
        "V_AB": v_ab,
        "H_X": h_x,
        "H": h_total,
        "bath_frequencies": freqs,
        "spaces": {"A": sa, "L": sl, "X": sx, "B": sb, "full": s_full},
    }


def build_hx_replaced(p: ModelParams) -> Operator:
    """RWA qubit-laser Hamiltonian with g0 sqrt(N+1) replaced by g = g0|alpha|.

    Block diagonal over the pair subspaces {|b,N>, |a,N+1>} with constant
    coupling g/2; this is the Hamiltonian the dressed transformation
    diagonalizes exactly.
    """
    sig = sigma_ops()
    sa = qubit_space()
    sl = fock_space(p.laser_n_max, "L")
    d = p.laser_n_max + 1
    lower = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        lower[n - 1, n] = 1.0  # unit-amplitude ladder: fluctuations of sqrt(N) dropped
    a = annihilation(p.laser_n_max)
    h = (
        np.kron((p.omega_a / 2.0) * sig["z"], np.eye(d))
        + np.kron(np.eye(2), p.omega_l * (a.conj().T @ a + 0.5 * np.eye(d)))
        + (p.g / 2.0) * (np.kron(sig["plus"], lower) + np.kron(sig["minus"], lower.conj().T))
    )
    return Operator(sa.tensor(sl), h)


@dataclass(frozen=True)
class DressedBasis:
    """Dressed-qubit change of basis and the product-space relabeling.

    ``rotation`` is the full unitary on A*L whose columns are the dressed
    eigenvectors (pairs |1(n)>, |2(n)> for n = 0..n_max-1, then the two
    unpaired corner states |a,0> and |b,n_max>).  ``pair_isometry`` maps the
    DA*DL product space (2 x n_max) into A*L, realizing |j> (x) |n> -> |j(n)>.
    """

    params: ModelParams
    c_plus: float
    c_minus: float
    rotation: Operator
    pair_isometry: np.ndarray
    n_pairs: int

    @property
    def qubit_rotation(self) -> np.ndarray:
        """2x2 matrix with columns |1>, |2> in (|a>, |b>) coordinates."""
        return np.array(
            [[self.c_plus, self.c_minus], [-self.c_minus, self.c_plus]], dtype=complex
        )

    def dressed_qubit_matrix(self, op_ab: np.ndarray) -> np.ndarray:
        """Express a 2x2 qubit operator in the dressed basis (|1>, |2>)."""
        r = self.qubit_rotation
        return r.conj().T @ op_ab @ r

    def corner_weight(self, rho_x: Operator) -> float:
        """Population outside the paired blocks (the two corner states)."""
        k = self.pair_isometry
        inside = float(np.real(np.trace(k.conj().T @ rho_x.data @ k)))
        return float(np.real(np.trace(rho_x.data))) - inside

    def reduce_to_dressed(self, rho_x: Operator) -> np.ndarray:
        """Tr_DL of the relabeled state: a 2x2 matrix in the (|1>, |2>) basis."""
        k = self.pair_isometry
        block = k.conj().T @ rho_x.data @ k  # (2 n_pairs) x (2 n_pairs), DA x DL layout
        b = block.reshape(2, self.n_pairs, 2, self.n_pairs)
        return np.einsum("anbn->ab", b)


def dressed_transform(p: ModelParams) -> DressedBasis:
    """Unitary diagonalizing each pair block of the replaced RWA Hamiltonian."""
    om, delta = p.omega_rabi, p.delta
    c_plus = math.sqrt((om + delta) / (2.0 * om))
    c_minus = math.sqrt((om - delta) / (2.0 * om))
    d = p.laser_n_max + 1
    dim = 2 * d
    # product index: (qubit i, fock N) -> i*d + N with i=0 ground a, 1 excited b
    cols = []

    def basis_vec(i, n):
        v = np.zeros(dim, dtype=complex)
        v[i * d + n] = 1.0
        return v

    n_pairs = d - 1
    pair_cols = np.zeros((dim, 2 * n_pairs), dtype=complex)
    for n in range(n_pairs):
        b_n = basis_vec(1, n)  # |b, N=n>
        a_n1 = basis_vec(0, n + 1)  # |a, N=n+1>
        v1 = -c_minus * b_n + c_plus * a_n1
        v2 = c_plus * b_n + c_minus * a_n1
        pair_cols[:, 0 * n_pairs + n] = v1  # DA index 0 = |1>
        pair_cols[:, 1 * n_pairs + n] = v2  # DA index 1 = |2>
        cols.append(v1)
        cols.append(v2)
    cols.append(basis_vec(0, 0))  # |a, 0>
    cols.append(basis_vec(1, d - 1))  # |b, n_max>
    rot = np.stack(cols, axis=1)
    sx = qubit_space().tensor(fock_space(p.laser_n_max, "L"))
    return DressedBasis(
        params=p,
        c_plus=c_plus,
        c_minus=c_minus,
        rotation=Operator(sx, rot),
        pair_isometry=pair_cols,
        n_pairs=n_pairs,
    )


def dressed_laser_hamiltonian(p: ModelParams) -> dict:
    """H_DL in both forms: spectral (on the pair ladder) and product space.

    The spectral form is diag(omega_L (n+1)) on the DL ladder; the product
    form is I_A (x) H_L + (omega_L/2) sigma_z (x) I_L, which agrees with the
    spectral form on every paired block.
    """
    sig = sigma_ops()
    d = p.laser_n_max + 1
    a = annihilation(p.laser_n_max)
    h_l = p.omega_l * (a.conj().T @ a + 0.5 * np.eye(d))
    product = np.kron(np.eye(2), h_l) + np.kron((p.omega_l / 2.0) * sig["z"], np.eye(d))
    spectral = p.omega_l * np.diag(np.arange(1, d, dtype=float))
    sx = qubit_space().tensor(fock_space(p.laser_n_max, "L"))
    return {
        "product": Operator(sx, product),
        "spectral": spectral,  # (n_max x n_max) on the DL ladder
    }


def mollow_transform(rho: Operator, p: ModelParams, t: float) -> Operator:
    """D^dag[alpha e^{-i omega_L t}] rho D[alpha e^{-i omega_L t}].

    Acts on the laser factor of whatever space rho lives on.
    """
    alpha_t = p.alpha * np.exp(-1j * p.omega_l * t)
    d_l = displacement_operator(alpha_t, p.laser_n_max).data
    return _conjugate_on_factor(rho, "L", d_l.conj().T)


def rotating_frame(rho: Operator, p: ModelParams, t: float, inverse: bool = False) -> Operator:
    """Conjugation by e^{i omega_L sigma_z t / 2} on the qubit factor."""
    sig = sigma_ops()
    sign = -1.0 if inverse else 1.0
    u = la.expm(sign * 1j * p.omega_l * t / 2.0 * sig["z"])
    return _conjugate_on_factor(rho, "A", u)


def _conjugate_on_factor(rho: Operator, label: str, u: np.ndarray) -> Operator:
    space = rho.space
    axis = space.axis(label)
    dims = space.dims
    n = len(dims)
    arr = rho.data.reshape(dims + dims)
    arr = np.tensordot(u, arr, axes=([1], [axis]))
    arr = np.moveaxis(arr, 0, axis)
    arr = np.tensordot(arr, u.conj().T, axes=([n + axis], [0]))
    arr = np.moveaxis(arr, -1, n + axis)
    return Operator(space, arr.reshape(space.dim, space.dim))


def drive_term(p: ModelParams, t) -> np.ndarray:
    """Classical drive V(t) = (g/2)(sigma+ e^{-i omega_L t} + h.c.), 2x2.

    Accepts complex t; the non-autonomous tilted generators evaluate the
    drive at shifted times t +- lambda_L / 2.
    """
    sig = sigma_ops()
    ph = np.exp(-1j * p.omega_l * t)
    g = p.g0 * p.alpha  # complex coupling g0 * alpha
    return 0.5 * (g * ph * sig["plus"] + np.conj(g) / ph * sig["minus"])


def floquet_states(p: ModelParams, t) -> dict:
    """Floquet pair |u_j(t)> = e^{-i omega_L sigma_z t/2} |j>, quasi-energies -+Omega/2."""
    db = dressed_transform(p)
    r = db.qubit_rotation  # columns |1>, |2> in (a, b) coords
    phase = np.exp(-1j * p.omega_l * np.array([-0.5, 0.5]) * t)  # sigma_z eigenvalues -1, +1
    rot = np.diag(phase)
    u = rot @ r
    return {
        "u1": u[:, 0],
        "u2": u[:, 1],
        "quasi_energies": (-p.omega_rabi / 2.0, p.omega_rabi / 2.0),
    }


def floquet_sigma(p: ModelParams, t) -> dict:
    """Time-shifted dressed-qubit jump operators in the lab frame.

    Sigma_z(t) = |u2><u2| - |u1><u1|, Sigma_+(t) = |u2><u1|, Sigma_-(t) its
    transpose pair; entire in t so complex shifts t + lambda_L/2 are allowed.
    """
    db = dressed_transform(p)
    r = db.qubit_rotation
    phase = np.exp(-1j * p.omega_l * np.array([-0.5, 0.5]) * t)
    u = np.diag(phase) @ r
    # formal adjoint rows: entire continuation of <u_j(t)| for complex t
    ubar = (np.diag(1.0 / phase) @ r).T
    u1, u2 = u[:, 0], u[:, 1]
    b1, b2 = ubar[0], ubar[1]
    return {
        "z": np.outer(u2, b2) - np.outer(u1, b1),
        "plus": np.outer(u2, b1),
        "minus": np.outer(u1, b2),
    }
