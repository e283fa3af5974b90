"""Fermionic ladder operators and observables as qubit operators.

All three supported transforms (Jordan-Wigner, parity, Bravyi-Kitaev) map
one mode to one qubit and are generated from a single invertible GF(2)
matrix B with qubit bits b = B n (mod 2) for occupation vector n:

  - Jordan-Wigner: B = identity,
  - parity:        b_i = n_0 + ... + n_i,
  - Bravyi-Kitaev: B is the Fenwick-tree (binary indexed tree) matrix,
    defined for any mode count, not only powers of two.

The annihilation operator is assembled exactly as

    c_j = X_{flip(j)} . (1 - Z_{occ(j)})/2 . Z_{par(j)}

where flip(j) = column j of B (qubits storing n_j), occ(j) = row j of
B^-1 (qubits whose parity is n_j) and par(j) encodes the parity of modes
below j.  Products and phases are handled by the Pauli algebra, so no
disjointness assumptions between the sets are needed.

Occupied mode corresponds to qubit state |1>, hence n -> (1 - Z)/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import PauliSum, PauliTerm

SCHEMES = ("jw", "parity", "bk")


@dataclass(frozen=True, slots=True)
class EncodingScheme:
    """A fermion-to-qubit transform: one of ``jw``, ``parity``, ``bk``."""

    scheme: str
    n_modes: int

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.n_modes < 1:
            raise ValueError("n_modes must be positive")


def jordan_wigner(n_modes: int) -> EncodingScheme:
    return EncodingScheme("jw", n_modes)


def parity_encoding(n_modes: int) -> EncodingScheme:
    return EncodingScheme("parity", n_modes)


def bravyi_kitaev(n_modes: int) -> EncodingScheme:
    return EncodingScheme("bk", n_modes)


@lru_cache(maxsize=None)
def encoding_matrix(scheme: str, n_modes: int) -> np.ndarray:
    """The GF(2) matrix B with qubit bits b = B n (mod 2)."""
    b = np.zeros((n_modes, n_modes), dtype=np.uint8)
    if scheme == "jw":
        np.fill_diagonal(b, 1)
    elif scheme == "parity":
        for i in range(n_modes):
            b[i, : i + 1] = 1
    elif scheme == "bk":
        # Fenwick tree: 1-based node i covers modes [i - lowbit(i) + 1, i].
        for i in range(n_modes):
            i1 = i + 1
            lo = i1 - (i1 & -i1)
            b[i, lo : i + 1] = 1
    else:
        raise ValueError(scheme)
    return b


@lru_cache(maxsize=None)
def _encoding_sets(scheme: str, n_modes: int) -> tuple[tuple[int, int, int], ...]:
    """Per-mode (flip_mask, occ_mask, parity_mask) as qubit bit masks."""
    b = encoding_matrix(scheme, n_modes)
    binv = _gf2_inverse(b)
    out = []
    for j in range(n_modes):
        flip = _col_mask(b, j)
        occ = _row_mask(binv, j)
        par = 0
        acc = np.zeros(n_modes, dtype=np.uint8)
        for k in range(j):
            acc ^= binv[k]
        for q in range(n_modes):
            if acc[q]:
                par |= 1 << q
        out.append((flip, occ, par))
    return tuple(out)


def _col_mask(m: np.ndarray, j: int) -> int:
    mask = 0
    for q in range(m.shape[0]):
        if m[q, j]:
            mask |= 1 << q
    return mask


def _row_mask(m: np.ndarray, j: int) -> int:
    mask = 0
    for q in range(m.shape[1]):
        if m[j, q]:
            mask |= 1 << q
    return mask


def _gf2_inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    a = np.concatenate([m.copy() % 2, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r, col]), None)
        if pivot is None:
            raise ValueError("encoding matrix is singular over GF(2)")
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
        for r in range(n):
            if r != col and a[r, col]:
                a[r] ^= a[col]
    return a[:, n:]


def encode_ladder(index: int, kind: str, enc: EncodingScheme) -> PauliSum:
    """Qubit image of c_index (``annihilate``) or c^dagger_index (``create``)."""
    n = enc.n_modes
    if not 0 <= index < n:
        raise IndexError(f"mode index {index} out of range for {n} modes")
    if kind not in ("annihilate", "create"):
        raise ValueError(f"kind must be 'annihilate' or 'create', got {kind!r}")
    flip, occ, par = _encoding_sets(enc.scheme, enc.n_modes)[index]
    x_flip = PauliSum(n, (PauliTerm(n, 0, flip),))
    # Projector onto n_index = 1 expressed through the Z-parity of occ.
    proj = PauliSum.from_terms(
        n, (PauliTerm(n, 0, 0, 0.5), PauliTerm(n, occ, 0, -0.5))
    )
    z_par = PauliSum(n, (PauliTerm(n, par, 0),))
    op = x_flip * proj * z_par
    if kind == "create":
        op = op.dagger()
    return op


def rho1_observables(alpha: int, beta: int, enc: EncodingScheme) -> tuple[PauliSum, PauliSum]:
    """Hermitian pair (A, B) with rho1[beta, alpha] = (<A> - i <B>) / 2.

    A = c^dag_a c_b + c^dag_b c_a and B = i (c^dag_a c_b - c^dag_b c_a);
    for alpha == beta returns the number operator and an empty sum.
    """
    n = enc.n_modes
    for idx in (alpha, beta):
        if not 0 <= idx < n:
            raise IndexError(f"mode index {idx} out of range for {n} modes")
    ca_dag = encode_ladder(alpha, "create", enc)
    cb = encode_ladder(beta, "annihilate", enc)
    if alpha == beta:
        return (ca_dag * cb).real_part(), PauliSum.zero(n)
    cb_dag = encode_ladder(beta, "create", enc)
    ca = encode_ladder(alpha, "annihilate", enc)
    a = (ca_dag * cb + cb_dag * ca).real_part()
    b = ((ca_dag * cb - cb_dag * ca) * 1.0j).real_part()
    return a, b


def rho2_observable(alpha: int, beta: int, gamma: int, delta: int, enc: EncodingScheme) -> PauliSum:
    """Qubit image of c^dag_gamma c^dag_delta c_alpha c_beta."""
    n = enc.n_modes
    for idx in (alpha, beta, gamma, delta):
        if not 0 <= idx < n:
            raise IndexError(f"mode index {idx} out of range for {n} modes")
    if alpha == beta or gamma == delta:
        return PauliSum.zero(n)
    return (
        encode_ladder(gamma, "create", enc)
        * encode_ladder(delta, "create", enc)
        * encode_ladder(alpha, "annihilate", enc)
        * encode_ladder(beta, "annihilate", enc)
    )


@dataclass(frozen=True, slots=True)
class InteractionTerm:
    """One tensor entry of the two-particle interaction.

    Contributes (1/2) * value * c^dag_alpha c^dag_beta c_gamma c_delta to
    the interaction operator; indices are stored in the (alpha, beta,
    delta, gamma) order of the tensor subscript.
    """

    alpha: int
    beta: int
    delta: int
    gamma: int
    value: float


@dataclass(frozen=True, slots=True)
class InteractionSpec:
    """Sparse two-particle interaction W = (1/2) sum U c+ c+ c c."""

    n_modes: int
    terms: tuple[InteractionTerm, ...]

    def __post_init__(self):
        for t in self.terms:
            for idx in (t.alpha, t.beta, t.delta, t.gamma):
                if not 0 <= idx < self.n_modes:
                    raise ValueError(f"interaction index {idx} out of range")
        if not self._is_hermitian():
            raise ValueError("interaction tensor does not define a hermitian operator")

    def _is_hermitian(self, tol: float = 1e-12) -> bool:
        # (c+a c+b cg cd)^dag = c+d c+g cb ca, i.e. the conjugate partner of
        # entry (a, b, d, g) is stored at (d, g, a, b) with equal real value.
        acc: dict[tuple[int, int, int, int], float] = {}
        for t in self.terms:
            k = (t.alpha, t.beta, t.delta, t.gamma)
            acc[k] = acc.get(k, 0.0) + t.value
        for (a, b, d, g), v in acc.items():
            if abs(v - acc.get((d, g, a, b), 0.0)) > tol:
                return False
        return True

    def remap(self, index_map: dict[int, int], n_modes: int) -> "InteractionSpec":
        """Re-index modes, e.g. from global orbitals to a kept subspace."""
        terms = tuple(
            InteractionTerm(
                index_map[t.alpha], index_map[t.beta], index_map[t.delta],
                index_map[t.gamma], t.value,
            )
            for t in self.terms
        )
        return InteractionSpec(n_modes, terms)

    def scaled(self, factor: float) -> "InteractionSpec":
        return InteractionSpec(
            self.n_modes,
            tuple(
                InteractionTerm(t.alpha, t.beta, t.delta, t.gamma, t.value * factor)
                for t in self.terms
            ),
        )


def interaction_observable(w: InteractionSpec, enc: EncodingScheme) -> PauliSum:
    """Qubit image of the interaction operator; hermitian by construction."""
    if enc.n_modes != w.n_modes:
        raise ValueError("mode-count mismatch between interaction and encoding")
    op = PauliSum.zero(enc.n_modes)
    for t in w.terms:
        prod = (
            encode_ladder(t.alpha, "create", enc)
            * encode_ladder(t.beta, "create", enc)
            * encode_ladder(t.gamma, "annihilate", enc)
            * encode_ladder(t.delta, "annihilate", enc)
        )
        op = op + prod * (0.5 * t.value)
    return op.real_part()


def one_particle_paulis(enc: EncodingScheme) -> list[PauliTerm]:
    """Distinct non-identity Pauli words measuring all rho1 elements.

    Under Jordan-Wigner with even mode count this set has exactly
    2 n^2 - n members.
    """
    seen: dict[tuple[int, int], PauliTerm] = {}
    n = enc.n_modes
    for alpha in range(n):
        for beta in range(alpha, n):
            for obs in rho1_observables(alpha, beta, enc):
                for t in obs.terms:
                    if not t.is_identity():
                        seen.setdefault(t.key(), t.with_coeff(1.0))
    return [seen[k] for k in sorted(seen)]
