"""Occupation-number bases and sparse second-quantized operators.

Basis states are orbital bitmasks (bit p set = orbital p occupied) with
the reference ordering c+_{p1} c+_{p2} ... |vac> for p1 < p2 < ..., so
acting on orbital p picks up the parity of occupied orbitals below p.
Used by the exact-diagonalization lab and the exact-functional oracle.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .fermion import InteractionSpec


def full_basis(n_orbitals: int) -> np.ndarray:
    return np.arange(2**n_orbitals, dtype=np.int64)


def sector_basis(n_sites: int, n_up: int, n_down: int) -> np.ndarray:
    """Masks with fixed per-spin counts; orbital 2i is (site i, up), 2i+1 down."""
    ups = [sum(1 << (2 * s) for s in combo) for combo in combinations(range(n_sites), n_up)]
    downs = [
        sum(1 << (2 * s + 1) for s in combo) for combo in combinations(range(n_sites), n_down)
    ]
    masks = sorted(u | d for u in ups for d in downs)
    return np.array(masks, dtype=np.int64)


def spin_counts(mask: int, n_sites: int) -> tuple[int, int]:
    up = sum((mask >> (2 * s)) & 1 for s in range(n_sites))
    down = sum((mask >> (2 * s + 1)) & 1 for s in range(n_sites))
    return up, down


def _parity_below(mask: int, p: int) -> int:
    return ((mask & ((1 << p) - 1)).bit_count()) & 1


def _index_lookup(basis: np.ndarray) -> dict[int, int]:
    return {int(m): i for i, m in enumerate(basis)}


def one_body_op(p: int, q: int, basis: np.ndarray, lookup=None) -> sp.csr_matrix:
    """Sparse c+_p c_q on the given basis."""
    lookup = lookup or _index_lookup(basis)
    rows, cols, vals = [], [], []
    for j, m in enumerate(basis):
        m = int(m)
        if not (m >> q) & 1:
            continue
        sign = -1 if _parity_below(m, q) else 1
        m1 = m & ~(1 << q)
        if (m1 >> p) & 1:
            continue
        if _parity_below(m1, p):
            sign = -sign
        m2 = m1 | (1 << p)
        i = lookup.get(m2)
        if i is None:
            continue
        rows.append(i)
        cols.append(j)
        vals.append(float(sign))
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(basis), len(basis)))


def _apply_ladder(m: int, p: int, create: bool) -> tuple[int, int] | None:
    occ = (m >> p) & 1
    if create == bool(occ):
        return None
    sign = -1 if _parity_below(m, p) else 1
    return m ^ (1 << p), sign


def interaction_op(w: InteractionSpec, basis: np.ndarray, lookup=None) -> sp.csr_matrix:
    """Sparse (1/2) sum U c+_a c+_b c_g c_d on the given basis."""
    lookup = lookup or _index_lookup(basis)
    dim = len(basis)
    rows, cols, vals = [], [], []
    for t in w.terms:
        for j, m0 in enumerate(basis):
            m, sign = int(m0), 1
            step = _apply_ladder(m, t.delta, create=False)
            if step is None:
                continue
            m, s = step
            sign *= s
            step = _apply_ladder(m, t.gamma, create=False)
            if step is None:
                continue
            m, s = step
            sign *= s
            step = _apply_ladder(m, t.beta, create=True)
            if step is None:
                continue
            m, s = step
            sign *= s
            step = _apply_ladder(m, t.alpha, create=True)
            if step is None:
                continue
            m, s = step
            sign *= s
            i = lookup.get(m)
            if i is None:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(0.5 * t.value * sign)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def hopping_op(hmat: np.ndarray, basis: np.ndarray) -> sp.csr_matrix:
    """Sparse sum h[p, q] c+_p c_q on the given basis."""
    lookup = _index_lookup(basis)
    dim = len(basis)
    acc = sp.csr_matrix((dim, dim))
    n = hmat.shape[0]
    for p in range(n):
        for q in range(n):
            if hmat[p, q] != 0.0:
                acc = acc + hmat[p, q] * one_body_op(p, q, basis, lookup)
    return acc.tocsr()


def one_particle_dm_from_state(
    psi: np.ndarray, basis: np.ndarray, n_orbitals: int
) -> np.ndarray:
    """rho[a, b] = <c+_b c_a> of a normalized state on the basis."""
    lookup = _index_lookup(basis)
    rho = np.zeros((n_orbitals, n_orbitals), dtype=complex)
    for b in range(n_orbitals):
        for a in range(n_orbitals):
            op = one_body_op(b, a, basis, lookup)  # c+_b c_a
            rho[a, b] = np.vdot(psi, op @ psi)
    return rho


def constraint_operators(n_orbitals: int, basis: np.ndarray) -> list[tuple[str, int, int, sp.csr_matrix]]:
    """Hermitian operators for the independent real/imag parts of rho.

    Enumerates the diagonal (real) and the upper triangle (real then
    imaginary part) in a fixed order shared with the hybrid solver:
    <op_re(a,b)> = Re rho[a, b] and <op_im(a,b)> = Im rho[a, b] with
    rho[a, b] = <c+_b c_a>.
    """
    lookup = _index_lookup(basis)
    ops = []
    for a in range(n_orbitals):
        ops.append(("diag", a, a, one_body_op(a, a, basis, lookup)))
    for a in range(n_orbitals):
        for b in range(a + 1, n_orbitals):
            m = one_body_op(b, a, basis, lookup).astype(complex)  # <m> = rho[a, b]
            re = (0.5 * (m + m.getH())).tocsr()
            im = ((m - m.getH()) * (-0.5j)).tocsr()
            ops.append(("re", a, b, re))
            ops.append(("im", a, b, im))
    return ops
