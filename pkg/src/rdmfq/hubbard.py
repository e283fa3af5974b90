"""Open Hubbard chains: Hamiltonians, exact ground states, density matrices.

Spin orbitals are interleaved: orbital 2i is (site i, up) and 2i+1 is
(site i, down), which keeps every on-site interaction on adjacent
orbitals.  Ground states are computed by Lanczos iteration inside the
fixed (n_up, n_down) particle-number sector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from . import fock
from .fermion import InteractionSpec, InteractionTerm

HERMITICITY_TOL = 1e-10
OCCUPATION_TOL = 1e-9
TRACE_TOL = 1e-8


@dataclass(frozen=True, slots=True)
class HubbardSpec:
    L: int
    t: float
    U: float
    n_up: int
    n_down: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        for n in (self.n_up, self.n_down):
            if not 0 <= n <= self.L:
                raise ValueError("particle count outside [0, L]")

    @classmethod
    def half_filled(cls, L: int, t: float = 1.0, U: float = 0.0) -> "HubbardSpec":
        return cls(L, t, U, (L + 1) // 2, L // 2)

    @property
    def n_orbitals(self) -> int:
        return 2 * self.L


class RepresentabilityError(ValueError):
    """A density matrix violates ensemble-representability bounds."""


@dataclass(frozen=True)
class OneParticleDM:
    """Hermitian one-particle reduced density matrix rho[a, b] = <c+_b c_a>."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise RepresentabilityError("density matrix not hermitian")
        occ = np.linalg.eigvalsh(m)
        if occ.min() < -OCCUPATION_TOL or occ.max() > 1 + OCCUPATION_TOL:
            raise RepresentabilityError(
                f"occupations outside [0, 1]: [{occ.min():g}, {occ.max():g}]"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def particle_number(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def occupations(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def block(self, indices) -> np.ndarray:
        idx = np.asarray(list(indices), dtype=int)
        return self.matrix[np.ix_(idx, idx)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "real": [[f"{v:.15g}" for v in row] for row in self.matrix.real],
                "imag": [[f"{v:.15g}" for v in row] for row in self.matrix.imag],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "OneParticleDM":
        doc = json.loads(text)
        re = np.array([[float(v) for v in row] for row in doc["real"]])
        im = np.array([[float(v) for v in row] for row in doc["imag"]])
        return cls(re + 1j * im)


def build_hubbard(spec: HubbardSpec) -> tuple[np.ndarray, InteractionSpec]:
    """Hopping matrix (2L x 2L, open chain) and on-site interaction.

    Each site contributes one tensor entry (2i, 2i+1, 2i, 2i+1) with
    value 2U, so that (1/2) * 2U * c+ c+ c c = U n_up n_down per site.
    """
    n = spec.n_orbitals
    h = np.zeros((n, n))
    for i in range(spec.L - 1):
        for sigma in (0, 1):
            a, b = 2 * i + sigma, 2 * (i + 1) + sigma
            h[a, b] = h[b, a] = -spec.t
    terms = ()
    if spec.U != 0.0:
        terms = tuple(
            InteractionTerm(2 * i, 2 * i + 1, 2 * i, 2 * i + 1, 2.0 * spec.U)
            for i in range(spec.L)
        )
    return h, InteractionSpec(n, terms)


def site_interaction(spec: HubbardSpec, site: int) -> InteractionSpec:
    """The single-site interaction term U n_{site,up} n_{site,down}."""
    if not 0 <= site < spec.L:
        raise ValueError("site out of range")
    a = 2 * site
    return InteractionSpec(
        spec.n_orbitals, (InteractionTerm(a, a + 1, a, a + 1, 2.0 * spec.U),)
    )


DEFAULT_DIM_CAP = 10_000_000


def ground_state(
    spec: HubbardSpec, dim_cap: int = DEFAULT_DIM_CAP, seed: int = 0
) -> tuple[float, np.ndarray, np.ndarray]:
    """Lowest eigenpair in the (n_up, n_down) sector.

    Returns (E0, state, basis).  Dense diagonalization is used for tiny
    sectors, Lanczos (with a seeded start vector) otherwise.
    """
    basis = fock.sector_basis(spec.L, spec.n_up, spec.n_down)
    dim = len(basis)
    if dim > dim_cap:
        raise ValueError(f"sector dimension {dim} exceeds cap {dim_cap}")
    h, w = build_hubbard(spec)
    ham = fock.hopping_op(h, basis)
    if w.terms:
        ham = (ham + fock.interaction_op(w, basis)).tocsr()
    if dim <= 400:
        dense = ham.toarray()
        vals, vecs = np.linalg.eigh(dense)
        e0, psi = float(vals[0]), vecs[:, 0]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.normal(size=dim)
        vals, vecs = spla.eigsh(ham, k=1, which="SA", v0=v0, tol=0)
        e0, psi = float(vals[0]), vecs[:, 0]
    psi = psi / np.linalg.norm(psi)
    # Fix the global sign so results are seed-independent.
    pivot = int(np.argmax(np.abs(psi)))
    if psi[pivot].real < 0:
        psi = -psi
    return e0, psi.astype(complex), basis


def one_particle_dm(psi: np.ndarray, basis: np.ndarray, n_orbitals: int) -> OneParticleDM:
    rho = fock.one_particle_dm_from_state(psi, basis, n_orbitals)
    return OneParticleDM(rho)


def free_fermion_energy(spec: HubbardSpec) -> float:
    """U = 0 reference: fill the lowest open-chain orbitals per spin."""
    levels = np.linalg.eigvalsh(_chain_matrix(spec.L, spec.t))
    return float(np.sum(levels[: spec.n_up]) + np.sum(levels[: spec.n_down]))


def _chain_matrix(L: int, t: float) -> np.ndarray:
    m = np.zeros((L, L))
    for i in range(L - 1):
        m[i, i + 1] = m[i + 1, i] = -t
    return m


def interaction_expectation(spec: HubbardSpec, psi: np.ndarray, basis: np.ndarray) -> float:
    _, w = build_hubbard(spec)
    if not w.terms:
        return 0.0
    op = fock.interaction_op(w, basis)
    return float(np.vdot(psi, op @ psi).real)


def export_spectrum_csv(values: np.ndarray) -> str:
    lines = ["index,value"]
    lines += [f"{i},{v:.15g}" for i, v in enumerate(values)]
    return "\n".join(lines) + "\n"
