"""Phase-tracked Pauli-string algebra on symplectic bit masks.

An n-qubit Pauli word is stored as a pair of integers ``(z, x)`` used as
GF(2) vectors: bit ``q`` of ``z`` is set iff qubit ``q`` carries Z or Y,
bit ``q`` of ``x`` is set iff qubit ``q`` carries X or Y.  The operator is

    P(z, x) = (-i)^popcount(z & x) * prod_q Z_q^{z_q} * prod_q X_q^{x_q}

so that (z, x) = (0, 0) -> I, (1, 0) -> Z, (0, 1) -> X and (1, 1) -> Y on
each qubit.  Qubit 0 is the leftmost tensor factor in printed labels.

Products and commutation checks are O(1) per machine word of mask.
"""

from __future__ import annotations

import cmath
import enum
import re
from dataclasses import dataclass, field

DROP_TOL = 1e-12

_LETTER = {(0, 0): "I", (1, 0): "Z", (0, 1): "X", (1, 1): "Y"}
_MASKS = {"I": (0, 0), "Z": (1, 0), "X": (0, 1), "Y": (1, 1)}


class CommutationLevel(enum.Enum):
    """Commutativity predicates ordered from strictest to loosest."""

    DISJOINT = "disjoint"
    QWC = "qwc"
    GC = "gc"


@dataclass(frozen=True, slots=True)
class PauliTerm:
    """A weighted Pauli word: ``coeff * P(z, x)`` on ``n_qubits`` qubits."""

    n_qubits: int
    z: int
    x: int
    coeff: complex = 1.0 + 0.0j

    def __post_init__(self):
        mask = (1 << self.n_qubits) - 1
        if self.z & ~mask or self.x & ~mask:
            raise ValueError("mask bits outside qubit range")

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliTerm":
        """Parse a label like ``"XZYI"`` (whitespace ignored), qubit 0 leftmost."""
        letters = re.sub(r"\s+", "", label).upper()
        z = x = 0
        for q, ch in enumerate(letters):
            try:
                zq, xq = _MASKS[ch]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {ch!r}") from None
            z |= zq << q
            x |= xq << q
        return cls(len(letters), z, x, coeff)

    def label(self) -> str:
        return "".join(
            _LETTER[(self.z >> q) & 1, (self.x >> q) & 1] for q in range(self.n_qubits)
        )

    @property
    def support(self) -> int:
        """Bit mask of qubits carrying a non-identity factor."""
        return self.z | self.x

    @property
    def weight(self) -> int:
        return (self.z | self.x).bit_count()

    def is_identity(self) -> bool:
        return self.z == 0 and self.x == 0

    def key(self) -> tuple[int, int]:
        return (self.z, self.x)

    def with_coeff(self, coeff: complex) -> "PauliTerm":
        return PauliTerm(self.n_qubits, self.z, self.x, coeff)

    def dagger(self) -> "PauliTerm":
        return self.with_coeff(self.coeff.conjugate())

    def __str__(self) -> str:
        return f"({format_coeff(self.coeff)}) {self.label()}"


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product ``a * b`` with the exact accumulated phase."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit-count mismatch")
    z = a.z ^ b.z
    x = a.x ^ b.x
    # i-exponent from normal-ordering Z past X plus the Y bookkeeping factors.
    k = (
        (z & x).bit_count()
        - (a.z & a.x).bit_count()
        - (b.z & b.x).bit_count()
        + 2 * (a.x & b.z).bit_count()
    ) % 4
    phase = (1.0, 1.0j, -1.0, -1.0j)[k]
    return PauliTerm(a.n_qubits, z, x, a.coeff * b.coeff * phase)


def commutes(a: PauliTerm, b: PauliTerm, level: CommutationLevel) -> bool:
    """Whether ``a`` and ``b`` commute under the given predicate.

    DISJOINT requires disjoint supports, QWC requires the single-qubit
    factors to commute on every qubit, GC is the symplectic product test.
    """
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit-count mismatch")
    if level is CommutationLevel.DISJOINT:
        return a.support & b.support == 0
    if level is CommutationLevel.QWC:
        both = a.support & b.support
        # On shared qubits the factors must be equal.
        return (a.z ^ b.z) & both == 0 and (a.x ^ b.x) & both == 0
    sym = (a.z & b.x).bit_count() + (a.x & b.z).bit_count()
    return sym % 2 == 0


@dataclass(frozen=True, slots=True)
class PauliSum:
    """Weighted sum of Pauli words over a common qubit count.

    Always kept simplified: terms sorted lexicographically on (z, x),
    no duplicate masks, no coefficients below the drop tolerance.
    """

    n_qubits: int
    terms: tuple[PauliTerm, ...] = field(default=())

    @classmethod
    def from_terms(cls, n_qubits: int, terms, tol: float = DROP_TOL) -> "PauliSum":
        return simplify(cls(n_qubits, tuple(terms)), tol)

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits, ())

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, (PauliTerm(n_qubits, 0, 0, coeff),))

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch")
        return PauliSum.from_terms(self.n_qubits, self.terms + other.terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            if self.n_qubits != other.n_qubits:
                raise ValueError("qubit-count mismatch")
            prods = [multiply(a, b) for a in self.terms for b in other.terms]
            return PauliSum.from_terms(self.n_qubits, prods)
        return PauliSum.from_terms(
            self.n_qubits, (t.with_coeff(t.coeff * other) for t in self.terms)
        )

    __rmul__ = __mul__

    def dagger(self) -> "PauliSum":
        return PauliSum.from_terms(self.n_qubits, (t.dagger() for t in self.terms))

    def is_hermitian(self, tol: float = DROP_TOL) -> bool:
        return all(abs(t.coeff.imag) < tol for t in self.terms)

    def real_part(self, tol: float = DROP_TOL) -> "PauliSum":
        """Drop imaginary coefficient residue; raise if it exceeds ``tol``."""
        worst = max((abs(t.coeff.imag) for t in self.terms), default=0.0)
        if worst >= tol:
            raise ValueError(f"imaginary residue {worst:g} above tolerance {tol:g}")
        return PauliSum.from_terms(
            self.n_qubits, (t.with_coeff(complex(t.coeff.real)) for t in self.terms)
        )

    def coefficient(self, z: int, x: int) -> complex:
        for t in self.terms:
            if t.z == z and t.x == x:
                return t.coeff
        return 0.0

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(t) for t in self.terms)


def simplify(s: PauliSum, tol: float = DROP_TOL) -> PauliSum:
    """Merge duplicate masks, drop near-zero terms, sort deterministically."""
    acc: dict[tuple[int, int], complex] = {}
    for t in s.terms:
        if t.n_qubits != s.n_qubits:
            raise ValueError("qubit-count mismatch inside sum")
        k = t.key()
        acc[k] = acc.get(k, 0.0) + t.coeff
    kept = sorted(
        (k, c) for k, c in acc.items() if abs(c) >= tol
    )
    return PauliSum(
        s.n_qubits, tuple(PauliTerm(s.n_qubits, z, x, c) for (z, x), c in kept)
    )


def format_coeff(c: complex) -> str:
    """Render a complex coefficient with 15 significant digits."""
    if c.imag == 0.0:
        return f"{c.real:.15g}"
    return f"{c.real:.15g}{c.imag:+.15g}j"


def parse_coeff(s: str) -> complex:
    s = s.strip()
    if s.endswith("j"):
        return complex(s)
    return complex(float(s))


def term_to_text(t: PauliTerm) -> str:
    """One-line text form ``coeff label`` used by golden files."""
    return f"{format_coeff(t.coeff)} {t.label()}"


def term_from_text(line: str) -> PauliTerm:
    coeff_s, label = line.rsplit(None, 1)
    return PauliTerm.from_label(label, parse_coeff(coeff_s))


def phase_of(c: complex) -> complex:
    """Unit-modulus phase of a coefficient (1 for zero)."""
    return c / abs(c) if c != 0 else 1.0


def global_phase_equal(a: complex, b: complex, tol: float = 1e-10) -> bool:
    return abs(abs(a) - abs(b)) < tol and (
        abs(a) < tol or abs(cmath.phase(a / b)) < tol
    )
