"""Statevector simulation, hardware-efficient trial states and sampling.

States are flat complex vectors of length 2^n with qubit 0 as the most
significant bit of the basis index (the leftmost tensor factor, matching
the printed Pauli-label convention).  Noise, when requested, is a
stochastic Pauli-trajectory depolarizing channel per gate plus classical
readout bit flips; thermal relaxation is out of scope.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliSum, PauliTerm

MAX_QUBITS = 20

_SQ = 1 / math.sqrt(2)
_H = np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

ONE_QUBIT_KINDS = ("rz", "sqrt_x", "x", "y", "z", "h", "s")
TWO_QUBIT_KINDS = ("cnot", "swap", "crz", "crx")
PARAMETRIC_KINDS = ("rz", "crz", "crx")


@dataclass(frozen=True, slots=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in ONE_QUBIT_KINDS + TWO_QUBIT_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 1 if self.kind in ONE_QUBIT_KINDS else 2
        if len(self.qubits) != want or len(set(self.qubits)) != want:
            raise ValueError(f"gate {self.kind} needs {want} distinct qubits")
        if (self.theta is None) == (self.kind in PARAMETRIC_KINDS):
            raise ValueError(f"gate {self.kind}: theta mismatch")


def rz(q: int, theta: float) -> Gate:
    return Gate("rz", (q,), float(theta))


def sqrt_x(q: int) -> Gate:
    return Gate("sqrt_x", (q,))


def x(q: int) -> Gate:
    return Gate("x", (q,))


def y(q: int) -> Gate:
    return Gate("y", (q,))


def z(q: int) -> Gate:
    return Gate("z", (q,))


def h(q: int) -> Gate:
    return Gate("h", (q,))


def s(q: int) -> Gate:
    return Gate("s", (q,))


def cnot(control: int, target: int) -> Gate:
    return Gate("cnot", (control, target))


def swap(a: int, b: int) -> Gate:
    return Gate("swap", (a, b))


def crz(control: int, target: int, theta: float) -> Gate:
    return Gate("crz", (control, target), float(theta))


def crx(control: int, target: int, theta: float) -> Gate:
    return Gate("crx", (control, target), float(theta))


def gate_matrix(g: Gate) -> np.ndarray:
    """Dense unitary of the gate on its own qubits (control first)."""
    if g.kind == "rz":
        return np.diag([np.exp(-0.5j * g.theta), np.exp(0.5j * g.theta)])
    if g.kind == "sqrt_x":
        return _SX
    if g.kind == "x":
        return _X
    if g.kind == "y":
        return _Y
    if g.kind == "z":
        return _Z
    if g.kind == "h":
        return _H
    if g.kind == "s":
        return _S
    if g.kind == "cnot":
        return _CNOT
    if g.kind == "swap":
        return _SWAP
    if g.kind == "crz":
        u = np.eye(4, dtype=complex)
        u[2, 2] = np.exp(-0.5j * g.theta)
        u[3, 3] = np.exp(0.5j * g.theta)
        return u
    if g.kind == "crx":
        u = np.eye(4, dtype=complex)
        c, si = math.cos(g.theta / 2), math.sin(g.theta / 2)
        u[2:, 2:] = np.array([[c, -1j * si], [-1j * si, c]])
        return u
    raise ValueError(g.kind)


@dataclass(frozen=True, slots=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"qubit count {self.n_qubits} above cap {MAX_QUBITS}")
        for g in self.gates:
            if any(q >= self.n_qubits or q < 0 for q in g.qubits):
                raise ValueError(f"gate {g} out of range for {self.n_qubits} qubits")

    def __add__(self, other: "Circuit") -> "Circuit":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch")
        return Circuit(self.n_qubits, self.gates + other.gates)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_qubits": self.n_qubits,
                "gates": [
                    {"kind": g.kind, "qubits": list(g.qubits)}
                    | ({"theta": g.theta} if g.theta is not None else {})
                    for g in self.gates
                ],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        doc = json.loads(text)
        gates = tuple(
            Gate(g["kind"], tuple(g["qubits"]), g.get("theta")) for g in doc["gates"]
        )
        return cls(doc["n_qubits"], gates)


def zero_state(n_qubits: int) -> np.ndarray:
    state = np.zeros(2**n_qubits, dtype=complex)
    state[0] = 1.0
    return state


def apply_gate(state: np.ndarray, g: Gate, n_qubits: int) -> np.ndarray:
    u = gate_matrix(g)
    k = len(g.qubits)
    t = state.reshape((2,) * n_qubits)
    t = np.moveaxis(t, g.qubits, range(k))
    shape = t.shape
    t = (u @ t.reshape(2**k, -1)).reshape(shape)
    t = np.moveaxis(t, range(k), g.qubits)
    return np.ascontiguousarray(t).reshape(-1)


def apply(circuit: Circuit, state: np.ndarray) -> np.ndarray:
    """Exact unitary action of the circuit; the input state is not modified."""
    if state.shape != (2**circuit.n_qubits,):
        raise ValueError("state dimension does not match circuit qubit count")
    out = state.astype(complex, copy=True)
    for g in circuit.gates:
        out = apply_gate(out, g, circuit.n_qubits)
    return out


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of the whole circuit (test/diagnostic sizes only)."""
    dim = 2**circuit.n_qubits
    cols = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        u = gate_matrix(g)
        k = len(g.qubits)
        t = cols.reshape((2,) * circuit.n_qubits + (dim,))
        t = np.moveaxis(t, g.qubits, range(k))
        shape = t.shape
        t = (u @ t.reshape(2**k, -1)).reshape(shape)
        t = np.moveaxis(t, range(k), g.qubits)
        cols = t.reshape(dim, dim)
    return cols


# --- Pauli expectation values -------------------------------------------------


def _index_mask(mask: int, n_qubits: int) -> int:
    """Map a qubit bit mask (bit q = qubit q) to basis-index bit positions."""
    out = 0
    for q in range(n_qubits):
        if (mask >> q) & 1:
            out |= 1 << (n_qubits - 1 - q)
    return out


def apply_pauli(state: np.ndarray, term: PauliTerm) -> np.ndarray:
    n = term.n_qubits
    zi = _index_mask(term.z, n)
    xi = _index_mask(term.x, n)
    idx = np.arange(len(state))
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & zi) & 1)
    phase = (-1j) ** ((term.z & term.x).bit_count())
    return term.coeff * phase * signs * state[idx ^ xi]


def pauli_expectation(state: np.ndarray, term: PauliTerm) -> complex:
    return complex(np.vdot(state, apply_pauli(state, term)))


def expectation(state: np.ndarray, obs: PauliSum, imag_tol: float = 1e-10) -> float:
    """Exact <state|obs|state> for a hermitian observable."""
    if len(state) != 2**obs.n_qubits:
        raise ValueError("state dimension does not match observable qubit count")
    val = sum(pauli_expectation(state, t) for t in obs.terms)
    if abs(val.imag) > imag_tol:
        raise ValueError(f"observable not hermitian: imaginary part {val.imag:g}")
    return float(val.real)


def pauli_sum_matrix(obs: PauliSum) -> np.ndarray:
    """Dense matrix of a Pauli sum (fast path for small qubit counts)."""
    dim = 2**obs.n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(dim, dtype=complex)
    for t in obs.terms:
        cols = np.empty((dim, dim), dtype=complex)
        for j in range(dim):
            cols[:, j] = apply_pauli(eye[:, j], t)
        m += cols
    return m


# --- Hardware-efficient trial states -------------------------------------------


def linear_entangler_pairs(n_qubits: int) -> tuple[tuple[int, int], ...]:
    """Brick pattern on a line: even bonds first, then odd bonds."""
    pairs = [(q, q + 1) for q in range(0, n_qubits - 1, 2)]
    pairs += [(q, q + 1) for q in range(1, n_qubits - 1, 2)]
    return tuple(pairs)


@dataclass(frozen=True, slots=True)
class AnsatzLayout:
    """Layout of the trial state: rotation layers interleaved with entanglers.

    Every layer applies the native Euler sequence RZ - sqrt(X) - RZ to each
    qubit (two parameters per qubit per layer); `depth` entangler blocks
    separate `depth + 1` layers.  Parametrized entangler kinds (crz, crx)
    consume one extra parameter per pair per block and reduce to the
    identity at angle zero.
    """

    n_qubits: int
    depth: int = 1
    entangler_pairs: tuple[tuple[int, int], ...] = field(default=())
    entangler: str = "cnot"

    def __post_init__(self):
        if self.entangler not in ("cnot", "crz", "crx"):
            raise ValueError(f"unsupported entangler {self.entangler!r}")
        if self.depth > 0 and not self.entangler_pairs:
            object.__setattr__(
                self, "entangler_pairs", linear_entangler_pairs(self.n_qubits)
            )

    @property
    def n_parameters(self) -> int:
        n = 2 * self.n_qubits * (self.depth + 1)
        if self.entangler in ("crz", "crx"):
            n += self.depth * len(self.entangler_pairs)
        return n


def build_hets(layout: AnsatzLayout, u) -> Circuit:
    """Circuit preparing the trial state from |0...0> for parameters ``u``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (layout.n_parameters,):
        raise ValueError(
            f"expected {layout.n_parameters} parameters, got {u.shape}"
        )
    gates: list[Gate] = []
    k = 0

    def rotation_layer():
        nonlocal k
        first = u[k : k + layout.n_qubits]
        second = u[k + layout.n_qubits : k + 2 * layout.n_qubits]
        k += 2 * layout.n_qubits
        for q in range(layout.n_qubits):
            gates.append(rz(q, first[q]))
        for q in range(layout.n_qubits):
            gates.append(sqrt_x(q))
        for q in range(layout.n_qubits):
            gates.append(rz(q, second[q]))

    rotation_layer()
    for _ in range(layout.depth):
        for a, b in layout.entangler_pairs:
            if layout.entangler == "cnot":
                gates.append(cnot(a, b))
            elif layout.entangler == "crz":
                gates.append(crz(a, b, u[k]))
                k += 1
            else:
                gates.append(crx(a, b, u[k]))
                k += 1
        rotation_layer()
    return Circuit(layout.n_qubits, tuple(gates))


# --- Sampling with optional noise ----------------------------------------------


@dataclass(frozen=True, slots=True)
class NoiseSpec:
    """Depolarizing gate errors plus classical readout flips.

    ``readout_flip`` lists per-qubit probabilities (p(1->0), p(0->1));
    a single pair is broadcast to all qubits.
    """

    depolarizing_1q: float = 0.0
    depolarizing_2q: float = 0.0
    readout_flip: tuple[tuple[float, float], ...] | None = None
    seed: int = 0

    def __post_init__(self):
        probs = [self.depolarizing_1q, self.depolarizing_2q]
        if self.readout_flip is not None:
            for p10, p01 in self.readout_flip:
                probs += [p10, p01]
        if any(p < 0 or p > 1 for p in probs):
            raise ValueError("noise probabilities must lie in [0, 1]")

    def flip_probs(self, qubit: int) -> tuple[float, float]:
        if self.readout_flip is None:
            return (0.0, 0.0)
        if len(self.readout_flip) == 1:
            return self.readout_flip[0]
        return self.readout_flip[qubit]


_PAULI_1Q_ERR = ("x", "y", "z")
_PAULI_2Q_ERR = tuple(
    (a, b) for a in ("i", "x", "y", "z") for b in ("i", "x", "y", "z")
)[1:]


def _error_gates(pattern, circuit: Circuit) -> list[tuple[int, list[Gate]]]:
    out = []
    for gate_idx, err_idx in pattern:
        g = circuit.gates[gate_idx]
        if len(g.qubits) == 1:
            out.append((gate_idx, [Gate(_PAULI_1Q_ERR[err_idx], g.qubits)]))
        else:
            pa, pb = _PAULI_2Q_ERR[err_idx]
            errs = []
            if pa != "i":
                errs.append(Gate(pa, (g.qubits[0],)))
            if pb != "i":
                errs.append(Gate(pb, (g.qubits[1],)))
            out.append((gate_idx, errs))
    return out


def _run_with_errors(state, circuit: Circuit, inserts) -> np.ndarray:
    by_gate: dict[int, list[Gate]] = {}
    for gate_idx, errs in inserts:
        by_gate.setdefault(gate_idx, []).extend(errs)
    out = state.astype(complex, copy=True)
    for i, g in enumerate(circuit.gates):
        out = apply_gate(out, g, circuit.n_qubits)
        for err in by_gate.get(i, ()):
            out = apply_gate(out, err, circuit.n_qubits)
    return out


def sample(
    state: np.ndarray,
    circuit: Circuit,
    measured: list[int],
    shots: int,
    noise: NoiseSpec | None = None,
    seed: int = 0,
) -> dict[str, int]:
    """Apply ``circuit`` to ``state`` and sample bitstrings on ``measured``.

    With noise, stochastic single-/two-qubit depolarizing Pauli errors are
    inserted after each gate (trajectory method; identical error patterns
    are simulated once) and readout bits are flipped classically.
    Deterministic for a fixed seed.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = circuit.n_qubits
    rng = np.random.default_rng(seed if noise is None else (seed, noise.seed))

    if noise is None or (noise.depolarizing_1q == 0 and noise.depolarizing_2q == 0):
        shot_groups = [((), shots)]
    else:
        probs = np.array(
            [
                noise.depolarizing_1q if len(g.qubits) == 1 else noise.depolarizing_2q
                for g in circuit.gates
            ]
        )
        hits = rng.random((shots, len(circuit.gates))) < probs[None, :]
        patterns: dict[tuple, int] = {}
        for srow in hits:
            gate_ids = np.nonzero(srow)[0]
            key = tuple(
                (int(gi), int(rng.integers(0, 3 if len(circuit.gates[gi].qubits) == 1 else 15)))
                for gi in gate_ids
            )
            patterns[key] = patterns.get(key, 0) + 1
        shot_groups = sorted(patterns.items())

    outcomes = np.empty(shots, dtype=np.int64)
    pos = 0
    dim = 2**n
    for pattern, count in shot_groups:
        final = _run_with_errors(state, circuit, _error_gates(pattern, circuit))
        p = np.abs(final) ** 2
        p = p / p.sum()
        outcomes[pos : pos + count] = rng.choice(dim, size=count, p=p)
        pos += count

    # Extract measured bits (qubit 0 is the most significant index bit).
    bits = np.empty((shots, len(measured)), dtype=np.uint8)
    for col, q in enumerate(measured):
        bits[:, col] = (outcomes >> (n - 1 - q)) & 1

    if noise is not None and noise.readout_flip is not None:
        for col, q in enumerate(measured):
            p10, p01 = noise.flip_probs(q)
            r = rng.random(shots)
            ones = bits[:, col] == 1
            flip = np.where(ones, r < p10, r < p01)
            bits[:, col] ^= flip.astype(np.uint8)

    counts: dict[str, int] = {}
    keys = ["".join(map(str, row)) for row in bits]
    for kstr in keys:
        counts[kstr] = counts.get(kstr, 0) + 1
    return dict(sorted(counts.items()))
