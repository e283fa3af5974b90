"""Measurement planning: commutativity grouping and circuit synthesis.

A set of pairwise commuting Pauli words is written as a GF(2) stabilizer
matrix with N_q Z-rows, N_q X-rows and one phase row.  Clifford gates act
as linear updates on the rows, and a measurement circuit is synthesized
by driving the X block to zero: rank maximization with Hadamards, a PLU
decomposition of the X block (SWAPs for the permutation, CNOTs for the
row reduction), CNOT back substitution, Z-block zeroing with phase gates
and CZs, a global Hadamard layer, and a final sign step.  After that,
every input word equals (-1)^r times a product of Z's over a readout
qubit set, which is exported together with the classical sign.

Dependent or incomplete input sets are allowed: their readout sets may
contain several qubits and signs that cannot be absorbed by Y gates stay
in the exported map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .pauli import CommutationLevel, PauliTerm, commutes
from .simulator import Circuit, Gate, cnot, h, s, swap, y


class SynthesisError(RuntimeError):
    """Internal consistency failure during measurement-circuit synthesis."""


# --- GF(2) helpers --------------------------------------------------------------


def gf2_rank(m: np.ndarray) -> int:
    a = m.copy().astype(np.uint8)
    rank = 0
    rows, cols = a.shape
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if a[r, col]), None)
        if piv is None:
            continue
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        for r in range(rows):
            if r != rank and a[r, col]:
                a[r] ^= a[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def gf2_plu(m: np.ndarray):
    """PLU decomposition over GF(2) with partial row pivoting.

    Returns (transpositions, L, U, pivots) such that applying the
    transpositions in order to ``m`` gives L @ U (mod 2); ``pivots`` is a
    list of (row, column) positions of the pivots of U.
    """
    u = m.copy().astype(np.uint8)
    rows, cols = u.shape
    lower = np.eye(rows, dtype=np.uint8)
    transpositions: list[tuple[int, int]] = []
    pivots: list[tuple[int, int]] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        piv = next((r for r in range(row, rows) if u[r, col]), None)
        if piv is None:
            continue
        if piv != row:
            u[[row, piv]] = u[[piv, row]]
            lower[[row, piv], :row] = lower[[piv, row], :row]
            transpositions.append((row, piv))
        for r in range(row + 1, rows):
            if u[r, col]:
                u[r] ^= u[row]
                lower[r, row] = 1
        pivots.append((row, col))
        row += 1
    return transpositions, lower, u, pivots


def gf2_unit_lower_inverse(lower: np.ndarray) -> np.ndarray:
    n = lower.shape[0]
    inv = np.eye(n, dtype=np.uint8)
    for i in range(n):
        for j in range(i):
            if (lower[i, :i] & inv[:i, j]).sum() % 2:
                inv[i, j] = 1
    return inv


# --- Stabilizer matrix ----------------------------------------------------------


@dataclass
class StabilizerMatrix:
    """(2 N_q + 1) x N GF(2) matrix: Z rows, X rows and a phase row."""

    zmat: np.ndarray  # (n_qubits, n_strings)
    xmat: np.ndarray
    phase: np.ndarray  # (n_strings,)

    @property
    def n_qubits(self) -> int:
        return self.zmat.shape[0]

    @property
    def n_strings(self) -> int:
        return self.zmat.shape[1]

    def copy(self) -> "StabilizerMatrix":
        return StabilizerMatrix(self.zmat.copy(), self.xmat.copy(), self.phase.copy())

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.zmat, self.xmat], axis=0)

    def apply_gate(self, g: Gate) -> None:
        z, x, r = self.zmat, self.xmat, self.phase
        kind = g.kind
        if kind == "h":
            q = g.qubits[0]
            r ^= x[q] & z[q]
            z[q], x[q] = x[q].copy(), z[q].copy()
        elif kind == "s":
            q = g.qubits[0]
            r ^= x[q] & z[q]
            z[q] ^= x[q]
        elif kind == "cnot":
            c, t = g.qubits
            r ^= z[t] & x[c] & (1 ^ x[t] ^ z[c])
            x[t] ^= x[c]
            z[c] ^= z[t]
        elif kind == "swap":
            for gg in (cnot(g.qubits[0], g.qubits[1]),
                       cnot(g.qubits[1], g.qubits[0]),
                       cnot(g.qubits[0], g.qubits[1])):
                self.apply_gate(gg)
        elif kind == "x":
            r ^= z[g.qubits[0]]
        elif kind == "y":
            q = g.qubits[0]
            r ^= z[q] ^ x[q]
        elif kind == "z":
            r ^= x[g.qubits[0]]
        else:
            raise ValueError(f"unsupported gate kind for stabilizer update: {kind}")


def stabilizer_from(paulis: list[PauliTerm]) -> StabilizerMatrix:
    """Column-per-string stabilizer matrix (phase row zero by convention)."""
    if not paulis:
        raise ValueError("empty Pauli set")
    n = paulis[0].n_qubits
    _check_commuting(paulis)
    zmat = np.zeros((n, len(paulis)), dtype=np.uint8)
    xmat = np.zeros((n, len(paulis)), dtype=np.uint8)
    for j, t in enumerate(paulis):
        for q in range(n):
            zmat[q, j] = (t.z >> q) & 1
            xmat[q, j] = (t.x >> q) & 1
    return StabilizerMatrix(zmat, xmat, np.zeros(len(paulis), dtype=np.uint8))


def conjugate(sm: StabilizerMatrix, g: Gate) -> StabilizerMatrix:
    """The stabilizer matrix after conjugating every column by ``g``."""
    out = sm.copy()
    out.apply_gate(g)
    return out


def _check_commuting(paulis: list[PauliTerm]) -> None:
    for i in range(len(paulis)):
        for j in range(i + 1, len(paulis)):
            if not commutes(paulis[i], paulis[j], CommutationLevel.GC):
                raise ValueError(
                    f"strings {i} and {j} do not commute: "
                    f"{paulis[i].label()} vs {paulis[j].label()}"
                )


# --- Grouping -------------------------------------------------------------------


def group_paulis(
    terms: list[PauliTerm], level: CommutationLevel, seed: int = 0
) -> list[list[int]]:
    """Partition term indices into pairwise commuting groups.

    Greedy coloring of the non-commutativity graph with the
    largest-degree-first order (ties broken by index); the seed is
    accepted for interface stability but the default strategy is
    deterministic and ignores it.
    """
    del seed
    n = len(terms)
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if not commutes(terms[i], terms[j], level):
                graph.add_edge(i, j)
    # DSATUR lands close to 2 n_qubits groups on density-matrix Pauli sets,
    # where plain largest-first overshoots.
    coloring = nx.coloring.greedy_color(graph, strategy="saturation_largest_first")
    groups: dict[int, list[int]] = {}
    for node, color in coloring.items():
        groups.setdefault(color, []).append(node)
    out = [sorted(g) for g in groups.values()]
    out.sort(key=lambda g: g[0])
    return out


# --- Synthesis ------------------------------------------------------------------


def _rank_max_hadamards(sm: StabilizerMatrix, gates: list[Gate]) -> None:
    """Greedy Hadamard sweep raising rank(S_X) to rank([S_Z; S_X])."""
    target = gf2_rank(sm.stacked())
    applied: set[int] = set()
    while gf2_rank(sm.xmat) < target:
        progress = False
        current = gf2_rank(sm.xmat)
        for q in range(sm.n_qubits):
            if q in applied:
                continue
            trial = conjugate(sm, h(q))
            if gf2_rank(trial.xmat) > current:
                sm.apply_gate(h(q))
                gates.append(h(q))
                applied.add(q)
                progress = True
                break
        if not progress:
            raise SynthesisError("rank maximization stalled")


def _emit(sm: StabilizerMatrix, gates: list[Gate], g: Gate) -> None:
    sm.apply_gate(g)
    gates.append(g)


def _cz(sm: StabilizerMatrix, gates: list[Gate], a: int, b: int) -> None:
    _emit(sm, gates, h(b))
    _emit(sm, gates, cnot(a, b))
    _emit(sm, gates, h(b))


def _reduce_x_plu(sm: StabilizerMatrix, gates: list[Gate]) -> list[tuple[int, int]]:
    """SWAP/CNOT reduction of the X block via PLU; pivots end on the diagonal."""
    transpositions, lower, _, pivots = gf2_plu(sm.xmat)
    for i, j in transpositions:
        _emit(sm, gates, swap(i, j))
    linv = gf2_unit_lower_inverse(lower)
    for i in range(sm.n_qubits - 1, -1, -1):
        for j in range(i):
            if linv[i, j]:
                _emit(sm, gates, cnot(j, i))
    # Back substitution: clear entries above each pivot, last pivot first.
    for p in range(len(pivots) - 1, -1, -1):
        prow, pcol = pivots[p]
        for i in range(prow - 1, -1, -1):
            if sm.xmat[i, pcol]:
                _emit(sm, gates, cnot(prow, i))
    return pivots


def _reduce_x_no_swaps(sm: StabilizerMatrix, gates: list[Gate]) -> list[tuple[int, int]]:
    """Gauss-Jordan reduction of the X block without SWAPs.

    Measurement qubits follow the pivot rows as found, which realizes the
    trivial-permutation ordering heuristic.
    """
    used: set[int] = set()
    pivots: list[tuple[int, int]] = []
    for col in range(sm.n_strings):
        piv = next(
            (q for q in range(sm.n_qubits) if q not in used and sm.xmat[q, col]), None
        )
        if piv is None:
            continue
        for q in range(sm.n_qubits):
            if q != piv and sm.xmat[q, col]:
                _emit(sm, gates, cnot(piv, q))
        used.add(piv)
        pivots.append((piv, col))
    return pivots


def _zero_z_block(sm: StabilizerMatrix, gates: list[Gate], pivots) -> None:
    for a in range(sm.n_qubits):
        for prow, pcol in pivots:
            if not sm.zmat[a, pcol]:
                continue
            if a == prow:
                _emit(sm, gates, s(a))
            else:
                _cz(sm, gates, prow, a)


def synthesize(
    paulis: list[PauliTerm], order_heuristic: str = "no_swaps"
) -> tuple[Circuit, dict[int, tuple[tuple[int, ...], int]]]:
    """Measurement circuit and readout map for a GC-commuting Pauli set.

    The readout map sends each input index to (qubit tuple, sign): after
    the circuit, string j equals sign * prod_{q in qubits} Z_q exactly.
    """
    if order_heuristic not in ("no_swaps", "plu_swaps"):
        raise ValueError(f"unknown order heuristic {order_heuristic!r}")
    sm = stabilizer_from(paulis)
    n = sm.n_qubits
    gates: list[Gate] = []

    if not np.any(sm.xmat):
        # Already diagonal: read the Z columns directly.
        readout = {
            j: (tuple(int(q) for q in np.nonzero(sm.zmat[:, j])[0]), 1)
            for j in range(sm.n_strings)
        }
        return Circuit(n, ()), readout

    _rank_max_hadamards(sm, gates)
    if order_heuristic == "plu_swaps":
        pivots = _reduce_x_plu(sm, gates)
    else:
        pivots = _reduce_x_no_swaps(sm, gates)
    _zero_z_block(sm, gates, pivots)
    if np.any(sm.zmat):
        raise SynthesisError("Z block not cleared")
    for q in range(n):
        _emit(sm, gates, h(q))
    if np.any(sm.xmat):
        raise SynthesisError("X block not cleared")

    # Sign step: absorb phases with Y gates wherever a qubit reads exactly
    # one column; remaining signs stay classical in the readout map.
    row_degree = sm.zmat.sum(axis=1)
    for j in range(sm.n_strings):
        if sm.phase[j]:
            q = next(
                (int(qq) for qq in np.nonzero(sm.zmat[:, j])[0] if row_degree[qq] == 1),
                None,
            )
            if q is not None:
                _emit(sm, gates, y(q))

    readout = {
        j: (
            tuple(int(q) for q in np.nonzero(sm.zmat[:, j])[0]),
            -1 if sm.phase[j] else 1,
        )
        for j in range(sm.n_strings)
    }
    return Circuit(n, tuple(gates)), readout


# --- Plans and estimation -------------------------------------------------------


@dataclass(frozen=True)
class PlanGroup:
    indices: tuple[int, ...]
    circuit: Circuit
    measured: tuple[int, ...]
    readout: dict[int, tuple[tuple[int, ...], int]]  # input index -> (qubits, sign)


@dataclass(frozen=True)
class MeasurementPlan:
    n_qubits: int
    level: CommutationLevel
    groups: tuple[PlanGroup, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_qubits": self.n_qubits,
                "level": self.level.value,
                "groups": [
                    {
                        "indices": list(g.indices),
                        "circuit": json.loads(g.circuit.to_json()),
                        "measured": list(g.measured),
                        "readout": {
                            str(i): {"qubits": list(q), "sign": sgn}
                            for i, (q, sgn) in sorted(g.readout.items())
                        },
                    }
                    for g in self.groups
                ],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "MeasurementPlan":
        doc = json.loads(text)
        groups = []
        for g in doc["groups"]:
            circuit = Circuit.from_json(json.dumps(g["circuit"]))
            readout = {
                int(i): (tuple(spec["qubits"]), int(spec["sign"]))
                for i, spec in g["readout"].items()
            }
            groups.append(
                PlanGroup(tuple(g["indices"]), circuit, tuple(g["measured"]), readout)
            )
        return cls(doc["n_qubits"], CommutationLevel(doc["level"]), tuple(groups))

    def max_gate_count(self) -> int:
        return max((len(g.circuit.gates) for g in self.groups), default=0)


def plan_measurements(
    terms: list[PauliTerm],
    level: CommutationLevel = CommutationLevel.GC,
    order_heuristic: str = "no_swaps",
    seed: int = 0,
) -> MeasurementPlan:
    """Group terms at the requested level and synthesize one circuit each."""
    if not terms:
        raise ValueError("empty term list")
    n = terms[0].n_qubits
    groups = []
    for indices in group_paulis(terms, level, seed):
        members = [terms[i] for i in indices]
        circuit, local_readout = synthesize(members, order_heuristic)
        readout = {indices[k]: v for k, v in local_readout.items()}
        measured = tuple(sorted({q for qs, _ in readout.values() for q in qs}))
        groups.append(PlanGroup(tuple(indices), circuit, measured, readout))
    return MeasurementPlan(n, level, tuple(groups))


def estimate(
    plan: MeasurementPlan, counts_per_group: list[dict[str, int]]
) -> dict[int, float]:
    """Per-string expectation estimates from per-group bitstring counts."""
    if len(counts_per_group) != len(plan.groups):
        raise ValueError("counts for every plan group are required")
    out: dict[int, float] = {}
    for group, counts in zip(plan.groups, counts_per_group):
        shots = sum(counts.values())
        if shots == 0:
            raise ValueError("empty counts for a plan group")
        pos = {q: k for k, q in enumerate(group.measured)}
        for idx, (qubits, sign) in group.readout.items():
            cols = [pos[q] for q in qubits]
            acc = 0
            for bits, freq in counts.items():
                parity = sum(int(bits[c]) for c in cols) & 1
                acc += -freq if parity else freq
            out[idx] = sign * acc / shots
    return out
