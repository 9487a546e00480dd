"""CSS stabilizer and subsystem code constructions plus GF(2) services.

Provides weight reduction modulo the stabilizer group (exact coset scan for
small ranks), distance certification by kernel enumeration, and verification
that a physical Clifford realizes a claimed logical action.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from flagforge.pauli import CNOT, IDLE, CliffordCircuit, ContainsMeasurement, PauliOperator


class UnknownCode(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class NotCodePreserving(Exception):
    """The physical map sends some stabilizer outside the stabilizer group."""


class WrongLogical(Exception):
    """Code-preserving, but the induced logical map is not the claimed one."""


# -- GF(2) linear algebra ---------------------------------------------------


def gf2_rref(mat: np.ndarray):
    """Reduced row echelon form over GF(2); returns (rows, pivot columns)."""
    a = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    if a.ndim != 2:
        a = a.reshape(1, -1)
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        hit = None
        for rr in range(r, rows):
            if a[rr, c]:
                hit = rr
                break
        if hit is None:
            continue
        if hit != r:
            a[[r, hit]] = a[[hit, r]]
        sel = a[:, c].astype(bool).copy()
        sel[r] = False
        a[sel] ^= a[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a[:r], pivots


def gf2_rank(mat: np.ndarray) -> int:
    return gf2_rref(mat)[0].shape[0]


def gf2_in_span(rref_rows: np.ndarray, pivots: Sequence[int], v: np.ndarray) -> bool:
    v = (np.asarray(v, dtype=np.uint8) & 1).copy()
    for row, c in zip(rref_rows, pivots):
        if v[c]:
            v ^= row
    return not v.any()


def gf2_kernel(mat: np.ndarray) -> np.ndarray:
    """Basis (rows) of the right kernel {v : mat v = 0}."""
    mat = np.asarray(mat, dtype=np.uint8) & 1
    cols = mat.shape[1]
    rref, pivots = gf2_rref(mat)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, c in zip(rref, pivots):
            if row[f]:
                basis[i, c] = 1
    return basis


def _pack_rows(mat: np.ndarray) -> np.ndarray:
    """Each GF(2) row vector as one uint64 (bit q = qubit q), n <= 64."""
    mat = np.asarray(mat, dtype=np.uint64)
    weights = (np.uint64(1) << np.arange(mat.shape[1], dtype=np.uint64))
    return (mat * weights).sum(axis=1, dtype=np.uint64)


def _span_ints(rows_packed: np.ndarray) -> np.ndarray:
    """All 2^r packed elements of the span, in a fixed enumeration order."""
    out = np.zeros(1 << len(rows_packed), dtype=np.uint64)
    for i, rp in enumerate(np.asarray(rows_packed, dtype=np.uint64)):
        half = 1 << i
        out[half:2 * half] = out[:half] ^ rp
    return out


def _unpack(value: int, n: int) -> np.ndarray:
    return np.array([(int(value) >> q) & 1 for q in range(n)], dtype=np.uint8)


# -- the code type ----------------------------------------------------------


def _vec(p: PauliOperator, sector: str) -> np.ndarray:
    return p.x_bits if sector == "x" else p.z_bits


def _check_pure(ops: Iterable[PauliOperator], sector: str, what: str):
    for p in ops:
        other = p.z_bits if sector == "x" else p.x_bits
        if other.any():
            raise ValueError(f"{what} must be pure {sector.upper()} type")


def _mat(ops: Sequence[PauliOperator], n: int, sector: str) -> np.ndarray:
    if not ops:
        return np.zeros((0, n), dtype=np.uint8)
    return np.array([_vec(p, sector) for p in ops], dtype=np.uint8)


class StabilizerCode:
    """A CSS stabilizer (or subsystem) code with an explicit logical basis.

    x_stabs and z_stabs are pure X and pure Z generators; logical_x[i] pairs
    with logical_z[i]. Gauge lists, when present, hold one generator per
    gauge degree of freedom; gauge operators commute with all stabilizers
    and logicals but not necessarily with each other.
    """

    def __init__(
        self,
        n: int,
        x_stabs: Sequence[PauliOperator],
        z_stabs: Sequence[PauliOperator],
        logical_x: Sequence[PauliOperator] = (),
        logical_z: Sequence[PauliOperator] = (),
        gauge_x: Sequence[PauliOperator] = (),
        gauge_z: Sequence[PauliOperator] = (),
        name: str = "",
    ):
        self.n = int(n)
        self.x_stabs = tuple(x_stabs)
        self.z_stabs = tuple(z_stabs)
        self.logical_x = tuple(logical_x)
        self.logical_z = tuple(logical_z)
        self.gauge_x = tuple(gauge_x)
        self.gauge_z = tuple(gauge_z)
        self.name = name
        self._validate()

    # cached support matrices
    def mat(self, which: str) -> np.ndarray:
        ops, sector = {
            "hx": (self.x_stabs, "x"),
            "hz": (self.z_stabs, "z"),
            "lx": (self.logical_x, "x"),
            "lz": (self.logical_z, "z"),
            "gx": (self.gauge_x, "x"),
            "gz": (self.gauge_z, "z"),
        }[which]
        return _mat(ops, self.n, sector)

    @property
    def k(self) -> int:
        return len(self.logical_x)

    def stabilizers(self) -> tuple:
        return self.x_stabs + self.z_stabs

    def is_subsystem(self) -> bool:
        return bool(self.gauge_x or self.gauge_z)

    def _validate(self):
        for ops in (self.x_stabs, self.z_stabs, self.logical_x, self.logical_z,
                    self.gauge_x, self.gauge_z):
            for p in ops:
                if p.n != self.n:
                    raise DimensionMismatch(f"operator on {p.n} qubits in a {self.n}-qubit code")
        _check_pure(self.x_stabs, "x", "x_stabs")
        _check_pure(self.z_stabs, "z", "z_stabs")
        _check_pure(self.logical_x, "x", "logical_x")
        _check_pure(self.logical_z, "z", "logical_z")
        _check_pure(self.gauge_x, "x", "gauge_x")
        _check_pure(self.gauge_z, "z", "gauge_z")
        if len(self.logical_x) != len(self.logical_z):
            raise ValueError("logical_x and logical_z must pair up")

        hx, hz = self.mat("hx"), self.mat("hz")
        lx, lz = self.mat("lx"), self.mat("lz")
        gx, gz = self.mat("gx"), self.mat("gz")

        if hx.size and hz.size and ((hx @ hz.T) & 1).any():
            raise ValueError("stabilizers do not commute")
        if gf2_rank(hx) != len(self.x_stabs) or gf2_rank(hz) != len(self.z_stabs):
            raise ValueError("stabilizer generators are dependent")

        k = self.k
        if k:
            pair = (lx @ lz.T) & 1
            if not np.array_equal(pair, np.eye(k, dtype=np.uint8)):
                raise ValueError("logical pairing is not symplectic")
            if hz.size and ((lx @ hz.T) & 1).any():
                raise ValueError("logical X does not commute with stabilizers")
            if hx.size and ((lz @ hx.T) & 1).any():
                raise ValueError("logical Z does not commute with stabilizers")
            if gf2_rank(np.vstack([hx, lx])) != len(self.x_stabs) + k:
                raise ValueError("logical X dependent on stabilizers")
            if gf2_rank(np.vstack([hz, lz])) != len(self.z_stabs) + k:
                raise ValueError("logical Z dependent on stabilizers")
        for g, opp, lopp in ((gx, hz, lz), (gz, hx, lx)):
            if g.size and opp.size and ((g @ opp.T) & 1).any():
                raise ValueError("gauge operators do not commute with stabilizers")
            if g.size and lopp.size and ((g @ lopp.T) & 1).any():
                raise ValueError("gauge operators do not commute with logicals")

    # -- serialization ------------------------------------------------------

    @staticmethod
    def _strings(ops) -> list:
        return ["".join(str(int(b)) for b in (p.x_bits | p.z_bits)) for p in ops]

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "x_stabs": self._strings(self.x_stabs),
            "z_stabs": self._strings(self.z_stabs),
            "logical_x": self._strings(self.logical_x),
            "logical_z": self._strings(self.logical_z),
            "gauge_x": self._strings(self.gauge_x),
            "gauge_z": self._strings(self.gauge_z),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def from_json_dict(cls, d: dict) -> "StabilizerCode":
        n = d["n"]

        def ops(key, sector):
            out = []
            for s in d.get(key, []):
                sup = [i for i, ch in enumerate(s) if ch == "1"]
                out.append(PauliOperator.from_support(
                    n, xs=sup if sector == "x" else (), zs=sup if sector == "z" else ()))
            return out

        return cls(
            n,
            ops("x_stabs", "x"), ops("z_stabs", "z"),
            ops("logical_x", "x"), ops("logical_z", "z"),
            ops("gauge_x", "x"), ops("gauge_z", "z"),
            name=d.get("name", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "StabilizerCode":
        return cls.from_json_dict(json.loads(text))

    def __repr__(self):
        return f"StabilizerCode({self.name or '?'}: n={self.n}, k={self.k})"


@dataclass(frozen=True)
class MeasurementSequence:
    """Timed schedule of stabilizer measurements: one inner tuple per step.

    Every measured operator must lie in the owning code's stabilizer group
    (or its gauge group); parallelism within a step is resource-checked only
    when the sequence is lowered to a circuit.
    """

    code: StabilizerCode
    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(tuple(step) for step in self.steps))
        spans = {}
        for step in self.steps:
            for op in step:
                if op.n != self.code.n:
                    raise DimensionMismatch("measured operator size mismatch")
                for sector in ("x", "z"):
                    v = _vec(op, sector)
                    if not v.any():
                        continue
                    if sector not in spans:
                        group = np.vstack([self.code.mat("h" + sector),
                                           self.code.mat("g" + sector)])
                        spans[sector] = gf2_rref(group)
                    if not gf2_in_span(*spans[sector], v):
                        raise ValueError(
                            f"{op.label()} is not in the stabilizer/gauge group")

    def n_measurements(self) -> int:
        return sum(len(step) for step in self.steps)

    def to_json_dict(self) -> dict:
        return {
            "code": self.code.to_json_dict(),
            "steps": [[op.label() for op in step] for step in self.steps],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MeasurementSequence":
        code = StabilizerCode.from_json_dict(d["code"])
        steps = [
            tuple(PauliOperator.from_label(s) for s in step) for step in d["steps"]
        ]
        return cls(code, tuple(steps))


# -- constructions ----------------------------------------------------------


def _xop(n, support) -> PauliOperator:
    return PauliOperator.from_support(n, xs=support)


def _zop(n, support) -> PauliOperator:
    return PauliOperator.from_support(n, zs=support)


def _cat(n: int) -> StabilizerCode:
    if n < 2:
        raise UnknownCode("cat code needs n >= 2")
    z = [_zop(n, (i, i + 1)) for i in range(n - 1)]
    return StabilizerCode(n, [_xop(n, range(n))], z, name=f"cat({n})")


def _steane() -> StabilizerCode:
    rows = [(0, 2, 4, 6), (1, 2, 5, 6), (3, 4, 5, 6)]
    return StabilizerCode(
        7,
        [_xop(7, r) for r in rows],
        [_zop(7, r) for r in rows],
        [_xop(7, (0, 1, 2))],
        [_zop(7, (0, 1, 2))],
        name="steane",
    )


GOLAY_DUAL_GEN = "10000000000111110010010"


def golay_check_supports() -> list:
    """Eleven independent cyclic shifts of the weight-8 generator string."""
    n = 23
    base = [i for i, ch in enumerate(GOLAY_DUAL_GEN) if ch == "1"]
    rows, mat = [], np.zeros((0, n), dtype=np.uint8)
    for s in range(n):
        sup = tuple(sorted((i + s) % n for i in base))
        row = np.zeros((1, n), dtype=np.uint8)
        row[0, list(sup)] = 1
        trial = np.vstack([mat, row])
        if gf2_rank(trial) > mat.shape[0]:
            rows.append(sup)
            mat = trial
    if len(rows) != 11:
        raise ValueError("golay generator shifts do not span an 11-dim space")
    return rows


def _golay() -> StabilizerCode:
    n = 23
    rows = golay_check_supports()
    return StabilizerCode(
        n,
        [_xop(n, r) for r in rows],
        [_zop(n, r) for r in rows],
        [_xop(n, range(n))],
        [_zop(n, range(n))],
        name="golay",
    )


def _surface(d: int) -> StabilizerCode:
    """Rotated layout: d^2 data on a grid, weight-4 bulk, weight-2 boundary."""
    if d not in (3, 4, 5):
        raise UnknownCode(f"surface({d}) not supported")
    n = d * d
    q = lambda r, c: r * d + c
    xs, zs = [], []
    for r in range(d - 1):
        for c in range(d - 1):
            plaq = (q(r, c), q(r, c + 1), q(r + 1, c), q(r + 1, c + 1))
            (xs if (r + c) % 2 == 0 else zs).append(plaq)
    for c in range(d - 1):
        if c % 2 == 1:
            xs.append((q(0, c), q(0, c + 1)))
        if (d - 1 + c) % 2 == 0:
            xs.append((q(d - 1, c), q(d - 1, c + 1)))
    for r in range(d - 1):
        if r % 2 == 0:
            zs.append((q(r, 0), q(r + 1, 0)))
        if (r + d - 1) % 2 == 1:
            zs.append((q(r, d - 1), q(r + 1, d - 1)))
    return StabilizerCode(
        n,
        [_xop(n, s) for s in xs],
        [_zop(n, s) for s in zs],
        [_xop(n, [q(r, 0) for r in range(d)])],
        [_zop(n, [q(0, c) for c in range(d)])],
        name=f"surface({d})",
    )


# 4x4 grid, qubit = 4*row + col. The five weight >= 8 generators span the
# affine functions of the two row bits and two column bits.
_GRID16_GENS = (
    tuple(range(16)),                      # all ones
    tuple(q for q in range(16) if q // 4 >= 2),   # rows 2,3
    tuple(q for q in range(16) if q // 4 % 2),    # rows 1,3
    tuple(q for q in range(16) if q % 4 >= 2),    # cols 2,3
    tuple(q for q in range(16) if q % 4 % 2),     # cols 1,3
)

# Quadratic monomial indicators: row 3, col 3, and the four upper 2x2 blocks.
_GRID16_ROW3 = (12, 13, 14, 15)
_GRID16_COL3 = (3, 7, 11, 15)
_GRID16_BLOCKS = {
    "ae": (10, 11, 14, 15),
    "af": (9, 11, 13, 15),
    "be": (6, 7, 14, 15),
    "bf": (5, 7, 13, 15),
}


def _k6_logicals():
    """Paired so transversal Hadamard induces logical H plus pair swaps."""
    u = [_GRID16_ROW3, _GRID16_COL3, _GRID16_BLOCKS["ae"], _GRID16_BLOCKS["bf"],
         _GRID16_BLOCKS["af"], _GRID16_BLOCKS["be"]]
    v = [u[1], u[0], u[3], u[2], u[5], u[4]]
    lx = [_xop(16, s) for s in u]
    lz = [_zop(16, s) for s in v]
    return lx, lz


def _k6_1644() -> StabilizerCode:
    lx, lz = _k6_logicals()
    return StabilizerCode(
        16,
        [_xop(16, g) for g in _GRID16_GENS],
        [_zop(16, g) for g in _GRID16_GENS],
        lx, lz, name="k6_1644",
    )


def _coset_min_rep(v: np.ndarray, group_rows: np.ndarray) -> np.ndarray:
    """Lex-smallest minimum-weight element of v + span(group_rows)."""
    packed = _span_ints(_pack_rows(group_rows)) ^ _pack_rows(v.reshape(1, -1))[0]
    weights = np.bitwise_count(packed)
    best = packed[weights == weights.min()]
    n = group_rows.shape[1]
    # lex order on the bitstring (qubit 0 first) = numeric order on the
    # bit-reversed packed value; with bit q = qubit q, compare reversed
    def lexkey(val):
        return "".join(str((int(val) >> q) & 1) for q in range(n))
    return _unpack(min(best, key=lexkey), n)


def _promote_cheapest_pair(base: StabilizerCode, new_name: str) -> StabilizerCode:
    """Fix one logical qubit pair as stabilizers, X and Z on the same support.

    Candidates are the current logical classes; the chosen support is the
    lexicographically smallest among minimum-weight coset representatives,
    with ties between classes broken the same way. Both promoted operators
    must commute, so odd-weight classes are skipped.
    """
    hx = base.mat("hx")
    cands = []
    for i, lop in enumerate(base.logical_x):
        rep = _coset_min_rep(lop.x_bits, hx)
        w = int(rep.sum())
        if w % 2:
            continue
        cands.append((w, "".join(map(str, rep.tolist())), i, rep))
    if not cands:
        raise ValueError("no even-weight logical class to promote")
    _, _, _, rep = min(cands)
    sup = np.nonzero(rep)[0].tolist()
    new_x = base.x_stabs + (_xop(base.n, sup),)
    new_z = base.z_stabs + (_zop(base.n, sup),)
    keep_x, keep_z = [], []
    for lx, lz in zip(base.logical_x, base.logical_z):
        if lx.commutes_with(new_z[-1]) and lz.commutes_with(new_x[-1]):
            keep_x.append(lx)
            keep_z.append(lz)
    if len(keep_x) != base.k - 2:
        raise ValueError("promotion did not remove exactly one pair of logical qubits")
    return StabilizerCode(base.n, new_x, new_z, keep_x, keep_z, name=new_name)


def _k4_1644() -> StabilizerCode:
    return _promote_cheapest_pair(_k6_1644(), "k4_1644")


def _k2_1644() -> StabilizerCode:
    return _promote_cheapest_pair(_k4_1644(), "k2_1644")


def _subsystem_16424() -> StabilizerCode:
    k6 = _k6_1644()
    # row/column classes become gauge qubits, the four block pairs stay logical
    return StabilizerCode(
        16,
        k6.x_stabs,
        k6.z_stabs,
        k6.logical_x[2:],
        k6.logical_z[2:],
        gauge_x=[_xop(16, _GRID16_ROW3), _xop(16, _GRID16_COL3)],
        gauge_z=[_zop(16, _GRID16_ROW3), _zop(16, _GRID16_COL3)],
        name="subsystem_16424",
    )


_PLAIN_CODES = {
    "steane": _steane,
    "golay": _golay,
    "k6_1644": _k6_1644,
    "k4_1644": _k4_1644,
    "k2_1644": _k2_1644,
    "subsystem_16424": _subsystem_16424,
}

_NAME_RE = re.compile(r"^([a-z0-9_]+)(?:\((\d+)\))?$")


def make_code(name: str) -> StabilizerCode:
    m = _NAME_RE.match(name.strip())
    if not m:
        raise UnknownCode(f"cannot parse code name {name!r}")
    family, arg = m.group(1), m.group(2)
    if family == "cat":
        if arg is None:
            raise UnknownCode("cat needs a size, like cat(4)")
        return _cat(int(arg))
    if family == "surface":
        if arg is None:
            raise UnknownCode("surface needs a distance, like surface(3)")
        return _surface(int(arg))
    if arg is None and family in _PLAIN_CODES:
        return _PLAIN_CODES[family]()
    raise UnknownCode(f"unknown code {name!r}")


# -- weight reduction -------------------------------------------------------

EXACT_RANK_LIMIT = 24


def reduce_weight(
    p: PauliOperator,
    code: StabilizerCode,
    extra: Sequence[PauliOperator] = (),
    return_certificate: bool = False,
):
    """Minimum-weight element of the coset p * S.

    S is the group generated by the code's stabilizers plus any `extra`
    operators (state preparation checks pass logicals here). Exact by
    exhaustive coset scan while the total rank stays at or below
    EXACT_RANK_LIMIT; beyond that a greedy descent runs instead and the
    certificate flag comes back False.
    """
    if p.n != code.n:
        raise DimensionMismatch(f"operator on {p.n} qubits, code on {code.n}")
    xg = [s.x_bits for s in code.x_stabs + code.gauge_x]
    zg = [s.z_bits for s in code.z_stabs + code.gauge_z]
    for op in extra:
        if op.x_bits.any():
            xg.append(op.x_bits)
        if op.z_bits.any():
            zg.append(op.z_bits)
    xmat = gf2_rref(np.array(xg, dtype=np.uint8))[0] if xg else np.zeros((0, code.n), np.uint8)
    zmat = gf2_rref(np.array(zg, dtype=np.uint8))[0] if zg else np.zeros((0, code.n), np.uint8)

    if xmat.shape[0] + zmat.shape[0] <= EXACT_RANK_LIMIT:
        xs = _span_ints(_pack_rows(xmat)) ^ _pack_rows(p.x_bits.reshape(1, -1))[0]
        zs = _span_ints(_pack_rows(zmat)) ^ _pack_rows(p.z_bits.reshape(1, -1))[0]
        support = np.bitwise_count(xs[:, None] | zs[None, :])
        i, j = np.unravel_index(np.argmin(support), support.shape)
        wmin = support[i, j]
        # deterministic tie break: smallest packed pair among the minima
        ii, jj = np.nonzero(support == wmin)
        keys = [(int(xs[a]), int(zs[b])) for a, b in zip(ii.tolist(), jj.tolist())]
        bx, bz = min(keys)
        out = PauliOperator(code.n, _unpack(bx, code.n), _unpack(bz, code.n))
        return (out, True) if return_certificate else out

    # greedy descent with single generator steps, restarted from p itself
    gens = [PauliOperator(code.n, x, None) for x in xmat] + [
        PauliOperator(code.n, None, z) for z in zmat
    ]
    best = p
    improved = True
    while improved:
        improved = False
        for g in gens:
            cand = best * g
            if cand.weight() < best.weight():
                best = cand
                improved = True
    return (best, False) if return_certificate else best


# -- distance ---------------------------------------------------------------

_KERNEL_ENUM_LIMIT = 26


def _sector_distance(code: StabilizerCode, sector: str, bound: int) -> Optional[int]:
    """Smallest weight of a sector-type logical, or None if > bound."""
    opp = code.mat("hz" if sector == "x" else "hx")
    own = np.vstack([code.mat("h" + sector), code.mat("g" + sector)])
    kern = gf2_kernel(opp) if opp.size else np.eye(code.n, dtype=np.uint8)
    if kern.shape[0] == 0:
        return None
    own_rref = gf2_rref(own)
    if kern.shape[0] <= _KERNEL_ENUM_LIMIT:
        packed = _span_ints(_pack_rows(kern))
        weights = np.bitwise_count(packed)
        order = np.argsort(weights, kind="stable")
        for idx in order:
            w = int(weights[idx])
            if w == 0:
                continue
            if bound is not None and w > bound:
                return None
            v = _unpack(int(packed[idx]), code.n)
            if not gf2_in_span(*own_rref, v):
                return w
        return None
    raise ValueError("kernel too large for exhaustive distance certification")


def check_distance(code: StabilizerCode, bound: int = None, sector: str = None):
    """Certified minimum weight of a nontrivial logical operator.

    CSS codes admit a minimum-weight logical of pure type, so the overall
    distance is the smaller of the two sector distances. Subsystem codes get
    the dressed distance (reduction modulo gauge as well). Returns None when
    nothing is found up to `bound`, which certifies distance > bound.
    """
    if sector is not None:
        return _sector_distance(code, sector, bound)
    dx = _sector_distance(code, "x", bound)
    dz = _sector_distance(code, "z", bound)
    if dx is None:
        return dz
    if dz is None:
        return dx
    return min(dx, dz)


# -- symplectic maps and logical action -------------------------------------


class SymplecticMap:
    """2n x 2n GF(2) matrix acting on (x | z) row vectors by v -> v @ m."""

    def __init__(self, n: int, matrix: np.ndarray):
        self.n = int(n)
        m = np.asarray(matrix, dtype=np.uint8) & 1
        if m.shape != (2 * n, 2 * n):
            raise DimensionMismatch("matrix must be 2n x 2n")
        # preserving commutation relations means m J m^T = J
        j = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        j[:n, n:] = np.eye(n, dtype=np.uint8)
        j[n:, :n] = np.eye(n, dtype=np.uint8)
        if not np.array_equal((m @ j @ m.T) & 1, j):
            raise ValueError("matrix is not symplectic")
        self.matrix = m

    @classmethod
    def identity(cls, n: int) -> "SymplecticMap":
        return cls(n, np.eye(2 * n, dtype=np.uint8))

    @classmethod
    def from_circuit(cls, circuit: CliffordCircuit) -> "SymplecticMap":
        n = circuit.n_qubits
        m = np.eye(2 * n, dtype=np.uint8)
        for _, _, loc in circuit.locations():
            if loc.kind == CNOT:
                c, t = loc.qubits
                m[:, n + c] ^= m[:, n + t]
                m[:, t] ^= m[:, c]
            elif loc.kind != IDLE:
                raise ContainsMeasurement(f"{loc.kind} has no symplectic action")
        return cls(n, m)

    @classmethod
    def transversal_h(cls, n: int) -> "SymplecticMap":
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        m[:n, n:] = np.eye(n, dtype=np.uint8)
        m[n:, :n] = np.eye(n, dtype=np.uint8)
        return cls(n, m)

    @classmethod
    def qubit_permutation(cls, n: int, perm: Sequence[int]) -> "SymplecticMap":
        """perm[i] is where qubit i is sent."""
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        for i, p in enumerate(perm):
            m[i, p] = 1
            m[n + i, n + p] = 1
        return cls(n, m)

    @classmethod
    def cz_pairs(cls, n: int, pairs: Sequence[tuple]) -> "SymplecticMap":
        m = np.eye(2 * n, dtype=np.uint8)
        for a, b in pairs:
            m[a, n + b] ^= 1
            m[b, n + a] ^= 1
        return cls(n, m)

    @classmethod
    def s_gates(cls, n: int, qubits: Sequence[int]) -> "SymplecticMap":
        m = np.eye(2 * n, dtype=np.uint8)
        for q in qubits:
            m[q, n + q] ^= 1
        return cls(n, m)

    def compose(self, then: "SymplecticMap") -> "SymplecticMap":
        """First self, then the other map."""
        if self.n != then.n:
            raise DimensionMismatch("size mismatch")
        return SymplecticMap(self.n, (self.matrix @ then.matrix) & 1)

    def apply(self, p: PauliOperator) -> PauliOperator:
        if p.n != self.n:
            raise DimensionMismatch("size mismatch")
        v = (np.concatenate([p.x_bits, p.z_bits]) @ self.matrix) & 1
        return PauliOperator(self.n, v[: self.n], v[self.n:])


class LogicalAction:
    """Claimed action on the 2k logical generators (X_1..X_k, Z_1..Z_k)."""

    def __init__(self, k: int, matrix: np.ndarray):
        self.k = int(k)
        m = np.asarray(matrix, dtype=np.uint8) & 1
        if m.shape != (2 * k, 2 * k):
            raise DimensionMismatch("matrix must be 2k x 2k")
        self.matrix = m

    @classmethod
    def identity(cls, k: int) -> "LogicalAction":
        return cls(k, np.eye(2 * k, dtype=np.uint8))

    @classmethod
    def hadamard(cls, k: int, perm: Sequence[int] = None) -> "LogicalAction":
        """X_i -> Z_perm[i], Z_i -> X_perm[i]; identity permutation default."""
        perm = list(perm) if perm is not None else list(range(k))
        m = np.zeros((2 * k, 2 * k), dtype=np.uint8)
        for i, p in enumerate(perm):
            m[i, k + p] = 1
            m[k + i, p] = 1
        return cls(k, m)

    @classmethod
    def permutation(cls, k: int, perm: Sequence[int]) -> "LogicalAction":
        m = np.zeros((2 * k, 2 * k), dtype=np.uint8)
        for i, p in enumerate(perm):
            m[i, p] = 1
            m[k + i, k + p] = 1
        return cls(k, m)

    @classmethod
    def cz(cls, k: int, a: int, b: int) -> "LogicalAction":
        m = np.eye(2 * k, dtype=np.uint8)
        m[a, k + b] ^= 1
        m[b, k + a] ^= 1
        return cls(k, m)

    def compose(self, then: "LogicalAction") -> "LogicalAction":
        return LogicalAction(self.k, (self.matrix @ then.matrix) & 1)

    def to_json_dict(self) -> dict:
        return {"k": self.k,
                "rows": ["".join(map(str, r.tolist())) for r in self.matrix]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "LogicalAction":
        rows = [[int(ch) for ch in r] for r in d["rows"]]
        return cls(d["k"], np.array(rows, dtype=np.uint8))


def _as_symplectic(physical, n: int):
    """Normalize the physical description to (SymplecticMap, net Pauli)."""
    if isinstance(physical, SymplecticMap):
        return physical, None
    if isinstance(physical, CliffordCircuit):
        return SymplecticMap.from_circuit(physical), None
    if isinstance(physical, PauliOperator):
        return SymplecticMap.identity(n), physical
    if isinstance(physical, tuple) and len(physical) == 2:
        smap, pauli = physical
        return _as_symplectic(smap, n)[0], pauli
    raise TypeError(f"cannot interpret physical operation {physical!r}")


def verify_logical_action(code: StabilizerCode, physical, claimed: LogicalAction,
                          strict: bool = False) -> bool:
    """True iff the physical map preserves the code and acts as claimed.

    Raises NotCodePreserving when a stabilizer image leaves the stabilizer
    (plus gauge) group. A preserved group with the wrong induced logical map
    returns False, or raises WrongLogical when strict is set. A net Pauli
    that anticommutes with some stabilizer also counts as a wrong logical:
    it moves code states off the code space in a detectable way.
    """
    smap, pauli = _as_symplectic(physical, code.n)
    if smap.n != code.n:
        raise DimensionMismatch("map size mismatch")
    if claimed.k != code.k:
        raise DimensionMismatch("claimed action has the wrong number of logical qubits")

    n = code.n
    group = []
    for p in code.stabilizers() + code.gauge_x + code.gauge_z:
        group.append(np.concatenate([p.x_bits, p.z_bits]))
    group = np.array(group, dtype=np.uint8) if group else np.zeros((0, 2 * n), np.uint8)
    group_rref = gf2_rref(group)

    for s in code.stabilizers():
        img = smap.apply(s)
        v = np.concatenate([img.x_bits, img.z_bits])
        if not gf2_in_span(*group_rref, v):
            raise NotCodePreserving(f"image of {s.label()} leaves the group")

    def fail(msg):
        if strict:
            raise WrongLogical(msg)
        return False

    if pauli is not None:
        for s in code.stabilizers():
            if not s.commutes_with(pauli):
                return fail(f"net Pauli flips the sign of {s.label()}")

    basis = list(code.logical_x) + list(code.logical_z)
    basis_vecs = [np.concatenate([p.x_bits, p.z_bits]) for p in basis]
    for i, lop in enumerate(basis):
        img = smap.apply(lop)
        want = np.zeros(2 * n, dtype=np.uint8)
        for j in range(2 * code.k):
            if claimed.matrix[i, j]:
                want ^= basis_vecs[j]
        diff = np.concatenate([img.x_bits, img.z_bits]) ^ want
        if not gf2_in_span(*group_rref, diff):
            return fail(f"logical generator {i} maps off target")
    return True
