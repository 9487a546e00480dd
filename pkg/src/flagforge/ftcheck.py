"""Fault-injection verification against the distance-3/4/5/7 tolerance rules.

The circuit checkers enumerate every fault set up to the order the claimed
distance requires (optionally sampling beyond a configurable exhaustive
order), propagate each set, apply the outcome table, and compare the reduced
residual weight on the data register against the number of faults:

 * odd distance d, k <= (d-1)/2 faults: residual X and Z weight at most k,
 * distance 4: one fault corrected to weight <= 1 (never rejected), two
   faults rejected or left at weight <= 2.

Sequence-level checking works on an abstract model of stabilizer measurement
where one internal fault is a measurement-bit flip, a single-qubit error
deposited between time steps, or both at once (the hook case), and where the
decoder is a fixed linear solve plus a finite repair table.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from flagforge.codes import DimensionMismatch, StabilizerCode, MeasurementSequence
from flagforge.pauli import (
    DATA,
    FLAG,
    FaultEvent,
    CliffordCircuit,
    PauliOperator,
    propagate,
    single_fault_events,
)
from flagforge.tables import Action, CorrectionTable


class MissingEntry(Exception):
    """A reachable pattern has no table entry and the table has no default."""


class ModeMismatch(Exception):
    """Sequence check mode incompatible with the given code or state."""


@dataclass(frozen=True)
class NotFound:
    """Search outcome: the trial budget ran out without a verified candidate."""

    trials: int


@dataclass(frozen=True)
class Counterexample:
    fault_set: tuple
    flag_pattern: str
    action: str
    residual_weight: int
    allowed_weight: int
    note: str = ""

    def to_json_dict(self) -> dict:
        events = []
        for ev in self.fault_set:
            if isinstance(ev, FaultEvent):
                err = ev.error.label() if isinstance(ev.error, PauliOperator) else str(ev.error)
                events.append({"site": list(ev.site), "error": err})
            else:
                events.append(
                    {"kind": ev.kind, "check": ev.check, "qubit": ev.qubit, "step": ev.step}
                )
        return {
            "fault_set": events,
            "flag_pattern": self.flag_pattern,
            "action": self.action,
            "residual_weight": self.residual_weight,
            "allowed_weight": self.allowed_weight,
            "note": self.note,
        }


@dataclass
class FtReport:
    distance_claimed: int
    verdict: str  # "pass" | "fail"
    counterexamples: list
    fault_sets_examined: int

    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "distance_claimed": self.distance_claimed,
            "verdict": self.verdict,
            "counterexamples": [c.to_json_dict() for c in self.counterexamples],
            "fault_sets_examined": self.fault_sets_examined,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)


def _report(distance: int, cexs: list, examined: int) -> FtReport:
    return FtReport(distance, "fail" if cexs else "pass", cexs, examined)


# -- coset weight queries ----------------------------------------------------


def _pack(bits: np.ndarray) -> int:
    out = 0
    for q in np.nonzero(bits)[0]:
        out |= 1 << int(q)
    return out


def _unpack_bits(value: int, n: int) -> np.ndarray:
    return np.array([(value >> q) & 1 for q in range(n)], dtype=np.uint8)


def _lexkey(value: int, n: int) -> str:
    return "".join(str((value >> q) & 1) for q in range(n))


class _SectorReducer:
    """Minimum coset weight of v + span(gens), gens packed GF(2) vectors.

    Three exact strategies: empty group, full parity group on a support
    (reduced weight is the parity of the overlap), and explicit span
    enumeration for small rank. Results are memoized per queried vector.
    """

    _ENUM_RANK_LIMIT = 22

    def __init__(self, gens: Iterable[int], n: int):
        self.n = n
        pivots: dict = {}
        for g in gens:
            g = int(g)
            while g:
                p = g.bit_length() - 1
                if p in pivots:
                    g ^= pivots[p]
                else:
                    pivots[p] = g
                    break
        self.basis = [pivots[p] for p in sorted(pivots, reverse=True)]
        self.rank = len(self.basis)
        self._memo: dict = {}
        self._span_np = None
        self._span_py = None
        smask = 0
        for b in self.basis:
            smask |= b
        self._smask = smask
        if self.rank == 0:
            self._strategy = "zero"
        elif (
            self.rank == smask.bit_count() - 1
            and all(b.bit_count() % 2 == 0 for b in self.basis)
        ):
            # the group is exactly the even-weight vectors on its support
            self._strategy = "parity"
        elif self.rank <= self._ENUM_RANK_LIMIT:
            self._strategy = "enum"
            if n <= 63:
                span = np.zeros(1 << self.rank, dtype=np.uint64)
                for i, b in enumerate(self.basis):
                    half = 1 << i
                    span[half:2 * half] = span[:half] ^ np.uint64(b)
                self._span_np = span
            else:
                span = [0]
                for b in self.basis:
                    span += [s ^ b for s in span]
                self._span_py = span
        else:
            raise ValueError(
                f"reduction group rank {self.rank} too large for exact coset scan"
            )

    def weight(self, v: int) -> int:
        if self._strategy == "zero":
            return v.bit_count()
        w = self._memo.get(v)
        if w is not None:
            return w
        if self._strategy == "parity":
            w = (v & ~self._smask).bit_count() + ((v & self._smask).bit_count() & 1)
        elif self._span_np is not None:
            w = int(np.bitwise_count(self._span_np ^ np.uint64(v)).min())
        else:
            w = min((v ^ s).bit_count() for s in self._span_py)
        self._memo[v] = w
        return w

    def min_rep(self, v: int) -> int:
        """Lexicographically smallest minimum-weight coset element."""
        if self._strategy == "zero":
            return v
        if self._strategy == "parity":
            base = v & ~self._smask
            if (v & self._smask).bit_count() & 1:
                base |= 1 << (self._smask.bit_length() - 1)
            return base
        if self._span_np is not None:
            coset = self._span_np ^ np.uint64(v)
            weights = np.bitwise_count(coset)
            best = coset[weights == weights.min()]
            return min((int(b) for b in best), key=lambda b: _lexkey(b, self.n))
        best_w = min((v ^ s).bit_count() for s in self._span_py)
        cands = [v ^ s for s in self._span_py if (v ^ s).bit_count() == best_w]
        return min(cands, key=lambda b: _lexkey(b, self.n))


def _sector_gens(code: StabilizerCode, extra: Sequence[PauliOperator], sector: str):
    ops = list(code.x_stabs + code.gauge_x if sector == "x" else code.z_stabs + code.gauge_z)
    gens = []
    for op in ops:
        gens.append(_pack(op.x_bits if sector == "x" else op.z_bits))
    for op in extra:
        bits = op.x_bits if sector == "x" else op.z_bits
        if bits.any():
            gens.append(_pack(bits))
    return gens


# -- circuit-level checking --------------------------------------------------

_FILTERS = {"x": "x_only", "z": "z_only", "full": None, None: None}


class _CircuitContext:
    """Precomputed single-fault effects and reducers for one (circuit, code)."""

    def __init__(
        self,
        circuit: CliffordCircuit,
        code: StabilizerCode,
        extra: Sequence[PauliOperator] = (),
        fault_filter: Optional[str] = None,
    ):
        self.circuit = circuit
        self.data = circuit.qubits_with_role(DATA)
        if code.n != len(self.data):
            raise DimensionMismatch(
                f"code on {code.n} qubits, circuit has {len(self.data)} data qubits"
            )
        self.data_pos = {q: j for j, q in enumerate(self.data)}
        self.flag_out_ids = [
            loc.out_id
            for loc in circuit.measurement_locations()
            if circuit.roles[loc.qubits[0]] == FLAG
        ]
        self.key_width = len(self.flag_out_ids)
        self.adaptive = circuit.is_adaptive()
        self.red_x = _SectorReducer(_sector_gens(code, extra, "x"), code.n)
        self.red_z = _SectorReducer(_sector_gens(code, extra, "z"), code.n)

        by_site: dict = {}
        for ev in single_fault_events(circuit, fault_filter):
            by_site.setdefault(ev.site, []).append(ev)
        self.sites = sorted(by_site)
        # per site: list of (event, flags, rx, rz); adaptive circuits get the
        # events only and re-propagate whole sets, since branch selection is
        # not linear over faults
        self.site_effects = []
        for site in self.sites:
            lst = []
            for ev in by_site[site]:
                if self.adaptive:
                    lst.append((ev, None, None, None))
                else:
                    lst.append((ev,) + self._propagate_effect([ev]))
            self.site_effects.append(lst)
        self._action_cache: dict = {}

    def _propagate_effect(self, events) -> tuple:
        res = propagate(self.circuit, events)
        flags = 0
        for j, oid in enumerate(self.flag_out_ids):
            if res.outcomes.get(oid, 0):
                flags |= 1 << j
        rx = rz = 0
        xb, zb = res.residual.x_bits, res.residual.z_bits
        for q, j in self.data_pos.items():
            if xb[q]:
                rx |= 1 << j
            if zb[q]:
                rz |= 1 << j
        return flags, rx, rz

    def effect(self, entries) -> tuple:
        """Combined (flags, rx, rz) of the chosen per-site entries."""
        if self.adaptive:
            return self._propagate_effect([e[0] for e in entries])
        flags = rx = rz = 0
        for _, f, x, z in entries:
            flags ^= f
            rx ^= x
            rz ^= z
        return flags, rx, rz

    def pattern(self, flags: int) -> str:
        return "".join(str((flags >> j) & 1) for j in range(self.key_width))

    def action_vectors(self, action: Action) -> tuple:
        key = id(action)
        hit = self._action_cache.get(key)
        if hit is None:
            if action.is_correct():
                p = action.pauli
                if p.n != len(self.data):
                    raise DimensionMismatch(
                        "correction width differs from the data register"
                    )
                hit = (_pack(p.x_bits), _pack(p.z_bits))
            else:
                hit = (0, 0)
            self._action_cache[key] = hit
        return hit


def _combo_iter(ctx: _CircuitContext, order: int):
    for site_combo in itertools.combinations(range(len(ctx.sites)), order):
        for chosen in itertools.product(*(ctx.site_effects[i] for i in site_combo)):
            yield chosen


def _sampled_iter(ctx: _CircuitContext, order: int, count: int, rng: random.Random):
    n_sites = len(ctx.sites)
    if n_sites < order:
        return
    for _ in range(count):
        combo = rng.sample(range(n_sites), order)
        yield tuple(rng.choice(ctx.site_effects[i]) for i in sorted(combo))


def _check_fault_sets(
    ctx: _CircuitContext,
    table: CorrectionTable,
    order_plans: Sequence[tuple],
    reject_ok,
    max_counterexamples: int,
) -> tuple:
    """Run the shared fault-set loop. order_plans: (order, iterator) pairs."""
    if table.key_width != ctx.key_width:
        raise ValueError(
            f"table key width {table.key_width} != {ctx.key_width} flag bits"
        )
    cexs: list = []
    examined = 0
    entries = table.entries
    default = table.default
    red_x, red_z = ctx.red_x, ctx.red_z

    # a fault-free run must be accepted untouched
    zero = ctx.pattern(0)
    act0 = entries.get(zero, default)
    if act0 is None:
        raise MissingEntry(f"no action for the fault-free pattern {zero}")
    if not act0.is_identity():
        cexs.append(
            Counterexample((), zero, act0.to_string(), 0, 0, "fault-free run altered")
        )

    for order, iterator in order_plans:
        for chosen in iterator:
            examined += 1
            flags, rx, rz = ctx.effect(chosen)
            key = ctx.pattern(flags)
            action = entries.get(key, default)
            if action is None:
                raise MissingEntry(f"no action for reachable pattern {key}")
            if action.is_reject():
                if not reject_ok(order):
                    cexs.append(
                        Counterexample(
                            tuple(e[0] for e in chosen),
                            key,
                            action.to_string(),
                            max(red_x.weight(rx), red_z.weight(rz)),
                            order,
                            "rejection not allowed at this order",
                        )
                    )
            else:
                cx, cz = ctx.action_vectors(action)
                ex, ez = rx ^ cx, rz ^ cz
                wx = ex.bit_count()
                if wx > order:
                    wx = red_x.weight(ex)
                wz = ez.bit_count()
                if wz > order:
                    wz = red_z.weight(ez)
                if wx > order or wz > order:
                    cexs.append(
                        Counterexample(
                            tuple(e[0] for e in chosen),
                            key,
                            action.to_string(),
                            max(wx, wz),
                            order,
                        )
                    )
            if len(cexs) >= max_counterexamples:
                return cexs, examined
    return cexs, examined


_MAX_ORDER = {3: 1, 4: 2, 5: 2, 7: 3}


def check_circuit_ft(
    circuit: CliffordCircuit,
    table: CorrectionTable,
    code: StabilizerCode,
    distance: int,
    css_type: Optional[str] = "x",
    *,
    extra: Sequence[PauliOperator] = (),
    exhaustive_order: Optional[int] = None,
    sample: int = 0,
    seed: int = 0,
    allow_reject=None,
    max_counterexamples: int = 25,
) -> FtReport:
    """Verify a stabilizer measurement circuit against its outcome table.

    css_type "x" restricts the fault universe to bit-flip style faults (the
    CSS reduction for X-type measurement circuits), "z" to the mirror, and
    "full"/None injects all Pauli options. Orders above exhaustive_order are
    covered by `sample` random fault sets each instead of exhaustively.
    allow_reject: None picks the distance rules (odd distances never reject,
    distance 4 may reject pairs); True/False force it for every order.
    """
    if distance not in _MAX_ORDER:
        raise ValueError(f"unsupported distance {distance}")
    t = _MAX_ORDER[distance]
    ctx = _CircuitContext(circuit, code, extra, _FILTERS[css_type])
    if allow_reject is None:
        reject_ok = (lambda k: k >= 2) if distance == 4 else (lambda k: False)
    else:
        reject_ok = (lambda k: True) if allow_reject else (lambda k: False)
    cutoff = t if exhaustive_order is None else min(exhaustive_order, t)
    rng = random.Random(seed)
    plans = [(k, _combo_iter(ctx, k)) for k in range(1, cutoff + 1)]
    for k in range(cutoff + 1, t + 1):
        if sample:
            plans.append((k, _sampled_iter(ctx, k, sample, rng)))
    cexs, examined = _check_fault_sets(ctx, table, plans, reject_ok, max_counterexamples)
    return _report(distance, cexs, examined)


def check_state_prep_ft(
    circuit: CliffordCircuit,
    table: CorrectionTable,
    code: StabilizerCode,
    distance: int,
    *,
    state: str = "auto",
    css_type: Optional[str] = None,
    allow_reject: bool = False,
    exhaustive_order: Optional[int] = None,
    sample: int = 0,
    seed: int = 0,
    max_counterexamples: int = 25,
) -> FtReport:
    """Verify a state preparation circuit: k faults leave residual weight <= k.

    Residuals are reduced modulo the full stabilizer group of the prepared
    state: for a zero-dimensional code that is the code group itself, for a
    logical-zero preparation the Z logicals join it, for logical-plus the X
    logicals. Detection-style preparations set allow_reject=True, turning
    "weight <= k" into "rejected or weight <= k".
    """
    if state == "auto":
        state = None if code.k == 0 else "zero"
    if state is None:
        extra: tuple = ()
    elif state == "zero":
        extra = code.logical_z
    elif state == "plus":
        extra = code.logical_x
    else:
        raise ValueError(f"unknown state {state!r}")
    if code.k and not extra:
        raise ModeMismatch("code has logical qubits but no target state was given")
    return check_circuit_ft(
        circuit,
        table,
        code,
        distance,
        css_type,
        extra=extra,
        exhaustive_order=exhaustive_order,
        sample=sample,
        seed=seed,
        allow_reject=allow_reject,
        max_counterexamples=max_counterexamples,
    )


def replay_fault_set(circuit: CliffordCircuit, faults: Iterable[FaultEvent]) -> tuple:
    """Re-propagate a fault set: (flag pattern, residual on the data register).

    Counterexamples must reproduce exactly under replay; the checker composes
    single-fault effects linearly, so this is the independent cross-check.
    """
    res = propagate(circuit, tuple(faults))
    flag_ids = [
        loc.out_id
        for loc in circuit.measurement_locations()
        if circuit.roles[loc.qubits[0]] == FLAG
    ]
    pattern = "".join(str(res.outcomes.get(oid, 0)) for oid in flag_ids)
    data = circuit.qubits_with_role(DATA)
    return pattern, res.residual.restricted(data)


# -- canonical table derivation ----------------------------------------------


def _ball_candidates(red: _SectorReducer, resids, n: int) -> set:
    """Correction classes that can satisfy every (residual, bound) member.

    A valid correction leaves each member r within its weight bound k, so
    it sits in the radius-k ball around any single member modulo the
    reduction group. Enumerating the ball of a member with the smallest
    bound therefore covers every valid candidate; the members' own classes
    alone can miss midpoints (members {0, X1X2} admit only X1 or X2).
    """
    r0, k0 = min(resids, key=lambda rk: (rk[1], red.weight(rk[0])))
    cands = {0, red.min_rep(r0)}
    for j in range(1, k0 + 1):
        for qs in itertools.combinations(range(n), j):
            v = r0
            for q in qs:
                v ^= 1 << q
            cands.add(red.min_rep(v))
    return cands


def derive_correction_table(
    circuit: CliffordCircuit,
    code: StabilizerCode,
    css_type: Optional[str] = "x",
    *,
    order: int = 1,
    extra: Sequence[PauliOperator] = (),
    include_pair_rejects: bool = False,
    on_inconsistent: str = "raise",
    default: Optional[Action] = None,
) -> CorrectionTable:
    """Build the outcome table a circuit's flag patterns imply.

    For each pattern some fault set of size <= order can produce, every
    such set's residual is collected with its size as the weight budget;
    a valid correction must bring each member within that budget (per
    sector, modulo the reduction group). Among valid candidates the
    minimum-weight one wins, ties broken by the smallest label string.
    include_pair_rejects adds Reject entries for patterns only fault
    pairs reach (the even-distance convention). on_inconsistent "best"
    keeps the least-violating candidate instead of raising, so
    deliberately broken circuits still yield a table to fail against.
    """
    ctx = _CircuitContext(circuit, code, extra, _FILTERS[css_type])
    members: dict = {}
    for k in range(1, order + 1):
        for chosen in _combo_iter(ctx, k):
            flags, rx, rz = ctx.effect(chosen)
            if flags:
                budgets = members.setdefault(flags, {})
                key = (rx, rz)
                if budgets.get(key, order + 1) > k:
                    budgets[key] = k

    entries = {}
    for flags, budgets in sorted(members.items()):
        resids = [(rx, rz, k) for (rx, rz), k in sorted(budgets.items())]
        # identity wins outright whenever it is valid: weight zero is
        # unbeatable and identity entries are dropped from the table anyway
        if all(
            ctx.red_x.weight(rx) <= k and ctx.red_z.weight(rz) <= k
            for rx, rz, k in resids
        ):
            continue
        # sector validity separates: (cx, cz) works iff cx fixes every rx
        # and cz every rz, so prefilter per sector before pairing; a sector
        # whose residuals all vanish is served exactly by the zero candidate
        # (weight and tie-break string both only grow with a nonzero one)
        cands_x = (
            {0}
            if all(rx == 0 for rx, _, _ in resids)
            else _ball_candidates(ctx.red_x, [(rx, k) for rx, _, k in resids], code.n)
        )
        cands_z = (
            {0}
            if all(rz == 0 for _, rz, _ in resids)
            else _ball_candidates(ctx.red_z, [(rz, k) for _, rz, k in resids], code.n)
        )
        ok_x = [c for c in cands_x if all(ctx.red_x.weight(rx ^ c) <= k for rx, _, k in resids)]
        ok_z = [c for c in cands_z if all(ctx.red_z.weight(rz ^ c) <= k for _, rz, k in resids)]
        pairs = (
            itertools.product(ok_x, ok_z)
            if ok_x and ok_z
            else itertools.product(cands_x, cands_z)
        )
        scored = []
        for cx, cz in pairs:
            bad = sum(
                1
                for rx, rz, k in resids
                if ctx.red_x.weight(rx ^ cx) > k or ctx.red_z.weight(rz ^ cz) > k
            )
            weight = (cx | cz).bit_count()
            scored.append((bad, weight, _lexkey(cx, code.n) + _lexkey(cz, code.n), cx, cz))
        bad, _, _, cx, cz = min(scored)
        if bad and on_inconsistent == "raise":
            raise ValueError(
                f"no correction consistent with pattern {ctx.pattern(flags)}"
            )
        action = Action.correct(
            PauliOperator(code.n, _unpack_bits(cx, code.n), _unpack_bits(cz, code.n))
        )
        if not action.is_identity():
            entries[ctx.pattern(flags)] = action

    if include_pair_rejects:
        seen_pairs = set()
        for chosen in _combo_iter(ctx, 2):
            flags, _, _ = ctx.effect(chosen)
            if flags and flags not in members:
                seen_pairs.add(flags)
        for flags in sorted(seen_pairs):
            entries[ctx.pattern(flags)] = Action.reject()

    return CorrectionTable(
        ctx.key_width, entries, Action.identity() if default is None else default
    )


# -- abstract sequence model ---------------------------------------------------


@dataclass(frozen=True)
class SequenceFault:
    """One abstract fault while running a measurement sequence.

    kind "flip" inverts one measurement bit; "deposit" places a single-qubit
    error on the active sector after the given step; "hook" does both at
    once, the worst a single circuit fault inside one measurement can do;
    "input" is an error already present before the first step.
    """

    kind: str
    check: Optional[int] = None
    qubit: Optional[int] = None
    step: Optional[int] = None


class _SequenceModel:
    def __init__(self, code: StabilizerCode, seq: MeasurementSequence, extra=()):
        if seq.code is not code and seq.code.to_json_dict() != code.to_json_dict():
            raise DimensionMismatch("sequence belongs to a different code")
        self.code = code
        self.n = code.n
        checks = []
        sectors = set()
        for s, step in enumerate(seq.steps):
            for op in step:
                if op.x_bits.any() and op.z_bits.any():
                    raise ValueError("mixed-sector checks are not supported")
                sector = "x" if op.x_bits.any() else "z"
                sectors.add(sector)
                checks.append((s, _pack(op.x_bits if sector == "x" else op.z_bits)))
        if len(sectors) != 1:
            raise ValueError("a sequence must measure one CSS sector")
        self.check_sector = sectors.pop()
        # active errors are the ones the checks anticommute with
        self.error_sector = "z" if self.check_sector == "x" else "x"
        self.checks = checks
        self.n_checks = len(checks)
        self.reducer = _SectorReducer(
            _sector_gens(code, extra, self.error_sector), self.n
        )
        # syndrome column per qubit: which checks see an error there
        self.q_synd = [
            sum(1 << ci for ci, (_, m) in enumerate(checks) if (m >> q) & 1)
            for q in range(self.n)
        ]
        self._build_solver()
        self._repair_cache: dict = {}

    def _build_solver(self):
        basis: list = []  # (pivot, row over qubits, mask over checks)
        cons: list = []
        for ci, (_, m) in enumerate(self.checks):
            row, mask = m, 1 << ci
            for p, r2, m2 in basis:
                if (row >> p) & 1:
                    row ^= r2
                    mask ^= m2
            if row:
                p = row.bit_length() - 1
                basis = [
                    (p2, r2 ^ row, m2 ^ mask) if (r2 >> p) & 1 else (p2, r2, m2)
                    for p2, r2, m2 in basis
                ]
                basis.append((p, row, mask))
            else:
                cons.append(mask)
        self.solver_basis = basis
        self.consistency_masks = cons
        pivots = {p for p, _, _ in basis}
        self.free_qubits = [q for q in range(self.n) if q not in pivots]

    def solve(self, synd: int) -> int:
        """Canonical error pattern with this syndrome, free qubits clear."""
        v = 0
        for p, _, mask in self.solver_basis:
            if (mask & synd).bit_count() & 1:
                v |= 1 << p
        return v

    def syndrome_of(self, pattern: int) -> int:
        s = 0
        while pattern:
            q = pattern.bit_length() - 1
            s ^= self.q_synd[q]
            pattern ^= 1 << q
        return s

    def relative(self, synd: int) -> int:
        """Syndrome part no input pattern explains (the repair key)."""
        return synd ^ self.syndrome_of(self.solve(synd))

    def kernel_leakage(self) -> Optional[int]:
        """An undetectable input pattern outside the reduction group, if any."""
        for q in self.free_qubits:
            kv = (1 << q) ^ self.solve(self.q_synd[q])
            if self.reducer.weight(kv) != 0:
                return kv
        return None

    def internal_atoms(self) -> list:
        """Deduplicated (fault, syndrome, deposit) triples for one fault."""
        atoms = []
        seen = set()

        def add(fault, synd, dep):
            if (synd, dep) not in seen:
                seen.add((synd, dep))
                atoms.append((fault, synd, dep))

        n_steps = max(s for s, _ in self.checks) + 1
        for ci in range(self.n_checks):
            add(SequenceFault("flip", check=ci), 1 << ci, 0)
        # step -1 covers a deposit inside the first measurement's circuit
        # that lands before the check interaction
        for q in range(self.n):
            for s in range(-1, n_steps):
                later = sum(
                    1 << ci
                    for ci, (cs, m) in enumerate(self.checks)
                    if cs > s and (m >> q) & 1
                )
                add(SequenceFault("deposit", qubit=q, step=s), later, 1 << q)
        for ci, (cs, m) in enumerate(self.checks):
            for q in range(self.n):
                if (m >> q) & 1:
                    later = sum(
                        1 << cj
                        for cj, (cs2, m2) in enumerate(self.checks)
                        if cs2 > cs and (m2 >> q) & 1
                    )
                    add(
                        SequenceFault("hook", check=ci, qubit=q, step=cs),
                        (1 << ci) ^ later,
                        1 << q,
                    )
        return atoms

    def input_atoms(self) -> list:
        return [
            (SequenceFault("input", qubit=q), self.q_synd[q], 1 << q)
            for q in range(self.n)
        ]

    def pattern(self, synd: int) -> str:
        return "".join(str((synd >> j) & 1) for j in range(self.n_checks))


def _seq_counterexample(faults, model, synd, action, w, allowed, note=""):
    return Counterexample(tuple(faults), model.pattern(synd), action, w, allowed, note)


def derive_sequence_table(
    code: StabilizerCode,
    seq: MeasurementSequence,
    distance: int,
    mode: str = "state_preparation",
    *,
    state: str = "auto",
    on_inconsistent: str = "raise",
) -> CorrectionTable:
    """Tabulate the canonical decoder for a measurement sequence.

    State preparation tables are keyed by the relative syndrome (the part a
    linear solve cannot attribute to any input pattern); the runtime decoder
    is solve(s) plus the table's repair. Error-correction tables are keyed
    by the observed syndrome itself, defaulting to Reject at distance 4 and
    Identity at distance 3.
    """
    model = _SequenceModel(code, seq, _state_extra(code, state, mode))
    red = model.reducer
    if mode == "state_preparation":
        t = (distance - 1) // 2
        members: dict = {0: [(0, 0)]}
        atoms = model.internal_atoms()
        for k in range(1, t + 1):
            for combo in itertools.combinations(atoms, k):
                synd = dep = 0
                for _, s, d in combo:
                    synd ^= s
                    dep ^= d
                resid = dep ^ model.solve(synd)
                members.setdefault(model.relative(synd), []).append((resid, k))
        entries = {}
        for mkey, resids in sorted(members.items()):
            cands = _ball_candidates(red, resids, code.n)
            scored = []
            for c in cands:
                bad = sum(1 for r, k in resids if red.weight(r ^ c) > k)
                scored.append((bad, c.bit_count(), _lexkey(c, code.n), c))
            bad, _, _, c = min(scored)
            if bad and on_inconsistent == "raise":
                raise ValueError(
                    f"no repair consistent with relative syndrome {model.pattern(mkey)}"
                )
            action = _error_action(model, c)
            if not action.is_identity():
                entries[model.pattern(mkey)] = action
        return CorrectionTable(model.n_checks, entries, Action.identity())

    if mode != "error_correction":
        raise ValueError(f"unknown mode {mode!r}")
    if distance not in (3, 4):
        raise ValueError("error-correction sequences support distances 3 and 4")
    members = {}
    for fault, synd, dep in model.input_atoms():
        members.setdefault(synd, []).append((dep, 0))
    for fault, synd, dep in model.internal_atoms():
        members.setdefault(synd, []).append((dep, 1))
    entries = {}
    pair_only = set()
    if distance == 4:
        atoms = model.input_atoms() + model.internal_atoms()
        for (f1, s1, d1), (f2, s2, d2) in itertools.combinations(atoms, 2):
            s = s1 ^ s2
            if s and s not in members:
                pair_only.add(s)
    for synd, resids in sorted(members.items()):
        if synd == 0:
            continue
        cands = _ball_candidates(red, resids, code.n)
        scored = []
        for c in cands:
            bad = sum(1 for r, k in resids if red.weight(r ^ c) > k)
            scored.append((bad, c.bit_count(), _lexkey(c, code.n), c))
        bad, _, _, c = min(scored)
        if bad and on_inconsistent == "raise":
            raise ValueError(
                f"no correction consistent with syndrome {model.pattern(synd)}"
            )
        action = _error_action(model, c)
        if not action.is_identity():
            entries[model.pattern(synd)] = action
    for synd in sorted(pair_only):
        entries[model.pattern(synd)] = Action.reject()
    default = Action.reject() if distance == 4 else Action.identity()
    return CorrectionTable(model.n_checks, entries, default)


def _error_action(model: _SequenceModel, packed: int) -> Action:
    bits = _unpack_bits(packed, model.n)
    if model.error_sector == "x":
        return Action.correct(PauliOperator(model.n, bits, None))
    return Action.correct(PauliOperator(model.n, None, bits))


def _state_extra(code: StabilizerCode, state: str, mode: str):
    if mode != "state_preparation":
        return ()
    if state == "auto":
        state = None if code.k == 0 else "zero"
    if state is None:
        if code.k:
            raise ModeMismatch(
                "state preparation mode needs a target state for a k > 0 code"
            )
        return ()
    if state == "zero":
        return code.logical_z
    if state == "plus":
        return code.logical_x
    raise ValueError(f"unknown state {state!r}")


def check_sequence_ft(
    code: StabilizerCode,
    seq: MeasurementSequence,
    table: CorrectionTable,
    distance: int,
    mode: str = "error_correction",
    *,
    state: str = "auto",
    allow_reject: Optional[bool] = None,
    max_counterexamples: int = 25,
) -> FtReport:
    """Check a measurement sequence in the abstract fault model.

    error_correction budgets input errors and internal faults jointly
    (distance 3: the two basic rules; distance 4: the five rules plus the
    side condition that no checked fault set may alias the syndrome of a
    one-qubit input error it cannot absorb). state_preparation demands
    that any input pattern plus k internal faults end at residual weight
    at most k, which the relative-syndrome decomposition reduces to a scan
    over internal fault sets alone.
    """
    model = _SequenceModel(code, seq, _state_extra(code, state, mode))
    if table.key_width != model.n_checks:
        raise ValueError(
            f"table key width {table.key_width} != {model.n_checks} checks"
        )
    red = model.reducer
    cexs: list = []
    examined = 0

    def lookup(synd: int) -> Action:
        action = table.entries.get(model.pattern(synd), table.default)
        if action is None:
            raise MissingEntry(f"no action for syndrome {model.pattern(synd)}")
        return action

    def corr_bits(action: Action) -> int:
        if not action.is_correct():
            return 0
        return _pack(
            action.pauli.x_bits if model.error_sector == "x" else action.pauli.z_bits
        )

    if mode == "state_preparation":
        if distance not in (3, 5, 7):
            raise ValueError("state preparation sequences use odd distances")
        t = (distance - 1) // 2
        reject_ok = bool(allow_reject)
        leak = model.kernel_leakage()
        if leak is not None:
            cexs.append(
                Counterexample(
                    (),
                    model.pattern(0),
                    "identity",
                    red.weight(leak),
                    0,
                    "undetectable input pattern outside the state group",
                )
            )
        a0 = lookup(0)
        if not a0.is_identity():
            cexs.append(
                _seq_counterexample((), model, 0, a0.to_string(), 0, 0, "fault-free run altered")
            )
        atoms = model.internal_atoms()
        for k in range(1, t + 1):
            for combo in itertools.combinations(atoms, k):
                examined += 1
                synd = dep = 0
                faults = []
                for f, s, d in combo:
                    faults.append(f)
                    synd ^= s
                    dep ^= d
                action = lookup(model.relative(synd))
                if action.is_reject():
                    if not reject_ok:
                        cexs.append(
                            _seq_counterexample(
                                faults, model, synd, "reject", 0, k,
                                "rejection not allowed in deterministic preparation",
                            )
                        )
                else:
                    resid = dep ^ model.solve(synd) ^ corr_bits(action)
                    w = resid.bit_count()
                    if w > k:
                        w = red.weight(resid)
                    if w > k:
                        cexs.append(
                            _seq_counterexample(
                                faults, model, synd, action.to_string(), w, k
                            )
                        )
                if len(cexs) >= max_counterexamples:
                    return _report(distance, cexs, examined)
        return _report(distance, cexs, examined)

    if mode != "error_correction":
        raise ValueError(f"unknown mode {mode!r}")
    if distance not in (3, 4):
        raise ValueError("error-correction sequences support distances 3 and 4")

    inputs = model.input_atoms()
    internals = model.internal_atoms()
    input_synds = {}
    for f, s, d in inputs:
        input_synds.setdefault(s, []).append(d)

    # scenarios: (input count, internal count, may reject, allowed residual);
    # allowed None means the scenario must reject
    scenarios = [(1, 0, False, 0), (0, 1, False, 1)]
    if distance == 4:
        scenarios += [(2, 0, True, None), (1, 1, True, 1), (0, 2, True, 2)]

    for n_in, n_int, may_reject, allowed in scenarios:
        for in_combo in itertools.combinations(inputs, n_in):
            for int_combo in itertools.combinations(internals, n_int):
                examined += 1
                synd = dep = 0
                faults = []
                for f, s, d in in_combo + int_combo:
                    faults.append(f)
                    synd ^= s
                    dep ^= d
                action = lookup(synd)
                if action.is_reject():
                    if not may_reject:
                        cexs.append(
                            _seq_counterexample(
                                faults, model, synd, "reject", 0,
                                allowed if allowed is not None else 0,
                                "rejection not allowed for this fault set",
                            )
                        )
                elif allowed is None:
                    cexs.append(
                        _seq_counterexample(
                            faults, model, synd, action.to_string(),
                            red.weight(dep ^ corr_bits(action)), 0,
                            "two-qubit input error must be rejected",
                        )
                    )
                else:
                    resid = dep ^ corr_bits(action)
                    w = resid.bit_count()
                    if w > allowed:
                        w = red.weight(resid)
                    if w > allowed:
                        cexs.append(
                            _seq_counterexample(
                                faults, model, synd, action.to_string(), w, allowed
                            )
                        )
                # the side condition: aliasing the syndrome of a one-qubit
                # input error forces that error's correction to fit too
                if (n_in, n_int) != (1, 0) and synd in input_synds:
                    for other in input_synds[synd]:
                        w = red.weight(dep ^ other)
                        bound = allowed if allowed is not None else 0
                        if not (may_reject and action.is_reject()) and w > bound:
                            cexs.append(
                                _seq_counterexample(
                                    faults, model, synd, action.to_string(), w, bound,
                                    "aliases a one-qubit input error it cannot absorb",
                                )
                            )
                if len(cexs) >= max_counterexamples:
                    return _report(distance, cexs, examined)
    return _report(distance, cexs, examined)


def decode_sequence_outcomes(
    code: StabilizerCode,
    seq: MeasurementSequence,
    table: CorrectionTable,
    outcomes: Sequence[int],
    mode: str = "state_preparation",
    *,
    state: str = "auto",
) -> Action:
    """Runtime decoder matching check_sequence_ft's conventions.

    For state preparation the observed bits are split into a linear solve
    plus a table repair; for error correction the bits index the table
    directly.
    """
    model = _SequenceModel(code, seq, _state_extra(code, state, mode))
    synd = 0
    for j, b in enumerate(outcomes):
        if b:
            synd |= 1 << j
    if mode == "error_correction":
        action = table.entries.get(model.pattern(synd), table.default)
        if action is None:
            raise MissingEntry(model.pattern(synd))
        return action
    action = table.entries.get(model.pattern(model.relative(synd)), table.default)
    if action is None:
        raise MissingEntry(model.pattern(model.relative(synd)))
    if action.is_reject():
        return action
    return _error_action(model, model.solve(synd) ^ _pack_action(model, action))


def _pack_action(model: _SequenceModel, action: Action) -> int:
    if not action.is_correct():
        return 0
    return _pack(
        action.pauli.x_bits if model.error_sector == "x" else action.pauli.z_bits
    )


def search_ft_sequence(
    code: StabilizerCode,
    distance: int,
    constraints: dict,
    seed: int = 0,
):
    """Randomized search for a fault-tolerant measurement sequence.

    constraints: allowed_stabilizers (operators to draw from; default the
    code's X stabilizers), n_measurements (total check count), max_steps,
    parallel_width (checks per step), mode ("error_correction" default,
    or "state_preparation"), trials. Returns (MeasurementSequence,
    CorrectionTable) or NotFound. Deterministic for a given seed.
    """
    allowed = list(
        constraints.get("allowed_stabilizers") or code.z_stabs or code.x_stabs
    )
    max_steps = int(constraints.get("max_steps", len(allowed)))
    width = int(constraints.get("parallel_width", 1))
    n_meas = constraints.get("n_measurements")
    mode = constraints.get("mode", "error_correction")
    state = constraints.get("state", "auto")
    trials = int(constraints.get("trials", 400))
    rng = random.Random(seed)

    for trial in range(trials):
        total = int(n_meas) if n_meas else rng.randint(
            max(1, max_steps // 2), max_steps * width
        )
        if total > max_steps * width:
            continue
        picks = [allowed[rng.randrange(len(allowed))] for _ in range(total)]
        steps = []
        i = 0
        while i < len(picks):
            take = min(width, len(picks) - i, 1 + rng.randrange(width))
            step = []
            for op in picks[i:i + take]:
                sup = op.x_bits | op.z_bits
                if any((sup & (o.x_bits | o.z_bits)).any() for o in step):
                    break
                step.append(op)
            steps.append(tuple(step))
            i += len(step)
        if len(steps) > max_steps:
            continue
        try:
            seq = MeasurementSequence(code, tuple(steps))
            table = derive_sequence_table(code, seq, distance, mode, state=state)
        except (ValueError, ModeMismatch):
            continue
        report = check_sequence_ft(
            code, seq, table, distance, mode, state=state, max_counterexamples=1
        )
        if report.passed():
            return seq, table
    return NotFound(trials)
