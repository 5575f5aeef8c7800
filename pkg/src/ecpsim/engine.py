"""Protocol execution: one engine path from circuit document to report.

``execute`` lowers a circuit document to a protocol plan by structural
analysis rather than blind statement-by-statement interpretation: the
standard concentration topology (optional polarizing split, one or two arms
of variable coupler + optional nondemolition comparison + heralding coupler
+ feed-forward flip, optional recycling coupler, optional polarizing merge)
is recognized from the wiring.  The nondemolition comparison makes parts of
the mesh conditional (the kept component moves on to the heralding coupler,
the rejected component to the recycling coupler), which is why the document
cannot simply be folded left to right.  Documents with only sources and an
output run as trivial pass-throughs; anything else that does not fit the
concentration shape is rejected.

Two accounting conventions are supported:

* ``branch``: each arm is propagated with its own auxiliary photon on the
  unnormalized component of the input it acts on, and probabilities are
  squared norms summed over arms.  This reproduces the published
  per-branch bookkeeping, including its overcounting of the shared
  signal-at-home component (surfaced in the comparison block, never
  silently corrected).
* ``joint``: the full multi-photon state evolves coherently and success
  requires every arm's detector group to click in the same run, with the
  detector efficiency raised to the number of groups.

States stay unnormalized throughout; squared norms are absolute
probabilities.  Recycling rounds rebuild the auxiliary photon, rebind the
coupler transmittance from the doubling schedule, and continue on the
corrected residual; the distinct recycle click patterns must agree after
correction (an internal invariant, checked) so the rounds form a single
chain rather than a branching tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

from .circuits import builtin_doc
from .dsl import (
    BsDecl,
    CircuitDoc,
    CircuitError,
    DetectDecl,
    FlipDecl,
    PbsMergeDecl,
    PbsSplitDecl,
    QndDecl,
    SourceDecl,
    VbsDecl,
    evaluate_expr,
    evaluate_real,
)
from .elements import apply_bs, apply_pbs, apply_pbs_merge, apply_vbs
from .fock import State, fidelity, pattern_count, single_photon, tensor
from .formulas import (
    branch_success_minus,
    branch_success_plus,
    claimed_total,
    joint_total_one_round,
    qnd_round_success,
    round_success_series,
)
from .measurement import DetectorGroup, DetectorModel, IDEAL_DETECTORS, herald, qnd_component
from .params import EntanglementParams, PolarizationParams, vbs_schedule
from .report import EngineInfo, ProtocolReport, RoundResult, comparison_entry

RECYCLE_AGREEMENT_TOL = 1e-9


class TopologyError(CircuitError):
    """The document does not describe a supported concentration layout."""


class ConfigError(ValueError):
    """Run configuration inconsistent with the circuit (rounds, schedule)."""


@dataclass
class ArmPlan:
    label: str
    signal_mode: str
    aux_sources: list[SourceDecl]
    vbs: VbsDecl
    qnd: QndDecl | None
    success_bs: BsDecl
    success_group: DetectDecl
    flips: dict[str, str]
    recycle_bs: BsDecl | None = None
    recycle_group: DetectDecl | None = None
    recycle_flips: dict[str, str] = dc_field(default_factory=dict)


@dataclass
class Plan:
    doc: CircuitDoc
    trivial: bool
    signal_sources: list[SourceDecl]
    photon_groups: list[list[SourceDecl]]
    split: PbsSplitDecl | None
    arms: list[ArmPlan]
    merge: PbsMergeDecl | None
    outputs: tuple[str, ...]

    @property
    def protocol(self) -> str:
        return "ecp2" if any(a.qnd for a in self.arms) else "ecp1"

    @property
    def has_recycling(self) -> bool:
        return any(a.recycle_bs for a in self.arms)


def _photon_groups(doc: CircuitDoc) -> list[list[SourceDecl]]:
    groups: dict[object, list[SourceDecl]] = {}
    for i, st in enumerate(doc.statements):
        if isinstance(st, SourceDecl):
            key = st.photon if st.photon is not None else ("#anon", i)
            groups.setdefault(key, []).append(st)
    return list(groups.values())


def analyze(doc: CircuitDoc) -> Plan:
    """Recognize the concentration topology; raise TopologyError otherwise."""
    groups = _photon_groups(doc)
    vbs_list = [st for st in doc.statements if isinstance(st, VbsDecl)]
    bs_list = [st for st in doc.statements if isinstance(st, BsDecl)]
    qnd_list = [st for st in doc.statements if isinstance(st, QndDecl)]
    detect_list = [st for st in doc.statements if isinstance(st, DetectDecl)]
    flip_list = [st for st in doc.statements if isinstance(st, FlipDecl)]
    splits = [st for st in doc.statements if isinstance(st, PbsSplitDecl)]
    merges = [st for st in doc.statements if isinstance(st, PbsMergeDecl)]
    outputs = doc.output_modes()

    if not vbs_list:
        if bs_list or qnd_list or detect_list or splits or merges:
            raise TopologyError(
                "circuit has optical elements but no variable coupler arms"
            )
        return Plan(doc, True, [s for g in groups for s in g], groups, None, [], None, outputs)

    # attach one auxiliary photon to each coupler arm
    remaining = list(groups)
    aux_of: dict[int, list[SourceDecl]] = {}
    for i, v in enumerate(vbs_list):
        matches = [g for g in remaining if {s.mode for s in g} == {v.inp}]
        if len(matches) != 1:
            raise TopologyError(
                f"variable coupler on {v.inp!r} needs exactly one dedicated source photon"
            )
        aux_of[i] = matches[0]
        remaining.remove(matches[0])
    if len(remaining) != 1:
        raise TopologyError(
            f"expected exactly one signal photon, found {len(remaining)}"
        )
    signal_sources = remaining[0]
    signal_support = {s.mode for s in signal_sources}

    if len(splits) > 1:
        raise TopologyError("more than one polarizing split")
    split = splits[0] if splits else None
    if split is not None and split.inp not in signal_support:
        raise TopologyError("polarizing split does not consume the signal photon")
    if len(merges) > 1:
        raise TopologyError("more than one polarizing merge")
    merge = merges[0] if merges else None

    claimed_bs: set[int] = set()
    claimed_qnd: set[int] = set()
    claimed_detect: set[int] = set()
    arms: list[ArmPlan] = []
    for i, v in enumerate(vbs_list):
        touching = [
            (j, b) for j, b in enumerate(bs_list) if v.reflect in (b.in1, b.in2)
        ]
        success = [(j, b) for j, b in touching if v.transmit not in (b.in1, b.in2)]
        recycle = [(j, b) for j, b in touching if v.transmit in (b.in1, b.in2)]
        if len(success) != 1 or len(recycle) > 1:
            raise TopologyError(
                f"arm at coupler {v.inp!r}: expected one heralding coupler "
                f"and at most one recycling coupler on {v.reflect!r}"
            )
        j, sbs = success[0]
        claimed_bs.add(j)
        signal_mode = sbs.in2 if sbs.in1 == v.reflect else sbs.in1
        allowed = {split.out_h, split.out_v} if split else signal_support
        if signal_mode not in allowed:
            raise TopologyError(
                f"heralding coupler input {signal_mode!r} is not a signal-side mode"
            )
        qnds = [q for q in qnd_list if {q.a, q.b} == {signal_mode, v.reflect}]
        if len(qnds) > 1:
            raise TopologyError(f"duplicate nondemolition comparison on arm {signal_mode!r}")
        for qi, q in enumerate(qnd_list):
            if qnds and q is qnds[0]:
                claimed_qnd.add(qi)
        qnd = qnds[0] if qnds else None
        sgroup = _group_for(detect_list, sbs, claimed_detect)
        flips = {
            f.when: f.mode for f in flip_list if f.when in sgroup.modes
        }
        arm = ArmPlan(
            label="",
            signal_mode=signal_mode,
            aux_sources=aux_of[i],
            vbs=v,
            qnd=qnd,
            success_bs=sbs,
            success_group=sgroup,
            flips=flips,
        )
        if recycle:
            rj, rbs = recycle[0]
            if qnd is None:
                raise TopologyError(
                    "recycling coupler requires a nondemolition comparison on the arm"
                )
            claimed_bs.add(rj)
            arm.recycle_bs = rbs
            arm.recycle_group = _group_for(detect_list, rbs, claimed_detect)
            arm.recycle_flips = {
                f.when: f.mode for f in flip_list if f.when in arm.recycle_group.modes
            }
        arms.append(arm)

    if len(claimed_bs) != len(bs_list):
        raise TopologyError("coupler not attached to any arm")
    if len(claimed_qnd) != len(qnd_list):
        raise TopologyError("nondemolition comparison not attached to any arm")
    if len(claimed_detect) != len(detect_list):
        raise TopologyError("detector group not attached to any arm")
    if len(arms) > 2:
        raise TopologyError(f"more than two arms ({len(arms)})")
    if len(arms) == 2 and split is None:
        raise TopologyError("two arms need a polarizing split")
    if len(arms) == 2 and merge is None:
        raise TopologyError("two arms need a polarizing merge")

    if split is not None and len(arms) == 2:
        plus = next(a for a in arms if a.signal_mode == split.out_v)
        minus = next(a for a in arms if a.signal_mode == split.out_h)
        plus.label, minus.label = "plus", "minus"
        arms = [plus, minus]
    else:
        arms[0].label = "plus"

    recycling = [bool(a.recycle_bs) for a in arms]
    if len(set(recycling)) != 1:
        raise TopologyError("either every arm recycles or none does")

    return Plan(doc, False, signal_sources, groups, split, arms, merge, outputs)


def _group_for(
    detect_list: list[DetectDecl], bs: BsDecl, claimed: set[int]
) -> DetectDecl:
    wanted = {bs.out1, bs.out2}
    for i, g in enumerate(detect_list):
        if set(g.modes) == wanted:
            if i in claimed:
                raise TopologyError(f"detector group {g.group!r} claimed twice")
            claimed.add(i)
            return g
    raise TopologyError(f"no detector group covers coupler outputs {sorted(wanted)}")


# ---------------------------------------------------------------------------
# state construction

def _source_state(sources: list[SourceDecl], bindings: dict[str, complex]) -> State:
    return single_photon(
        [(s.mode, s.pol, evaluate_expr(s.amp, bindings)) for s in sources]
    )


def prepare_initial(
    ent: EntanglementParams, pol: PolarizationParams | None = None
) -> State:
    """The shared input photon before any optics.

    Polarized: four components over the two spatial modes; stripped (no
    polarization parameters): two V components.
    """
    if pol is None:
        return single_photon([("a1", "V", ent.alpha), ("b2", "V", ent.beta)])
    return single_photon(
        [
            ("a1", "H", ent.alpha * pol.gamma),
            ("a1", "V", ent.alpha * pol.delta),
            ("b1", "H", ent.beta * pol.gamma),
            ("b1", "V", ent.beta * pol.delta),
        ]
    )


def _detector_group(g: DetectDecl) -> DetectorGroup:
    return DetectorGroup(g.group, g.modes, g.require, g.eta)


def _combine_recycle(raws: list[State]) -> State:
    """Collapse equivalent recycle continuations into one weighted state."""
    if not raws:
        return State()
    first = raws[0]
    for other in raws[1:]:
        if fidelity(first, other) < 1.0 - RECYCLE_AGREEMENT_TOL:
            raise RuntimeError(
                "recycle click patterns disagree after correction; "
                "feed-forward rules are inconsistent with the coupler convention"
            )
    total = sum(r.norm_sq() for r in raws)
    return first.scaled(math.sqrt(total / first.norm_sq()))


def _target_state(outputs: tuple[str, ...], pol: PolarizationParams | None) -> State:
    comps = []
    for m in outputs:
        if pol is None:
            comps.append((m, "V", 1.0))
        else:
            comps.append((m, "H", pol.gamma))
            comps.append((m, "V", pol.delta))
    return single_photon(comps).normalized()


# ---------------------------------------------------------------------------
# per-arm branch propagation

@dataclass
class _ArmRound:
    t: float
    p_success: float
    p_recycle: float
    success_raws: list[State]
    recycle_next: State = dc_field(default_factory=State)


def _run_arm(
    arm: ArmPlan,
    input_raw: State,
    ts: list[float],
    bindings: dict[str, complex],
    model: DetectorModel,
) -> list[_ArmRound]:
    results = []
    current = input_raw
    for t in ts:
        if current.is_empty:
            results.append(_ArmRound(t, 0.0, 0.0, []))
            continue
        aux = _source_state(arm.aux_sources, bindings)
        aux = apply_vbs(aux, arm.vbs.inp, arm.vbs.reflect, arm.vbs.transmit, t)
        work = tensor(current, aux)
        if arm.qnd is not None:
            kept = qnd_component(work, arm.qnd.a, arm.qnd.b, 1)
            dropped = qnd_component(work, arm.qnd.a, arm.qnd.b, 0)
        else:
            kept, dropped = work, None
        p_succ = 0.0
        raws: list[State] = []
        if not kept.is_empty:
            after = apply_bs(
                kept,
                arm.success_bs.in1,
                arm.success_bs.in2,
                arm.success_bs.out1,
                arm.success_bs.out2,
            )
            for o in herald(after, [_detector_group(arm.success_group)], model, arm.flips):
                if o.success:
                    p_succ += o.probability
                    raws.append(o.corrected_raw())
        p_rec = 0.0
        nxt = State()
        if arm.recycle_bs is not None and dropped is not None and not dropped.is_empty:
            rec = apply_bs(
                dropped,
                arm.recycle_bs.in1,
                arm.recycle_bs.in2,
                arm.recycle_bs.out1,
                arm.recycle_bs.out2,
            )
            rec_raws = []
            for o in herald(
                rec, [_detector_group(arm.recycle_group)], model, arm.recycle_flips
            ):
                if o.success:
                    p_rec += o.weight
                    rec_raws.append(o.corrected_raw())
            nxt = _combine_recycle(rec_raws)
        results.append(_ArmRound(t, p_succ, p_rec, raws, nxt))
        current = nxt
    return results


def _merge_pair(merge: PbsMergeDecl | None, raw_plus: State, raw_minus: State | None) -> State:
    if merge is None or raw_minus is None:
        return raw_plus
    a = apply_pbs_merge(raw_plus, merge.in_h, merge.in_v, merge.out)
    b = apply_pbs_merge(raw_minus, merge.in_h, merge.in_v, merge.out)
    terms: dict = {}
    for p, amp in a.items():
        terms[p] = [amp, None]
    for p, amp in b.items():
        terms.setdefault(p, [None, None])[1] = amp
    combined = {}
    for p, (x, y) in terms.items():
        if x is None:
            combined[p] = y
        elif y is None:
            combined[p] = x
        else:
            # both arms carry the signal-at-home component; the published
            # recombination counts it once, so shared amplitudes average
            combined[p] = 0.5 * (x + y)
    return State(combined)


def _branch_rounds(
    plan: Plan,
    bindings: dict[str, complex],
    ts_plus: list[float],
    ts_minus: list[float],
    model: DetectorModel,
    target: State,
) -> tuple[list[RoundResult], dict[str, list[float]]]:
    signal = _source_state(plan.signal_sources, bindings)
    if plan.split is not None:
        signal = apply_pbs(signal, plan.split.inp, plan.split.out_h, plan.split.out_v)
    arm_inputs = []
    for arm in plan.arms:
        others = [a.signal_mode for a in plan.arms if a is not arm]
        arm_inputs.append(
            signal.filtered(lambda p: all(pattern_count(p, m) == 0 for m in others))
        )
    schedules = {"plus": ts_plus, "minus": ts_minus}
    arm_results = [
        _run_arm(arm, inp, schedules[arm.label], bindings, model)
        for arm, inp in zip(plan.arms, arm_inputs)
    ]
    rounds = []
    per_arm_p1 = {arm.label: res[0].p_success for arm, res in zip(plan.arms, arm_results)}
    for k in range(len(ts_plus)):
        p_succ = sum(res[k].p_success for res in arm_results)
        p_rec = sum(res[k].p_recycle for res in arm_results)
        fids = []
        plus_raws = arm_results[0][k].success_raws
        if len(plan.arms) == 2:
            minus_raws = arm_results[1][k].success_raws
            for rp in plus_raws:
                for rm in minus_raws:
                    fids.append(fidelity(_merge_pair(plan.merge, rp, rm), target))
        else:
            for rp in plus_raws:
                fids.append(fidelity(_merge_pair(plan.merge, rp, None), target))
        rounds.append(
            RoundResult(
                k=k + 1,
                t=ts_plus[k],
                p_success=p_succ,
                p_fail_recyclable=p_rec,
                heralded_fidelity=min(fids) if fids else None,
            )
        )
    return rounds, per_arm_p1


def _joint_rounds(
    plan: Plan,
    bindings: dict[str, complex],
    ts_plus: list[float],
    ts_minus: list[float],
    model: DetectorModel,
    target: State,
) -> list[RoundResult]:
    signal = _source_state(plan.signal_sources, bindings)
    if plan.split is not None:
        signal = apply_pbs(signal, plan.split.inp, plan.split.out_h, plan.split.out_v)
    schedules = {"plus": ts_plus, "minus": ts_minus}
    current = signal
    rounds = []
    for k in range(len(ts_plus)):
        if current.is_empty:
            rounds.append(RoundResult(k + 1, ts_plus[k], 0.0, 0.0, None))
            continue
        work = current
        for arm in plan.arms:
            t = schedules[arm.label][k]
            aux = _source_state(arm.aux_sources, bindings)
            aux = apply_vbs(aux, arm.vbs.inp, arm.vbs.reflect, arm.vbs.transmit, t)
            work = tensor(work, aux)
        kept = work
        dropped = work if plan.protocol == "ecp2" else None
        if plan.protocol == "ecp2":
            for arm in plan.arms:
                kept = qnd_component(kept, arm.qnd.a, arm.qnd.b, 1)
                dropped = qnd_component(dropped, arm.qnd.a, arm.qnd.b, 0)
        else:
            dropped = None
        p_succ = 0.0
        fids = []
        if not kept.is_empty:
            after = kept
            corrections: dict[str, str] = {}
            groups = []
            for arm in plan.arms:
                after = apply_bs(
                    after,
                    arm.success_bs.in1,
                    arm.success_bs.in2,
                    arm.success_bs.out1,
                    arm.success_bs.out2,
                )
                corrections.update(arm.flips)
                groups.append(_detector_group(arm.success_group))
            for o in herald(after, groups, model, corrections):
                if o.success:
                    p_succ += o.probability
                    raw = o.corrected_raw()
                    if plan.merge is not None:
                        raw = apply_pbs_merge(
                            raw, plan.merge.in_h, plan.merge.in_v, plan.merge.out
                        )
                    fids.append(fidelity(raw, target))
        p_rec = 0.0
        nxt = State()
        if (
            plan.has_recycling
            and dropped is not None
            and not dropped.is_empty
        ):
            rec = dropped
            corrections = {}
            groups = []
            for arm in plan.arms:
                rec = apply_bs(
                    rec,
                    arm.recycle_bs.in1,
                    arm.recycle_bs.in2,
                    arm.recycle_bs.out1,
                    arm.recycle_bs.out2,
                )
                corrections.update(arm.recycle_flips)
                groups.append(_detector_group(arm.recycle_group))
            rec_raws = []
            for o in herald(rec, groups, model, corrections):
                if o.success:
                    p_rec += o.weight
                    rec_raws.append(o.corrected_raw())
            nxt = _combine_recycle(rec_raws)
        rounds.append(
            RoundResult(
                k=k + 1,
                t=ts_plus[k],
                p_success=p_succ,
                p_fail_recyclable=p_rec,
                heralded_fidelity=min(fids) if fids else None,
            )
        )
        current = nxt
    return rounds


# ---------------------------------------------------------------------------
# entry points

def execute(
    doc: CircuitDoc,
    ent: EntanglementParams | None = None,
    pol: PolarizationParams | None = None,
    *,
    rounds: int = 1,
    accounting: str = "branch",
    model: DetectorModel | None = None,
    t1: float | None = None,
    t2: float | None = None,
    schedule: tuple[float, ...] | None = None,
) -> ProtocolReport:
    """Run a circuit document exactly and assemble the full report."""
    if accounting not in ("branch", "joint"):
        raise ConfigError(f"unknown accounting mode {accounting!r}")
    if rounds < 1:
        raise ConfigError(f"rounds must be >= 1, got {rounds}")
    model = model or IDEAL_DETECTORS
    plan = analyze(doc)

    alpha_sq = ent.alpha_sq if ent is not None else None
    gamma_sq = pol.gamma_sq if pol is not None else None

    bindings: dict[str, complex] = {}
    if ent is not None:
        bindings["alpha"] = ent.alpha
        bindings["beta"] = ent.beta
    if pol is not None:
        bindings["gamma"] = pol.gamma
        bindings["delta"] = pol.delta

    if plan.trivial:
        state = None
        for group in plan.photon_groups:
            s = _source_state(group, bindings)
            state = s if state is None else tensor(state, s)
        fid = 1.0 if state is not None and not state.is_empty else None
        return ProtocolReport(
            protocol="ecp1",
            accounting=accounting,
            alpha_sq=alpha_sq,
            gamma_sq=gamma_sq,
            eta_p=model.eta_p,
            schedule={"plus": [], "minus": []},
            rounds=[RoundResult(1, None, 1.0, 0.0, fid)],
            p_total=1.0,
            engine=EngineInfo("exact", 0),
        )

    if ent is None:
        raise ConfigError("entanglement parameters are required for this circuit")

    if plan.has_recycling:
        if schedule is None:
            ts = list(vbs_schedule(ent, rounds))
        else:
            if len(schedule) < rounds:
                raise ConfigError(
                    f"schedule has {len(schedule)} entries, {rounds} rounds requested"
                )
            ts = list(schedule[:rounds])
        ts_plus = ts
        ts_minus = list(ts)
    else:
        if rounds != 1:
            raise ConfigError("circuit has no recycling path; rounds must be 1")
        default_t = ent.alpha_sq
        ts_plus = [default_t if t1 is None else t1]
        ts_minus = [default_t if t2 is None else t2]
    for t in (*ts_plus, *ts_minus):
        if not 0.0 <= t <= 1.0:
            raise ConfigError(f"transmittance {t} outside [0, 1]")

    # the document's coupler expressions are authoritative; the planned
    # schedule only feeds their transmittance parameters
    eff_plus, eff_minus = _effective_schedule(plan, bindings, ts_plus, ts_minus)

    target = _target_state(plan.outputs, pol)
    per_arm_p1: dict[str, float] = {}
    if accounting == "branch":
        round_results, per_arm_p1 = _branch_rounds(
            plan, bindings, eff_plus, eff_minus, model, target
        )
        eta_exponent = 1
    else:
        round_results = _joint_rounds(plan, bindings, eff_plus, eff_minus, model, target)
        eta_exponent = len(plan.arms)

    p_total = sum(r.p_success for r in round_results)
    schedule_out = {
        "plus": list(eff_plus),
        "minus": list(eff_minus) if len(plan.arms) == 2 else [],
    }
    report = ProtocolReport(
        protocol=plan.protocol,
        accounting=accounting,
        alpha_sq=alpha_sq,
        gamma_sq=gamma_sq,
        eta_p=model.eta_p,
        schedule=schedule_out,
        rounds=round_results,
        p_total=p_total,
        engine=EngineInfo("exact", eta_exponent),
    )
    report.paper_comparison = _comparison(
        plan, report, ent, pol, model, eff_plus, per_arm_p1
    )
    return report


def _effective_schedule(
    plan: Plan,
    bindings: dict[str, complex],
    ts_plus: list[float],
    ts_minus: list[float],
) -> tuple[list[float], list[float]]:
    eff = {"plus": [], "minus": []}
    for k in range(len(ts_plus)):
        round_bindings = dict(bindings)
        round_bindings.update(
            {
                "t1": ts_plus[k],
                "t2": ts_minus[k],
                "t_plus": ts_plus[k],
                "t_minus": ts_minus[k],
            }
        )
        for arm in plan.arms:
            v = evaluate_real(arm.vbs.t, round_bindings)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(
                    f"coupler expression {arm.vbs.t!r} gives {v}, outside [0, 1]"
                )
            eff[arm.label].append(v)
    return eff["plus"], eff["minus"]


def _comparison(
    plan: Plan,
    report: ProtocolReport,
    ent: EntanglementParams,
    pol: PolarizationParams | None,
    model: DetectorModel,
    ts_plus: list[float],
    per_arm_p1: dict[str, float],
) -> dict[str, dict[str, float]]:
    a2 = ent.alpha_sq
    eta = model.eta_p
    m = report.engine.eta_exponent
    factor = eta**m
    out: dict[str, dict[str, float]] = {}
    n_rounds = len(report.rounds)
    stripped = pol is None

    if plan.protocol == "ecp1":
        if not stripped and report.accounting == "branch":
            d2 = pol.delta_sq
            g2 = pol.gamma_sq
            out["claimed_success_plus"] = comparison_entry(
                branch_success_plus(a2, d2) * factor, per_arm_p1.get("plus", 0.0)
            )
            out["claimed_success_minus"] = comparison_entry(
                branch_success_minus(a2, g2) * factor, per_arm_p1.get("minus", 0.0)
            )
            out["claimed_branch_sum"] = comparison_entry(
                3.0 * a2 * (1.0 - a2) * factor, report.p_total
            )
        out["claimed_total"] = comparison_entry(
            claimed_total(a2) * factor, report.p_total
        )
        if report.accounting == "joint" and not stripped:
            out["predicted_joint_total"] = comparison_entry(
                joint_total_one_round(a2) * factor, report.p_total
            )
    else:
        series = round_success_series(a2, eta, n_rounds)
        if stripped:
            for k, (pk, r) in enumerate(zip(series, report.rounds), start=1):
                out[f"series_round_{k}"] = comparison_entry(pk, r.p_success)
            out["series_total"] = comparison_entry(sum(series), report.p_total)
        else:
            if report.accounting == "branch":
                d2 = pol.delta_sq
                g2 = pol.gamma_sq
                t1 = ts_plus[0]
                out["claimed_round1_plus"] = comparison_entry(
                    qnd_round_success(a2, d2, t1) * factor, per_arm_p1.get("plus", 0.0)
                )
                out["claimed_round1_minus"] = comparison_entry(
                    qnd_round_success(a2, g2, t1) * factor, per_arm_p1.get("minus", 0.0)
                )
            out["claimed_total"] = comparison_entry(
                claimed_total(a2) * factor, report.p_total
            )
            out["stripped_series_total"] = comparison_entry(
                sum(round_success_series(a2, factor, n_rounds)), report.p_total
            )
            if report.accounting == "joint":
                out["predicted_joint_total"] = comparison_entry(
                    joint_total_one_round(a2) * factor, report.p_total
                )
    return out


def run_ecp1(
    ent: EntanglementParams,
    pol: PolarizationParams | None = None,
    *,
    t1: float | None = None,
    t2: float | None = None,
    accounting: str = "branch",
    model: DetectorModel | None = None,
) -> ProtocolReport:
    """Single-round linear-optics concentration (polarized or stripped)."""
    ent.require_nondegenerate()
    doc = builtin_doc("ecp1" if pol is not None else "ecp1_stripped")
    return execute(
        doc, ent, pol, rounds=1, accounting=accounting, model=model, t1=t1, t2=t2
    )


def run_ecp2(
    ent: EntanglementParams,
    pol: PolarizationParams | None = None,
    *,
    rounds: int = 1,
    accounting: str = "branch",
    model: DetectorModel | None = None,
    schedule: tuple[float, ...] | None = None,
) -> ProtocolReport:
    """Nondemolition-assisted concentration with recycling rounds."""
    ent.require_nondegenerate()
    doc = builtin_doc("ecp2" if pol is not None else "ecp2_stripped")
    return execute(
        doc,
        ent,
        pol,
        rounds=rounds,
        accounting=accounting,
        model=model,
        schedule=schedule,
    )
