"""Photon-number detection, heralding, and nondemolition comparison.

Heralding enumerates the distinct detector click patterns a state supports,
tags each as success or failure against the per-group requirement (currently
``exactly_one``: a single photon at a single detector of the group, none at
the others; a two-photon bunch is a failure), and returns the collapsed
residual together with any feed-forward phase correction the pattern calls
for.  Probabilities are squared norms, so feeding an unnormalized branch
component yields absolute branch probabilities directly.

Detector inefficiency enters in one of two ways: as an analytic factor
``eta_p`` per required click multiplied onto success probabilities, or as
per-photon Bernoulli thinning inside the Monte Carlo sampler (not here).

The nondemolition comparison projects onto classes of the absolute photon
number difference between two spatial modes, modeling a dispersive probe
that reads out |n_a - n_b| but cannot sign it.  Within a class the
superposition survives untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .fock import (
    PRUNE_EPS,
    Pattern,
    State,
    pattern_count,
)
from .elements import apply_phase_flip


@dataclass(frozen=True)
class DetectorModel:
    """How detector efficiency is accounted for.

    ``eta_p`` is the per-photon detection efficiency.  ``mode`` selects the
    bookkeeping: ``analytic`` multiplies success probabilities by
    ``eta_p**clicks`` (clicks = number of required detections in the
    outcome), ``bernoulli`` defers to per-photon sampling and leaves exact
    probabilities untouched here.
    """

    eta_p: float = 1.0
    mode: str = "analytic"

    def __post_init__(self):
        if not 0.0 <= self.eta_p <= 1.0:
            raise ValueError(f"eta_p must lie in [0, 1], got {self.eta_p}")
        if self.mode not in ("analytic", "bernoulli"):
            raise ValueError(f"unknown detector model mode {self.mode!r}")

    def success_factor(self, required_clicks: int) -> float:
        if self.mode == "analytic":
            return self.eta_p**required_clicks
        return 1.0


IDEAL_DETECTORS = DetectorModel(eta_p=1.0)


@dataclass(frozen=True)
class DetectorGroup:
    """A named set of detectors with a joint click requirement.

    ``eta`` overrides the run-level detector efficiency for this group when
    set (the recycling detectors of the nondemolition protocol are modeled
    as ideal, for instance).
    """

    name: str
    modes: tuple[str, ...]
    require: str = "exactly_one"
    eta: float | None = None

    def __post_init__(self):
        if self.require != "exactly_one":
            raise ValueError(f"unsupported click requirement {self.require!r}")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"detector group {self.name!r} repeats a mode")


@dataclass(frozen=True)
class HeraldOutcome:
    """One detector click pattern and what it leaves behind.

    ``clicks`` maps detector modes to photon counts (zero counts omitted).
    ``weight`` is the squared norm of the matching component before any
    efficiency factor; ``probability`` includes the analytic efficiency
    factor for success outcomes.  ``residual`` is normalized (empty when the
    detectors swallowed everything); ``correction`` lists the spatial modes
    whose phase must be flipped, already determined by the click pattern but
    not yet applied.
    """

    clicks: tuple[tuple[str, int], ...]
    weight: float
    probability: float
    success: bool
    correction: tuple[str, ...] = ()
    residual: State = field(default_factory=State)

    def corrected_residual(self) -> State:
        s = self.residual
        for m in self.correction:
            s = apply_phase_flip(s, m)
        return s

    def corrected_raw(self) -> State:
        """Correction applied to the unnormalized component (weight kept)."""
        return self.corrected_residual().scaled(math.sqrt(self.weight))


def _click_signature(pattern: Pattern, detectors: Sequence[str]) -> tuple[tuple[str, int], ...]:
    sig = []
    for d in detectors:
        n = pattern_count(pattern, d)
        if n:
            sig.append((d, n))
    return tuple(sig)


def herald(
    state: State,
    groups: Sequence[DetectorGroup],
    model: DetectorModel = IDEAL_DETECTORS,
    corrections: Mapping[str, str] | None = None,
) -> list[HeraldOutcome]:
    """Enumerate click patterns over the union of detector groups.

    An outcome is a success when every group individually meets its
    requirement.  ``corrections`` maps a detector mode to the spatial mode
    that needs a phase flip when that detector fires.  Outcomes are sorted
    by click signature; their weights partition the input's squared norm.
    """
    corrections = corrections or {}
    all_detectors: list[str] = []
    for g in groups:
        all_detectors.extend(g.modes)
    buckets: dict[tuple[tuple[str, int], ...], dict[Pattern, complex]] = {}
    for pattern, amp in state.items():
        sig = _click_signature(pattern, all_detectors)
        buckets.setdefault(sig, {})[pattern] = amp
    outcomes = []
    for sig in sorted(buckets):
        component = State(buckets[sig], photon_cap=state.photon_cap)
        weight = component.norm_sq()
        if weight <= PRUNE_EPS**2:
            continue
        counts = dict(sig)
        success = True
        factor = 1.0
        for g in groups:
            in_group = {d: counts.get(d, 0) for d in g.modes}
            if sum(in_group.values()) != 1:
                success = False
            if model.mode == "analytic":
                factor *= model.eta_p if g.eta is None else g.eta
        corr = tuple(
            sorted(corrections[d] for d, _ in sig if d in corrections)
        )
        # strip detected photons from the residual
        residual_terms = {}
        for pattern, amp in component.items():
            kept = tuple(
                (m, n) for (m, n) in pattern if m[0] not in all_detectors
            )
            residual_terms[kept] = residual_terms.get(kept, 0j) + amp
        residual = State(residual_terms, photon_cap=state.photon_cap)
        if residual.is_empty:
            residual_norm = State(photon_cap=state.photon_cap)
        else:
            residual_norm = residual.scaled(1.0 / math.sqrt(weight))
        probability = weight * (factor if success else 1.0)
        outcomes.append(
            HeraldOutcome(
                clicks=sig,
                weight=weight,
                probability=probability,
                success=success,
                correction=corr if success else (),
                residual=residual_norm,
            )
        )
    return outcomes


def success_outcomes(outcomes: Sequence[HeraldOutcome]) -> list[HeraldOutcome]:
    return [o for o in outcomes if o.success]


def qnd_select(state: State, mode_a: str, mode_b: str, cls: int) -> tuple[float, State]:
    """Project onto |n_a - n_b| == cls over two spatial modes.

    Returns (probability, collapsed state); the collapse is renormalized and
    empty when the class has no support.  Probabilities over all classes
    partition the squared norm of the input.  The comparison cannot
    distinguish +d from -d, so both sign branches survive coherently.
    """
    if cls < 0:
        raise ValueError("photon number difference class must be nonnegative")

    def in_class(pattern: Pattern) -> bool:
        return abs(pattern_count(pattern, mode_a) - pattern_count(pattern, mode_b)) == cls

    kept = state.filtered(in_class)
    prob = kept.norm_sq()
    if prob <= PRUNE_EPS**2 or kept.is_empty:
        return 0.0, State(photon_cap=state.photon_cap)
    return prob, kept.scaled(1.0 / math.sqrt(prob))


def qnd_component(state: State, mode_a: str, mode_b: str, cls: int) -> State:
    """Unnormalized restriction to a |n_a - n_b| class (branch bookkeeping)."""

    def in_class(pattern: Pattern) -> bool:
        return abs(pattern_count(pattern, mode_a) - pattern_count(pattern, mode_b)) == cls

    return state.filtered(in_class)
