"""Linear optical elements as mode transforms.

Sign and routing conventions (fixed, and relied on by every heralding
correction downstream):

* PBS, splitting orientation: H transmits straight through to ``out_h``,
  V reflects to ``out_v``.  Merging orientation: two inputs combine into one
  output, legal only while the H input carries no V amplitude and vice versa
  (otherwise two photons of the same mode would have to leave one port and
  the device is no longer reversible on that subspace).
* 50:50 coupler: ``in1 -> (out1 - out2)/sqrt(2)``, ``in2 -> (out1 + out2)/sqrt(2)``.
  The minus sign sits on the first input's reflected arm.
* Variable-ratio coupler with transmittance ``t``:
  ``in -> sqrt(1-t)*reflect + sqrt(t)*transmit`` with real nonnegative
  coefficients.
* Phase flip on a spatial mode: every term with an odd total photon count in
  that mode (both polarizations) changes sign.  Self-inverse.

All elements are polarization-preserving except the PBS, which routes on
polarization but never rotates it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .fock import (
    Mode,
    Pattern,
    State,
    POLARIZATIONS,
    apply_mode_transform,
    pattern_count,
)

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

# Test hook: the phase picked up by the second input of a 50:50 coupler.
# The correct convention is +1; fault injection replaces it with a nontrivial
# phase (still unitary, not a mere port relabeling) to verify that the
# heralded-fidelity checks actually detect a miswired coupler
# (see verify.corrupted_coupler).
BS_IN2_PHASE: complex = 1.0


class PortContractError(ValueError):
    """An element was wired in a way its port contract forbids."""


def _require_distinct(kind: str, **ports: str) -> None:
    seen: dict[str, str] = {}
    for name, spatial in ports.items():
        if spatial in seen.values():
            raise PortContractError(f"{kind}: ports must be distinct, {spatial!r} repeats")
        seen[name] = spatial


def apply_pbs(state: State, inp: str, out_h: str, out_v: str) -> State:
    """Polarizing splitter: H component of ``inp`` to ``out_h``, V to ``out_v``."""
    _require_distinct("pbs", inp=inp, out_h=out_h, out_v=out_v)
    rules: dict[Mode, list[tuple[Mode, complex]]] = {
        (inp, "H"): [((out_h, "H"), 1.0)],
        (inp, "V"): [((out_v, "V"), 1.0)],
    }
    return apply_mode_transform(state, rules)


def apply_pbs_merge(state: State, in_h: str, in_v: str, out: str) -> State:
    """Polarizing combiner: H from ``in_h`` and V from ``in_v`` into ``out``.

    Raises PortContractError if the state carries V amplitude on ``in_h`` or
    H amplitude on ``in_v``; those photons would exit the unmonitored port.
    """
    _require_distinct("pbs merge", in_h=in_h, in_v=in_v, out=out)
    for pattern, _ in state.items():
        for (sp, pol), _n in pattern:
            if sp == in_h and pol == "V":
                raise PortContractError(
                    f"pbs merge: input {in_h!r} carries V amplitude"
                )
            if sp == in_v and pol == "H":
                raise PortContractError(
                    f"pbs merge: input {in_v!r} carries H amplitude"
                )
    rules: dict[Mode, list[tuple[Mode, complex]]] = {
        (in_h, "H"): [((out, "H"), 1.0)],
        (in_v, "V"): [((out, "V"), 1.0)],
    }
    return apply_mode_transform(state, rules)


def bs_matrix() -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    """Rows are inputs, columns outputs, of the 50:50 convention."""
    ph = BS_IN2_PHASE
    return (
        (_INV_SQRT2, -_INV_SQRT2),
        (ph * _INV_SQRT2, ph * _INV_SQRT2),
    )


def apply_bs(state: State, in1: str, in2: str, out1: str, out2: str) -> State:
    """Balanced coupler on two spatial modes, polarization preserved."""
    if in1 == in2 or out1 == out2:
        raise PortContractError("bs: input ports and output ports must each be distinct")
    (r11, r12), (r21, r22) = bs_matrix()
    rules: dict[Mode, list[tuple[Mode, complex]]] = {}
    for pol in POLARIZATIONS:
        rules[(in1, pol)] = [((out1, pol), r11), ((out2, pol), r12)]
        rules[(in2, pol)] = [((out1, pol), r21), ((out2, pol), r22)]
    return apply_mode_transform(state, rules)


def apply_vbs(state: State, inp: str, reflect: str, transmit: str, t: float) -> State:
    """Variable coupler: sqrt(1-t) to ``reflect``, sqrt(t) to ``transmit``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"vbs transmittance must lie in [0, 1], got {t}")
    _require_distinct("vbs", inp=inp, reflect=reflect, transmit=transmit)
    r = math.sqrt(1.0 - t)
    s = math.sqrt(t)
    rules: dict[Mode, list[tuple[Mode, complex]]] = {}
    for pol in POLARIZATIONS:
        rules[(inp, pol)] = [((reflect, pol), r), ((transmit, pol), s)]
    return apply_mode_transform(state, rules)


def apply_phase_flip(state: State, spatial: str) -> State:
    """Negate every term holding an odd photon count in ``spatial``."""
    return State(
        {
            p: (-a if pattern_count(p, spatial) % 2 else a)
            for p, a in state.items()
        },
        photon_cap=state.photon_cap,
    )


@dataclass(frozen=True)
class ElementSpec:
    """A placed element: kind plus named spatial-port bindings.

    ``kind`` is one of ``pbs``, ``pbs_merge``, ``bs``, ``vbs``, ``flip``.
    ``t`` is meaningful for ``vbs`` only.
    """

    kind: str
    ports: Mapping[str, str] = field(default_factory=dict)
    t: float = 0.0

    def apply(self, state: State) -> State:
        p = self.ports
        if self.kind == "pbs":
            return apply_pbs(state, p["in"], p["out_h"], p["out_v"])
        if self.kind == "pbs_merge":
            return apply_pbs_merge(state, p["in_h"], p["in_v"], p["out"])
        if self.kind == "bs":
            return apply_bs(state, p["in1"], p["in2"], p["out1"], p["out2"])
        if self.kind == "vbs":
            return apply_vbs(state, p["in"], p["reflect"], p["transmit"], self.t)
        if self.kind == "flip":
            return apply_phase_flip(state, p["mode"])
        raise ValueError(f"unknown element kind {self.kind!r}")
