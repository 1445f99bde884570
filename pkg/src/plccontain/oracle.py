"""Exhaustive joint-simulation oracle.

Containment is confirmed behaviorally: for every valuation of the original
model's input variables (booleans exhaustive, integers over a window), if
the original run reaches an out-port, some valuation of the upgraded
model's extra inputs must drive the upgrade to the corresponding out-port
with the same final values on common variables. The oracle is independent
of the symbolic checker and is what the acceptance suite trusts.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from ._util import natural_key
from .petri_net import InvalidModel, PetriNet, simulate

DEFAULT_WINDOW = (0, 3)
ORACLE_FUEL = 600


class OracleBudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class Outcome:
    out_ports: frozenset  # pre-places of the fired synchronizing transition
    state: tuple  # sorted (name, value) pairs over common variables
    stopped: str


def input_vars(net: PetriNet) -> tuple:
    """Declared variables never written by any place: the net's inputs."""
    return tuple(sorted(net.unchanged_vars(), key=natural_key))


def _valuations(net: PetriNet, names, window, limit=200_000):
    env = net.var_env()
    domains = []
    for n in names:
        if env[n] == "bool":
            domains.append((False, True))
        else:
            domains.append(tuple(range(window[0], window[1] + 1)))
    total = 1
    for d in domains:
        total *= len(d)
    if total > limit:
        raise OracleBudgetExceeded(f"{total} input valuations")
    for combo in product(*domains):
        yield dict(zip(names, combo))


def run_outcome(net: PetriNet, valuation: dict, common,
                fuel: int = ORACLE_FUEL):
    """Outcome of one deterministic run, or InvalidModel."""
    tr = simulate(net, fuel=fuel, state=valuation)
    if isinstance(tr, InvalidModel):
        return tr
    if tr.stopped != "sync":
        return Outcome(frozenset(), (), tr.stopped)
    sync_round = tr.rounds[-1]
    fired_sync = sync_round.fired & net.synchronizing_ids()
    ports = frozenset()
    for t in fired_sync:
        ports |= net.pre_places(t)
    state = tr.state_before_last()
    filtered = tuple(sorted((k, state[k]) for k in state if k in common))
    return Outcome(ports, filtered, "sync")


def confirm_containment(n0: PetriNet, n1: PetriNet, f_out: dict,
                        window=DEFAULT_WINDOW, fuel: int = ORACLE_FUEL):
    """True when every out-port run of n0 has a matching n1 run under some
    valuation of n1's extra inputs; returns (ok, counterexample)."""
    common = frozenset(v.name for v in n0.vars) & \
        frozenset(v.name for v in n1.vars)
    ins0 = input_vars(n0)
    extra1 = tuple(n for n in input_vars(n1) if n not in set(ins0))
    for v in _valuations(n0, ins0, window):
        out0 = run_outcome(n0, v, common, fuel)
        if isinstance(out0, InvalidModel):
            return False, {"n0_invalid": out0.reason, "inputs": v}
        if out0.stopped != "sync":
            continue  # no computation to contain
        want_ports = frozenset(f_out[p] for p in out0.out_ports)
        matched = False
        for w in _valuations(n1, extra1, window):
            out1 = run_outcome(n1, {**{k: val for k, val in v.items()
                                       if k in {x.name for x in n1.vars}},
                                    **w}, common, fuel)
            if isinstance(out1, InvalidModel):
                continue
            if out1.stopped == "sync" and out1.out_ports == want_ports \
                    and out1.state == out0.state:
                matched = True
                break
        if not matched:
            return False, {"inputs": v, "n0_ports": sorted(out0.out_ports),
                           "n0_state": out0.state}
    return True, None


def confirm_equivalent(n0: PetriNet, n1: PetriNet, f_out: dict,
                       window=DEFAULT_WINDOW, fuel: int = ORACLE_FUEL):
    """Single-pass equivalence check for pairs sharing the same inputs:
    every valuation must produce matching outcomes in both nets."""
    common = frozenset(v.name for v in n0.vars) & \
        frozenset(v.name for v in n1.vars)
    ins0 = set(input_vars(n0))
    ins1 = set(input_vars(n1))
    if ins0 != ins1:
        ok, ce = confirm_containment(n0, n1, f_out, window, fuel)
        if not ok:
            return ok, ce
        return confirm_containment(n1, n0,
                                   {v: k for k, v in f_out.items()},
                                   window, fuel)
    names1 = {v.name for v in n1.vars}
    for v in _valuations(n0, sorted(ins0, key=natural_key), window):
        out0 = run_outcome(n0, v, common, fuel)
        out1 = run_outcome(n1, {k: x for k, x in v.items() if k in names1},
                           common, fuel)
        if isinstance(out0, InvalidModel) or isinstance(out1, InvalidModel):
            return False, {"inputs": v, "invalid": True}
        if (out0.stopped == "sync") != (out1.stopped == "sync"):
            return False, {"inputs": v, "n0": out0, "n1": out1}
        if out0.stopped != "sync":
            continue
        if frozenset(f_out[p] for p in out0.out_ports) != out1.out_ports \
                or out0.state != out1.state:
            return False, {"inputs": v, "n0": out0, "n1": out1}
    return True, None


def behaviorally_different(n0: PetriNet, n1: PetriNet, f_out: dict,
                           window=DEFAULT_WINDOW,
                           fuel: int = ORACLE_FUEL) -> bool:
    """True when some input valuation produces different outcomes (used to
    certify that a mutation actually changed behavior)."""
    ok, _ = confirm_equivalent(n0, n1, f_out, window, fuel)
    return not ok
