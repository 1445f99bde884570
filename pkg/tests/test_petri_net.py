import itertools
import json

import pytest

from plccontain.petri_net import (ConflictingFire, EvalError, InvalidModel,
                                  Marking, NotEnabled, Place, PnTransition,
                                  PetriNet, Trace, UnsafeMarking,
                                  WriteConflict, compute_all_concur_trans,
                                  enabled_transitions, initial_marking,
                                  net_to_json, simulate, successor_marking,
                                  translate)
from plccontain.sfc_core import (Binary, IntLit, TRUE, VarDecl,
                                 VarRef, parse_sfc)


def _mini_net(guards=None, arcs=None, places=("p0", "p1"), init=("p0",),
              variables=()):
    guards = guards or {}
    arcs = arcs or {"t1": (["p0"], ["p1"])}
    ps = tuple(Place(p, frozenset(), (), (), ()) for p in places)
    ts = tuple(PnTransition(t, guards.get(t, TRUE)) for t in arcs)
    ia = frozenset((p, t) for t, (pre, _) in arcs.items() for p in pre)
    oa = frozenset((t, p) for t, (_, post) in arcs.items() for p in post)
    return PetriNet(ps, tuple(variables), ts, ia, oa, frozenset(init))


# ---------------------------------------------------------------------------
# translation


def test_translate_counts(pick_place_v0, nets):
    n0, _ = nets
    assert len(n0.places) == len(pick_place_v0.steps)
    assert len(n0.transitions) == len(pick_place_v0.transitions)
    assert {p.id for p in n0.places} == {s.id for s in pick_place_v0.steps}
    assert n0.initial_marking == pick_place_v0.initial_steps


def test_translate_single_step():
    prog = parse_sfc("var b : bool = false; "
                     "step s0 { entry A { b := true; } } init s0;")
    net = translate(prog)
    assert len(net.places) == 1
    assert len(net.transitions) == 0
    assert net.initial_marking == frozenset(["s0"])


def test_translate_active_block_self_loop():
    prog = parse_sfc("""
    var I : int = 0;
    var Fixer : int = 3;
    step s0 { entry Init { I := 0; } }
    step loop { active Body { I := I + 1; } }
    step done { }
    trans T1 : s0 -> loop;
    trans T2 : loop -> done when !(I < Fixer);
    trans T3 : done -> s0;
    init s0;
    """)
    net = translate(prog)
    # one extra transition: the self-loop sub-net
    assert len(net.transitions) == len(prog.transitions) + 1
    uid = net.self_loop_of("loop")
    assert uid == "loop__u"
    guard = net.transition_map()[uid].guard
    # negation of the exit guard with the double negation unwrapped
    assert guard == Binary("<", VarRef("I"), VarRef("Fixer"))
    assert net.pre_places(uid) == net.post_places(uid) == frozenset(["loop"])
    # semantics: the loop body runs once per self-loop firing
    tr = simulate(net)
    assert isinstance(tr, Trace) and tr.stopped == "sync"
    assert dict(tr.rounds[-2].state_after)["I"] == 3


def test_translate_fork(pick_place_v1, nets):
    _, n1 = nets
    fork = [t for t in n1.transitions if len(n1.post_places(t.id)) == 2]
    assert any(t.id == "Tr5" for t in fork)
    assert n1.post_places("Tr5") == frozenset(["s6", "s9"])


def test_synchronizing_flag(nets):
    n0, _ = nets
    assert n0.synchronizing_ids() == frozenset(["Tr10", "Tr11", "Tr14"])
    assert n0.out_ports() == frozenset(["s4", "s8", "s10"])


# ---------------------------------------------------------------------------
# successor marking


def test_successor_simple_move():
    net = _mini_net()
    m = initial_marking(net)
    m2 = successor_marking(net, m, {"t1"})
    assert m2.marked == frozenset(["p1"])
    assert m2.tick == m.tick + 1


def test_successor_fork():
    net = _mini_net(arcs={"t": (["p4"], ["p6", "p8"])},
                    places=("p4", "p6", "p8"), init=("p4",))
    m2 = successor_marking(net, initial_marking(net), {"t"})
    assert m2.marked == frozenset(["p6", "p8"])


def test_successor_preserves_untouched_tokens():
    # tokens whose post-transitions stay idle survive the round
    net = _mini_net(arcs={"ta": (["pA"], ["pC"])},
                    places=("pA", "pB", "pC"), init=("pA", "pB"))
    m2 = successor_marking(net, initial_marking(net), {"ta"})
    assert m2.marked == frozenset(["pB", "pC"])
    # hand evaluation of the set formula
    post, pre = {"pC"}, {"pA"}
    assert m2.marked == frozenset(post | ({"pA", "pB"} - pre))


def test_fire_conflicting_transitions():
    net = _mini_net(arcs={"t1": (["p0"], ["p1"]), "t2": (["p0"], ["p2"])},
                    places=("p0", "p1", "p2"))
    with pytest.raises(ConflictingFire):
        successor_marking(net, initial_marking(net), {"t1", "t2"})


def test_fire_not_enabled():
    net = _mini_net(guards={"t1": Binary(">", VarRef("x"), IntLit(0))},
                    variables=[VarDecl("x", "int", IntLit(0))])
    with pytest.raises(NotEnabled):
        successor_marking(net, initial_marking(net), {"t1"})


def test_token_into_marked_place_is_unsafe():
    net = _mini_net(arcs={"t1": (["p0"], ["p1"])},
                    places=("p0", "p1"), init=("p0", "p1"))
    with pytest.raises(UnsafeMarking):
        successor_marking(net, initial_marking(net), {"t1"})
    assert isinstance(simulate(net), InvalidModel)


def test_same_round_write_conflict():
    a = Place("pa", frozenset(["x"]), (("x", IntLit(1)),),
              (("x", IntLit(1)),), ())
    b = Place("pb", frozenset(["x"]), (("x", IntLit(2)),),
              (("x", IntLit(2)),), ())
    src = Place("p0", frozenset(), (), (), ())
    net = PetriNet((src, a, b), (VarDecl("x", "int", IntLit(0)),),
                   (PnTransition("t"),), frozenset({("p0", "t")}),
                   frozenset({("t", "pa"), ("t", "pb")}),
                   frozenset(["p0"]))
    with pytest.raises(WriteConflict):
        successor_marking(net, initial_marking(net), {"t"})


def test_update_rhs_reads_pre_round_state():
    # two places read each other's variable: swap semantics, no conflict
    a = Place("pa", frozenset(["x"]), (("x", VarRef("y")),),
              (("x", VarRef("y")),), ())
    b = Place("pb", frozenset(["y"]), (("y", VarRef("x")),),
              (("y", VarRef("x")),), ())
    src = Place("p0", frozenset(), (), (), ())
    net = PetriNet((src, a, b),
                   (VarDecl("x", "int", IntLit(1)),
                    VarDecl("y", "int", IntLit(2))),
                   (PnTransition("t"),), frozenset({("p0", "t")}),
                   frozenset({("t", "pa"), ("t", "pb")}),
                   frozenset(["p0"]))
    m2 = successor_marking(net, initial_marking(net), {"t"})
    assert m2.state["x"] == 2 and m2.state["y"] == 1


# ---------------------------------------------------------------------------
# enabledness


def test_enabled_empty_marking():
    net = _mini_net()
    m = Marking(frozenset(), {"": 0}, 0)
    assert enabled_transitions(net, m) == frozenset()


def test_enabled_loop_place(counter_net):
    m = Marking(frozenset(["p7"]), {"i": 0, "n": 3}, 0)
    assert enabled_transitions(counter_net, m) == frozenset(["t8"])
    m2 = Marking(frozenset(["p7"]), {"i": 3, "n": 3}, 0)
    # exit t10 also needs p11; only the self-side guard matters here
    assert "t8" not in enabled_transitions(counter_net, m2)


def test_guard_division_by_zero():
    net = _mini_net(guards={"t1": Binary(">", Binary("/", VarRef("x"),
                                                     VarRef("y")),
                                         IntLit(1))},
                    variables=[VarDecl("x", "int", IntLit(4)),
                               VarDecl("y", "int", IntLit(0))])
    with pytest.raises(EvalError):
        enabled_transitions(net, initial_marking(net))


# ---------------------------------------------------------------------------
# concurrent sets


def _subset_oracle(net, m):
    """Exhaustive enumeration of maximal enabled pre-disjoint subsets."""
    enabled = sorted(enabled_transitions(net, m))
    ok = []
    for r in range(1, len(enabled) + 1):
        for combo in itertools.combinations(enabled, r):
            pres = [net.pre_places(t) for t in combo]
            union = frozenset().union(*pres)
            if sum(len(p) for p in pres) == len(union):
                ok.append(frozenset(combo))
    maximal = {s for s in ok if not any(s < t for t in ok)}
    return frozenset(maximal)


def test_concur_trans_empty():
    net = _mini_net(guards={"t1": Binary(">", VarRef("x"), IntLit(0))},
                    variables=[VarDecl("x", "int", IntLit(0))])
    assert compute_all_concur_trans(net, initial_marking(net)) == frozenset()


def test_concur_trans_disjoint_pair():
    net = _mini_net(arcs={"ta": (["p0"], ["p2"]), "tb": (["p1"], ["p3"])},
                    places=("p0", "p1", "p2", "p3"), init=("p0", "p1"))
    m = initial_marking(net)
    got = compute_all_concur_trans(net, m)
    assert got == frozenset([frozenset(["ta", "tb"])])
    assert got == _subset_oracle(net, m)


def test_concur_trans_conflicting_pair():
    net = _mini_net(arcs={"ta": (["p0"], ["p1"]), "tb": (["p0"], ["p2"])},
                    places=("p0", "p1", "p2"))
    m = initial_marking(net)
    got = compute_all_concur_trans(net, m)
    assert got == frozenset([frozenset(["ta"]), frozenset(["tb"])])
    assert got == _subset_oracle(net, m)


# ---------------------------------------------------------------------------
# simulation


def test_simulate_single_place_halts():
    prog = parse_sfc("step s0 { } init s0;")
    tr = simulate(translate(prog))
    assert isinstance(tr, Trace)
    assert tr.stopped == "halt" and len(tr.rounds) == 0


def test_simulate_quiescent_on_false_guards(nets):
    n0, _ = nets
    tr = simulate(n0, state={"L1": False})
    assert isinstance(tr, Trace) and tr.stopped == "quiescent"


def test_simulate_counter_net_shape(counter_net):
    tr = simulate(counter_net)
    assert isinstance(tr, Trace) and tr.stopped == "sync"
    fired = [tuple(sorted(r.fired)) for r in tr.rounds]
    assert fired == [("t1",), ("t2", "t3"), ("t4", "t5"), ("t6", "t8"),
                     ("t9",), ("t8",), ("t7", "t9"), ("t10",), ("ts",)]


def test_simulate_structural_starvation():
    # join transition forever missing one token: invalid live marking
    net = _mini_net(arcs={"t1": (["p0"], ["p1"]),
                          "tj": (["p1", "px"], ["p2"])},
                    places=("p0", "p1", "px", "p2"))
    out = simulate(net)
    assert isinstance(out, InvalidModel)


def test_simulate_nondeterministic_marking():
    net = _mini_net(arcs={"ta": (["p0"], ["p1"]), "tb": (["p0"], ["p2"])},
                    places=("p0", "p1", "p2"))
    out = simulate(net)
    assert isinstance(out, InvalidModel)
    assert "nondeterministic" in out.reason


def _desk_nets(nets, counter_net):
    n0, n1 = nets
    yield n0, [{"L1": True, "Fixer": f, "a": 7, "b": 500} for f in range(4)]
    yield n1, [{"L1": True, "S": s, "Fixer": f, "a": 7, "b": 500}
               for s in (False, True) for f in range(4)]
    yield counter_net, [{"n": k} for k in range(4)]


def test_invariants_on_desk_nets(nets, counter_net):
    """1-safety, determinism, tick monotonicity over an input grid."""
    for net, states in _desk_nets(nets, counter_net):
        for st in states:
            m = initial_marking(net, st)
            for _ in range(300):
                sets = compute_all_concur_trans(net, m)
                if not sets:
                    break
                assert len(sets) == 1, "determinism"
                fired = next(iter(sets))
                m2 = successor_marking(net, m, fired)  # raises if unsafe
                assert m2.tick == m.tick + 1, "tick monotonicity"
                m = m2
                if fired & net.synchronizing_ids():
                    break


# ---------------------------------------------------------------------------
# JSON dump


def test_net_json_stable(nets):
    n0, _ = nets
    doc1, doc2 = net_to_json(n0), net_to_json(n0)
    assert doc1 == doc2
    parsed = json.loads(doc1)
    assert sorted(parsed) == ["initial_marking", "input_arcs", "output_arcs",
                              "places", "transitions", "vars"]
    assert parsed["initial_marking"] == ["s0"]
    assert len(parsed["places"]) == 11
