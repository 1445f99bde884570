"""Cut-point discovery, path construction, and the path algebra.

Paths run from cut-points to cut-points without intermediary ones. Static
cut-points are the initially marked places, places with several
post-transitions, back-edge targets, and out-ports. Execution cut-points
are added during a structural token-tracking pass: whenever the marking
reached after a firing round touches a known cut-point or a place on a
loop, leaves a loop, or holds tokens produced at different ticks, every
place of that marking becomes a cut-point and one path per marked place is
reconstructed backward through the firing history. Tracking explores every
alternative maximal firing set, traverses each loop once (a transition
never fires twice on one branch), and never fires synchronizing
transitions. Passes repeat until the cut-point set stabilizes.

Each path carries its execution condition (one normalized guard entry per
round, conjoined over simultaneous transitions), its data transformation
(composed place updates), and its tick stamps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ._util import natural_key
from .petri_net import PetriNet, WriteConflict
from .symbolic import (DEFAULT_SETTINGS, EMPTY_TRANSFORM, NormSettings,
                       StateTransform, band, compose, guard_seq,
                       guard_seq_to_str, make_transform, normalize,
                       transform_to_str, BTRUE)


class NotComposable(Exception):
    pass


class NotMergeable(Exception):
    pass


# ---------------------------------------------------------------------------
# cut-points


@dataclass(frozen=True)
class CutPoints:
    static_pts: frozenset
    execution_pts: frozenset

    @property
    def all(self) -> frozenset:
        return self.static_pts | self.execution_pts


def _successor_places(net: PetriNet, pid: str):
    """(transition, place) successors of a place, deterministically ordered."""
    out = []
    for t in sorted(net.post_transitions(pid), key=natural_key):
        for q in sorted(net.post_places(t), key=natural_key):
            out.append((t, q))
    return out


def static_cut_points(net: PetriNet) -> frozenset:
    """Initial places, multi-post places, back-edge targets, out-ports."""
    pts = set(net.initial_marking)
    for p in net.places:
        if len(net.post_transitions(p.id)) > 1:
            pts.add(p.id)
    pts |= _back_edge_targets(net)
    pts |= net.out_ports()
    return frozenset(pts)


def _back_edge_targets(net: PetriNet) -> frozenset:
    """DFS over the place graph with a fixed ordering; targets of edges
    into the active stack are loop-entry places."""
    targets = set()
    color = {}  # 0 unvisited (absent), 1 on stack, 2 done
    roots = sorted(net.initial_marking, key=natural_key)
    roots += [p.id for p in sorted(net.places, key=lambda p: natural_key(p.id))
              if p.id not in net.initial_marking]

    def visit(pid):
        color[pid] = 1
        for _t, q in _successor_places(net, pid):
            c = color.get(q, 0)
            if c == 1:
                targets.add(q)
            elif c == 0:
                visit(q)
        color[pid] = 2

    for r in roots:
        if color.get(r, 0) == 0:
            visit(r)
    return frozenset(targets)


def cycle_places(net: PetriNet) -> frozenset:
    """Places on a directed cycle, ignoring synchronizing transitions."""
    sync = net.synchronizing_ids()
    succ = {}
    for p in net.places:
        nxt = set()
        for t in net.post_transitions(p.id):
            if t in sync:
                continue
            nxt |= net.post_places(t)
        succ[p.id] = nxt
    on_cycle = set()
    for start in succ:
        # reachable-from-self search
        frontier = list(succ[start])
        seen = set(frontier)
        found = start in seen
        while frontier and not found:
            q = frontier.pop()
            if q == start:
                found = True
                break
            for r in succ[q]:
                if r == start:
                    found = True
                    break
                if r not in seen:
                    seen.add(r)
                    frontier.append(r)
        if found or start in succ[start]:
            on_cycle.add(start)
    return frozenset(on_cycle)


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Path:
    id: str
    trans_seq: tuple  # tuple of frozensets, one per round
    pre_places: frozenset
    post_places: frozenset
    guard_seq: tuple  # one BoolNorm per round
    transform: StateTransform
    start_tick: int
    last_tick: int
    parts: tuple = ()  # original cover-path ids composing this path

    def rounds(self) -> int:
        return len(self.trans_seq)

    def describe(self) -> str:
        seq = " . ".join("{" + ",".join(sorted(s, key=natural_key)) + "}"
                         for s in self.trans_seq)
        return (f"{self.id}: {seq} | R = {guard_seq_to_str(self.guard_seq)}"
                f" | r = {transform_to_str(self.transform)}")


@dataclass(frozen=True)
class PathCover:
    paths: tuple
    cut_points: CutPoints
    markings: frozenset  # markings seen while tracking (for parallelism)
    source: str = ""

    def by_id(self) -> dict:
        return {p.id: p for p in self.paths}


# ---------------------------------------------------------------------------
# structural token tracking


def _structural_sets(net: PetriNet, marked: frozenset, fired: frozenset,
                     sync: frozenset) -> list:
    """Maximal sets of structurally firable fresh transitions: pre-places
    marked, pairwise disjoint pre- and post-places."""
    maps = net._maps()
    pre_all, post_all = maps["pre_p"], maps["post_p"]
    cands = [t.id for t in net.transitions
             if t.id not in sync and t.id not in fired
             and pre_all[t.id] <= marked]
    cands.sort(key=natural_key)
    if not cands:
        return []
    pre = {t: pre_all[t] for t in cands}
    post = {t: post_all[t] for t in cands}
    sets = set()

    def rec(chosen, used_pre, used_post, rest):
        extended = False
        for i, t in enumerate(rest):
            if not (pre[t] & used_pre) and not (post[t] & used_post):
                extended = True
                rec(chosen + [t], used_pre | pre[t], used_post | post[t],
                    rest[i + 1:])
        if not extended and chosen:
            cand = frozenset(chosen)
            if all((pre[t] & used_pre) or (post[t] & used_post)
                   for t in cands if t not in cand):
                sets.add(cand)

    rec([], frozenset(), frozenset(), cands)
    return sorted(sets, key=lambda s: tuple(sorted(natural_key(t)
                                                   for t in s)))


class _Tracker:
    def __init__(self, net: PetriNet, cps: set):
        self.net = net
        self.cps = cps
        self.cycles = cycle_places(net)
        self.sync = net.synchronizing_ids()
        self.records = {}  # key -> discovery index
        self.record_list = []
        self.markings = set()

    def run(self):
        m0 = self.net.initial_marking
        self.markings.add(m0)
        self._explore(m0, frozenset(), [], {})
        return self.record_list

    # log: list of (tick, fired frozenset); producers: place -> (t, tick)
    def _explore(self, marked, fired, log, producers):
        for te in _structural_sets(self.net, marked, fired, self.sync):
            new_marked = frozenset(
                (marked - frozenset().union(*[self.net.pre_places(t)
                                              for t in te]))
                | frozenset().union(*[self.net.post_places(t) for t in te]))
            tick = len(log)
            log2 = log + [(tick, te)]
            producers2 = dict(producers)
            for t in sorted(te, key=natural_key):
                for p in self.net.post_places(t):
                    producers2[p] = (t, tick)
            self.markings.add(new_marked)
            self._mark_and_build(new_marked, te, log2, producers2)
            self._explore(new_marked, fired | te, log2, producers2)

    def _mark_and_build(self, marking, te, log, producers):
        hit = bool(marking & self.cps)
        hit = hit or bool(marking & self.cycles)
        ticks = {producers[p][1] for p in marking if p in producers}
        if len(ticks) > 1 or (ticks and any(p not in producers
                                            for p in marking)):
            hit = True  # tokens produced at different ticks coexist
        for t in te:
            if self.net.pre_places(t) & self.cycles and \
                    not self.net.post_places(t) <= self.cycles:
                hit = True  # firing left a loop
        if not hit:
            return
        self.cps |= marking
        for p in sorted(marking, key=natural_key):
            if p in producers:
                self._build_backward(p, log, producers)

    def _build_backward(self, target, log, producers):
        """Walk producer cones back to the nearest cut-points."""
        rounds = {}
        pre = set()
        t0, k0 = producers[target]
        frontier = [(target, k0)]
        guard_steps = 0
        while frontier:
            q, upto = frontier.pop()
            prod = self._find_production(q, upto, log)
            if prod is None:
                pre.add(q)
                continue
            t, k = prod
            rounds.setdefault(k, set()).add(t)
            for r in sorted(self.net.pre_places(t), key=natural_key):
                if r in self.cps:
                    pre.add(r)
                else:
                    frontier.append((r, k - 1))
            guard_steps += 1
            if guard_steps > len(log) * len(self.net.places) + 16:
                break
        if not rounds:
            return
        ordered = sorted(rounds)
        trans_seq = tuple(frozenset(rounds[k]) for k in ordered)
        post = frozenset().union(*[self.net.post_places(t)
                                   for t in trans_seq[-1]])
        # tick stamps come from the first traversal that discovers the
        # route; later branches (e.g. zero-iteration loop exits) reuse it
        key = (trans_seq, frozenset(pre), post)
        if key not in self.records:
            self.records[key] = (len(self.record_list), ordered[0],
                                 ordered[-1])
            self.record_list.append(key + (ordered[0], ordered[-1]))

    def _find_production(self, place, upto, log):
        for tick, te in reversed(log):
            if tick > upto:
                continue
            for t in sorted(te, key=natural_key):
                if place in self.net.post_places(t):
                    return (t, tick)
        return None


def _round_guard(net: PetriNet, env: dict, te: frozenset,
                 settings: NormSettings):
    g = BTRUE
    tm = net.transition_map()
    for t in sorted(te, key=natural_key):
        g = band(g, normalize(tm[t].guard, env, settings), settings)
    return g


def _round_transform(net: PetriNet, env: dict, te: frozenset,
                     settings: NormSettings) -> StateTransform:
    pm = net.place_map()
    merged = {}
    writers = {}
    for t in sorted(te, key=natural_key):
        for p in sorted(net.post_places(t), key=natural_key):
            place = pm[p]
            ups = place.on_self_loop if net.self_loop_of(p) == t \
                else place.on_mark
            acc = EMPTY_TRANSFORM
            for var, rhs in ups:
                acc = compose(acc,
                              make_transform({var: normalize(rhs, env,
                                                             settings)}),
                              settings)
            for k, v in acc.entries:
                if k in merged and writers[k] != p:
                    raise WriteConflict(
                        f"places {writers[k]!r} and {p!r} both write {k!r}")
                merged[k] = v
                writers[k] = p
    return make_transform(merged)


def _finish_path(net: PetriNet, env: dict, key, pid: str,
                 settings: NormSettings) -> Path:
    trans_seq, pre, post, start, last = key
    guards = []
    transform = EMPTY_TRANSFORM
    for te in trans_seq:
        guards.append(_round_guard(net, env, te, settings))
        transform = compose(transform,
                            _round_transform(net, env, te, settings),
                            settings)
    return Path(pid, trans_seq, pre, post, guard_seq(guards), transform,
                start, last, parts=(pid,))


def path_constructor(net: PetriNet, prefix: str = "p",
                     settings: NormSettings = DEFAULT_SETTINGS) -> PathCover:
    """Build the path cover by repeated token-tracking passes until the
    cut-point set stabilizes; paths come from the final pass only."""
    statics = static_cut_points(net)
    cps = set(statics)
    tracker = None
    for _ in range(len(net.places) + 2):
        before = set(cps)
        tracker = _Tracker(net, cps)
        tracker.run()
        if cps == before:
            break
    env = net.var_env()
    paths = []
    for i, key in enumerate(tracker.record_list):
        paths.append(_finish_path(net, env, key, f"{prefix}{i + 1}",
                                  settings))
    return PathCover(tuple(paths),
                     CutPoints(statics, frozenset(cps) - statics),
                     frozenset(tracker.markings), source=prefix)


# ---------------------------------------------------------------------------
# path algebra


def concatenate(a: Path, b: Path,
                settings: NormSettings = DEFAULT_SETTINGS) -> Path:
    """Sequential composition a.b; guard entries stay per-round, data
    transformations compose by substitution."""
    if not (b.pre_places & a.post_places):
        raise NotComposable(f"{b.id} does not start where {a.id} ends")
    if b.start_tick != a.last_tick + 1:
        raise NotComposable(
            f"tick gap between {a.id} (ends {a.last_tick}) and "
            f"{b.id} (starts {b.start_tick})")
    return Path(
        f"{a.id}.{b.id}",
        a.trans_seq + b.trans_seq,
        a.pre_places | (b.pre_places - a.post_places),
        b.post_places,
        guard_seq(a.guard_seq + b.guard_seq),
        compose(a.transform, b.transform, settings),
        a.start_tick,
        b.last_tick,
        parts=a.parts + b.parts,
    )


def merge(paths, cover: PathCover,
          settings: NormSettings = DEFAULT_SETTINGS) -> Path:
    """Fuse parallelizable paths sharing a common feeding transition (or
    whose sources were co-marked during tracking); rounds align by absolute
    tick, guards conjoin, transforms union disjointly."""
    paths = sorted(paths, key=lambda p: natural_key(p.id))
    if not paths:
        raise NotMergeable("nothing to merge")
    if len(paths) == 1:
        return paths[0]
    all_pre = set()
    for p in paths:
        if all_pre & p.pre_places:
            raise NotMergeable("pre-place sets overlap")
        all_pre |= p.pre_places
    if not _parallelizable(paths, cover):
        raise NotMergeable("no common feeding transition or co-marking")

    lo = min(p.start_tick for p in paths)
    hi = max(p.last_tick for p in paths)
    rounds = []
    guards = []
    transform_entries = {}
    writers = {}
    for tick in range(lo, hi + 1):
        te = set()
        g = BTRUE
        for p in paths:
            idx = tick - p.start_tick
            if 0 <= idx < len(p.trans_seq):
                te |= p.trans_seq[idx]
                g = band(g, p.guard_seq[idx], settings)
        rounds.append(frozenset(te))
        guards.append(g)
    for p in paths:
        for k, v in p.transform.entries:
            if k in transform_entries and writers[k] != p.id and \
                    transform_entries[k] != v:
                raise WriteConflict(
                    f"paths {writers[k]!r} and {p.id!r} both write {k!r}")
            transform_entries[k] = v
            writers[k] = p.id

    return Path(
        "(" + " v ".join(p.id for p in paths) + ")",
        tuple(rounds),
        frozenset(all_pre),
        frozenset().union(*[p.post_places for p in paths]),
        guard_seq(guards),
        make_transform(transform_entries),
        lo,
        hi,
        parts=sum((p.parts for p in paths), ()),
    )


def _parallelizable(paths, cover: PathCover) -> bool:
    net_markings = cover.markings
    union_pre = frozenset().union(*[p.pre_places for p in paths])
    if any(union_pre <= m for m in net_markings):
        return True
    return False


def common_feeder(net: PetriNet, paths) -> frozenset:
    """Transitions feeding at least one pre-place of every path (the
    common spawn point of a parallel group)."""
    commons = None
    for p in paths:
        feeds = set()
        for q in p.pre_places:
            feeds |= net.pre_transitions(q)
        commons = feeds if commons is None else commons & feeds
    return frozenset(commons or ())


# ---------------------------------------------------------------------------
# dump


def cover_to_json(cover: PathCover) -> str:
    doc = []
    for p in cover.paths:
        doc.append({
            "R": guard_seq_to_str(p.guard_seq),
            "id": p.id,
            "last_tick": p.last_tick,
            "pre_places": sorted(p.pre_places, key=natural_key),
            "post_places": sorted(p.post_places, key=natural_key),
            "r": transform_to_str(p.transform),
            "rounds": [sorted(s, key=natural_key) for s in p.trans_seq],
            "start_tick": p.start_tick,
        })
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
