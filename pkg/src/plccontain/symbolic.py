"""Canonical normal forms for guard and update expressions.

Integers normalize to multivariate polynomials with integer coefficients;
truncating division is kept as an opaque atom (no rewriting of ``(x*10)/10``
unless the divisor is a constant dividing every coefficient exactly).
Booleans normalize to the set of satisfying rows over their canonicalized
atoms (bool variables and integer comparisons) while the atom count stays
within a configurable bound, and to a hashed NNF term beyond it.

Equal canonical forms serialize to identical strings, which is what the
containment checker compares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .sfc_core import (Binary, BoolLit, Expr, IntLit, Unary, VarRef,
                       infer_type)

DEFAULT_BOOL_BOUND = 16
DEFAULT_MONOMIAL_CAP = 4096


class KindMismatch(Exception):
    pass


class NormalizationOverflow(Exception):
    pass


@dataclass(frozen=True)
class NormSettings:
    bool_bound: int = DEFAULT_BOOL_BOUND
    monomial_cap: int = DEFAULT_MONOMIAL_CAP


DEFAULT_SETTINGS = NormSettings()


def tdiv(a: int, b: int) -> int:
    """Integer division truncating toward zero (IEC semantics)."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


# ---------------------------------------------------------------------------
# integer polynomials


@dataclass(frozen=True)
class IntNorm:
    """Canonical polynomial: sorted tuple of (monomial, coefficient).

    A monomial is a sorted tuple of (atom, exponent); an atom is a variable
    name or a DivAtom. Zero coefficients are never stored; the zero
    polynomial has no terms.
    """

    terms: tuple

    @property
    def kind(self) -> str:
        return "int"

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1
                                  and self.terms[0][0] == ())

    def const_value(self) -> int:
        if not self.terms:
            return 0
        return self.terms[0][1]

    def __str__(self):
        return int_to_str(self)


@dataclass(frozen=True)
class DivAtom:
    num: IntNorm
    den: IntNorm


def _atom_key(atom) -> tuple:
    if isinstance(atom, str):
        return ("v", atom)
    return ("w", int_to_str(atom.num), int_to_str(atom.den))


def _mono_key(mono) -> tuple:
    return tuple(( _atom_key(a), e) for a, e in mono)


def _mk_poly(mapping: dict, cap: int = DEFAULT_MONOMIAL_CAP) -> IntNorm:
    items = [(m, c) for m, c in mapping.items() if c != 0]
    if len(items) > cap:
        raise NormalizationOverflow(f"{len(items)} monomials exceeds cap {cap}")
    # constant monomial () sorts after named monomials
    items.sort(key=lambda mc: (mc[0] == (), _mono_key(mc[0])))
    return IntNorm(tuple(items))


def int_const(c: int) -> IntNorm:
    return _mk_poly({(): c}) if c else IntNorm(())


def int_var(name: str) -> IntNorm:
    return _mk_poly({((name, 1),): 1})


def int_add(a: IntNorm, b: IntNorm, cap: int = DEFAULT_MONOMIAL_CAP) -> IntNorm:
    acc = dict(a.terms)
    for m, c in b.terms:
        acc[m] = acc.get(m, 0) + c
    return _mk_poly(acc, cap)


def int_neg(a: IntNorm) -> IntNorm:
    return IntNorm(tuple((m, -c) for m, c in a.terms))


def int_sub(a: IntNorm, b: IntNorm, cap: int = DEFAULT_MONOMIAL_CAP) -> IntNorm:
    return int_add(a, int_neg(b), cap)


def _mono_mul(m1, m2) -> tuple:
    acc = {}
    for a, e in m1:
        acc[a] = acc.get(a, 0) + e
    for a, e in m2:
        acc[a] = acc.get(a, 0) + e
    return tuple(sorted(acc.items(), key=lambda ae: _atom_key(ae[0])))


def int_mul(a: IntNorm, b: IntNorm, cap: int = DEFAULT_MONOMIAL_CAP) -> IntNorm:
    acc = {}
    for m1, c1 in a.terms:
        for m2, c2 in b.terms:
            m = _mono_mul(m1, m2)
            acc[m] = acc.get(m, 0) + c1 * c2
            if len(acc) > cap:
                raise NormalizationOverflow(
                    f"{len(acc)} monomials exceeds cap {cap}")
    return _mk_poly(acc, cap)


def int_div(a: IntNorm, b: IntNorm, cap: int = DEFAULT_MONOMIAL_CAP) -> IntNorm:
    """Truncating division; opaque unless it folds exactly."""
    if b.is_const():
        d = b.const_value()
        if d != 0:
            if a.is_const():
                return int_const(tdiv(a.const_value(), d))
            if d < 0:
                return int_div(int_neg(a), int_const(-d), cap)
            if d == 1:
                return a
            if all(c % d == 0 for _, c in a.terms):
                return IntNorm(tuple((m, c // d) for m, c in a.terms))
    return _mk_poly({((DivAtom(a, b), 1),): 1}, cap)


def int_vars(p: IntNorm) -> frozenset:
    out = set()
    for m, _ in p.terms:
        for atom, _e in m:
            if isinstance(atom, str):
                out.add(atom)
            else:
                out |= int_vars(atom.num) | int_vars(atom.den)
    return frozenset(out)


def int_substitute(p: IntNorm, mapping: dict,
                   cap: int = DEFAULT_MONOMIAL_CAP) -> IntNorm:
    """Replace variable atoms by polynomials; mapping: name -> IntNorm."""
    acc = int_const(0)
    for m, c in p.terms:
        term = int_const(c)
        for atom, e in m:
            if isinstance(atom, str):
                repl = mapping.get(atom, int_var(atom))
            else:
                repl = int_div(int_substitute(atom.num, mapping, cap),
                               int_substitute(atom.den, mapping, cap), cap)
            for _ in range(e):
                term = int_mul(term, repl, cap)
        acc = int_add(acc, term, cap)
    return acc


def _mono_to_str(mono, coeff: int) -> str:
    if not mono:
        return str(coeff)
    parts = []
    for atom, e in mono:
        base = atom if isinstance(atom, str) else \
            f"div({int_to_str(atom.num)}, {int_to_str(atom.den)})"
        parts.append(base if e == 1 else f"{base}^{e}")
    body = "*".join(parts)
    if coeff == 1:
        return body
    if coeff == -1:
        return f"-{body}"
    return f"{coeff}*{body}"


def int_to_str(p: IntNorm) -> str:
    if not p.terms:
        return "0"
    pieces = []
    for i, (m, c) in enumerate(p.terms):
        s = _mono_to_str(m, c)
        if i == 0:
            pieces.append(s)
        elif s.startswith("-"):
            pieces.append(f"- {s[1:]}")
        else:
            pieces.append(f"+ {s}")
    return " ".join(pieces)


# ---------------------------------------------------------------------------
# boolean atoms


@dataclass(frozen=True)
class BVar:
    name: str


@dataclass(frozen=True)
class Lez:
    """poly <= 0 over the integers."""

    poly: IntNorm


@dataclass(frozen=True)
class Eqz:
    """poly = 0 over the integers."""

    poly: IntNorm


def _batom_key(atom) -> tuple:
    if isinstance(atom, BVar):
        return ("b", atom.name)
    if isinstance(atom, Lez):
        return ("l", int_to_str(atom.poly))
    return ("e", int_to_str(atom.poly))


def _split_const(p: IntNorm):
    """Return (non-constant part, constant)."""
    const = 0
    rest = []
    for m, c in p.terms:
        if m == ():
            const = c
        else:
            rest.append((m, c))
    return IntNorm(tuple(rest)), const


def _poly_gcd(terms) -> int:
    g = 0
    for _, c in terms:
        g = math.gcd(g, abs(c))
    return g or 1


def mk_lez(p: IntNorm):
    """Canonical p <= 0 atom, or a bool when it folds."""
    rest, const = _split_const(p)
    if not rest.terms:
        return const <= 0
    g = _poly_gcd(rest.terms)
    # g*q + const <= 0  <=>  q <= floor(-const / g) over the integers
    bound = (-const) // g
    q = IntNorm(tuple((m, c // g) for m, c in rest.terms))
    tightened = int_add(q, int_const(-bound))
    return Lez(tightened)


def mk_eqz(p: IntNorm):
    rest, const = _split_const(p)
    if not rest.terms:
        return const == 0
    g = _poly_gcd(rest.terms)
    if const % g != 0:
        return False  # g*q = -const unsatisfiable over the integers
    q_terms = tuple((m, c // g) for m, c in rest.terms)
    c0 = const // g
    if q_terms[0][1] < 0:
        q_terms = tuple((m, -c) for m, c in q_terms)
        c0 = -c0
    return Eqz(int_add(IntNorm(q_terms), int_const(c0)))


def batom_vars(atom) -> frozenset:
    if isinstance(atom, BVar):
        return frozenset([atom.name])
    return int_vars(atom.poly)


def batom_to_str(atom) -> str:
    if isinstance(atom, BVar):
        return atom.name
    rest, const = _split_const(atom.poly)
    if isinstance(atom, Eqz):
        return f"{int_to_str(rest)} = {-const}"
    if all(c < 0 for _, c in rest.terms):
        return f"{int_to_str(int_neg(rest))} >= {const}"
    return f"{int_to_str(rest)} <= {-const}"


# ---------------------------------------------------------------------------
# boolean normal form


@dataclass(frozen=True)
class BoolNorm:
    """Rows form: satisfying assignments over a sorted atom tuple.

    ``form == "rows"``: ``rows`` holds bitmasks over ``atoms`` (bit i set
    means atoms[i] is true). Zero atoms encode constants: rows == {0} is
    True, rows == frozenset() is False.

    ``form == "nnf"``: structurally hashed fallback past the atom bound;
    sound but incomplete for equivalence.
    """

    form: str
    atoms: tuple = ()
    rows: frozenset = frozenset()
    node: tuple = ()

    @property
    def kind(self) -> str:
        return "bool"

    def __str__(self):
        return bool_to_str(self)


BTRUE = BoolNorm("rows", (), frozenset([0]))
BFALSE = BoolNorm("rows", (), frozenset())


def _rows_canonical(atoms: tuple, rows: frozenset) -> BoolNorm:
    """Drop inessential atoms, then constant-fold."""
    atoms = list(atoms)
    rows = set(rows)
    changed = True
    while changed and atoms:
        changed = False
        for i in range(len(atoms)):
            bit = 1 << i
            lo = {r for r in rows if not r & bit}
            hi = {r & ~bit for r in rows if r & bit}
            if lo == hi:
                # atom i never affects the outcome; project it away
                rows = {_drop_bit(r, i) for r in rows}
                del atoms[i]
                changed = True
                break
    if not atoms:
        return BTRUE if rows else BFALSE
    if len(rows) == (1 << len(atoms)):
        return BTRUE
    if not rows:
        return BFALSE
    return BoolNorm("rows", tuple(atoms), frozenset(rows))


def _drop_bit(mask: int, i: int) -> int:
    low = mask & ((1 << i) - 1)
    high = (mask >> (i + 1)) << i
    return low | high


def _from_atom(atom) -> BoolNorm:
    if atom is True:
        return BTRUE
    if atom is False:
        return BFALSE
    return BoolNorm("rows", (atom,), frozenset([1]))


def _eval_rows(bn: BoolNorm, assign: dict) -> bool:
    mask = 0
    for i, a in enumerate(bn.atoms):
        if assign[a]:
            mask |= 1 << i
    return mask in bn.rows


def bool_atoms(bn: BoolNorm) -> frozenset:
    if bn.form == "rows":
        return frozenset(bn.atoms)

    def walk(node):
        if node[0] == "lit":
            return frozenset([node[2]])
        if node[0] in ("true", "false"):
            return frozenset()
        out = frozenset()
        for ch in node[1]:
            out |= walk(ch)
        return out

    return walk(bn.node)


def _combine(op, a: BoolNorm, b: BoolNorm,
             settings: NormSettings = DEFAULT_SETTINGS) -> BoolNorm:
    union = sorted(bool_atoms(a) | bool_atoms(b), key=_batom_key)
    if len(union) > settings.bool_bound:
        return _nnf_combine(op, a, b)
    rows = set()
    for mask in range(1 << len(union)):
        assign = {atom: bool(mask & (1 << i)) for i, atom in enumerate(union)}
        if op(_eval_rows_general(a, assign), _eval_rows_general(b, assign)):
            rows.add(mask)
    return _rows_canonical(tuple(union), frozenset(rows))


def _eval_rows_general(bn: BoolNorm, assign: dict) -> bool:
    if bn.form == "rows":
        return _eval_rows(bn, assign)
    return _eval_nnf(bn.node, assign)


def band(a: BoolNorm, b: BoolNorm,
         settings: NormSettings = DEFAULT_SETTINGS) -> BoolNorm:
    if a == BFALSE or b == BFALSE:
        return BFALSE
    if a == BTRUE:
        return b
    if b == BTRUE:
        return a
    return _combine(lambda x, y: x and y, a, b, settings)


def bor(a: BoolNorm, b: BoolNorm,
        settings: NormSettings = DEFAULT_SETTINGS) -> BoolNorm:
    if a == BTRUE or b == BTRUE:
        return BTRUE
    if a == BFALSE:
        return b
    if b == BFALSE:
        return a
    return _combine(lambda x, y: x or y, a, b, settings)


def bnot(a: BoolNorm, settings: NormSettings = DEFAULT_SETTINGS) -> BoolNorm:
    if a.form == "rows":
        full = set(range(1 << len(a.atoms)))
        return _rows_canonical(a.atoms, frozenset(full - set(a.rows)))
    return _nnf_not(a)


# -- NNF fallback ------------------------------------------------------------


def _nnf_lit(atom, positive: bool) -> tuple:
    return ("lit", _batom_key(atom), atom, positive)


def _nnf_flatten(op: str, children) -> tuple:
    flat = []
    for ch in children:
        if ch[0] == op:
            flat.extend(ch[1])
        else:
            flat.append(ch)
    uniq = sorted(set(flat))
    return (op, tuple(uniq))


def _to_nnf_node(bn: BoolNorm) -> tuple:
    if bn.form == "nnf":
        return bn.node
    if bn == BTRUE:
        return ("true",)
    if bn == BFALSE:
        return ("false",)
    disjuncts = []
    for mask in sorted(bn.rows):
        lits = [_nnf_lit(a, bool(mask & (1 << i)))
                for i, a in enumerate(bn.atoms)]
        disjuncts.append(_nnf_flatten("and", lits) if len(lits) > 1
                         else lits[0])
    return _nnf_flatten("or", disjuncts) if len(disjuncts) > 1 \
        else disjuncts[0]


def _nnf_combine(op, a: BoolNorm, b: BoolNorm) -> BoolNorm:
    name = "and" if op(True, False) is False and op(True, True) else "or"
    node = _nnf_flatten(name, [_to_nnf_node(a), _to_nnf_node(b)])
    return BoolNorm("nnf", node=node)


def _nnf_not(a: BoolNorm) -> BoolNorm:
    def neg(node):
        if node[0] == "lit":
            return ("lit", node[1], node[2], not node[3])
        if node[0] == "true":
            return ("false",)
        if node[0] == "false":
            return ("true",)
        op = "or" if node[0] == "and" else "and"
        return _nnf_flatten(op, [neg(ch) for ch in node[1]])

    return BoolNorm("nnf", node=neg(_to_nnf_node(a)))


def _eval_nnf(node, assign: dict) -> bool:
    if node[0] == "lit":
        v = assign[node[2]]
        return v if node[3] else not v
    if node[0] == "true":
        return True
    if node[0] == "false":
        return False
    if node[0] == "and":
        return all(_eval_nnf(ch, assign) for ch in node[1])
    return any(_eval_nnf(ch, assign) for ch in node[1])


# ---------------------------------------------------------------------------
# normalization of expressions


def normalize(e: Expr, env: dict,
              settings: NormSettings = DEFAULT_SETTINGS):
    """Normalize a well-typed expression; env maps names to 'int'/'bool'."""
    if infer_type(e, env) == "int":
        return _norm_int(e, env, settings)
    return _norm_bool(e, env, settings)


def _norm_int(e: Expr, env: dict, st: NormSettings) -> IntNorm:
    cap = st.monomial_cap
    if isinstance(e, IntLit):
        return int_const(e.value)
    if isinstance(e, VarRef):
        return int_var(e.name)
    if isinstance(e, Unary) and e.op == "-":
        return int_neg(_norm_int(e.operand, env, st))
    if isinstance(e, Binary):
        a = _norm_int(e.left, env, st)
        b = _norm_int(e.right, env, st)
        if e.op == "+":
            return int_add(a, b, cap)
        if e.op == "-":
            return int_sub(a, b, cap)
        if e.op == "*":
            return int_mul(a, b, cap)
        if e.op == "/":
            return int_div(a, b, cap)
    raise KindMismatch(f"not an int expression: {e!r}")


def _norm_bool(e: Expr, env: dict, st: NormSettings) -> BoolNorm:
    if isinstance(e, BoolLit):
        return BTRUE if e.value else BFALSE
    if isinstance(e, VarRef):
        return _from_atom(BVar(e.name))
    if isinstance(e, Unary) and e.op == "!":
        return bnot(_norm_bool(e.operand, env, st), st)
    if isinstance(e, Binary):
        if e.op in ("&&", "||"):
            a = _norm_bool(e.left, env, st)
            b = _norm_bool(e.right, env, st)
            return band(a, b, st) if e.op == "&&" else bor(a, b, st)
        if e.op in ("<", "<=", "=", "!=", ">=", ">"):
            if infer_type(e.left, env) == "bool":
                a = _norm_bool(e.left, env, st)
                b = _norm_bool(e.right, env, st)
                same = bor(band(a, b, st),
                           band(bnot(a, st), bnot(b, st), st), st)
                return same if e.op == "=" else bnot(same, st)
            a = _norm_int(e.left, env, st)
            b = _norm_int(e.right, env, st)
            one = int_const(1)
            if e.op == "<":
                return _from_atom(mk_lez(int_add(int_sub(a, b), one)))
            if e.op == "<=":
                return _from_atom(mk_lez(int_sub(a, b)))
            if e.op == ">":
                return _from_atom(mk_lez(int_add(int_sub(b, a), one)))
            if e.op == ">=":
                return _from_atom(mk_lez(int_sub(b, a)))
            eq = _from_atom(mk_eqz(int_sub(a, b)))
            return eq if e.op == "=" else bnot(eq, st)
    raise KindMismatch(f"not a bool expression: {e!r}")


def expr_equiv(a, b) -> bool:
    """Byte-level equality of canonical forms."""
    if a.kind != b.kind:
        raise KindMismatch(f"cannot compare {a.kind} with {b.kind}")
    return a == b


def is_true(bn: BoolNorm) -> bool:
    return bn == BTRUE


def is_false(bn: BoolNorm) -> bool:
    return bn == BFALSE


def bool_vars(bn: BoolNorm) -> frozenset:
    if bn.form == "rows":
        out = frozenset()
        for a in bn.atoms:
            out |= batom_vars(a)
        return out

    def walk(node):
        if node[0] == "lit":
            return batom_vars(node[2])
        if node[0] in ("true", "false"):
            return frozenset()
        out = frozenset()
        for ch in node[1]:
            out |= walk(ch)
        return out

    return walk(bn.node)


def norm_vars(n) -> frozenset:
    return int_vars(n) if isinstance(n, IntNorm) else bool_vars(n)


def bool_substitute(bn: BoolNorm, mapping: dict,
                    settings: NormSettings = DEFAULT_SETTINGS) -> BoolNorm:
    """mapping: name -> NormExpr (IntNorm for int vars, BoolNorm for bool)."""

    int_map = {k: v for k, v in mapping.items() if isinstance(v, IntNorm)}

    def sub_atom(atom) -> BoolNorm:
        if isinstance(atom, BVar):
            repl = mapping.get(atom.name)
            if repl is None:
                return _from_atom(atom)
            if not isinstance(repl, BoolNorm):
                raise KindMismatch(f"{atom.name} substituted with an int")
            return repl
        poly = int_substitute(atom.poly, int_map, settings.monomial_cap)
        made = mk_lez(poly) if isinstance(atom, Lez) else mk_eqz(poly)
        return _from_atom(made)

    if bn.form == "rows":
        acc = BFALSE
        for mask in sorted(bn.rows):
            term = BTRUE
            for i, atom in enumerate(bn.atoms):
                sa = sub_atom(atom)
                term = band(term, sa if mask & (1 << i) else bnot(sa, settings),
                            settings)
                if term == BFALSE:
                    break
            acc = bor(acc, term, settings)
        return acc

    def walk(node) -> BoolNorm:
        if node[0] == "lit":
            sa = sub_atom(node[2])
            return sa if node[3] else bnot(sa, settings)
        if node[0] == "true":
            return BTRUE
        if node[0] == "false":
            return BFALSE
        acc = BTRUE if node[0] == "and" else BFALSE
        comb = band if node[0] == "and" else bor
        for ch in node[1]:
            acc = comb(acc, walk(ch), settings)
        return acc

    return walk(bn.node)


def bool_project(bn: BoolNorm, names: frozenset,
                 settings: NormSettings = DEFAULT_SETTINGS) -> BoolNorm:
    """Existentially eliminate every atom whose variables meet ``names``.

    On NNF terms this replaces the affected literals (both polarities) with
    True, which coincides with projection on the guard shapes that occur in
    practice.
    """
    if bn.form == "rows":
        atoms = list(bn.atoms)
        rows = set(bn.rows)
        i = 0
        while i < len(atoms):
            if batom_vars(atoms[i]) & names:
                rows = {_drop_bit(r, i) for r in rows}
                del atoms[i]
            else:
                i += 1
        return _rows_canonical(tuple(atoms), frozenset(rows))

    def walk(node):
        if node[0] == "lit":
            return ("true",) if batom_vars(node[2]) & names else node
        if node[0] in ("true", "false"):
            return node
        children = [walk(ch) for ch in node[1]]
        if node[0] == "and":
            children = [ch for ch in children if ch != ("true",)]
            if any(ch == ("false",) for ch in children):
                return ("false",)
            if not children:
                return ("true",)
            return _nnf_flatten("and", children)
        children = [ch for ch in children if ch != ("false",)]
        if any(ch == ("true",) for ch in children):
            return ("true",)
        if not children:
            return ("false",)
        return _nnf_flatten("or", children)

    node = walk(bn.node)
    if node == ("true",):
        return BTRUE
    if node == ("false",):
        return BFALSE
    return BoolNorm("nnf", node=node)


def bool_to_str(bn: BoolNorm) -> str:
    if bn.form == "nnf":
        def render(node, parent=""):
            if node[0] == "lit":
                s = batom_to_str(node[2])
                if not node[3]:
                    s = f"!{s}" if isinstance(node[2], BVar) else f"!({s})"
                return s
            if node[0] == "true":
                return "true"
            if node[0] == "false":
                return "false"
            sep = " & " if node[0] == "and" else " | "
            body = sep.join(render(ch, node[0]) for ch in node[1])
            return f"({body})" if parent and parent != node[0] else body

        return render(bn.node)
    if bn == BTRUE:
        return "true"
    if bn == BFALSE:
        return "false"

    def lit(i, positive):
        s = batom_to_str(bn.atoms[i])
        if positive:
            return s if isinstance(bn.atoms[i], BVar) else f"({s})"
        return f"!{s}" if isinstance(bn.atoms[i], BVar) else f"!({s})"

    disjuncts = []
    for mask in sorted(bn.rows):
        lits = [lit(i, bool(mask & (1 << i))) for i in range(len(bn.atoms))]
        body = " & ".join(lits)
        disjuncts.append(f"({body})" if len(lits) > 1 and len(bn.rows) > 1
                         else body)
    return " | ".join(disjuncts)


def norm_to_str(n) -> str:
    return int_to_str(n) if isinstance(n, IntNorm) else bool_to_str(n)


def eval_int(p: IntNorm, state: dict) -> int:
    """Evaluate a canonical polynomial on a concrete state."""
    total = 0
    for mono, coeff in p.terms:
        term = coeff
        for atom, e in mono:
            if isinstance(atom, str):
                base = state[atom]
            else:
                den = eval_int(atom.den, state)
                if den == 0:
                    raise ZeroDivisionError("division by zero in DivAtom")
                base = tdiv(eval_int(atom.num, state), den)
            term *= base ** e
        total += term
    return total


def eval_bool(bn: BoolNorm, state: dict) -> bool:
    """Evaluate a boolean normal form on a concrete state."""

    def atom_val(atom) -> bool:
        if isinstance(atom, BVar):
            return bool(state[atom.name])
        v = eval_int(atom.poly, state)
        return v <= 0 if isinstance(atom, Lez) else v == 0

    if bn.form == "rows":
        mask = 0
        for i, a in enumerate(bn.atoms):
            if atom_val(a):
                mask |= 1 << i
        return mask in bn.rows

    def walk(node) -> bool:
        if node[0] == "lit":
            v = atom_val(node[2])
            return v if node[3] else not v
        if node[0] == "true":
            return True
        if node[0] == "false":
            return False
        if node[0] == "and":
            return all(walk(ch) for ch in node[1])
        return any(walk(ch) for ch in node[1])

    return walk(bn.node)


def eval_norm(n, state: dict):
    return eval_int(n, state) if isinstance(n, IntNorm) \
        else eval_bool(n, state)


# ---------------------------------------------------------------------------
# guard sequences (g1 ~> g2 ~> ...)

GuardSeq = tuple  # tuple of BoolNorm


def guard_seq(entries) -> GuardSeq:
    entries = tuple(entries)
    if any(is_false(e) for e in entries):
        return (BFALSE,)  # canonical infeasible sequence
    return entries


def collapse(seq: GuardSeq) -> GuardSeq:
    """Delete canonical-True entries (alignment rule for comparisons)."""
    return tuple(e for e in seq if not is_true(e))


def effective_len(seq: GuardSeq) -> int:
    """Number of non-trivial guard rounds; the tick measure used by
    path equivalence."""
    return len(collapse(seq))


def guard_seq_equiv(a: GuardSeq, b: GuardSeq) -> bool:
    ca, cb = collapse(a), collapse(b)
    if len(ca) != len(cb):
        return False
    return all(expr_equiv(x, y) for x, y in zip(ca, cb))


def guard_seq_subsumes(a: GuardSeq, b: GuardSeq) -> bool:
    """Prefix subsumption: a needs extension to possibly equal b."""
    ca, cb = collapse(a), collapse(b)
    if len(ca) > len(cb):
        return False
    return all(expr_equiv(x, y) for x, y in zip(ca, cb[:len(ca)]))


def guard_seq_to_str(seq: GuardSeq) -> str:
    return " ~> ".join(bool_to_str(e) for e in seq)


# ---------------------------------------------------------------------------
# state transforms


def _is_identity(name: str, value) -> bool:
    if isinstance(value, IntNorm):
        return value == int_var(name)
    return value == _from_atom(BVar(name))


@dataclass(frozen=True)
class StateTransform:
    """Map variable -> normalized RHS over the pre-state; identities elided.

    ``consistent`` is cleared when a variable renaming collapses two
    entries with different right-hand sides; such a transform compares
    unequal to everything.
    """

    entries: tuple  # sorted tuple of (name, NormExpr)
    consistent: bool = True

    def get(self, name: str):
        for k, v in self.entries:
            if k == name:
                return v
        return None

    def targets(self) -> frozenset:
        return frozenset(k for k, _ in self.entries)

    def is_empty(self) -> bool:
        return not self.entries and self.consistent

    def __str__(self):
        return transform_to_str(self)


EMPTY_TRANSFORM = StateTransform(())


def make_transform(mapping: dict, consistent: bool = True) -> StateTransform:
    items = [(k, v) for k, v in mapping.items() if not _is_identity(k, v)]
    items.sort(key=lambda kv: kv[0])
    return StateTransform(tuple(items), consistent)


def transform_vars(t: StateTransform) -> frozenset:
    out = set()
    for k, v in t.entries:
        out.add(k)
        out |= norm_vars(v)
    return frozenset(out)


def compose(t1: StateTransform, t2: StateTransform,
            settings: NormSettings = DEFAULT_SETTINGS) -> StateTransform:
    """Apply t1 first, then t2; result maps pre-state to final state."""
    if not (t1.consistent and t2.consistent):
        return StateTransform((), False)
    sub = {k: v for k, v in t1.entries}
    out = dict(sub)
    for k, v in t2.entries:
        if isinstance(v, IntNorm):
            out[k] = int_substitute(v, {n: e for n, e in sub.items()
                                        if isinstance(e, IntNorm)},
                                    settings.monomial_cap)
        else:
            out[k] = bool_substitute(v, sub, settings)
    return make_transform(out)


def transform_substitute(t: StateTransform, mapping: dict,
                         settings: NormSettings = DEFAULT_SETTINGS
                         ) -> StateTransform:
    """Rewrite every RHS over the pre-state of an earlier transform."""
    if not t.consistent:
        return t
    out = {}
    int_map = {n: e for n, e in mapping.items() if isinstance(e, IntNorm)}
    for k, v in t.entries:
        if isinstance(v, IntNorm):
            out[k] = int_substitute(v, int_map, settings.monomial_cap)
        else:
            out[k] = bool_substitute(v, mapping, settings)
    return make_transform(out)


def transforms_equal(a: StateTransform, b: StateTransform) -> bool:
    if not (a.consistent and b.consistent):
        return False
    return a.entries == b.entries


def transform_to_str(t: StateTransform) -> str:
    if not t.consistent:
        return "{<inconsistent>}"
    body = ", ".join(f"{k} := {norm_to_str(v)}" for k, v in t.entries)
    return "{" + body + "}"


# ---------------------------------------------------------------------------
# uncommon-variable removal (with eta_v renaming)


def rename_map(eta_v) -> dict:
    """eta_v pairs (canonical, other) -> substitution other -> canonical."""
    return {other: canon for canon, other in eta_v}


def _rename_norm(v, ren: dict, env_kind: str,
                 settings: NormSettings) -> object:
    if not ren:
        return v
    if isinstance(v, IntNorm):
        return int_substitute(v, {o: int_var(c) for o, c in ren.items()},
                              settings.monomial_cap)
    return bool_substitute(v, {o: _from_atom(BVar(c)) for o, c in ren.items()},
                           settings)


def drop_uncommon_guard_seq(seq: GuardSeq, common: frozenset, eta_v,
                            settings: NormSettings = DEFAULT_SETTINGS
                            ) -> GuardSeq:
    """Rename eta_v-matched variables to the canonical side, then replace
    literals over remaining uncommon variables with True (projection)."""
    ren = rename_map(eta_v)
    keep = frozenset(common) | frozenset(ren.values())
    out = []
    for entry in seq:
        e = _rename_norm(entry, ren, "bool", settings)
        foreign = bool_vars(e) - keep
        if foreign:
            e = bool_project(e, foreign, settings)
        out.append(e)
    return guard_seq(out)


def drop_uncommon_transform(t: StateTransform, common: frozenset, eta_v,
                            settings: NormSettings = DEFAULT_SETTINGS
                            ) -> StateTransform:
    """Rename matched variables, delete entries targeting uncommon ones."""
    if not t.consistent:
        return t
    ren = rename_map(eta_v)
    keep = frozenset(common) | frozenset(ren.values())
    out = {}
    consistent = True
    for k, v in t.entries:
        k2 = ren.get(k, k)
        if k2 not in keep:
            continue
        v2 = _rename_norm(v, ren, "", settings)
        if k2 in out and out[k2] != v2:
            consistent = False
        out[k2] = v2
    return make_transform(out, consistent)
