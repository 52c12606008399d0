"""Set expressions over the integers and their alive vectors.

Grammar (whitespace insignificant)::

    union   := inter ('|' inter)*
    inter   := unary (('&' | '\\') unary)*
    unary   := '!' unary | atom
    atom    := 'primes' | 'all' | 'empty' | 'class' '(' INT ',' INT ')'
             | '{' [INT (',' INT)*] '}' | '(' union ')'

"Primes" means the positive primes.  A class is ``class(R, M)`` with any
integer ``R`` and ``M >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Optional, Tuple

import numpy as np

from .errors import ComplexityError, ParseError, ResourceError
from .numtheory import (
    Level,
    ResidueClass,
    class_contains_composite,
    class_contains_prime,
    intersect_classes,
    is_prime,
    prime_factors,
    unique_prime,
)

MAX_NODES = 10_000
MAX_DEPTH = 200
MAX_FINITE_SET = 10_000
ATOM_BUDGET = 10_000


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Class:
    cls: ResidueClass


@dataclass(frozen=True)
class Primes:
    pass


@dataclass(frozen=True)
class AllIntegers:
    pass


@dataclass(frozen=True)
class EmptySet:
    pass


@dataclass(frozen=True)
class FiniteSet:
    members: Tuple[int, ...]

    def __post_init__(self):
        if list(self.members) != sorted(set(self.members)):
            raise ValueError("FiniteSet members must be sorted and distinct")

    @classmethod
    def of(cls, values: Iterable[int]) -> "FiniteSet":
        return cls(tuple(sorted(set(values))))


@dataclass(frozen=True)
class Complement:
    child: "SetExpr"


@dataclass(frozen=True)
class Union:
    children: Tuple["SetExpr", ...]


@dataclass(frozen=True)
class Intersection:
    children: Tuple["SetExpr", ...]


@dataclass(frozen=True)
class Difference:
    left: "SetExpr"
    right: "SetExpr"


SET_EXPR_TYPES = (Class, Primes, AllIntegers, EmptySet, FiniteSet, Complement,
                  Union, Intersection, Difference)


def children(e) -> tuple:
    if isinstance(e, Complement):
        return (e.child,)
    if isinstance(e, (Union, Intersection)):
        return e.children
    if isinstance(e, Difference):
        return (e.left, e.right)
    return ()


def size_and_depth(e) -> Tuple[int, int]:
    kids = [size_and_depth(c) for c in children(e)]
    return 1 + sum(k[0] for k in kids), 1 + max((k[1] for k in kids), default=0)


def check_limits(e, max_nodes: int = MAX_NODES, max_depth: int = MAX_DEPTH) -> None:
    nodes, depth = size_and_depth(e)
    if nodes > max_nodes:
        raise ResourceError(f"expression has {nodes} nodes, limit {max_nodes}")
    if depth > max_depth:
        raise ResourceError(f"expression depth {depth}, limit {max_depth}")


def member(e, z: int) -> bool:
    """Direct membership test of ``z`` in the set described by ``e``."""
    if isinstance(e, Class):
        return z in e.cls
    if isinstance(e, Primes):
        return is_prime(z)
    if isinstance(e, AllIntegers):
        return True
    if isinstance(e, EmptySet):
        return False
    if isinstance(e, FiniteSet):
        return z in e.members
    if isinstance(e, Complement):
        return not member(e.child, z)
    if isinstance(e, Union):
        return any(member(c, z) for c in e.children)
    if isinstance(e, Intersection):
        return all(member(c, z) for c in e.children)
    if isinstance(e, Difference):
        return member(e.left, z) and not member(e.right, z)
    raise TypeError(f"not a set expression: {e!r}")


def to_text(e) -> str:
    """Render an expression in the input grammar (fully parenthesized)."""
    if isinstance(e, Class):
        return f"class({e.cls.shift},{e.cls.modulus})"
    if isinstance(e, Primes):
        return "primes"
    if isinstance(e, AllIntegers):
        return "all"
    if isinstance(e, EmptySet):
        return "empty"
    if isinstance(e, FiniteSet):
        return "{" + ",".join(map(str, e.members)) + "}"
    if isinstance(e, Complement):
        return "!" + _paren(e.child)
    if isinstance(e, Union):
        return " | ".join(_paren(c) for c in e.children)
    if isinstance(e, Intersection):
        return " & ".join(_paren(c) for c in e.children)
    if isinstance(e, Difference):
        return f"{_paren(e.left)} \\ {_paren(e.right)}"
    raise TypeError(f"not a set expression: {e!r}")


def _paren(e) -> str:
    s = to_text(e)
    return f"({s})" if isinstance(e, (Union, Intersection, Difference)) else s


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.depth = 0

    def offset(self, pos=None) -> int:
        pos = self.pos if pos is None else pos
        return len(self.text[:pos].encode("utf-8"))

    def error(self, msg, pos=None):
        raise ParseError(msg, self.offset(pos))

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = repr(self.peek()) if self.peek() else "end of input"
            self.error(f"expected {ch!r}, found {found}")
        self.pos += 1

    def integer(self) -> int:
        self.skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in "0123456789":
            self.pos += 1
        if self.pos == digits:
            self.error("expected an integer", start)
        return int(self.text[start:self.pos])

    def word(self) -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalpha()
                                             or self.text[self.pos] == "_"):
            self.pos += 1
        return self.text[start:self.pos]

    def parse(self):
        e = self.union()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return e

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.error(f"expression nested deeper than {MAX_DEPTH}")

    def union(self):
        self._enter()
        parts = [self.inter()]
        while self.peek() == "|":
            self.pos += 1
            parts.append(self.inter())
        self.depth -= 1
        return parts[0] if len(parts) == 1 else Union(tuple(parts))

    def inter(self):
        left = self.unary()
        chained = False  # whether ``left`` is an & chain built here
        while self.peek() in ("&", "\\"):
            op = self.text[self.pos]
            self.pos += 1
            right = self.unary()
            if op == "&":
                kids = left.children if chained else (left,)
                left, chained = Intersection(kids + (right,)), True
            else:
                left, chained = Difference(left, right), False
        return left

    def unary(self):
        if self.peek() == "!":
            self.pos += 1
            self._enter()
            e = Complement(self.unary())
            self.depth -= 1
            return e
        return self.atom()

    def atom(self):
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            e = self.union()
            self.expect(")")
            return e
        if ch == "{":
            self.pos += 1
            vals = []
            if self.peek() != "}":
                vals.append(self.integer())
                while self.peek() == ",":
                    self.pos += 1
                    vals.append(self.integer())
                    if len(vals) > MAX_FINITE_SET:
                        self.error(f"finite set larger than {MAX_FINITE_SET}", start)
            self.expect("}")
            return FiniteSet.of(vals)
        w = self.word()
        if w == "primes":
            return Primes()
        if w == "all":
            return AllIntegers()
        if w == "empty":
            return EmptySet()
        if w == "class":
            self.expect("(")
            r = self.integer()
            self.expect(",")
            mpos = self.pos
            m = self.integer()
            self.expect(")")
            if m < 1:
                self.skip()
                self.error(f"modulus must be a positive integer, got {m}", mpos)
            return Class(ResidueClass.of(r, m))
        if w:
            self.error(f"unknown name {w!r}", start)
        self.error(f"unexpected {ch!r}" if ch else "unexpected end of input", start)


def parse(text: str):
    """Parse the expression grammar into an AST."""
    e = _Parser(text).parse()
    check_limits(e)
    return e


# ---------------------------------------------------------------- normal form

ALL, PRIMES, NONPRIMES = "all", "primes", "nonprimes"
_WHOLE = ResidueClass(0, 1)


@dataclass(frozen=True, order=True)
class Atom:
    """``cls``, ``cls & primes`` or ``cls & !primes`` by ``kind``."""

    cls: ResidueClass
    kind: str

    def __contains__(self, z: int) -> bool:
        if z not in self.cls:
            return False
        if self.kind == ALL:
            return True
        return is_prime(z) == (self.kind == PRIMES)

    def covers(self, other: "Atom") -> bool:
        if self.kind != ALL and self.kind != other.kind:
            return False
        m = self.cls.modulus
        return other.cls.modulus % m == 0 and other.cls.shift % m == self.cls.shift


@dataclass(frozen=True)
class NormalForm:
    """``S = (union(atoms) \\ minus) | plus``.

    ``plus`` is disjoint from the atoms' union and ``minus`` lies inside it.
    """

    atoms: Tuple[Atom, ...]
    plus: FrozenSet[int]
    minus: FrozenSet[int]

    def in_atoms(self, z: int) -> bool:
        return any(z in a for a in self.atoms)

    def __contains__(self, z: int) -> bool:
        if z in self.plus:
            return True
        return z not in self.minus and self.in_atoms(z)

    def to_expr(self):
        """Embed back into the AST."""
        if not self.atoms:
            body = EmptySet()
        else:
            parts = []
            for a in self.atoms:
                c = AllIntegers() if a.cls.modulus == 1 else Class(a.cls)
                if a.kind == PRIMES:
                    c = Primes() if a.cls.modulus == 1 else Intersection((c, Primes()))
                elif a.kind == NONPRIMES:
                    c = (Complement(Primes()) if a.cls.modulus == 1
                         else Intersection((c, Complement(Primes()))))
                parts.append(c)
            body = parts[0] if len(parts) == 1 else Union(tuple(parts))
        if self.minus:
            body = Difference(body, FiniteSet.of(self.minus))
        if self.plus:
            body = Union((body, FiniteSet.of(self.plus)))
        return body


def _simplify(atoms: Iterable[Atom], budget: int) -> list[Atom]:
    atoms = sorted(set(atoms), key=lambda a: (a.cls.modulus, a.cls.shift, a.kind))
    out: list[Atom] = []
    for a in atoms:
        if any(b.covers(a) for b in out):
            continue
        out.append(a)
    # a class split into all its residues mod one modulus collapses back
    changed = True
    while changed:
        changed = False
        for a in out:
            m = a.cls.modulus
            if m == 1:
                continue
            for q in prime_factors(m):
                coarse = ResidueClass(a.cls.shift % (m // q), m // q)
                sibs = [Atom(ResidueClass(coarse.shift + k * coarse.modulus, m), a.kind)
                        for k in range(q)]
                if all(any(b.covers(s) for b in out) for s in sibs):
                    new = Atom(coarse, a.kind)
                    out = [b for b in out if not new.covers(b)] + [new]
                    changed = True
                    break
            if changed:
                break
    # nonprimes and primes halves of the same class make the whole class
    kinds = {}
    for a in out:
        kinds.setdefault(a.cls, set()).add(a.kind)
    merged = [Atom(c, ALL) for c, ks in kinds.items() if {PRIMES, NONPRIMES} <= ks]
    if merged:
        return _simplify(out + merged, budget)
    if len(out) > budget:
        raise ComplexityError(f"normal form needs more than {budget} atoms")
    return sorted(out, key=lambda a: (a.cls.modulus, a.cls.shift, a.kind))


def _meet_atoms(a: Atom, b: Atom) -> Optional[Atom]:
    if {a.kind, b.kind} == {PRIMES, NONPRIMES}:
        return None
    c = intersect_classes([a.cls, b.cls])
    if c is None:
        return None
    kind = a.kind if b.kind == ALL else b.kind
    return Atom(c, kind)


def _complement_atom(a: Atom, budget: int) -> list[Atom]:
    m, r = a.cls.modulus, a.cls.shift
    if m - 1 > budget:
        raise ComplexityError(f"complement of a class mod {m} exceeds {budget} atoms")
    out = [Atom(ResidueClass(k, m), ALL) for k in range(m) if k != r]
    if a.kind == PRIMES:
        out.append(Atom(a.cls, NONPRIMES))
    elif a.kind == NONPRIMES:
        out.append(Atom(a.cls, PRIMES))
    return out


class _Sym:
    """``union(atoms)`` symmetric-difference a finite set ``flip``."""

    __slots__ = ("atoms", "flip")

    def __init__(self, atoms, flip=frozenset()):
        self.atoms = atoms
        self.flip = frozenset(flip)

    def in_atoms(self, z):
        return any(z in a for a in self.atoms)

    def __contains__(self, z):
        return self.in_atoms(z) != (z in self.flip)


def _meet(x: _Sym, y: _Sym, budget: int) -> _Sym:
    atoms = []
    for a in x.atoms:
        for b in y.atoms:
            c = _meet_atoms(a, b)
            if c is not None:
                atoms.append(c)
                if len(atoms) > 4 * budget:
                    raise ComplexityError(f"normal form needs more than {budget} atoms")
    atoms = _simplify(atoms, budget)
    base = _Sym(atoms)
    flip = {z for z in x.flip | y.flip if ((z in x) and (z in y)) != base.in_atoms(z)}
    return _Sym(atoms, flip)


def _join(x: _Sym, y: _Sym, budget: int) -> _Sym:
    atoms = _simplify(list(x.atoms) + list(y.atoms), budget)
    base = _Sym(atoms)
    flip = {z for z in x.flip | y.flip if ((z in x) or (z in y)) != base.in_atoms(z)}
    return _Sym(atoms, flip)


def _complement(x: _Sym, budget: int) -> _Sym:
    acc = _Sym([Atom(_WHOLE, ALL)])
    for a in x.atoms:
        acc = _meet(acc, _Sym(_simplify(_complement_atom(a, budget), budget)), budget)
    return _Sym(acc.atoms, x.flip)


def _norm(e, budget: int) -> _Sym:
    if isinstance(e, Class):
        return _Sym([Atom(e.cls, ALL)])
    if isinstance(e, Primes):
        return _Sym([Atom(_WHOLE, PRIMES)])
    if isinstance(e, AllIntegers):
        return _Sym([Atom(_WHOLE, ALL)])
    if isinstance(e, EmptySet):
        return _Sym([])
    if isinstance(e, FiniteSet):
        return _Sym([], e.members)
    if isinstance(e, Complement):
        return _complement(_norm(e.child, budget), budget)
    if isinstance(e, Union):
        acc = _Sym([])
        for c in e.children:
            acc = _join(acc, _norm(c, budget), budget)
        return acc
    if isinstance(e, Intersection):
        acc = _Sym([Atom(_WHOLE, ALL)])
        for c in e.children:
            acc = _meet(acc, _norm(c, budget), budget)
        return acc
    if isinstance(e, Difference):
        return _meet(_norm(e.left, budget),
                     _complement(_norm(e.right, budget), budget), budget)
    raise TypeError(f"not a set expression: {e!r}")


def normalize(expr, budget: int = ATOM_BUDGET) -> NormalForm:
    check_limits(expr)
    s = _norm(expr, budget)
    plus = frozenset(z for z in s.flip if not s.in_atoms(z))
    minus = frozenset(z for z in s.flip if s.in_atoms(z))
    return NormalForm(tuple(s.atoms), plus, minus)


# ---------------------------------------------------------------- alive vectors


def alive_bit(nf: NormalForm, s: int, level: Level) -> bool:
    """Whether the class ``s mod N!_p`` meets the set."""
    P = level.primorial
    if not 0 <= s < P:
        raise ValueError(f"shift {s} not in [0, {P})")
    x = ResidueClass(s, P)
    if any(z in x for z in nf.plus):
        return True
    for a in nf.atoms:
        c = intersect_classes([a.cls, x])
        if c is None:
            continue
        if a.kind == ALL:
            return True
        if a.kind == NONPRIMES:
            if class_contains_composite(c):
                return True
            continue
        if not class_contains_prime(c):
            continue
        p = unique_prime(c)
        if p is None or p not in nf.minus:
            return True
    return False


@dataclass(frozen=True)
class AliveVector:
    level: Level
    bits: np.ndarray

    def __post_init__(self):
        if self.bits.shape != (self.level.primorial,):
            raise ValueError("alive vector length must equal the primorial")
        self.bits.setflags(write=False)

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def __getitem__(self, s: int) -> bool:
        return bool(self.bits[s % self.level.primorial])

    def shifts(self) -> list[int]:
        return [int(s) for s in np.flatnonzero(self.bits)]

    def __eq__(self, other):
        return (isinstance(other, AliveVector) and self.level == other.level
                and bool(np.array_equal(self.bits, other.bits)))

    def __hash__(self):
        return hash((self.level, self.bits.tobytes()))


def _alive_bits(nf: NormalForm, level: Level) -> np.ndarray:
    P = level.primorial
    bits = np.zeros(P, dtype=bool)
    for z in nf.plus:
        bits[z % P] = True
    for a in nf.atoms:
        m, r = a.cls.modulus, a.cls.shift
        g = math.gcd(m, P)
        if a.kind in (ALL, NONPRIMES):
            bits[r % g::g] = True
            continue
        # primes: coprime intersections hold infinitely many primes
        if math.gcd(r, m) == 1 or m == 1:
            sel = np.zeros(P, dtype=bool)
            sel[r % g::g] = True
            for q in level.primes:
                if g % q:
                    sel[::q] = False
            bits |= sel
        # the remaining classes hold at most the prime q dividing the modulus
        for q in set(prime_factors(m)) | set(level.primes):
            if q in a.cls and q not in nf.minus:
                bits[q % P] = True
    return bits


def _as_normal_form(expr) -> NormalForm:
    if isinstance(expr, NormalForm):
        return expr
    return normalize(parse(expr) if isinstance(expr, str) else expr)


def alive_vector(expr, level: Level) -> AliveVector:
    """Alive bits of ``expr`` (text, AST or normal form) at ``level``."""
    nf = _as_normal_form(expr)
    return AliveVector(level, _alive_bits(nf, level))


def alive_vector_scalar(expr, level: Level) -> AliveVector:
    """Bit-by-bit evaluation through :func:`alive_bit`; slow, for checking."""
    nf = _as_normal_form(expr)
    bits = np.array([alive_bit(nf, s, level) for s in range(level.primorial)],
                    dtype=bool)
    return AliveVector(level, bits)
