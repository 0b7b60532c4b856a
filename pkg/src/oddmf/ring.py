"""Sign-commutative graded polynomial rings with square rewrites.

A ring is presented by an ordered list of variables, a symmetric sign
matrix ``eps`` with ``x_j * x_i = eps[i][j] * x_i * x_j``, and optional
rewrite rules ``x_i^2 -> r_i`` where ``r_i`` only mentions earlier
variables.  Elements are stored in normal form: a mapping from
normal-ordered exponent vectors to nonzero :class:`fractions.Fraction`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

Exps = Tuple[int, ...]
Scalar = Union[int, Fraction]


class RingError(ValueError):
    """Bad ring presentation, unknown variable or mixed rings."""


class ParseError(RingError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True, order=True)
class DegreeVector:
    """Cohomological degree (numerator over the ring's denominator) plus aux weights.

    ``moduli`` holds one modulus per auxiliary factor; 0 means a free
    factor of ``Z``.  Cyclic entries are kept reduced.
    """

    coh: int
    aux: Tuple[int, ...] = ()
    moduli: Tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.aux) != len(self.moduli):
            raise RingError("aux weights and moduli have different lengths")
        reduced = tuple(a % m if m else a for a, m in zip(self.aux, self.moduli))
        object.__setattr__(self, "aux", reduced)

    def _check(self, other: "DegreeVector"):
        if self.moduli != other.moduli:
            raise RingError("degree vectors over different grading groups")

    def __add__(self, other: "DegreeVector") -> "DegreeVector":
        self._check(other)
        return DegreeVector(self.coh + other.coh, tuple(a + b for a, b in zip(self.aux, other.aux)), self.moduli)

    def __sub__(self, other: "DegreeVector") -> "DegreeVector":
        self._check(other)
        return DegreeVector(self.coh - other.coh, tuple(a - b for a, b in zip(self.aux, other.aux)), self.moduli)

    def __neg__(self) -> "DegreeVector":
        return DegreeVector(-self.coh, tuple(-a for a in self.aux), self.moduli)

    def scaled(self, k: int) -> "DegreeVector":
        return DegreeVector(k * self.coh, tuple(k * a for a in self.aux), self.moduli)

    @property
    def aux_zero(self) -> bool:
        return not any(self.aux)


class _Marker:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name


#: returned by :meth:`RingElem.degree` for a sum of monomials of different degrees
INHOMOGENEOUS = _Marker("INHOMOGENEOUS")
#: returned by :meth:`RingElem.degree` for zero; compatible with every degree check
ANY_DEGREE = _Marker("ANY_DEGREE")


@dataclass(frozen=True)
class Variable:
    name: str
    degree: DegreeVector


_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class Ring:
    """A presentation of a sign-commutative graded polynomial ring over Q.

    ``variables`` is a sequence of ``(name, coh, aux)`` triples where
    ``coh`` is a rational cohomological degree (an int, Fraction or
    ``"a/b"`` string) and ``aux`` a tuple of ints.  ``signs`` maps pairs of
    names to -1 for anticommuting pairs.  ``rewrites`` maps a name to the
    text (or element) of its square.
    """

    def __init__(
        self,
        variables: Sequence[Tuple[str, object, Sequence[int]]],
        signs: Optional[Mapping[Tuple[str, str], int]] = None,
        rewrites: Optional[Mapping[str, Union[str, "RingElem"]]] = None,
        aux_moduli: Sequence[int] = (),
        coh_denominator: int = 1,
    ):
        if coh_denominator < 1:
            raise RingError("coh_denominator must be >= 1")
        self.coh_denominator = int(coh_denominator)
        self.aux_moduli = tuple(int(m) for m in aux_moduli)
        if any(m < 0 for m in self.aux_moduli):
            raise RingError("aux moduli must be nonnegative")
        vs: List[Variable] = []
        seen = set()
        for entry in variables:
            name, coh, aux = entry[0], entry[1], tuple(entry[2]) if len(entry) > 2 else ()
            if not _IDENT.fullmatch(name):
                raise RingError(f"bad variable name {name!r}")
            if name in seen:
                raise RingError(f"duplicate variable {name!r}")
            seen.add(name)
            if not aux:
                aux = (0,) * len(self.aux_moduli)
            vs.append(Variable(name, self.degree(coh, aux)))
        self.variables: Tuple[Variable, ...] = tuple(vs)
        self.names: Tuple[str, ...] = tuple(v.name for v in vs)
        self.index: Dict[str, int] = {n: i for i, n in enumerate(self.names)}
        n = len(vs)
        self.eps = [[1] * n for _ in range(n)]
        for (a, b), s in (signs or {}).items():
            if s not in (1, -1):
                raise RingError("signs must be +1 or -1")
            i, j = self._idx(a), self._idx(b)
            if i == j and s != 1:
                raise RingError(f"a variable commutes with itself ({a})")
            self.eps[i][j] = self.eps[j][i] = s
        self.eps = tuple(tuple(r) for r in self.eps)
        self._mcache: Dict[Tuple[Exps, Exps], Dict[Exps, Fraction]] = {}
        self._rcache: Dict[Exps, Dict[Exps, Fraction]] = {}
        self._monomials: Dict[int, List[Exps]] = {}
        self._pieces: Dict[int, Dict[DegreeVector, List[Exps]]] = {}
        self._dcache: Dict[Exps, DegreeVector] = {}
        self.rewrites: List[Optional[RingElem]] = [None] * n
        for name in sorted((rewrites or {}), key=self._idx):
            i = self._idx(name)
            rhs = rewrites[name]
            rhs = self.parse(rhs) if isinstance(rhs, str) else rhs
            if rhs.ring is not self:
                raise RingError("rewrite right-hand side lives in another ring")
            if any(any(e[k] for k in range(i, n)) for e in rhs.terms):
                raise RingError(f"rewrite for {name} must use earlier variables only")
            if not rhs.is_homogeneous_of(self.variables[i].degree.scaled(2)):
                raise RingError(f"rewrite for {name} is not homogeneous of degree 2*|{name}|")
            self.rewrites[i] = rhs
            self._mcache.clear()
            self._rcache.clear()
        self.rewrites = tuple(self.rewrites)
        for i, rhs in enumerate(self.rewrites):
            if rhs is None:
                continue
            for j in range(n):
                xj = self.var(self.names[j])
                if rhs * xj != xj * rhs:
                    raise RingError(f"rewrite for {self.names[i]} is not central")

    # construction helpers -------------------------------------------------

    def degree(self, coh=0, aux: Sequence[int] = ()) -> DegreeVector:
        """Build a degree vector from a rational coh value and aux weights."""
        c = Fraction(coh) if not isinstance(coh, str) else Fraction(coh.strip())
        num = c * self.coh_denominator
        if num.denominator != 1:
            raise RingError(f"coh degree {c} is not a multiple of 1/{self.coh_denominator}")
        aux = tuple(aux) if aux else (0,) * len(self.aux_moduli)
        if len(aux) != len(self.aux_moduli):
            raise RingError("wrong number of aux weights")
        return DegreeVector(int(num), tuple(int(a) for a in aux), self.aux_moduli)

    @property
    def chi(self) -> DegreeVector:
        """The generating character: coh degree 1, aux 0."""
        return DegreeVector(self.coh_denominator, (0,) * len(self.aux_moduli), self.aux_moduli)

    def zero_degree(self) -> DegreeVector:
        return DegreeVector(0, (0,) * len(self.aux_moduli), self.aux_moduli)

    def coh_value(self, d: DegreeVector) -> Fraction:
        return Fraction(d.coh, self.coh_denominator)

    def parity(self, d: DegreeVector) -> int:
        """Parity of an integral cohomological degree; raises on fractional ones."""
        c = self.coh_value(d)
        if c.denominator != 1:
            raise RingError(f"Koszul sign requested for non-integral degree {c}")
        return int(c) % 2

    def _idx(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise RingError(f"unknown variable {name!r}") from None

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def caps(self) -> Tuple[Optional[int], ...]:
        return tuple(1 if r is not None else None for r in self.rewrites)

    def zero(self) -> "RingElem":
        return RingElem(self, {})

    def one(self) -> "RingElem":
        return self.const(1)

    def const(self, c: Scalar) -> "RingElem":
        c = Fraction(c)
        return RingElem(self, {(0,) * self.nvars: c} if c else {})

    def var(self, name: str) -> "RingElem":
        e = [0] * self.nvars
        e[self._idx(name)] = 1
        return RingElem(self, {tuple(e): Fraction(1)})

    def monomial(self, exps: Sequence[int], coeff: Scalar = 1) -> "RingElem":
        """The element with the given exponent vector, brought into normal form."""
        return self.normal_form([(self.names[i], e) for i, e in enumerate(exps) if e], coeff)

    def __call__(self, text: Union[str, int, Fraction, "RingElem"]) -> "RingElem":
        if isinstance(text, RingElem):
            if text.ring is not self:
                raise RingError("element from another ring")
            return text
        if isinstance(text, (int, Fraction)):
            return self.const(text)
        return self.parse(text)

    def parse(self, text: str) -> "RingElem":
        return _Parser(self, text).parse()

    def __repr__(self):
        parts = []
        for v in self.variables:
            c = self.coh_value(v.degree)
            parts.append(f"{v.name}:{c}" + (f"{list(v.degree.aux)}" if v.degree.aux else ""))
        return f"Ring({', '.join(parts)})"

    # arithmetic core --------------------------------------------------------

    def normal_form(self, word: Iterable[Tuple[str, int]], coeff: Scalar = 1) -> "RingElem":
        """Normalize a word of ``(variable, exponent)`` factors.

        Factors are bubble-sorted into declaration order, picking up
        ``eps(i, j)`` per transposition of distinct variables; squares with
        a rewrite are then replaced exhaustively.
        """
        letters: List[int] = []
        for name, e in word:
            if e < 0:
                raise RingError("negative exponent")
            letters.extend([self._idx(name)] * int(e))
        sign = 1
        # stable bubble sort, counting sign flips
        n = len(letters)
        for a in range(n):
            for b in range(n - 1 - a):
                i, j = letters[b], letters[b + 1]
                if i > j:
                    letters[b], letters[b + 1] = j, i
                    sign *= self.eps[i][j]
        exps = [0] * self.nvars
        for i in letters:
            exps[i] += 1
        c = Fraction(coeff) * sign
        if not c:
            return self.zero()
        return RingElem(self, {k: v * c for k, v in self._reduce(tuple(exps)).items()})

    def _sign(self, a: Exps, b: Exps) -> int:
        par = 0
        for i in range(self.nvars):
            if not a[i]:
                continue
            for j in range(i):
                if b[j] and self.eps[i][j] < 0:
                    par += a[i] * b[j]
        return -1 if par % 2 else 1

    def _reduce(self, exps: Exps) -> Dict[Exps, Fraction]:
        hit = self._rcache.get(exps)
        if hit is not None:
            return hit
        top = -1
        for i in range(self.nvars - 1, -1, -1):
            if exps[i] >= 2 and self.rewrites[i] is not None:
                top = i
                break
        if top < 0:
            out = {exps: Fraction(1)}
        else:
            k, r = divmod(exps[top], 2)
            prefix = RingElem(self, {exps[:top] + (0,) * (self.nvars - top): Fraction(1)})
            low = prefix * self.rewrites[top] ** k
            out: Dict[Exps, Fraction] = {}
            for m, c in low.terms.items():
                out[m[:top] + (r,) + exps[top + 1 :]] = c
        self._rcache[exps] = out
        return out

    def _mono_mul(self, a: Exps, b: Exps) -> Dict[Exps, Fraction]:
        key = (a, b)
        hit = self._mcache.get(key)
        if hit is not None:
            return hit
        s = self._sign(a, b)
        raw = tuple(x + y for x, y in zip(a, b))
        out = {m: c * s for m, c in self._reduce(raw).items()}
        self._mcache[key] = out
        return out

    def mono_degree(self, exps: Exps) -> DegreeVector:
        hit = self._dcache.get(exps)
        if hit is None:
            hit = self.zero_degree()
            for i, e in enumerate(exps):
                if e:
                    hit = hit + self.variables[i].degree.scaled(e)
            self._dcache[exps] = hit
        return hit

    # graded pieces ------------------------------------------------------------

    def monomials_up_to(self, bound: int) -> List[Exps]:
        """All normal-form exponent vectors of total exponent <= bound, degrevlex order."""
        if bound in self._monomials:
            return self._monomials[bound]
        caps = self.caps()
        out: List[Exps] = []

        def rec(i, left, acc):
            if i == self.nvars:
                out.append(tuple(acc))
                return
            top = left if caps[i] is None else min(left, caps[i])
            for e in range(top + 1):
                acc.append(e)
                rec(i + 1, left - e, acc)
                acc.pop()

        rec(0, max(bound, 0), [])
        out.sort(key=degrevlex_key)
        self._monomials[bound] = out
        return out

    def pieces_up_to(self, bound: int) -> Dict[DegreeVector, List[Exps]]:
        """``monomials_up_to(bound)`` grouped by degree (cached)."""
        if bound not in self._pieces:
            by_deg: Dict[DegreeVector, List[Exps]] = {}
            for m in self.monomials_up_to(bound):
                by_deg.setdefault(self.mono_degree(m), []).append(m)
            self._pieces[bound] = by_deg
        return self._pieces[bound]


def degrevlex_key(exps: Exps):
    return (sum(exps), tuple(-e for e in reversed(exps)))


def graded_piece_basis(ring: Ring, d: DegreeVector, poly_bound: int) -> List[Exps]:
    """Normal-form monomials of total exponent <= ``poly_bound`` and degree ``d``."""
    return list(ring.pieces_up_to(poly_bound).get(d, ()))


class RingElem:
    """An element of a :class:`Ring` in canonical form. Treat as immutable."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[Exps, Fraction]):
        self.ring = ring
        self.terms: Dict[Exps, Fraction] = {k: Fraction(v) for k, v in terms.items() if v}
        self._hash = None

    @classmethod
    def _raw(cls, ring: Ring, terms: Dict[Exps, Fraction]) -> "RingElem":
        # trusted constructor: coefficients are already Fractions
        e = cls.__new__(cls)
        e.ring = ring
        e.terms = {k: v for k, v in terms.items() if v}
        e._hash = None
        return e

    def _coerce(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.ring is not self.ring:
                raise RingError("ring mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return RingElem._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return RingElem._raw(self.ring, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return self.ring.zero()
        ring = self.ring
        out: Dict[Exps, Fraction] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                c = ca * cb
                for m, cm in ring._mono_mul(a, b).items():
                    if cm == 1:
                        out[m] = out.get(m, 0) + c
                    elif cm == -1:
                        out[m] = out.get(m, 0) - c
                    else:
                        out[m] = out.get(m, 0) + c * cm
        return RingElem._raw(ring, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c: Scalar) -> "RingElem":
        c = Fraction(c)
        return RingElem._raw(self.ring, {k: v * c for k, v in self.terms.items()}) if c else self.ring.zero()

    def __pow__(self, n: int):
        if n < 0:
            raise RingError("negative power")
        out = self.ring.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, RingElem):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def degree(self):
        """Common degree of all monomials, ``INHOMOGENEOUS`` or ``ANY_DEGREE`` for zero."""
        if not self.terms:
            return ANY_DEGREE
        degs = {self.ring.mono_degree(m) for m in self.terms}
        return degs.pop() if len(degs) == 1 else INHOMOGENEOUS

    def is_homogeneous_of(self, d: DegreeVector) -> bool:
        deg = self.degree()
        return deg is ANY_DEGREE or deg == d

    def max_exponent(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.ring.nvars, Fraction(0))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: degrevlex_key(kv[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for exps, c in reversed(self.sorted_terms()):
            factors = []
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(self.ring.names[i])
                elif e:
                    factors.append(f"{self.ring.names[i]}^{e}")
            mono = "*".join(factors)
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            pieces.append((neg, body))
        first_neg, first = pieces[0]
        out = ("-" if first_neg else "") + first
        for neg, body in pieces[1:]:
            out += (" - " if neg else " + ") + body
        return out

    def __repr__(self):
        return f"RingElem({self})"


class RingMap:
    """A graded ring homomorphism given by the images of the source variables."""

    def __init__(self, source: Ring, target: Ring, images: Mapping[str, Union[str, RingElem]]):
        self.source, self.target = source, target
        imgs = []
        for name in source.names:
            if name not in images:
                raise RingError(f"no image given for {name!r}")
            img = images[name]
            img = target.parse(img) if isinstance(img, str) else img
            if img.ring is not target:
                raise RingError("image lives in the wrong ring")
            imgs.append(img)
        unknown = set(images) - set(source.names)
        if unknown:
            raise RingError(f"unknown variables {sorted(unknown)}")
        self.images: Tuple[RingElem, ...] = tuple(imgs)
        for i, v in enumerate(source.variables):
            want = target.degree(source.coh_value(v.degree), v.degree.aux) if source.aux_moduli == target.aux_moduli else None
            if want is None:
                raise RingError("source and target have different aux gradings")
            if not imgs[i].is_homogeneous_of(want):
                raise RingError(f"image of {v.name} has the wrong degree")
        for i in range(source.nvars):
            for j in range(i + 1, source.nvars):
                if imgs[j] * imgs[i] != imgs[i] * imgs[j].scale(source.eps[i][j]):
                    raise RingError(f"images of {source.names[i]}, {source.names[j]} break the commutation sign")
            rhs = source.rewrites[i]
            if rhs is not None and imgs[i] * imgs[i] != self(rhs):
                raise RingError(f"image of {source.names[i]} breaks its rewrite")

    def __call__(self, e: RingElem) -> RingElem:
        if e.ring is not self.source:
            raise RingError("element not in the source ring")
        out = self.target.zero()
        for exps, c in e.terms.items():
            term = self.target.const(c)
            for i, k in enumerate(exps):
                if k:
                    term = term * self.images[i] ** k
            out = out + term
        return out

    @classmethod
    def by_name(cls, source: Ring, target: Ring, overrides: Optional[Mapping[str, Union[str, RingElem]]] = None):
        """Send every variable to the same-named target variable unless overridden."""
        images = {n: target.var(n) for n in source.names if n in target.index}
        images.update(overrides or {})
        return cls(source, target, images)


class _Parser:
    def __init__(self, ring: Ring, text: str):
        self.ring = ring
        self.text = text
        self.tokens = []
        pos, n = 0, len(text)
        while pos < n:
            ch = text[pos]
            if ch.isspace():
                pos += 1
            elif ch.isdigit():
                m = re.compile(r"\d+").match(text, pos)
                self.tokens.append(("num", int(m.group()), pos))
                pos = m.end()
            elif ch.isalpha() or ch == "_":
                m = _IDENT.match(text, pos)
                self.tokens.append(("id", m.group(), pos))
                pos = m.end()
            elif ch in "+-*^/()":
                self.tokens.append((ch, ch, pos))
                pos += 1
            else:
                raise ParseError(f"unexpected character {ch!r}", pos)
        self.tokens.append(("end", None, len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> RingElem:
        word = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected token {tok[1]!r} (juxtaposition is not multiplication)", tok[2])
        return word

    def expr(self) -> RingElem:
        out = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> RingElem:
        out = self.unary()
        while self.peek()[0] == "*":
            self.take()
            out = out * self.unary()
        return out

    def unary(self) -> RingElem:
        if self.peek()[0] == "-":
            self.take()
            return -self.unary()
        if self.peek()[0] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> RingElem:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take("num")
            return base ** tok[1]
        return base

    def atom(self) -> RingElem:
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            value = Fraction(tok[1])
            if self.peek()[0] == "/":
                self.take()
                den = self.take("num")
                if den[1] == 0:
                    raise ParseError("division by zero", den[2])
                value = value / den[1]
            return self.ring.const(value)
        if tok[0] == "id":
            self.take()
            if tok[1] not in self.ring.index:
                raise ParseError(f"unknown variable {tok[1]!r}", tok[2])
            return self.ring.var(tok[1])
        if tok[0] == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2])


def parse_expr(ring: Ring, text: str) -> RingElem:
    return ring.parse(text)
