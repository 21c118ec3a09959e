"""Words, presentations and the presentation file format."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class PresentationError(ValueError):
    """Malformed presentation text; carries a line/column position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class Word:
    """A freely reduced word stored as (generator index, exponent) syllables.

    Adjacent syllables always carry distinct generator indices; merging and
    cancellation happen in the constructor.
    """

    __slots__ = ("syl", "_hash")

    def __init__(self, syllables: Iterable[tuple[int, int]] = ()):
        out: list[list[int]] = []
        for g, e in syllables:
            if e == 0:
                continue
            if out and out[-1][0] == g:
                out[-1][1] += e
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([g, e])
        self.syl = tuple((g, e) for g, e in out)
        self._hash = hash(self.syl)

    @classmethod
    def gen(cls, g: int, e: int = 1) -> "Word":
        return cls(((g, e),))

    @classmethod
    def from_letters(cls, letters: Iterable[int]) -> "Word":
        """Build from signed letters +(g+1) / -(g+1)."""
        return cls((abs(l) - 1, 1 if l > 0 else -1) for l in letters)

    def letters(self) -> Iterator[tuple[int, int]]:
        for g, e in self.syl:
            s = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield g, s

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syl)

    def __bool__(self) -> bool:
        return bool(self.syl)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.syl + other.syl)

    def inverse(self) -> "Word":
        return Word((g, -e) for g, e in reversed(self.syl))

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        return Word(self.syl * n)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.syl == other.syl

    def __hash__(self) -> int:
        return self._hash

    def key(self):
        """Ball order key: length first, then the syllable tuple."""
        return (len(self), self.syl)

    def __lt__(self, other: "Word") -> bool:
        return self.key() < other.key()

    def text(self, names: list[str]) -> str:
        if not self.syl:
            return "1"
        parts = []
        for g, e in self.syl:
            parts.append(names[g] if e == 1 else f"{names[g]}^{e}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Word({list(self.syl)})"


IDENTITY = Word()


@dataclass(frozen=True)
class PeripheralDecl:
    name: str
    mu: Word
    lam: Word


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...] = ()
    peripherals: tuple[PeripheralDecl, ...] = ()

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise PresentationError("duplicate generator name")
        n = len(self.generators)
        words = list(self.relators)
        for p in self.peripherals:
            words += [p.mu, p.lam]
        for w in words:
            for g, _ in w.syl:
                if not 0 <= g < n:
                    raise PresentationError(f"generator index {g} out of range")

    def index(self, name: str) -> int:
        return self.generators.index(name)

    def word(self, text: str) -> Word:
        """Parse a word like ``x y^-2`` (also accepts ``1`` for the identity)."""
        return _parse_word_text(text, self.generators)

    def show(self, w: Word) -> str:
        return w.text(list(self.generators))


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<power>[A-Za-z_][A-Za-z0-9_]*\^[+-]?\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[;,=])"
)


def _tokenize(text: str):
    pos, line, col0 = 0, 1, 0
    toks = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PresentationError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            col0 = m.end()
        elif kind not in ("ws", "comment"):
            toks.append((kind, m.group(), line, pos - col0 + 1))
        pos = m.end()
    toks.append(("eof", "", line, pos - col0 + 1))
    return toks


def _parse_word_text(text: str, gens) -> Word:
    text = text.strip()
    if text in ("", "1"):
        return IDENTITY
    syl = []
    for tok in text.split():
        name, _, exp = tok.partition("^")
        if name not in gens:
            raise PresentationError(f"undeclared generator {name!r}")
        try:
            e = int(exp) if exp else 1
        except ValueError:
            raise PresentationError(f"bad exponent in {tok!r}") from None
        syl.append((gens.index(name), e))
    return Word(syl)


def parse_presentation(text: str) -> Presentation:
    toks = _tokenize(text)
    i = 0

    def peek():
        return toks[i]

    def take(kind=None, value=None):
        nonlocal i
        t = toks[i]
        if (kind and t[0] != kind) or (value is not None and t[1] != value):
            want = value if value is not None else kind
            got = t[1] or "end of input"
            raise PresentationError(f"expected {want}, found {got!r}", t[2], t[3])
        i += 1
        return t

    take("name", "gens")
    gens: list[str] = []
    while peek()[0] == "name":
        t = take()
        if t[1] in gens:
            raise PresentationError(f"duplicate generator {t[1]!r}", t[2], t[3])
        if t[1] in ("gens", "rel", "peripheral"):
            raise PresentationError(f"reserved word {t[1]!r} as generator", t[2], t[3])
        gens.append(t[1])
    if not gens:
        t = peek()
        raise PresentationError("at least one generator required", t[2], t[3])
    take("punct", ";")

    def word_until(stops):
        syl = []
        while peek()[0] in ("name", "power"):
            t = take()
            name, _, exp = t[1].partition("^")
            if name not in gens:
                raise PresentationError(f"undeclared generator {name!r}", t[2], t[3])
            syl.append((gens.index(name), int(exp) if exp else 1))
        t = peek()
        if t[1] not in stops:
            raise PresentationError(f"unexpected {t[1] or 'end of input'!r}", t[2], t[3])
        if not syl:
            raise PresentationError("empty word", t[2], t[3])
        return Word(syl)

    rels: list[Word] = []
    periph: list[PeripheralDecl] = []
    while peek()[0] != "eof":
        t = take("name")
        if t[1] == "rel":
            if periph:
                raise PresentationError("rel after peripheral", t[2], t[3])
            w = word_until((";",))
            take("punct", ";")
            if not w:
                raise PresentationError("relator reduces to the empty word", t[2], t[3])
            rels.append(w)
        elif t[1] == "peripheral":
            nm = take("name")
            if any(p.name == nm[1] for p in periph):
                raise PresentationError(f"duplicate peripheral {nm[1]!r}", nm[2], nm[3])
            take("punct", "=")
            mu = word_until((",",))
            take("punct", ",")
            lam = word_until((";",))
            take("punct", ";")
            periph.append(PeripheralDecl(nm[1], mu, lam))
        else:
            raise PresentationError(f"unknown statement {t[1]!r}", t[2], t[3])
    return Presentation(tuple(gens), tuple(rels), tuple(periph))


def serialise_presentation(P: Presentation) -> str:
    names = list(P.generators)
    lines = ["gens " + " ".join(names) + ";"]
    for r in P.relators:
        lines.append("rel " + r.text(names) + ";")
    for p in P.peripherals:
        lines.append(f"peripheral {p.name} = {p.mu.text(names)}, {p.lam.text(names)};")
    return "\n".join(lines) + "\n"
