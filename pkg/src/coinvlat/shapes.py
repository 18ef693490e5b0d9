"""Orders of group shapes written in ATLAS-style notation.

Only the order is computed; the extension structure is ignored.  The grammar
covers what the expectations file uses::

    shape  := factor (('.' | ':' | 'x') factor)*
    factor := atom ('^' exp)?
    atom   := INT | '[' shape ']' | '(' shape ')' | NAME subscript? sign? args?
    exp    := INT | '{' INT ('+' INT)* '}'

Names: ``Sym``, ``Alt``, ``Dih`` (subscript is the order), ``Q`` (quaternion),
``AGL_1(q)``, and the orthogonal families ``GO``, ``SO``, ``PSO``, ``Omega``
with optional ``^+``/``^-`` type.
"""

from __future__ import annotations

import re
from math import factorial, prod

_TOKEN = re.compile(r"\s*(\d+|[A-Za-z]+|\^[+-](?=[_(])|[_^.:x()\[\]{}+,-])")


def _tokens(s: str) -> list[str]:
    s = s.replace("\\times", "x").replace("\\", "").replace("×", "x")
    out, pos = [], 0
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(s, pos)
        if not m:
            raise ValueError(f"cannot parse shape at {s[pos:]!r}")
        tok = m.group(1)
        out.append(tok)
        pos = m.end()
    return out


def orthogonal_order(family: str, n: int, q: int, sign: str = "") -> int:
    """Order of ``GO``, ``SO``, ``PSO`` or ``Omega`` of dimension ``n`` over ``F_q``."""
    if n % 2 == 0:
        m = n // 2
        if sign not in "+-" or not sign:
            raise ValueError("even dimension needs a + or - type")
        eps = 1 if sign == "+" else -1
        go = 2 * q ** (m * (m - 1)) * (q**m - eps) * prod(q ** (2 * i) - 1 for i in range(1, m))
    else:
        if sign:
            raise ValueError("odd dimension has no type")
        m = (n - 1) // 2
        go = q ** (m * m) * prod(q ** (2 * i) - 1 for i in range(1, m + 1))
        if q % 2:
            go *= 2
    if family == "GO":
        return go
    if q % 2 == 0:
        raise ValueError("SO/PSO/Omega are only supported in odd characteristic")
    so = go // 2
    if family == "SO":
        return so
    if family == "Omega":
        return so // 2
    if family == "PSO":
        # -1 has determinant 1 exactly in even dimension
        return so // 2 if n % 2 == 0 else so
    raise ValueError(f"unknown family {family}")


class _Parser:
    def __init__(self, s: str):
        self.toks = _tokens(s)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise ValueError(f"expected {expect!r}, got {tok!r}")
        self.i += 1
        return tok

    def shape(self) -> int:
        val = self.factor()
        while self.peek() in (".", ":", "x"):
            self.take()
            val *= self.factor()
        return val

    def exponent(self) -> int:
        if self.peek() == "{":
            self.take()
            total = int(self.take())
            while self.peek() == "+":
                self.take()
                total += int(self.take())
            self.take("}")
            return total
        return int(self.take())

    def factor(self) -> int:
        val = self.atom()
        if self.peek() == "^":
            self.take()
            val **= self.exponent()
        return val

    def atom(self) -> int:
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of shape")
        if tok.isdigit():
            return int(self.take())
        if tok in "([":
            close = ")" if tok == "(" else "]"
            self.take()
            val = self.shape()
            self.take(close)
            return val
        if tok.isalpha():
            return self.named(self.take())
        raise ValueError(f"unexpected token {tok!r}")

    def _sub(self) -> int:
        self.take("_")
        if self.peek() == "{":
            self.take()
            v = int(self.take())
            self.take("}")
            return v
        return int(self.take())

    def named(self, name: str) -> int:
        if name in ("Sym", "Alt", "Dih", "Q"):
            k = self._sub()
            return {"Sym": factorial(k), "Alt": factorial(k) // 2, "Dih": k, "Q": k}[name]
        if name == "AGL":
            if self._sub() != 1:
                raise ValueError("only AGL_1 is supported")
            self.take("(")
            q = int(self.take())
            self.take(")")
            return q * (q - 1)
        if name in ("GO", "SO", "PSO", "Omega"):
            sign, n = "", None
            for _ in range(2):
                tok = self.peek()
                if tok in ("^+", "^-"):
                    sign = self.take()[1]
                elif tok == "_":
                    n = self._sub()
            if n is None:
                raise ValueError(f"{name} needs a dimension")
            self.take("(")
            q = int(self.take())
            self.take(")")
            return orthogonal_order(name, n, q, sign)
        raise ValueError(f"unknown group name {name!r}")


def shape_order(s: str) -> int:
    """Order of a shape string such as ``2^{10+3}.Sym_6`` or ``GO_4^+(2) x GO_4^+(3)``."""
    p = _Parser(s)
    val = p.shape()
    if p.peek() is not None:
        raise ValueError(f"trailing tokens in shape {s!r}")
    return val


def abelian_invariants(s: str) -> list[int]:
    """Sorted prime-power cyclic orders of an abelian group written ``2^2 4^4`` or ``2.4.8^2``."""
    out = []
    for part in re.split(r"[\s.]+", s.strip()):
        if not part:
            continue
        m = re.fullmatch(r"(\d+)(?:\^\{?(\d+)\}?)?", part)
        if not m:
            raise ValueError(f"cannot read {part!r}")
        out += [int(m.group(1))] * int(m.group(2) or 1)
    return sorted(out)
