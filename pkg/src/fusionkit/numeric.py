"""Exact arithmetic in Z[(1+sqrt 17)/2] and floating-point contexts.

Elements are stored as (a + b*sqrt(17))/2 with a and b of equal parity,
which is exactly the ring of integers of Q(sqrt 17).  The distinguished
element ``D = 4 + sqrt(17)`` satisfies ``D*D == 8*D + 1``.
"""
from __future__ import annotations

import ast
import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Union

import mpmath

RADICAND = 17


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


@dataclass(frozen=True)
class QuadInt:
    """(a + b*sqrt(17)) / 2 with a = b (mod 2)."""

    a: int
    b: int

    def __post_init__(self):
        if not isinstance(self.a, int) or not isinstance(self.b, int):
            raise TypeError("QuadInt components must be int")
        if (self.a - self.b) % 2:
            raise ValueError(f"parity mismatch in QuadInt({self.a}, {self.b})")

    @classmethod
    def of(cls, n: int) -> "QuadInt":
        return cls(2 * n, 0)

    @classmethod
    def coerce(cls, x) -> "QuadInt":
        if isinstance(x, QuadInt):
            return x
        if isinstance(x, int) and not isinstance(x, bool):
            return cls(2 * x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to QuadInt")

    def __add__(self, other):
        try:
            o = QuadInt.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadInt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadInt(-self.a, -self.b)

    def __sub__(self, other):
        try:
            o = QuadInt.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadInt(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = QuadInt.coerce(other)
        except TypeError:
            return NotImplemented
        # ((a1 a2 + 17 b1 b2) + (a1 b2 + a2 b1) sqrt17) / 4, halved into our form
        a = self.a * o.a + RADICAND * self.b * o.b
        b = self.a * o.b + self.b * o.a
        return QuadInt(a // 2, b // 2)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not in the ring")
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = QuadInt.of(other)
        if not isinstance(other, QuadInt):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a or self.b)

    def conj(self) -> "QuadInt":
        """Galois conjugate sqrt17 -> -sqrt17."""
        return QuadInt(self.a, -self.b)

    def norm(self) -> int:
        """Field norm x * conj(x); always an integer on this ring."""
        return (self.a * self.a - RADICAND * self.b * self.b) // 4

    def sign(self) -> int:
        """Sign of the real embedding with sqrt17 > 0, computed exactly."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        # opposite signs: compare a^2 against 17 b^2
        s = a * a - RADICAND * b * b
        if s == 0:
            return 0
        return (1 if a > 0 else -1) if s > 0 else (1 if b > 0 else -1)

    def __lt__(self, other):
        return (self - QuadInt.coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - QuadInt.coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - QuadInt.coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - QuadInt.coerce(other)).sign() >= 0

    def exact_div(self, other) -> "QuadInt | None":
        """self / other if the quotient lies in the ring, else None."""
        o = QuadInt.coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in QuadInt")
        num = self * o.conj()
        if num.a % n or num.b % n:
            return None
        a, b = num.a // n, num.b // n
        if (a - b) % 2:
            return None
        return QuadInt(a, b)

    def sqrt(self) -> "QuadInt | None":
        return qi_sqrt(self)

    def is_square(self) -> bool:
        return qi_sqrt(self) is not None

    def __float__(self):
        return qi_to_float(self)

    def to_mpf(self, ctx) -> "mpmath.mpf":
        return (ctx.mpf(self.a) + ctx.mpf(self.b) * ctx.sqrt(RADICAND)) / 2

    def in_d(self) -> tuple[Fraction, Fraction]:
        """Coefficients (p, q) with self = p + q*D."""
        q = Fraction(self.b, 2)
        p = Fraction(self.a, 2) - 4 * q
        return p, q

    def __str__(self):
        p, q = self.in_d()
        parts = []
        if q:
            if q == 1:
                parts.append("d")
            elif q == -1:
                parts.append("-d")
            else:
                parts.append(f"{q}d")
        if p or not parts:
            if parts and p > 0:
                parts.append(f"+{p}")
            else:
                parts.append(f"{p}")
        return "".join(parts)

    def __repr__(self):
        return f"QuadInt({self.a}, {self.b})"

    @classmethod
    def parse(cls, text: str) -> "QuadInt":
        """Parse expressions such as ``(d+1)/2``, ``28d+4``, ``3*s17``.

        ``d`` denotes 4 + sqrt(17) and ``s17`` denotes sqrt(17).
        """
        src = text.replace("√17", "s17").replace("sqrt17", "s17").strip()
        # allow implicit products like 28d or 2s17
        out = []
        for i, ch in enumerate(src):
            if ch in "ds" and i > 0 and src[i - 1].isdigit():
                out.append("*")
            out.append(ch)
        tree = ast.parse("".join(out), mode="eval")
        p, q = _eval_field(tree.body)
        return _field_to_quadint(p, q, text)


def _eval_field(node) -> tuple[Fraction, Fraction]:
    """Evaluate to (p, q) meaning p + q*sqrt17 with rational p, q."""
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Fraction(node.value), Fraction(0)
    if isinstance(node, ast.Name):
        if node.id == "d":
            return Fraction(4), Fraction(1)
        if node.id == "s17":
            return Fraction(0), Fraction(1)
        raise ValueError(f"unknown symbol {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        p, q = _eval_field(node.operand)
        return (-p, -q) if isinstance(node.op, ast.USub) else (p, q)
    if isinstance(node, ast.BinOp):
        p1, q1 = _eval_field(node.left)
        p2, q2 = _eval_field(node.right)
        if isinstance(node.op, ast.Add):
            return p1 + p2, q1 + q2
        if isinstance(node.op, ast.Sub):
            return p1 - p2, q1 - q2
        if isinstance(node.op, ast.Mult):
            return p1 * p2 + RADICAND * q1 * q2, p1 * q2 + p2 * q1
        if isinstance(node.op, ast.Div):
            n = p2 * p2 - RADICAND * q2 * q2
            if n == 0:
                raise ZeroDivisionError("division by zero")
            return (p1 * p2 - RADICAND * q1 * q2) / n, (q1 * p2 - p1 * q2) / n
        if isinstance(node.op, ast.Pow) and isinstance(node.right, ast.Constant):
            acc = (Fraction(1), Fraction(0))
            for _ in range(int(node.right.value)):
                acc = (acc[0] * p1 + RADICAND * acc[1] * q1, acc[0] * q1 + acc[1] * p1)
            return acc
    raise ValueError(f"unsupported expression: {ast.dump(node)}")


def _field_to_quadint(p: Fraction, q: Fraction, text: str) -> QuadInt:
    a, b = 2 * p, 2 * q
    if a.denominator != 1 or b.denominator != 1:
        raise ValueError(f"{text!r} is not an algebraic integer of Q(sqrt17)")
    return QuadInt(int(a), int(b))


ZERO = QuadInt(0, 0)
ONE = QuadInt(2, 0)
SQRT17 = QuadInt(0, 2)
D = QuadInt(8, 2)

QuadLike = Union[QuadInt, int]


def qi_sqrt(x: QuadInt) -> QuadInt | None:
    """Return y >= 0 with y*y == x, or None if x is not a square.

    Writing y = (p + q sqrt17)/2 gives p^2 = a + 2s and 17 q^2 = a - 2s with
    s = +-sqrt(N(x)), so only the norm pre-filter and two integer square
    roots are needed.
    """
    x = QuadInt.coerce(x)
    if not x:
        return ZERO
    n = x.norm()
    s = _isqrt_exact(n)
    if s is None:
        return None
    for sg in (s, -s):
        p = _isqrt_exact(x.a + 2 * sg)
        t = x.a - 2 * sg
        if p is None or t % RADICAND:
            continue
        q = _isqrt_exact(t // RADICAND)
        if q is None or (p - q) % 2:
            continue
        # pq must equal b; fix the relative sign accordingly
        if p * q != abs(x.b):
            continue
        if x.b < 0:
            q = -q
        y = QuadInt(p, q)
        if y.sign() < 0:
            y = -y
        if y * y == x:
            return y
    return None


def qi_is_square(x: QuadInt) -> bool:
    return qi_sqrt(x) is not None


def qi_to_float(x: QuadInt) -> float:
    """Correctly rounded float of (a + b sqrt17)/2."""
    if x.b == 0:
        return float(Fraction(x.a, 2))
    k = 64
    while True:
        # bracket b*sqrt17 between two rationals of precision 2^-k
        scale = 1 << k
        r = math.isqrt(RADICAND * x.b * x.b * scale * scale)
        lo_root, hi_root = (r, r + 1) if x.b > 0 else (-r - 1, -r)
        lo = float(Fraction(x.a * scale + lo_root, 2 * scale))
        hi = float(Fraction(x.a * scale + hi_root, 2 * scale))
        if lo == hi:
            return lo
        k *= 2


# ---------------------------------------------------------------------------
# floating-point contexts


@dataclass(frozen=True)
class Precision:
    """Binary floating-point precision: 53 bits uses Python floats, more uses mpmath."""

    bits: int = 53

    def __post_init__(self):
        if self.bits < 53:
            raise ValueError("precision below binary64 is not supported")

    @property
    def is_double(self) -> bool:
        return self.bits == 53

    @cached_property
    def mp(self):
        if self.is_double:
            return None
        ctx = mpmath.MPContext()
        ctx.prec = self.bits
        return ctx

    @property
    def label(self) -> str:
        return "double" if self.is_double else f"extended-{self.bits}"

    def real(self, x):
        if isinstance(x, QuadInt):
            return qi_to_float(x) if self.is_double else x.to_mpf(self.mp)
        if self.is_double:
            return float(x)
        if isinstance(x, Fraction):
            return self.mp.mpf(x.numerator) / x.denominator
        return self.mp.mpf(x)

    def complex(self, re, im=0):
        if self.is_double:
            return complex(float(re), float(im))
        return self.mp.mpc(re, im)

    def sqrt(self, x):
        return math.sqrt(x) if self.is_double else self.mp.sqrt(x)

    @property
    def pi(self):
        return math.pi if self.is_double else self.mp.pi

    def expi(self, theta):
        return cmath.exp(1j * theta) if self.is_double else self.mp.expjpi(theta / self.mp.pi)

    def cos(self, x):
        return math.cos(x) if self.is_double else self.mp.cos(x)

    def conj(self, z):
        return z.conjugate()

    def abs(self, z):
        return abs(z)

    def csqrt(self, z, branch: str = "principal"):
        return complex_sqrt(z, branch, self)

    def from_parts(self, re: str | float, im: str | float):
        """Build a complex number from decimal strings or floats."""
        if self.is_double:
            return complex(float(re), float(im))
        return self.mp.mpc(self.mp.mpf(re), self.mp.mpf(im))


DOUBLE = Precision(53)
EXTENDED = Precision(113)


def resolve_precision(spec) -> Precision:
    """Accept a Precision, a bit count, or the names 'double'/'extended'."""
    if isinstance(spec, Precision):
        return spec
    if spec is None or spec == "double":
        return DOUBLE
    if spec == "extended":
        return EXTENDED
    try:
        return Precision(int(spec))
    except (TypeError, ValueError):
        raise ValueError(f"unknown precision {spec!r}") from None


def complex_sqrt(z, branch: str = "principal", prec: Precision = DOUBLE):
    """Square root with an explicit branch.

    The principal root has re >= 0; on the cut (re == 0) it takes im <= 0,
    so sqrt(-1) is -i.  ``branch='negated'`` returns minus the principal root.
    """
    if branch not in ("principal", "negated"):
        raise ValueError(f"unknown branch {branch!r}")
    if prec.is_double:
        w = cmath.sqrt(complex(z))
    else:
        w = prec.mp.sqrt(prec.mp.mpc(z))
    if w.real == 0 and w.imag > 0:
        w = -w
    elif w.real < 0:
        w = -w
    return w if branch == "principal" else -w


class _Evaluator(ast.NodeVisitor):
    """Arithmetic over a Precision: + - * / **, unary -, names and a few functions."""

    def __init__(self, prec: Precision, names: dict):
        self.prec = prec
        self.names = names

    def visit_Expression(self, node):
        return self.visit(node.body)

    def visit_Constant(self, node):
        if isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return self.prec.real(node.value)
        if isinstance(node.value, str):
            return node.value
        raise ValueError(f"unsupported constant {node.value!r}")

    def visit_Name(self, node):
        if node.id not in self.names:
            raise ValueError(f"unknown symbol {node.id!r}")
        return self.names[node.id]

    def visit_UnaryOp(self, node):
        v = self.visit(node.operand)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
        raise ValueError("unsupported unary operator")

    def visit_BinOp(self, node):
        a, b = self.visit(node.left), self.visit(node.right)
        ops = {ast.Add: lambda: a + b, ast.Sub: lambda: a - b,
               ast.Mult: lambda: a * b, ast.Div: lambda: a / b, ast.Pow: lambda: a ** b}
        for k, f in ops.items():
            if isinstance(node.op, k):
                return f()
        raise ValueError("unsupported binary operator")

    def visit_Call(self, node):
        if not isinstance(node.func, ast.Name):
            raise ValueError("unsupported call")
        args = [self.visit(a) for a in node.args]
        name = node.func.id
        prec = self.prec
        if name == "sqrt":
            return prec.sqrt(args[0])
        if name == "csqrt":
            return prec.csqrt(args[0], *args[1:])
        if name == "conj":
            return args[0].conjugate()
        if name == "cos":
            return prec.cos(args[0])
        if name == "exp":
            return cmath.exp(args[0]) if prec.is_double else prec.mp.exp(args[0])
        raise ValueError(f"unknown function {name!r}")

    def generic_visit(self, node):
        raise ValueError(f"unsupported syntax {type(node).__name__}")


def evaluate(expr: str, prec: Precision | None = None, names: dict | None = None):
    """Evaluate a formula such as ``-2/sqrt(17)*cos(12*pi*k*l/17)`` at the given precision.

    ``pi`` and ``i`` are predefined; ``names`` adds further symbols.
    """
    prec = prec or DOUBLE
    env = {"pi": prec.pi, "i": prec.complex(0, 1)}
    env.update(names or {})
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as e:
        raise ValueError(f"cannot parse {expr!r}: {e}") from None
    return _Evaluator(prec, env).visit(tree)
