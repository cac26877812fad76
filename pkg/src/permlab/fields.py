"""Exact arithmetic in F_q for prime q and small prime powers.

Elements are canonical indices in {0, ..., q-1}.  For prime fields the index
is the residue mod p.  For extension fields F_{p^k} the index encodes the
coefficient vector of a polynomial in base p (index = sum c_i * p^i), reduced
modulo a fixed irreducible polynomial: the monic irreducible of degree k with
the smallest integer encoding.  Multiplication and inversion go through
discrete exp/log tables built once per field; addition is digitwise mod p.

All FieldSpec operations accept plain ints or numpy integer arrays and are
safe to share across threads (specs are immutable after construction).
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DivisionByZero,
    FieldMismatch,
    NotAPrimePower,
    TableCapExceeded,
)

_EXTENSION_CAP = 4096
_PRIME_CAP = 2**31


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _factor_prime_power(q: int) -> tuple[int, int]:
    """Return (p, k) with q = p^k, or raise NotAPrimePower."""
    if q < 2:
        raise NotAPrimePower(f"field order must be >= 2, got {q}")
    p = 2
    while p * p <= q:
        if q % p == 0:
            break
        p += 1
    else:
        return q, 1  # q itself is prime
    k = 0
    m = q
    while m % p == 0:
        m //= p
        k += 1
    if m != 1:
        raise NotAPrimePower(f"{q} is not a prime power")
    return p, k


def _prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomial helpers on base-p integer encodings (construction time only) --

def _poly_digits(a: int, p: int) -> list[int]:
    out = []
    while a:
        out.append(a % p)
        a //= p
    return out


def _poly_from_digits(digits: list[int], p: int) -> int:
    a = 0
    for c in reversed(digits):
        a = a * p + c
    return a


def _poly_mulmod(a: int, b: int, mod_poly: int, p: int) -> int:
    da, db = _poly_digits(a, p), _poly_digits(b, p)
    if not da or not db:
        return 0
    prod = [0] * (len(da) + len(db) - 1)
    for i, ca in enumerate(da):
        if ca:
            for j, cb in enumerate(db):
                prod[i + j] = (prod[i + j] + ca * cb) % p
    return _poly_mod(_poly_from_digits(prod, p), mod_poly, p)


def _poly_mod(a: int, mod_poly: int, p: int) -> int:
    dm = _poly_digits(mod_poly, p)
    deg_m = len(dm) - 1
    lead_inv = pow(dm[-1], p - 2, p)
    da = _poly_digits(a, p)
    while len(da) - 1 >= deg_m and any(da):
        if da[-1] == 0:
            da.pop()
            continue
        shift = len(da) - 1 - deg_m
        factor = (da[-1] * lead_inv) % p
        for i, cm in enumerate(dm):
            da[shift + i] = (da[shift + i] - factor * cm) % p
        while da and da[-1] == 0:
            da.pop()
    return _poly_from_digits(da, p)


def _is_irreducible(poly: int, p: int, k: int) -> bool:
    """Trial division by every monic polynomial of degree 1..k//2."""
    for d in range(1, k // 2 + 1):
        for tail in range(p**d):
            divisor = p**d + tail
            if _poly_rem_is_zero(poly, divisor, p):
                return False
    return True


def _poly_rem_is_zero(a: int, b: int, p: int) -> bool:
    return _poly_mod(a, b, p) == 0


class FieldElem:
    """A single element of a finite field, wrapping its canonical index."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: "FieldSpec"):
        if not 0 <= value < field.q:
            raise ValueError(f"canonical index {value} out of range for F_{field.q}")
        self.value = int(value)
        self.field = field

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.field is not self.field:
                raise FieldMismatch(
                    f"cannot combine F_{self.field.q} with F_{other.field.q}"
                )
            return other
        if isinstance(other, (int, np.integer)):
            return FieldElem(int(other) % self.field.q if self.field.k == 1 else int(other), self.field)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElem(int(self.field.add(self.value, o.value)), self.field)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElem(int(self.field.sub(self.value, o.value)), self.field)

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElem(int(self.field.mul(self.value, o.value)), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o.inverse()

    def __neg__(self):
        return FieldElem(int(self.field.neg(self.value)), self.field)

    def inverse(self) -> "FieldElem":
        return FieldElem(int(self.field.inv(self.value)), self.field)

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.field is other.field and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field.q, self.value))

    def __repr__(self):
        return f"F{self.field.q}({self.value})"


class FieldSpec:
    """A finite field F_q with vectorized arithmetic on canonical indices.

    Do not construct directly; use make_field(q) so that tables are built
    once and specs are shared.
    """

    def __init__(self, q: int, _token=None):
        if _token is not _MAKE_TOKEN:
            raise TypeError("use make_field(q) to construct FieldSpec")
        p, k = _factor_prime_power(q)
        if k == 1 and q >= _PRIME_CAP:
            raise TableCapExceeded(f"prime field order {q} exceeds machine-word cap 2^31")
        if k > 1 and q > _EXTENSION_CAP:
            raise TableCapExceeded(f"extension field order {q} exceeds table cap {_EXTENSION_CAP}")
        self.q = q
        self.p = p
        self.k = k
        self.irreducible_poly: int | None = None
        self.exp_table: np.ndarray | None = None
        self.log_table: np.ndarray | None = None
        if k > 1:
            self._build_extension_tables()
        self._p_powers = np.array([p**i for i in range(self.k)], dtype=np.int64)

    # -- construction ----------------------------------------------------

    def _build_extension_tables(self):
        p, k, q = self.p, self.k, self.q
        poly = next(
            c for c in range(p**k, 2 * p**k) if _is_irreducible(c, p, k)
        )
        self.irreducible_poly = poly
        # smallest generator of the multiplicative group
        factors = _prime_factors(q - 1)
        gen = None
        for g in range(2, q):
            if all(self._pow_poly(g, (q - 1) // f, poly) != 1 for f in factors):
                gen = g
                break
        if gen is None:  # q - 1 == 1 cannot happen for k > 1
            raise AssertionError("no generator found")
        exp = np.zeros(q - 1, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for e in range(q - 1):
            exp[e] = x
            log[x] = e
            x = _poly_mulmod(x, gen, poly, p)
        if x != 1:
            raise AssertionError("generator order mismatch")
        self.exp_table = exp
        self.log_table = log
        self.generator = gen

    def _pow_poly(self, base: int, e: int, poly: int) -> int:
        r = 1
        b = base
        while e:
            if e & 1:
                r = _poly_mulmod(r, b, poly, self.p)
            b = _poly_mulmod(b, b, poly, self.p)
            e >>= 1
        return r

    # -- arithmetic on canonical indices (ints or numpy arrays) -----------

    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        return self._digitwise(a, b, lambda x, y: (x + y) % self.p)

    def sub(self, a, b):
        if self.k == 1:
            return (a - b) % self.p
        return self._digitwise(a, b, lambda x, y: (x - y) % self.p)

    def neg(self, a):
        if self.k == 1:
            return (-a) % self.p
        return self._digitwise(a, 0, lambda x, _: (-x) % self.p)

    def _digitwise(self, a, b, op):
        scalar = not (isinstance(a, np.ndarray) or isinstance(b, np.ndarray))
        if scalar:
            out, mult = 0, 1
            for _ in range(self.k):
                out += op(a % self.p, b % self.p) * mult
                a //= self.p
                b //= self.p
                mult *= self.p
            return out
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
        for i in range(self.k):
            out += op((a // self._p_powers[i]) % self.p,
                      (b // self._p_powers[i]) % self.p) * self._p_powers[i]
        return out

    def mul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        if not (isinstance(a, np.ndarray) or isinstance(b, np.ndarray)):
            if a == 0 or b == 0:
                return 0
            return int(self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.q - 1)])
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        nz = (a != 0) & (b != 0)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
        idx = (self.log_table[np.broadcast_to(a, out.shape)[nz]]
               + self.log_table[np.broadcast_to(b, out.shape)[nz]]) % (self.q - 1)
        out[nz] = self.exp_table[idx]
        return out

    def inv(self, a):
        if isinstance(a, np.ndarray):
            if np.any(a == 0):
                raise DivisionByZero("inverse of zero")
            if self.k == 1:
                return self._inv_table()[a]
            return self.exp_table[(-self.log_table[a]) % (self.q - 1)]
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.k == 1:
            return pow(int(a), self.p - 2, self.p)
        return int(self.exp_table[(-self.log_table[a]) % (self.q - 1)])

    def _inv_table(self) -> np.ndarray:
        tab = getattr(self, "_inv_cache", None)
        if tab is None:
            vals = np.arange(self.q, dtype=np.int64)
            tab = np.zeros(self.q, dtype=np.int64)
            tab[1:] = np.array([pow(int(v), self.p - 2, self.p) for v in vals[1:]],
                               dtype=np.int64)
            self._inv_cache = tab
        return tab

    def element(self, value: int) -> FieldElem:
        return FieldElem(value % self.q if self.k == 1 else value, self)

    @property
    def zero(self) -> FieldElem:
        return FieldElem(0, self)

    @property
    def one(self) -> FieldElem:
        return FieldElem(1, self)

    def elements(self):
        return [FieldElem(v, self) for v in range(self.q)]

    def __repr__(self):
        if self.k == 1:
            return f"FieldSpec(q={self.q})"
        return f"FieldSpec(q={self.q}, p={self.p}, k={self.k}, poly={self.irreducible_poly})"

    def __reduce__(self):
        return (make_field, (self.q,))


_MAKE_TOKEN = object()
_FIELD_CACHE: dict[int, FieldSpec] = {}


def make_field(q: int) -> FieldSpec:
    """Return the shared FieldSpec for order q.

    Raises NotAPrimePower if q is not a prime power and TableCapExceeded if
    q = p^k with k > 1 exceeds the 4096 table cap.
    """
    q = int(q)
    spec = _FIELD_CACHE.get(q)
    if spec is None:
        spec = FieldSpec(q, _token=_MAKE_TOKEN)
        _FIELD_CACHE[q] = spec
    return spec


def require_same_field(*objs) -> FieldSpec:
    fields = {obj.field.q for obj in objs}
    if len(fields) > 1:
        raise FieldMismatch(f"mixed field orders {sorted(fields)}")
    return objs[0].field
