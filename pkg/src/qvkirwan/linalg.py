"""Exact dense linear algebra over the rationals and prime fields.

Matrices act on column vectors.  Subspaces are stored as row spaces in
reduced row echelon form, so two subspaces are equal exactly when their
stored bases are equal.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Sequence


class ShapeError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """Raised instead of silently truncating an enumeration."""


DEFAULT_BUDGET = 10**6


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Field:
    """Either the rationals (``p == 0``) or the prime field F_p."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0 and not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def is_rational(self) -> bool:
        return self.p == 0

    def __call__(self, x) -> Fraction | int:
        if self.p == 0:
            return Fraction(x)
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def norm(self, x):
        return x % self.p if self.p else x

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.p:
            return pow(int(x), -1, self.p)
        return 1 / Fraction(x)

    @property
    def zero(self):
        return 0 if self.p else Fraction(0)

    @property
    def one(self):
        return 1 if self.p else Fraction(1)

    def random(self, rng, bound: int = 3, zero_prob: float = 0.0):
        if zero_prob and rng.random() < zero_prob:
            return self.zero
        if self.p:
            return rng.randrange(self.p)
        return Fraction(rng.randint(-bound, bound))

    def elements(self) -> range:
        if not self.p:
            raise ValueError("cannot enumerate the rationals")
        return range(self.p)

    def __str__(self) -> str:
        return "q" if self.p == 0 else f"fp:{self.p}"

    @classmethod
    def parse(cls, text: str) -> "Field":
        text = text.strip().lower()
        if text in ("q", "qq", "rationals"):
            return cls(0)
        if text.startswith("fp:"):
            return cls(int(text[3:]))
        raise ValueError(f"unknown field {text!r} (expected 'q' or 'fp:<p>')")


QQ = Field(0)


def fmt_scalar(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


class Mat:
    """An immutable ``rows x cols`` matrix over a :class:`Field`."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: Field, rows: int, cols: int, data: Sequence[Sequence] | None = None):
        self.field = field
        self.rows = rows
        self.cols = cols
        if data is None:
            z = field.zero
            self.data = tuple(tuple(z for _ in range(cols)) for _ in range(rows))
        else:
            if len(data) != rows or any(len(r) != cols for r in data):
                raise ShapeError(f"data does not have shape {rows}x{cols}")
            self.data = tuple(tuple(field(x) for x in r) for r in data)

    @classmethod
    def _raw(cls, field, rows, cols, data):
        m = cls.__new__(cls)
        m.field, m.rows, m.cols, m.data = field, rows, cols, data
        return m

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], cols: int | None = None) -> "Mat":
        rows = list(rows)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(field, len(rows), cols, rows)

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Mat":
        return cls(field, rows, cols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Mat":
        o, z = field.one, field.zero
        return cls._raw(field, n, n, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def scalar(cls, field: Field, n: int, c) -> "Mat":
        return cls.identity(field, n) * field(c)

    @classmethod
    def random(cls, field: Field, rows: int, cols: int, rng, zero_prob: float = 0.0) -> "Mat":
        return cls._raw(field, rows, cols, tuple(
            tuple(field.random(rng, zero_prob=zero_prob) for _ in range(cols)) for _ in range(rows)))

    @classmethod
    def random_invertible(cls, field: Field, n: int, rng) -> "Mat":
        while True:
            m = cls.random(field, n, n, rng)
            if rank(m) == n:
                return m

    @classmethod
    def column(cls, field: Field, vec: Sequence) -> "Mat":
        return cls(field, len(vec), 1, [[x] for x in vec])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Mat) and self.shape == other.shape
                and self.data == other.data)

    def __hash__(self) -> int:
        return hash((self.shape, self.data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(fmt_scalar(x) for x in r) for r in self.data)
        return f"Mat({self.rows}x{self.cols}: [{body}])"

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.data for x in r)

    def _check_same(self, other: "Mat"):
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Mat") -> "Mat":
        self._check_same(other)
        n = self.field.norm
        return Mat._raw(self.field, self.rows, self.cols, tuple(
            tuple(n(a + b) for a, b in zip(r, s)) for r, s in zip(self.data, other.data)))

    def __sub__(self, other: "Mat") -> "Mat":
        self._check_same(other)
        n = self.field.norm
        return Mat._raw(self.field, self.rows, self.cols, tuple(
            tuple(n(a - b) for a, b in zip(r, s)) for r, s in zip(self.data, other.data)))

    def __neg__(self) -> "Mat":
        n = self.field.norm
        return Mat._raw(self.field, self.rows, self.cols, tuple(tuple(n(-a) for a in r) for r in self.data))

    def __mul__(self, c) -> "Mat":
        c = self.field(c)
        n = self.field.norm
        return Mat._raw(self.field, self.rows, self.cols, tuple(tuple(n(a * c) for a in r) for r in self.data))

    __rmul__ = __mul__

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        n = self.field.norm
        cols = list(zip(*other.data)) if other.rows else [()] * other.cols
        z = self.field.zero
        return Mat._raw(self.field, self.rows, other.cols, tuple(
            tuple(n(sum((a * b for a, b in zip(r, c)), z)) for c in cols) for r in self.data))

    @property
    def T(self) -> "Mat":
        return Mat._raw(self.field, self.cols, self.rows, tuple(zip(*self.data)) if self.rows else
                        tuple(() for _ in range(self.cols)))

    def entries(self) -> list:
        """Row-major entry list."""
        return [x for r in self.data for x in r]

    def apply(self, vec: Sequence) -> tuple:
        if len(vec) != self.cols:
            raise ShapeError("vector length mismatch")
        n = self.field.norm
        z = self.field.zero
        return tuple(n(sum((a * b for a, b in zip(r, vec)), z)) for r in self.data)

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise ShapeError("inverse of a non-square matrix")
        k = self.rows
        aug = [list(r) + list(e) for r, e in zip(self.data, Mat.identity(self.field, k).data)]
        red, piv = _rref_rows(self.field, aug, 2 * k)
        if piv[:k] != list(range(k)):
            raise ZeroDivisionError("matrix is singular")
        return Mat._raw(self.field, k, k, tuple(tuple(r[k:]) for r in red[:k]))


def hstack(field: Field, rows: int, blocks: Sequence[Mat]) -> Mat:
    data = [[] for _ in range(rows)]
    cols = 0
    for b in blocks:
        if b.rows != rows:
            raise ShapeError("hstack row mismatch")
        for i in range(rows):
            data[i].extend(b.data[i])
        cols += b.cols
    return Mat._raw(field, rows, cols, tuple(tuple(r) for r in data))


def vstack(field: Field, cols: int, blocks: Sequence[Mat]) -> Mat:
    data = []
    for b in blocks:
        if b.cols != cols:
            raise ShapeError("vstack column mismatch")
        data.extend(b.data)
    return Mat._raw(field, len(data), cols, tuple(data))


def _rref_rows(field: Field, rows: list[list], ncols: int) -> tuple[list[list], list[int]]:
    """Reduced row echelon form in place; returns nonzero rows and pivot columns."""
    norm, inv = field.norm, field.inv
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        iv = inv(m[r][c])
        m[r] = [norm(x * iv) for x in m[r]]
        row = m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [norm(a - f * b) for a, b in zip(m[i], row)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rref(A: Mat) -> tuple[Mat, list[int]]:
    red, piv = _rref_rows(A.field, [list(r) for r in A.data], A.cols)
    return Mat._raw(A.field, len(red), A.cols, tuple(tuple(r) for r in red)), piv


def rank(A: Mat) -> int:
    return len(_rref_rows(A.field, [list(r) for r in A.data], A.cols)[1])


@dataclass(frozen=True)
class Subspace:
    """A subspace of F^ambient, stored by its canonical RREF basis rows."""

    field: Field
    ambient: int
    basis: tuple[tuple, ...]

    @classmethod
    def span(cls, field: Field, ambient: int, vectors: Iterable[Sequence]) -> "Subspace":
        vecs = [[field(x) for x in v] for v in vectors]
        if any(len(v) != ambient for v in vecs):
            raise ShapeError("vector length does not match ambient dimension")
        red, _ = _rref_rows(field, vecs, ambient)
        return cls(field, ambient, tuple(tuple(r) for r in red))

    @classmethod
    def zero(cls, field: Field, ambient: int) -> "Subspace":
        return cls(field, ambient, ())

    @classmethod
    def full(cls, field: Field, ambient: int) -> "Subspace":
        return cls(field, ambient, Mat.identity(field, ambient).data)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def basis_matrix(self) -> Mat:
        """Basis vectors as rows."""
        return Mat._raw(self.field, self.dim, self.ambient, self.basis)

    def annihilator(self) -> Mat:
        """A matrix ``P`` with ``ker P`` equal to this subspace."""
        ann = kernel(self.basis_matrix()) if self.dim else Subspace.full(self.field, self.ambient)
        return Mat._raw(self.field, ann.dim, self.ambient, ann.basis)

    def contains_vector(self, v: Sequence) -> bool:
        return Subspace.span(self.field, self.ambient, list(self.basis) + [list(v)]).dim == self.dim

    def __le__(self, other: "Subspace") -> bool:
        _check_ambient(self, other)
        return subspace_sum(self, other).dim == other.dim

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}/{self.ambient})"


def _check_ambient(U: Subspace, W: Subspace):
    if U.ambient != W.ambient:
        raise ShapeError(f"ambient mismatch {U.ambient} vs {W.ambient}")


def kernel(A: Mat) -> Subspace:
    red, piv = _rref_rows(A.field, [list(r) for r in A.data], A.cols)
    free = [c for c in range(A.cols) if c not in set(piv)]
    f = A.field
    vecs = []
    for c in free:
        v = [f.zero] * A.cols
        v[c] = f.one
        for r, pc in enumerate(piv):
            v[pc] = f.norm(-red[r][c])
        vecs.append(v)
    return Subspace.span(f, A.cols, vecs)


def image(A: Mat) -> Subspace:
    """Column space of ``A`` as a subspace of F^rows."""
    return Subspace.span(A.field, A.rows, A.T.data)


def solve(A: Mat, b: Sequence):
    """One solution of ``A x = b`` or ``None`` when inconsistent."""
    if len(b) != A.rows:
        raise ShapeError("right-hand side length mismatch")
    f = A.field
    aug = [list(r) + [f(x)] for r, x in zip(A.data, b)]
    red, piv = _rref_rows(f, aug, A.cols + 1)
    if piv and piv[-1] == A.cols:
        return None
    x = [f.zero] * A.cols
    for r, pc in enumerate(piv):
        x[pc] = red[r][A.cols]
    return tuple(x)


def intersect(U: Subspace, W: Subspace) -> Subspace:
    _check_ambient(U, W)
    if U.dim == 0 or W.dim == 0:
        return Subspace.zero(U.field, U.ambient)
    P = vstack(U.field, U.ambient, [U.annihilator(), W.annihilator()])
    return kernel(P)


def subspace_sum(U: Subspace, W: Subspace) -> Subspace:
    _check_ambient(U, W)
    return Subspace.span(U.field, U.ambient, list(U.basis) + list(W.basis))


def preimage(A: Mat, U: Subspace) -> Subspace:
    """``{x : A x in U}``."""
    if A.rows != U.ambient:
        raise ShapeError("map does not land in the ambient space of the subspace")
    P = U.annihilator()
    if P.rows == 0:
        return Subspace.full(A.field, A.cols)
    return kernel(P @ A)


def image_of(A: Mat, U: Subspace) -> Subspace:
    if A.cols != U.ambient:
        raise ShapeError("subspace does not live in the domain of the map")
    return Subspace.span(A.field, A.rows, [A.apply(v) for v in U.basis])


# Graded families: a dict vertex -> Subspace, with arrows (src, tgt, Mat).

Arrow = tuple  # (src, tgt, Mat)


def _check_graded(arrows: Sequence[Arrow], family: dict):
    for s, t, A in arrows:
        if s not in family or t not in family:
            raise ShapeError(f"arrow {s}->{t} references an unknown vertex")
        if A.cols != family[s].ambient or A.rows != family[t].ambient:
            raise ShapeError(f"arrow {s}->{t} has shape {A.shape}")


def is_closed(arrows: Sequence[Arrow], family: dict) -> bool:
    return all(image_of(A, family[s]) <= family[t] for s, t, A in arrows)


def max_invariant_in(arrows: Sequence[Arrow], bound: dict) -> dict:
    """Largest family inside ``bound`` closed under every arrow."""
    _check_graded(arrows, bound)
    S = dict(bound)
    changed = True
    while changed:
        changed = False
        for s, t, A in arrows:
            new = intersect(S[s], preimage(A, S[t]))
            if new.dim < S[s].dim:
                S[s] = new
                changed = True
    return S


def closure_generated_by(arrows: Sequence[Arrow], seed: dict) -> dict:
    """Smallest family containing ``seed`` closed under every arrow."""
    _check_graded(arrows, seed)
    S = dict(seed)
    changed = True
    while changed:
        changed = False
        for s, t, A in arrows:
            new = subspace_sum(S[t], image_of(A, S[s]))
            if new.dim > S[t].dim:
                S[t] = new
                changed = True
    return S


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def enumerate_subspaces(n: int, k: int, field: Field, budget: int = DEFAULT_BUDGET) -> Iterator[Subspace]:
    """Every k-dimensional subspace of F_p^n exactly once, by RREF pivot pattern."""
    if field.is_rational:
        raise ValueError("subspace enumeration needs a finite field")
    if not 0 <= k <= n:
        return
    count = gaussian_binomial(n, k, field.p)
    if count > budget:
        raise BudgetExceeded(f"Gr({k},{n}) over F_{field.p} has {count} points > budget {budget}")
    yield from _enumerate_unchecked(n, k, field)


def _enumerate_unchecked(n: int, k: int, field: Field) -> Iterator[Subspace]:
    from itertools import combinations

    p = field.p
    for pivots in combinations(range(n), k):
        free = [(r, c) for r in range(k) for c in range(pivots[r] + 1, n) if c not in pivots]
        for vals in product(range(p), repeat=len(free)):
            rows = [[0] * n for _ in range(k)]
            for r, c in enumerate(pivots):
                rows[r][c] = 1
            for (r, c), v in zip(free, vals):
                rows[r][c] = v
            yield Subspace(field, n, tuple(tuple(r) for r in rows))


def count_subspaces(n: int, field: Field) -> int:
    return sum(gaussian_binomial(n, k, field.p) for k in range(n + 1))


def all_subspaces(n: int, field: Field, budget: int = DEFAULT_BUDGET) -> list[Subspace]:
    total = count_subspaces(n, field)
    if total > budget:
        raise BudgetExceeded(f"F_{field.p}^{n} has {total} subspaces > budget {budget}")
    return [U for k in range(n + 1) for U in _enumerate_unchecked(n, k, field)]


class BlockLayout:
    """Coordinates for a direct sum of matrix spaces, vectorized row-major."""

    def __init__(self, blocks):
        self.keys: list = []
        self.shapes: dict = {}
        self.offsets: dict = {}
        off = 0
        for key, r, c in blocks:
            self.keys.append(key)
            self.shapes[key] = (r, c)
            self.offsets[key] = off
            off += r * c
        self.dim = off

    def __contains__(self, key) -> bool:
        return key in self.shapes

    def index(self, key, r: int, c: int) -> int:
        return self.offsets[key] + r * self.shapes[key][1] + c

    def pack(self, field: Field, mats: dict) -> tuple:
        out = [field.zero] * self.dim
        for key in self.keys:
            if key in mats:
                M = mats[key]
                if M.shape != self.shapes[key]:
                    raise ShapeError(f"block {key!r} has shape {M.shape}, expected {self.shapes[key]}")
                o = self.offsets[key]
                out[o:o + M.rows * M.cols] = M.entries()
        return tuple(out)

    def unpack(self, field: Field, vec) -> dict:
        out = {}
        for key in self.keys:
            r, c = self.shapes[key]
            o = self.offsets[key]
            flat = vec[o:o + r * c]
            out[key] = Mat._raw(field, r, c, tuple(tuple(flat[i * c:(i + 1) * c]) for i in range(r)))
        return out

    def unit(self, field: Field, key) -> dict:
        """The block ``key`` set to the identity (or 1x1 unit), others zero."""
        r, c = self.shapes[key]
        if r != c:
            raise ShapeError("unit of a non-square block")
        return {key: Mat.identity(field, r)}


class LinearMapBuilder:
    """Accumulates a linear map between two block layouts.

    ``add(tgt, src, A, B, c)`` adds the term ``X_src -> c * A @ X_src @ B``
    into block ``tgt``.
    """

    def __init__(self, field: Field, domain: BlockLayout, codomain: BlockLayout):
        self.field = field
        self.domain = domain
        self.codomain = codomain
        self.rows = [[field.zero] * domain.dim for _ in range(codomain.dim)]

    def add(self, tgt, src, A: Mat, B: Mat, c=1):
        tr, tc = self.codomain.shapes[tgt]
        sr, sc = self.domain.shapes[src]
        if A.shape != (tr, sr) or B.shape != (sc, tc):
            raise ShapeError(f"term {src!r}->{tgt!r} has factors {A.shape}, {B.shape}")
        f = self.field
        c = f(c)
        norm = f.norm
        # (A X B)_{rc} = sum_{m,n} A_{rm} X_{mn} B_{nc}
        for r in range(tr):
            Arow = A.data[r]
            for col in range(tc):
                row = self.rows[self.codomain.index(tgt, r, col)]
                for m in range(sr):
                    a = Arow[m]
                    if a == 0:
                        continue
                    base = self.domain.index(src, m, 0)
                    for n in range(sc):
                        b = B.data[n][col]
                        if b != 0:
                            row[base + n] = norm(row[base + n] + c * a * b)

    def matrix(self) -> Mat:
        return Mat._raw(self.field, self.codomain.dim, self.domain.dim,
                        tuple(tuple(r) for r in self.rows))
