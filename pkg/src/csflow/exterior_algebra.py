"""Differential forms on a 3-manifold written in a fixed coframe.

A :class:`Form` of degree ``k`` stores one coefficient per strictly increasing
index tuple (``C(3, k)`` of them). Coefficients may be plain numbers, numpy
arrays (a batch of points), :class:`~csflow.jets.Jet` objects (a coefficient
known through its Taylor data at a point), or :class:`ScalarField` objects
(a coefficient that can be evaluated anywhere on the chart).

Indices are zero-based in code: ``theta^1`` is index 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterator

import numpy as np

from .jets import MAX_ORDER, Jet

DIM = 3
BASES = {k: tuple(combinations(range(DIM), k)) for k in range(DIM + 1)}


class DegreeError(ValueError):
    """Raised when a form operation would exceed degree 3 or sees the wrong degree."""


def sort_sign(idx: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` and the sorted tuple; sign 0 on repeats."""
    if len(set(idx)) < len(idx):
        return 0, tuple(sorted(idx))
    sign = 1
    arr = list(idx)
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(arr)


class ScalarField:
    """A coefficient function on the chart.

    Constant fields report zero for every derivative. Evaluable fields wrap a
    callable ``point -> Jet`` returning Taylor data of order 3 at ``point``
    (an array of shape ``(3, ...)``).
    """

    def __init__(self, value: float | None = None, jet_fn: Callable[[np.ndarray], Jet] | None = None):
        if (value is None) == (jet_fn is None):
            raise ValueError("give exactly one of value or jet_fn")
        self._value = value
        self._jet_fn = jet_fn

    @classmethod
    def constant(cls, value: float) -> "ScalarField":
        return cls(value=float(value))

    @classmethod
    def evaluable(cls, jet_fn: Callable[[np.ndarray], Jet]) -> "ScalarField":
        return cls(jet_fn=jet_fn)

    @classmethod
    def from_derivatives(cls, fn: Callable[[np.ndarray], tuple]) -> "ScalarField":
        """Wrap ``fn(point) -> (value, gradient, hessian, third)``."""
        return cls(jet_fn=lambda p: Jet.from_derivatives(*fn(p)))

    @property
    def is_constant(self) -> bool:
        return self._jet_fn is None

    def jet(self, point) -> Jet:
        point = np.asarray(point, dtype=float)
        if self.is_constant:
            return Jet.constant(np.full(point.shape[1:], self._value), MAX_ORDER)
        return self._jet_fn(point)

    def __call__(self, point):
        """Value, gradient, Hessian and third partials at ``point``."""
        j = self.jet(point)
        return j.value, j.gradient, j.hessian, j.third

    def _lift(self, other, op):
        if isinstance(other, ScalarField):
            if self.is_constant and other.is_constant:
                return ScalarField.constant(op(self._value, other._value))
            return ScalarField.evaluable(lambda p: op(self.jet(p), other.jet(p)))
        if isinstance(other, (int, float, np.floating)):
            if self.is_constant:
                return ScalarField.constant(op(self._value, float(other)))
            return ScalarField.evaluable(lambda p: op(self.jet(p), float(other)))
        return NotImplemented

    def __add__(self, other):
        return self._lift(other, lambda a, b: a + b)

    def __radd__(self, other):
        return self._lift(other, lambda a, b: b + a)

    def __sub__(self, other):
        return self._lift(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._lift(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._lift(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self._lift(other, lambda a, b: b * a)

    def __neg__(self):
        return self * -1.0

    def __repr__(self) -> str:
        return f"ScalarField(constant={self._value})" if self.is_constant else "ScalarField(evaluable)"


def _is_zero(c) -> bool:
    return isinstance(c, (int, float)) and c == 0


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return a + b


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return 0.0
    return a * b


def _scale(a, s):
    if _is_zero(a) or s == 0:
        return 0.0
    if s == 1:
        return a
    return a * s


def coefficient_value(c) -> np.ndarray | float:
    """Numeric value of a coefficient (jets collapse to their value)."""
    if isinstance(c, Jet):
        return c.value
    if isinstance(c, ScalarField):
        raise TypeError("evaluate ScalarField coefficients at a point first")
    return c


class Form:
    """A degree-k form ``sum_I coeffs[I] theta^I`` over increasing index tuples ``I``."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs: dict | None = None):
        if degree not in BASES:
            raise DegreeError(f"degree must be 0..{DIM}, got {degree}")
        self.degree = degree
        full = {idx: 0.0 for idx in BASES[degree]}
        for idx, c in (coeffs or {}).items():
            sign, key = sort_sign(tuple(idx))
            if len(key) != degree or any(not 0 <= i < DIM for i in key):
                raise DegreeError(f"index {idx} does not fit a degree-{degree} form")
            if sign:
                full[key] = _add(full[key], _scale(c, sign))
        self.coeffs = full

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, degree: int) -> "Form":
        return cls(degree)

    @classmethod
    def scalar(cls, c) -> "Form":
        return cls(0, {(): c})

    @classmethod
    def basis(cls, *idx: int, coeff=1.0) -> "Form":
        """``coeff * theta^{i1} ^ ... ^ theta^{ik}`` with zero-based indices."""
        return cls(len(idx), {tuple(idx): coeff})

    @classmethod
    def one_form(cls, c0=0.0, c1=0.0, c2=0.0) -> "Form":
        return cls(1, {(0,): c0, (1,): c1, (2,): c2})

    # -- access ------------------------------------------------------------
    def __getitem__(self, idx) -> object:
        idx = (idx,) if isinstance(idx, int) else tuple(idx)
        sign, key = sort_sign(idx)
        if len(key) != self.degree:
            raise DegreeError(f"index {idx} has wrong length for degree {self.degree}")
        return _scale(self.coeffs[key], sign) if sign else 0.0

    def items(self) -> Iterator[tuple[tuple[int, ...], object]]:
        return iter(self.coeffs.items())

    def top(self):
        """Coefficient of theta^1 ^ theta^2 ^ theta^3 (degree-3 forms only)."""
        if self.degree != 3:
            raise DegreeError("top() needs a 3-form")
        return self.coeffs[(0, 1, 2)]

    def support(self, tol: float = 0.0) -> set[tuple[int, ...]]:
        """Basis tuples whose coefficient exceeds ``tol`` in absolute value anywhere."""
        out = set()
        for idx, c in self.items():
            if isinstance(c, ScalarField):
                raise TypeError("support needs evaluated coefficients")
            if np.max(np.abs(coefficient_value(c)), initial=0.0) > tol:
                out.add(idx)
        return out

    def values(self) -> np.ndarray:
        """Coefficient values stacked in basis order: shape ``(C(3,k), ...)``."""
        vals = [np.asarray(coefficient_value(c), dtype=float) for _, c in self.items()]
        shape = np.broadcast_shapes(*(v.shape for v in vals)) if vals else ()
        return np.stack([np.broadcast_to(v, shape) for v in vals]) if vals else np.zeros((0,))

    def map(self, fn) -> "Form":
        return Form(self.degree, {idx: fn(c) for idx, c in self.items()})

    def at(self, point) -> "Form":
        """Replace ScalarField coefficients by their jets at ``point``."""
        return self.map(lambda c: c.jet(point) if isinstance(c, ScalarField) and not c.is_constant
                        else (c._value if isinstance(c, ScalarField) else c))

    def evaluate(self) -> "Form":
        """Collapse jet coefficients to numeric values."""
        return self.map(coefficient_value)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "Form") -> "Form":
        if not isinstance(other, Form):
            return NotImplemented
        if other.degree != self.degree:
            raise DegreeError("cannot add forms of different degree")
        return Form(self.degree, {k: _add(self.coeffs[k], other.coeffs[k]) for k in self.coeffs})

    def __neg__(self) -> "Form":
        return self.map(lambda c: _scale(c, -1))

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, s) -> "Form":
        if isinstance(s, Form):
            return NotImplemented
        if isinstance(s, (int, float, np.floating)):
            return self.map(lambda c: _scale(c, float(s)))
        return self.map(lambda c: _mul(c, s))

    __rmul__ = __mul__

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def __repr__(self) -> str:
        terms = []
        for idx, c in self.items():
            if _is_zero(c):
                continue
            name = "^".join(f"th{i + 1}" for i in idx) or "1"
            terms.append(f"{c}*{name}" if not isinstance(c, (Jet, ScalarField)) else f"<{type(c).__name__}>*{name}")
        return f"Form[{self.degree}](" + (" + ".join(terms) or "0") + ")"


def wedge(a: Form, b: Form) -> Form:
    """Exterior product; rejects results above degree 3."""
    if a.degree + b.degree > DIM:
        raise DegreeError(f"wedge of degrees {a.degree} and {b.degree} exceeds {DIM}")
    out: dict = {}
    for ia, ca in a.items():
        if _is_zero(ca):
            continue
        for ib, cb in b.items():
            if _is_zero(cb):
                continue
            sign, key = sort_sign(ia + ib)
            if sign:
                out[key] = _add(out.get(key, 0.0), _scale(_mul(ca, cb), sign))
    return Form(a.degree + b.degree, out)


@dataclass(frozen=True)
class FrameStructure:
    """Structure constants ``c[k, i, j]`` with ``[X_i, X_j] = c^k_ij X_k``.

    Coordinate coframes have all constants zero and allow non-constant
    coefficients in :func:`exterior_derivative`.
    """

    constants: np.ndarray
    kind: str = "lie_coframe"

    def __post_init__(self):
        c = np.asarray(self.constants, dtype=float)
        if c.shape != (DIM, DIM, DIM):
            raise ValueError("structure constants must have shape (3, 3, 3)")
        if not np.allclose(c, -np.swapaxes(c, 1, 2), rtol=0, atol=1e-14 * max(1.0, np.abs(c).max())):
            raise ValueError("structure constants must be antisymmetric in the lower indices")
        if self.kind not in ("lie_coframe", "coordinate_coframe"):
            raise ValueError(f"unknown frame kind {self.kind!r}")
        if self.kind == "coordinate_coframe" and np.any(c != 0):
            raise ValueError("a coordinate coframe has vanishing structure constants")
        object.__setattr__(self, "constants", c)

    @classmethod
    def coordinate(cls) -> "FrameStructure":
        return cls(np.zeros((DIM, DIM, DIM)), "coordinate_coframe")

    def d_basis(self, k: int) -> Form:
        """d theta^k = -1/2 c^k_ij theta^i ^ theta^j."""
        return Form(2, {(i, j): -self.constants[k, i, j] for i, j in BASES[2]})


def _d_monomial(idx: tuple[int, ...], frame: FrameStructure) -> Form:
    # Leibniz on theta^{i1} ^ ... ^ theta^{ik}
    out = Form.zero(len(idx) + 1)
    for pos, k in enumerate(idx):
        left = Form.basis(*idx[:pos])
        right = Form.basis(*idx[pos + 1:])
        term = wedge(wedge(left, frame.d_basis(k)), right)
        out = out + (term * (-1.0) ** pos)
    return out


def exterior_derivative(a: Form, frame: FrameStructure, point=None) -> Form:
    """Exterior derivative of ``a`` in the coframe described by ``frame``.

    ScalarField coefficients need ``point``; they are expanded into jets there
    and the result carries jets one order lower. Jet coefficients are
    differentiated directly. Non-constant coefficients are only supported on
    coordinate coframes.
    """
    if a.degree >= DIM:
        raise DegreeError("d of a 3-form vanishes on a 3-manifold; degree must be <= 2")
    coeffs = {}
    for idx, c in a.items():
        if isinstance(c, ScalarField):
            if c.is_constant:
                c = c._value
            elif point is None:
                raise ValueError("a chart point is required for evaluable coefficients")
            else:
                c = c.jet(point)
        coeffs[idx] = c
    out = Form.zero(a.degree + 1)
    for idx, c in coeffs.items():
        if _is_zero(c):
            continue
        if isinstance(c, Jet):
            if frame.kind != "coordinate_coframe":
                raise ValueError("non-constant coefficients need a coordinate coframe")
            for i in range(DIM):
                out = out + wedge(Form.basis(i, coeff=c.diff(i)), Form.basis(*idx))
        elif isinstance(c, np.ndarray) and frame.kind == "coordinate_coframe":
            raise ValueError("array coefficients carry no derivative data; use jets")
        if frame.kind == "lie_coframe":
            out = out + _d_monomial(idx, frame) * c
    return out


class MatrixForm:
    """A 3x3 matrix of forms of one degree, ``entries[i][j]`` holding the (i, j) entry."""

    __slots__ = ("degree", "entries", "skew")

    def __init__(self, entries, skew: bool = False, tol: float = 1e-12):
        entries = [list(row) for row in entries]
        if len(entries) != DIM or any(len(r) != DIM for r in entries):
            raise ValueError("a MatrixForm is 3x3")
        degrees = {e.degree for row in entries for e in row}
        if len(degrees) != 1:
            raise DegreeError(f"entries have mixed degrees {sorted(degrees)}")
        self.degree = degrees.pop()
        self.entries = entries
        self.skew = skew
        if skew:
            self._check_skew(tol)

    def _check_skew(self, tol: float) -> None:
        for i in range(DIM):
            for j in range(i, DIM):
                s = (self.entries[i][j] + self.entries[j][i]).evaluate()
                if s.support(tol * max(1.0, _scale_of(self.entries[i][j]))):
                    raise ValueError(f"entry ({i + 1},{j + 1}) breaks skew-symmetry")

    @classmethod
    def zero(cls, degree: int) -> "MatrixForm":
        return cls([[Form.zero(degree) for _ in range(DIM)] for _ in range(DIM)])

    @classmethod
    def from_array(cls, arr, degree: int, skew: bool = False) -> "MatrixForm":
        """From coefficients ``arr[i, j, b]`` over the degree's basis tuples."""
        arr = np.asarray(arr, dtype=float)
        basis = BASES[degree]
        return cls([[Form(degree, {idx: arr[i, j, b] for b, idx in enumerate(basis)})
                     for j in range(DIM)] for i in range(DIM)], skew=skew)

    def __getitem__(self, ij) -> Form:
        i, j = ij
        return self.entries[i][j]

    def map(self, fn) -> "MatrixForm":
        return MatrixForm([[fn(e) for e in row] for row in self.entries])

    def transpose(self) -> "MatrixForm":
        return MatrixForm([[self.entries[j][i] for j in range(DIM)] for i in range(DIM)], skew=False)

    @property
    def T(self) -> "MatrixForm":
        return self.transpose()

    def evaluate(self) -> "MatrixForm":
        return self.map(Form.evaluate)

    def to_array(self) -> np.ndarray:
        """Numeric coefficients, shape ``(3, 3, C(3, degree), ...)``."""
        return np.stack([np.stack([e.values() for e in row]) for row in self.entries])

    def support(self, tol: float = 0.0) -> list[list[set]]:
        return [[e.support(tol) for e in row] for row in self.entries]

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        return MatrixForm([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __neg__(self) -> "MatrixForm":
        return self.map(lambda e: -e)

    def __sub__(self, other: "MatrixForm") -> "MatrixForm":
        return self + (-other)

    def __mul__(self, s) -> "MatrixForm":
        return self.map(lambda e: e * s)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"MatrixForm(degree={self.degree}, skew={self.skew})"


def _scale_of(f: Form) -> float:
    try:
        v = f.evaluate().values()
    except TypeError:
        return 1.0
    return float(np.max(np.abs(v), initial=0.0))


def matrix_wedge(a: MatrixForm, b: MatrixForm) -> MatrixForm:
    """(A ^ B)_i^j = sum_p A_i^p ^ B_p^j."""
    if a.degree + b.degree > DIM:
        raise DegreeError(f"matrix wedge of degrees {a.degree} and {b.degree} exceeds {DIM}")
    rows = []
    for i in range(DIM):
        row = []
        for j in range(DIM):
            acc = Form.zero(a.degree + b.degree)
            for p in range(DIM):
                acc = acc + wedge(a.entries[i][p], b.entries[p][j])
            row.append(acc)
        rows.append(row)
    return MatrixForm(rows)


def trace(a: MatrixForm) -> Form:
    out = Form.zero(a.degree)
    for p in range(DIM):
        out = out + a.entries[p][p]
    return out


def lie_bracket_form(omega: MatrixForm) -> MatrixForm:
    """[omega, omega] = 2 omega ^ omega for a matrix of 1-forms."""
    if omega.degree != 1:
        raise DegreeError(f"the bracket is defined for 1-forms, got degree {omega.degree}")
    return matrix_wedge(omega, omega) * 2.0


def matrix_d(a: MatrixForm, frame: FrameStructure, point=None) -> MatrixForm:
    """Entrywise exterior derivative."""
    return a.map(lambda e: exterior_derivative(e, frame, point))


def curvature_from_connection(omega: MatrixForm, frame: FrameStructure, point=None) -> MatrixForm:
    """Omega = d omega - omega ^ omega, for the layout nabla X_i = omega_i^p X_p."""
    return matrix_d(omega, frame, point) - matrix_wedge(omega, omega)
