"""Array-valued reverse-mode tape plus hyper-dual numbers built on top of it.

Two layers live here:

* :class:`Node` / :class:`Recording` -- a Wengert list over numpy arrays.
  Every operation whose inputs touch a recording is appended to it, so the
  append order is already a topological order and the backward sweep is a
  single reverse pass. Operations on constants only are evaluated eagerly and
  never recorded.
* :class:`HyperDual` -- a value together with its first and second
  derivatives along a fixed set of input directions. Each component is a
  :class:`Node`, so the whole hyper-dual computation is itself recorded and
  parameter gradients of losses built from input derivatives come out exact.

Components may be 0-d or batched arrays; a batch of collocation points is
just a HyperDual whose components have shape ``(B,)``.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, NumericOverflowError, UsageError

Array = np.ndarray


class Node:
    __slots__ = ("value", "rec", "index", "parents", "vjp", "fwd", "op")
    # make numpy defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, value, rec=None, parents=(), vjp=None, fwd=None, op="const"):
        self.value = value
        self.rec = rec
        self.index = -1
        self.parents = parents
        self.vjp = vjp
        self.fwd = fwd
        self.op = op

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def item(self) -> float:
        return float(self.value)

    def __repr__(self):
        tag = "param" if self.op == "param" else self.op
        return f"Node({tag}, shape={self.value.shape})"

    # arithmetic sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        return power(self, k)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def sum(self, axis=None):
        return reduce_sum(self, axis)

    def mean(self, axis=None):
        return reduce_mean(self, axis)


class Recording:
    """Append-only tape of operations on tracked parameters."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.param_slots: list[Node] = []

    def __len__(self):
        return len(self.nodes)

    def _append(self, node: Node) -> Node:
        node.index = len(self.nodes)
        self.nodes.append(node)
        return node

    def parameter(self, value) -> Node:
        """Register a trainable array; its gradient is reported by :func:`parameter_gradient`."""
        arr = np.array(value, dtype=np.float64)
        node = Node(arr, self, op="param")
        self._append(node)
        self.param_slots.append(node)
        return node

    def replay(self) -> list[Array]:
        """Recompute every recorded node from its parents' recorded values."""
        out = []
        for node in self.nodes:
            if node.fwd is None:
                out.append(node.value)
            else:
                out.append(node.fwd(*[p.value for p in node.parents]))
        return out

    def backward(self, loss: Node) -> list[Array]:
        if loss.rec is not self or loss.index < 0 or self.nodes[loss.index] is not loss:
            raise UsageError("loss node was not produced within this recording")
        if loss.value.size != 1:
            raise UsageError(f"loss must be a scalar, got shape {loss.value.shape}")
        if not np.isfinite(loss.value).all():
            raise NumericOverflowError("backward", "loss is not finite")
        grads: list = [None] * (loss.index + 1)
        grads[loss.index] = np.ones_like(loss.value)
        nodes = self.nodes
        for i in range(loss.index, -1, -1):
            g = grads[i]
            if g is None:
                continue
            node = nodes[i]
            if node.vjp is None:
                continue
            pvals = [p.value for p in node.parents]
            pgrads = node.vjp(g, node.value, *pvals)
            for parent, pg in zip(node.parents, pgrads):
                if pg is None or parent.rec is not self:
                    continue
                pg = _unbroadcast(pg, parent.value.shape)
                j = parent.index
                if grads[j] is None:
                    grads[j] = pg
                else:
                    grads[j] = grads[j] + pg
        result = []
        for slot in self.param_slots:
            g = grads[slot.index] if slot.index <= loss.index else None
            result.append(np.zeros_like(slot.value) if g is None else g)
        return result


def parameter_gradient(recording: Recording, loss: Node) -> Array:
    """Gradient of ``loss`` w.r.t. every tracked parameter, flattened in slot order."""
    if isinstance(loss, HyperDual):
        loss = loss.value
    grads = recording.backward(loss)
    if not grads:
        return np.zeros(0)
    return np.concatenate([g.ravel() for g in grads])


# ---------------------------------------------------------------------------
# primitive machinery

def as_node(x) -> Node:
    if isinstance(x, Node):
        return x
    if isinstance(x, HyperDual):
        raise UsageError("HyperDual passed where a plain Node was expected")
    return Node(np.asarray(x, dtype=np.float64))


def constant(x) -> Node:
    return Node(np.asarray(x, dtype=np.float64))


def _unbroadcast(g: Array, shape) -> Array:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g.reshape(shape)


def _common_rec(nodes: Sequence[Node]):
    rec = None
    for n in nodes:
        if n.rec is not None:
            if rec is None:
                rec = n.rec
            elif n.rec is not rec:
                raise UsageError("operands belong to different recordings")
    return rec


def apply_op(op: str, fwd: Callable, vjp: Callable, *args) -> Node:
    """Evaluate ``fwd`` on the argument values and record it if any argument is tracked.

    ``vjp(g, out, *xs)`` must return one gradient (or None) per argument.
    """
    nodes = [as_node(a) for a in args]
    with np.errstate(all="ignore"):  # finiteness is checked explicitly below
        value = fwd(*[n.value for n in nodes])
    if not np.isfinite(value).all():
        raise NumericOverflowError(op)
    rec = _common_rec(nodes)
    if rec is None:
        return Node(value, op=op)
    node = Node(value, rec, tuple(nodes), vjp, fwd, op)
    return rec._append(node)


# ---------------------------------------------------------------------------
# elementwise / reduction primitives

def _f_add(a, b):
    return a + b


def _v_add(g, out, a, b):
    return g, g


def add(a, b) -> Node:
    return apply_op("add", _f_add, _v_add, a, b)


def _f_sub(a, b):
    return a - b


def _v_sub(g, out, a, b):
    return g, -g


def sub(a, b) -> Node:
    return apply_op("sub", _f_sub, _v_sub, a, b)


def _f_mul(a, b):
    return a * b


def _v_mul(g, out, a, b):
    return g * b, g * a


def mul(a, b) -> Node:
    return apply_op("mul", _f_mul, _v_mul, a, b)


def _f_div(a, b):
    return a / b


def _v_div(g, out, a, b):
    return g / b, -g * out / b


def div(a, b) -> Node:
    b = as_node(b)
    if np.any(b.value == 0.0):
        raise NumericOverflowError("div", "zero denominator")
    return apply_op("div", _f_div, _v_div, a, b)


def _f_neg(a):
    return -a


def _v_neg(g, out, a):
    return (-g,)


def neg(a) -> Node:
    return apply_op("neg", _f_neg, _v_neg, a)


def _v_tanh(g, out, a):
    return (g * (1.0 - out * out),)


def tanh(a) -> Node:
    return apply_op("tanh", np.tanh, _v_tanh, a)


def _v_sin(g, out, a):
    return (g * np.cos(a),)


def sin(a) -> Node:
    return apply_op("sin", np.sin, _v_sin, a)


def _v_cos(g, out, a):
    return (-g * np.sin(a),)


def cos(a) -> Node:
    return apply_op("cos", np.cos, _v_cos, a)


def _v_exp(g, out, a):
    return (g * out,)


def exp(a) -> Node:
    return apply_op("exp", np.exp, _v_exp, a)


def _f_square(a):
    return a * a


def _v_square(g, out, a):
    return (2.0 * g * a,)


def square(a) -> Node:
    return apply_op("square", _f_square, _v_square, a)


def power(a, k: int) -> Node:
    """Integer power 0..4 by repeated multiplication."""
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= 4:
        raise UsageError(f"only integer exponents 0..4 are supported, got {k!r}")
    a = as_node(a)
    if k == 0:
        return constant(np.ones_like(a.value))
    out = a
    for _ in range(k - 1):
        out = mul(out, a)
    return out


def matmul(a, b) -> Node:
    def fwd(x, y):
        return x @ y

    def vjp(g, out, x, y):
        gx = g @ np.swapaxes(y, -1, -2) if y.ndim > 1 else np.multiply.outer(g, y)
        gy = np.swapaxes(x, -1, -2) @ g if x.ndim > 1 else np.multiply.outer(x, g)
        return gx, gy

    return apply_op("matmul", fwd, vjp, a, b)


def reduce_sum(a, axis=None) -> Node:
    a = as_node(a)
    shape = a.value.shape

    def fwd(x):
        return np.asarray(x.sum(axis=axis))

    def vjp(g, out, x):
        if axis is None:
            return (np.broadcast_to(g, shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return apply_op("sum", fwd, vjp, a)


def reduce_mean(a, axis=None) -> Node:
    a = as_node(a)
    n = a.value.size if axis is None else a.value.shape[axis]
    if n == 0:
        raise UsageError("mean over an empty axis")
    return mul(reduce_sum(a, axis), 1.0 / n)


def getitem(a, idx) -> Node:
    a = as_node(a)
    shape = a.value.shape
    basic = _is_basic_index(idx)

    def fwd(x):
        return np.asarray(x[idx])

    def vjp(g, out, x):
        full = np.zeros(shape)
        if basic:
            full[idx] = g
        else:
            np.add.at(full, idx, g)
        return (full,)

    return apply_op("getitem", fwd, vjp, a)


def _is_basic_index(idx) -> bool:
    items = idx if isinstance(idx, tuple) else (idx,)
    return all(isinstance(i, (slice, int, np.integer)) or i is None or i is Ellipsis for i in items)


def reshape(a, shape) -> Node:
    a = as_node(a)
    old = a.value.shape

    def fwd(x):
        return x.reshape(shape)

    def vjp(g, out, x):
        return (g.reshape(old),)

    return apply_op("reshape", fwd, vjp, a)


def stack(items: Sequence, axis: int = 0) -> Node:
    nodes = [as_node(x) for x in items]

    def fwd(*xs):
        return np.stack(xs, axis=axis)

    def vjp(g, out, *xs):
        return tuple(np.take(g, i, axis=axis) for i in range(len(xs)))

    return apply_op("stack", fwd, vjp, *nodes)


def concat(items: Sequence, axis: int = 0) -> Node:
    nodes = [as_node(x) for x in items]
    sizes = [n.value.shape[axis] for n in nodes]
    cuts = np.cumsum(sizes)[:-1]

    def fwd(*xs):
        return np.concatenate(xs, axis=axis)

    def vjp(g, out, *xs):
        return tuple(np.split(g, cuts, axis=axis))

    return apply_op("concat", fwd, vjp, *nodes)


def contract(a, coeff, axis: int = 0) -> Node:
    """``sum(a * coeff, axis)`` with ``coeff`` a constant array, as a single op."""
    c = np.asarray(coeff, dtype=np.float64)

    def fwd(x):
        return np.asarray((x * c).sum(axis=axis))

    a = as_node(a)
    shape = np.broadcast_shapes(a.value.shape, c.shape)

    def vjp(g, out, x):
        return (np.broadcast_to(np.expand_dims(g, axis), shape) * c,)

    return apply_op("contract", fwd, vjp, a)


# ---------------------------------------------------------------------------
# hyper-dual numbers


def all_pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n) for j in range(i, n))


class HyperDual:
    """Value with first and second derivatives along ``n`` input directions.

    ``second`` is keyed by ``(i, j)`` with ``i <= j``; :meth:`d2` looks up
    either order against the same node, so the Hessian block is symmetric by
    construction. ``pairs`` may be a subset of all pairs when only some
    mixed derivatives are needed; arithmetic then keeps the same subset.
    """

    __slots__ = ("value", "first", "second")
    __array_ufunc__ = None

    def __init__(self, value, first: Sequence, second: dict):
        self.value = as_node(value)
        self.first = tuple(as_node(f) for f in first)
        self.second = {k: as_node(v) for k, v in second.items()}

    @property
    def n(self) -> int:
        return len(self.first)

    @property
    def pairs(self):
        return tuple(self.second)

    def d2(self, i: int, j: int) -> Node:
        key = (i, j) if i <= j else (j, i)
        try:
            return self.second[key]
        except KeyError:
            raise UsageError(f"second derivative {key} is not tracked") from None

    def hessian(self) -> Array:
        """Dense symmetric matrix of second-derivative values (untracked entries NaN)."""
        shape = self.value.value.shape
        h = np.full((self.n, self.n) + shape, np.nan)
        for (i, j), node in self.second.items():
            h[i, j] = node.value
            h[j, i] = node.value
        return h

    def gradient(self) -> Array:
        return np.array([f.value for f in self.first])

    @classmethod
    def constant(cls, value, n: int, pairs=None) -> "HyperDual":
        v = as_node(value)
        zero = np.zeros_like(v.value)
        pairs = all_pairs(n) if pairs is None else pairs
        return cls(v, [zero] * n, {p: zero for p in pairs})

    def __repr__(self):
        return f"HyperDual(value={self.value.value!r}, n={self.n})"

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "HyperDual":
        if isinstance(other, HyperDual):
            if other.n != self.n or set(other.second) != set(self.second):
                raise UsageError("hyper-dual operands track different directions")
            return other
        return HyperDual.constant(other, self.n, self.pairs)

    def __add__(self, other):
        o = self._coerce(other)
        return HyperDual(
            add(self.value, o.value),
            [add(a, b) for a, b in zip(self.first, o.first)],
            {k: add(self.second[k], o.second[k]) for k in self.second},
        )

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return HyperDual(
            sub(self.value, o.value),
            [sub(a, b) for a, b in zip(self.first, o.first)],
            {k: sub(self.second[k], o.second[k]) for k in self.second},
        )

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return HyperDual(
            neg(self.value),
            [neg(a) for a in self.first],
            {k: neg(v) for k, v in self.second.items()},
        )

    def __mul__(self, other):
        if not isinstance(other, HyperDual):
            c = as_node(other)
            return HyperDual(
                mul(self.value, c),
                [mul(a, c) for a in self.first],
                {k: mul(v, c) for k, v in self.second.items()},
            )
        o = self._coerce(other)
        a, b = self, o
        second = {}
        for (i, j) in a.second:
            second[(i, j)] = add(
                add(mul(a.second[(i, j)], b.value), mul(a.value, b.second[(i, j)])),
                add(mul(a.first[i], b.first[j]), mul(a.first[j], b.first[i])),
            )
        return HyperDual(
            mul(a.value, b.value),
            [add(mul(fa, b.value), mul(a.value, fb)) for fa, fb in zip(a.first, b.first)],
            second,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, HyperDual):
            return self * div(1.0, as_node(other))
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or not 0 <= k <= 4:
            raise UsageError(f"only integer exponents 0..4 are supported, got {k!r}")
        if k == 0:
            return HyperDual.constant(np.ones_like(self.value.value), self.n, self.pairs)
        out = self
        for _ in range(k - 1):
            out = out * self
        return out

    def _unary(self, g0: Node, g1: Node, g2: Node) -> "HyperDual":
        # chain rule for a scalar map g: d(g∘a) = g'·da ; d²(g∘a) = g'·d²a + g''·da_i·da_j
        second = {}
        for (i, j), aij in self.second.items():
            second[(i, j)] = add(mul(g1, aij), mul(g2, mul(self.first[i], self.first[j])))
        return HyperDual(g0, [mul(g1, ai) for ai in self.first], second)

    def tanh(self):
        s = tanh(self.value)
        d1 = sub(1.0, mul(s, s))
        d2 = mul(-2.0, mul(s, d1))
        return self._unary(s, d1, d2)

    def sin(self):
        s = sin(self.value)
        return self._unary(s, cos(self.value), neg(s))

    def cos(self):
        c = cos(self.value)
        return self._unary(c, neg(sin(self.value)), neg(c))

    def exp(self):
        e = exp(self.value)
        return self._unary(e, e, e)

    def reciprocal(self):
        if np.any(self.value.value == 0.0):
            raise NumericOverflowError("div", "zero denominator")
        r = div(1.0, self.value)
        r2 = mul(r, r)
        return self._unary(r, neg(r2), mul(2.0, mul(r2, r)))


DifferentiableScalar = HyperDual


def lift_input(value, direction_index: int, n_directions: int) -> HyperDual:
    """Seed an input coordinate: first derivative ``e_k``, zero second derivatives."""
    if not 0 <= direction_index < n_directions:
        raise ConfigError(
            f"direction_index {direction_index} out of range for {n_directions} directions"
        )
    v = as_node(value)
    zero = np.zeros_like(v.value)
    one = np.ones_like(v.value)
    first = [one if k == direction_index else zero for k in range(n_directions)]
    return HyperDual(v, first, {p: zero for p in all_pairs(n_directions)})


def _hd_binary(fn):
    def op(a, b):
        if not isinstance(a, HyperDual):
            if not isinstance(b, HyperDual):
                raise UsageError("at least one operand must be a HyperDual")
            a = b._coerce(a)
        return fn(a, b)

    return op


_ELEMENTARY = {
    "add": _hd_binary(lambda a, b: a + b),
    "sub": _hd_binary(lambda a, b: a - b),
    "mul": _hd_binary(lambda a, b: a * b),
    "div": _hd_binary(lambda a, b: a / b),
    "tanh": lambda a: a.tanh(),
    "sin": lambda a: a.sin(),
    "cos": lambda a: a.cos(),
    "exp": lambda a: a.exp(),
    "pow": lambda a, k: a ** k,
}

ELEMENTARY_OPS = tuple(_ELEMENTARY)


def elementary(op: str, *args):
    """Apply one of :data:`ELEMENTARY_OPS` by name."""
    try:
        fn = _ELEMENTARY[op]
    except KeyError:
        raise UsageError(f"unknown elementary op {op!r}") from None
    return fn(*args)


def value_of(x) -> Array:
    if isinstance(x, HyperDual):
        return x.value.value
    if isinstance(x, Node):
        return x.value
    return np.asarray(x, dtype=np.float64)

