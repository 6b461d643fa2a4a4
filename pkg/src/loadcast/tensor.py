"""Float64 tensors with reverse-mode differentiation on a per-pass tape.

The forward API is a small set of free functions (`matmul`, `sigmoid`,
`concat`, ...) operating on `Tensor` values.  Tensors built from raw arrays
are constants; tensors created through `Tape.leaf` are watched, and every
operation touching a watched tensor is recorded so that `Tape.backward`
can accumulate gradients for all leaves in a single reverse sweep over the
recording order.  That fixed order makes repeated passes bit-identical.

A tape is meant to live for exactly one forward/backward pass and is
rebuilt from scratch for the next one.  Tensors themselves are safe to
share across threads as long as each thread records on its own tape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EvaluationError, TapeError

REL_ERROR_FLOOR = 1e-8


def _finite_or_raise(values):
    if not np.all(np.isfinite(values)):
        raise EvaluationError("non-finite values in tensor")


class Tensor:
    """A shape-tagged float64 array, optionally recorded on a tape."""

    __slots__ = ("values", "tape", "node")

    def __init__(self, values, tape=None, node=None):
        arr = np.asarray(values, dtype=np.float64)
        _finite_or_raise(arr)
        self.values = arr
        self.tape = tape
        self.node = node

    @property
    def shape(self):
        return self.values.shape

    def item(self):
        return float(self.values)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return hadamard(self, other)

    __rmul__ = __mul__

    def __repr__(self):
        tag = "const" if self.tape is None else f"node {self.node}"
        return f"Tensor({tag}, shape={self.shape})"


def as_tensor(values):
    """Wrap arrays, lists, or scalars as constant tensors; pass tensors through."""
    if isinstance(values, Tensor):
        return values
    return Tensor(values)


class _Node:
    __slots__ = ("parents", "rule")

    def __init__(self, parents, rule):
        self.parents = parents
        self.rule = rule


class Tape:
    """Ordered record of one forward pass, with a gradient buffer per node."""

    def __init__(self):
        self._nodes = []
        self._grads = None

    def __len__(self):
        return len(self._nodes)

    def leaf(self, values):
        """Register a watched input (typically a parameter) and return it."""
        arr = np.asarray(values, dtype=np.float64)
        _finite_or_raise(arr)
        return self._record(arr, (), None)

    def _record(self, values, parents, rule):
        node = len(self._nodes)
        ids = tuple(p.node for p in parents)
        self._nodes.append(_Node(ids, rule))
        return Tensor(values, tape=self, node=node)

    def backward(self, loss):
        """Accumulate d(loss)/d(node) for every node reachable from `loss`.

        The sweep walks nodes in reverse recording order, which is a reverse
        topological order by construction; accumulation order is therefore
        deterministic.
        """
        if loss.tape is not self:
            raise TapeError("loss is not recorded on this tape")
        if loss.values.shape != ():
            raise TapeError(f"loss must be scalar, got shape {loss.values.shape}")
        grads = [None] * len(self._nodes)
        grads[loss.node] = np.ones((), dtype=np.float64)
        for node_id in range(loss.node, -1, -1):
            g = grads[node_id]
            if g is None:
                continue
            node = self._nodes[node_id]
            if node.rule is None:
                continue
            for parent_id, parent_grad in zip(node.parents, node.rule(g)):
                if grads[parent_id] is None:
                    grads[parent_id] = parent_grad
                else:
                    grads[parent_id] = grads[parent_id] + parent_grad
        self._grads = grads

    def grad(self, tensor):
        """Gradient of the last `backward` loss with respect to `tensor`.

        Nodes the loss does not depend on get a zero gradient of matching
        shape.
        """
        if tensor.tape is not self:
            raise TapeError("tensor is not recorded on this tape")
        if self._grads is None:
            raise TapeError("backward has not been run on this tape")
        g = self._grads[tensor.node]
        if g is None:
            return np.zeros_like(tensor.values)
        return np.asarray(g, dtype=np.float64)


def backward(loss):
    """Run the reverse sweep for `loss` on the tape it was recorded on."""
    if loss.tape is None:
        raise TapeError("loss is a constant; nothing to differentiate")
    loss.tape.backward(loss)


def _emit(out_values, pairs):
    """Record `out_values` with one gradient closure per taped operand.

    `pairs` is a sequence of (tensor, grad_fn) where grad_fn(g) returns the
    gradient contribution for that operand.  If no operand is taped the
    result is a constant.
    """
    taped = [(t, fn) for t, fn in pairs if t.tape is not None]
    if not taped:
        return Tensor(out_values)
    tape = taped[0][0].tape
    for t, _fn in taped[1:]:
        if t.tape is not tape:
            raise TapeError("operands are recorded on different tapes")
    parents = tuple(t for t, _fn in taped)
    fns = tuple(fn for _t, fn in taped)

    def rule(g):
        return tuple(fn(g) for fn in fns)

    return tape._record(np.asarray(out_values, dtype=np.float64), parents, rule)


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a, b):
    """Matrix product with the standard reverse-mode rules.

    Supports 2-D @ 2-D, 2-D @ 1-D, 1-D @ 2-D and 1-D @ 1-D operands with
    matching inner extents; for C = A B the gradients are dA = G B^T and
    dB = A^T G (with the obvious vector specializations).
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.values.ndim not in (1, 2) or b.values.ndim not in (1, 2):
        raise DimensionError(
            f"matmul expects 1-D or 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"matmul inner extents differ: {a.shape} @ {b.shape}")
    av, bv = a.values, b.values
    out = av @ bv
    return _emit(out, [(a, lambda g: _matmul_grad_left(g, av, bv)),
                       (b, lambda g: _matmul_grad_right(g, av, bv))])


def _matmul_grad_left(g, av, bv):
    if av.ndim == 2 and bv.ndim == 2:
        return g @ bv.T
    if av.ndim == 2 and bv.ndim == 1:
        return np.outer(g, bv)
    if av.ndim == 1 and bv.ndim == 2:
        return bv @ g
    return g * bv


def _matmul_grad_right(g, av, bv):
    if av.ndim == 1 and bv.ndim == 2:
        return np.outer(av, g)
    if av.ndim == 1 and bv.ndim == 1:
        return g * av
    return av.T @ g


# ---------------------------------------------------------------------------
# elementwise operations
#
# The derivative of each nonlinearity lives in its own module-level helper so
# the verification suite can demonstrate that a corrupted rule is caught.


def _sigmoid_values(x):
    e = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def _sigmoid_grad(out, g):
    return g * out * (1.0 - out)


def _tanh_grad(out, g):
    return g * (1.0 - out * out)


def _relu_grad(x, g):
    # relu'(0) is taken as 0.
    return np.where(x > 0.0, g, 0.0)


def sigmoid(x):
    """Logistic function, computed without overflow for large magnitudes."""
    x = as_tensor(x)
    out = _sigmoid_values(x.values)
    return _emit(out, [(x, lambda g: _sigmoid_grad(out, g))])


def tanh(x):
    x = as_tensor(x)
    out = np.tanh(x.values)
    return _emit(out, [(x, lambda g: _tanh_grad(out, g))])


def relu(x):
    x = as_tensor(x)
    xv = x.values
    out = np.maximum(xv, 0.0)
    return _emit(out, [(x, lambda g: _relu_grad(xv, g))])


def _require_same_shape(op, a, b):
    if a.shape != b.shape:
        raise DimensionError(f"{op} operands differ in shape: {a.shape} vs {b.shape}")


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _require_same_shape("add", a, b)
    return _emit(a.values + b.values, [(a, lambda g: g), (b, lambda g: g)])


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _require_same_shape("sub", a, b)
    return _emit(a.values - b.values, [(a, lambda g: g), (b, lambda g: -g)])


def hadamard(a, b):
    """Elementwise product of same-shaped tensors."""
    a, b = as_tensor(a), as_tensor(b)
    _require_same_shape("hadamard", a, b)
    av, bv = a.values, b.values
    return _emit(av * bv, [(a, lambda g: g * bv), (b, lambda g: g * av)])


def scale(x, factor):
    """Multiply every entry by a plain Python scalar."""
    x = as_tensor(x)
    c = float(factor)
    return _emit(x.values * c, [(x, lambda g: g * c)])


# ---------------------------------------------------------------------------
# softmax, concatenation, reshaping, reduction


def softmax_values(v):
    """Shift-stabilized softmax of a plain 1-D array."""
    shifted = v - np.max(v)
    e = np.exp(shifted)
    return e / np.sum(e)


def _softmax_grad(out, g):
    return out * (g - np.dot(g, out))


def stable_softmax(v):
    """Softmax of a nonempty 1-D tensor, computed after subtracting max(v)."""
    v = as_tensor(v)
    if v.values.ndim != 1 or v.values.size == 0:
        raise DimensionError(f"softmax expects a nonempty 1-D tensor, got shape {v.shape}")
    out = softmax_values(v.values)
    return _emit(out, [(v, lambda g: _softmax_grad(out, g))])


def concat(parts, axis=0):
    """Concatenate tensors along `axis`; the gradient scatters back to parts."""
    parts = [as_tensor(p) for p in parts]
    if not parts:
        raise DimensionError("concat needs at least one part")
    ndim = parts[0].values.ndim
    for p in parts[1:]:
        if p.values.ndim != ndim:
            raise DimensionError(
                f"concat parts differ in rank: {parts[0].shape} vs {p.shape}")
    if not 0 <= axis < ndim:
        raise DimensionError(f"concat axis {axis} out of range for rank {ndim}")
    first = parts[0].shape
    for p in parts[1:]:
        for ax in range(ndim):
            if ax != axis and p.shape[ax] != first[ax]:
                raise DimensionError(
                    f"concat parts differ off-axis: {first} vs {p.shape}")
    out = np.concatenate([p.values for p in parts], axis=axis)
    offsets = list(np.cumsum([p.shape[axis] for p in parts])[:-1])
    pairs = []
    for index, p in enumerate(parts):
        def fn(g, index=index):
            return np.split(g, offsets, axis=axis)[index]
        pairs.append((p, fn))
    return _emit(out, pairs)


def reshape(x, shape):
    """Reinterpret the entries row-major under a new shape of equal size."""
    x = as_tensor(x)
    shape = tuple(int(s) for s in shape)
    if math.prod(shape) != x.values.size:
        raise DimensionError(f"cannot reshape {x.shape} to {shape}")
    orig = x.values.shape
    return _emit(x.values.reshape(shape), [(x, lambda g: g.reshape(orig))])


def total(x):
    """Sum of all entries as a scalar tensor."""
    x = as_tensor(x)
    shape = x.values.shape
    out = np.asarray(x.values.sum(), dtype=np.float64)
    return _emit(out, [(x, lambda g: np.full(shape, g))])


# ---------------------------------------------------------------------------
# gradient checking


@dataclass(frozen=True)
class GradCheckReport:
    """Comparison of reverse-mode gradients against central differences."""

    max_rel_error: float
    per_param: dict
    tolerance: float
    step: float

    @property
    def passed(self):
        return self.max_rel_error <= self.tolerance

    def __str__(self):
        verdict = "pass" if self.passed else "FAIL"
        return (f"gradient check {verdict}: max rel error {self.max_rel_error:.3e} "
                f"(tolerance {self.tolerance:.1e}, step {self.step:.1e})")


def check_gradients(program, params, h=1e-5, tolerance=1e-6):
    """Compare the tape's gradients of `program` with central differences.

    `program(tape, leaves)` must build and return a scalar loss tensor from
    `leaves`, a dict mapping parameter names to watched tensors; `params`
    maps the same names to arrays.  Each scalar is perturbed by +-h and the
    relative error is |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-8).  A program
    with no parameters passes vacuously.
    """
    if h <= 0.0:
        raise ValueError("finite-difference step must be positive")
    tape = Tape()
    leaves = {name: tape.leaf(arr) for name, arr in params.items()}
    loss = program(tape, leaves)
    if loss.values.shape != ():
        raise TapeError(f"program returned a non-scalar loss of shape {loss.values.shape}")
    if not leaves:
        # Nothing to differentiate; the check passes vacuously.
        return GradCheckReport(max_rel_error=0.0, per_param={}, tolerance=tolerance,
                               step=h)
    tape.backward(loss)
    analytic = {name: tape.grad(t) for name, t in leaves.items()}

    work = {name: np.array(arr, dtype=np.float64) for name, arr in params.items()}

    def loss_at():
        probe = Tape()
        out = program(probe, {name: probe.leaf(arr) for name, arr in work.items()})
        value = float(out.values)
        if not math.isfinite(value):
            raise EvaluationError("non-finite loss at a perturbed point")
        return value

    per_param = {}
    worst = 0.0
    for name, arr in work.items():
        flat = arr.reshape(-1)
        ad_flat = analytic[name].reshape(-1)
        param_worst = 0.0
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + h
            f_plus = loss_at()
            flat[i] = saved - h
            f_minus = loss_at()
            flat[i] = saved
            fd = (f_plus - f_minus) / (2.0 * h)
            rel = abs(ad_flat[i] - fd) / max(abs(ad_flat[i]), abs(fd), REL_ERROR_FLOOR)
            if rel > param_worst:
                param_worst = rel
        per_param[name] = param_worst
        if param_worst > worst:
            worst = param_worst
    return GradCheckReport(worst, per_param, tolerance, h)
