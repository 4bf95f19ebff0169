import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dapinn import autodiff as ad
from dapinn.autodiff import HyperDual, Recording, elementary, lift_input, parameter_gradient
from dapinn.errors import ConfigError, NumericOverflowError, UsageError
from dapinn.network import MLPArchitecture, evaluate_plain, forward, init_glorot

reals = st.floats(-2.0, 2.0, allow_nan=False)


def test_lift_input_examples():
    x = lift_input(3.0, 0, 2)
    assert x.value.value == 3.0
    assert x.gradient().tolist() == [1.0, 0.0]
    assert np.all(x.hessian() == 0.0)
    y = lift_input(0.0, 1, 2)
    assert y.gradient().tolist() == [0.0, 1.0]


def test_lift_input_out_of_range():
    with pytest.raises(ConfigError):
        lift_input(1.0, 2, 2)
    with pytest.raises(ConfigError):
        lift_input(1.0, -1, 3)


def test_elementary_examples():
    x = lift_input(3.0, 0, 1)
    sq = elementary("mul", x, x)
    assert (sq.value.value, sq.first[0].value, sq.d2(0, 0).value) == (9.0, 6.0, 2.0)
    t = elementary("tanh", lift_input(0.0, 0, 1))
    assert (t.value.value, t.first[0].value, t.d2(0, 0).value) == (0.0, 1.0, 0.0)
    s = elementary("sin", lift_input(np.pi / 2, 0, 1))
    assert s.value.value == pytest.approx(1.0, abs=1e-15)
    assert s.first[0].value == pytest.approx(0.0, abs=1e-15)
    assert s.d2(0, 0).value == pytest.approx(-1.0, abs=1e-15)


def test_unknown_elementary_op():
    with pytest.raises(UsageError):
        elementary("log", lift_input(1.0, 0, 1))


def test_division_by_zero_is_numeric_error():
    x = lift_input(0.0, 0, 1)
    with pytest.raises(NumericOverflowError):
        elementary("div", 1.0, x)
    with pytest.raises(NumericOverflowError):
        ad.div(1.0, ad.constant(0.0))


def test_overflow_names_op():
    with pytest.raises(NumericOverflowError, match="exp"):
        elementary("exp", lift_input(1000.0, 0, 1))


def _hd_fd(fn, x, y, h1=1e-5, h2=1e-4):
    """Central differences of a two-argument scalar function."""
    f = fn
    g = np.array([(f(x + h1, y) - f(x - h1, y)) / (2 * h1),
                  (f(x, y + h1) - f(x, y - h1)) / (2 * h1)])
    hxx = (f(x + h2, y) - 2 * f(x, y) + f(x - h2, y)) / h2**2
    hyy = (f(x, y + h2) - 2 * f(x, y) + f(x, y - h2)) / h2**2
    hxy = (f(x + h2, y + h2) - f(x + h2, y - h2) - f(x - h2, y + h2) + f(x - h2, y - h2)) / (4 * h2**2)
    return g, np.array([[hxx, hxy], [hxy, hyy]])


OPS = {
    "add": (lambda a, b: a + b, lambda a, b: a + b),
    "sub": (lambda a, b: a - b, lambda a, b: a - b),
    "mul": (lambda a, b: a * b, lambda a, b: a * b),
    "div": (lambda a, b: a / (b + 3.0), lambda a, b: a / (b + 3.0)),
    "tanh": (lambda a, b: (a * b).tanh(), lambda a, b: np.tanh(a * b)),
    "sin": (lambda a, b: (a + 2 * b).sin(), lambda a, b: np.sin(a + 2 * b)),
    "cos": (lambda a, b: (a * b).cos(), lambda a, b: np.cos(a * b)),
    "exp": (lambda a, b: (a - b).exp(), lambda a, b: np.exp(a - b)),
    "pow3": (lambda a, b: (a + b) ** 3, lambda a, b: (a + b) ** 3),
}


@pytest.mark.parametrize("name", sorted(OPS))
@settings(max_examples=120, deadline=None)
@given(x=reals, y=reals)
def test_elementary_matches_finite_differences(name, x, y):
    hd_fn, np_fn = OPS[name]
    out = hd_fn(lift_input(x, 0, 2), lift_input(y, 1, 2))
    g_fd, h_fd = _hd_fd(np_fn, x, y)
    g, h = out.gradient(), out.hessian()
    scale_g = max(1.0, np.abs(g_fd).max())
    scale_h = max(1.0, np.abs(h_fd).max())
    assert np.abs(g - g_fd).max() / scale_g <= 1e-6
    assert np.abs(h - h_fd).max() / scale_h <= 1e-4


@settings(max_examples=60, deadline=None)
@given(x=reals, y=reals, seed=st.integers(0, 2**16))
def test_second_derivatives_exactly_symmetric(x, y, seed):
    rng = np.random.default_rng(seed)
    a, b = lift_input(x, 0, 2), lift_input(y, 1, 2)
    out = a
    for _ in range(6):
        op = rng.integers(4)
        out = [out * b, (out + a).tanh(), out.sin() * a, (out - b).cos()][op]
    h = out.hessian()
    assert np.array_equal(h, h.T)


@settings(max_examples=60, deadline=None)
@given(x=reals, a=reals, b=reals)
def test_linearity(x, a, b):
    u = lift_input(x, 0, 1)
    f, g = u.sin(), u * u
    lin = a * f + b * g
    assert lin.first[0].value == pytest.approx(a * f.first[0].value + b * g.first[0].value, abs=1e-14)
    assert lin.d2(0, 0).value == pytest.approx(a * f.d2(0, 0).value + b * g.d2(0, 0).value, abs=1e-14)


def test_constant_behaves_as_constant():
    c = HyperDual.constant(2.5, 2)
    x = lift_input(1.2, 0, 2)
    out = (x * c + c).tanh()
    ref = (x * 2.5 + 2.5).tanh()
    assert np.array_equal(out.gradient(), ref.gradient())
    assert np.array_equal(out.hessian(), ref.hessian())


def test_mismatched_directions_rejected():
    with pytest.raises(UsageError):
        lift_input(1.0, 0, 1) + lift_input(1.0, 0, 2)


def test_pow_limits():
    x = lift_input(2.0, 0, 1)
    assert (x ** 0).value.value == 1.0
    assert (x ** 4).first[0].value == 32.0
    with pytest.raises(UsageError):
        x ** 5


# -- reverse mode -------------------------------------------------------------------


def test_gradient_of_square():
    rec = Recording()
    th = rec.parameter(3.0)
    assert parameter_gradient(rec, th * th).tolist() == [6.0]


def test_gradient_through_input_derivative():
    # loss = (d(theta x^2)/dx at x=1)^2 = (2 theta)^2
    rec = Recording()
    th = rec.parameter(1.0)
    x = lift_input(1.0, 0, 1)
    u = x * x * th
    loss = u.first[0] * u.first[0]
    assert parameter_gradient(rec, loss).tolist() == [8.0]


def test_foreign_loss_rejected():
    r1, r2 = Recording(), Recording()
    a = r1.parameter(1.0)
    r2.parameter(2.0)
    with pytest.raises(UsageError):
        parameter_gradient(r2, a * a)


def test_non_scalar_loss_rejected():
    rec = Recording()
    a = rec.parameter(np.ones(3))
    with pytest.raises(UsageError):
        parameter_gradient(rec, a * 2.0)


def test_unreached_parameter_gets_zero():
    rec = Recording()
    a = rec.parameter(2.0)
    rec.parameter(np.ones(2))
    assert parameter_gradient(rec, a * a).tolist() == [4.0, 0.0, 0.0]


def test_constants_not_recorded():
    rec = Recording()
    a = rec.parameter(1.0)
    c = ad.constant(2.0) * ad.constant(3.0)
    out = a * c
    assert len(rec) == 2 and out.index == 1


def test_replay_is_bit_identical():
    rng = np.random.default_rng(3)
    arch = MLPArchitecture(2, (5, 4), 1)
    params = init_glorot(arch, 1)
    rec = Recording()
    w = params.bind(rec)
    ins = [lift_input(rng.uniform(size=6), k, 2) for k in range(2)]
    (u,) = forward(arch, w, ins)
    loss = ad.reduce_mean(ad.square(u.d2(0, 0) + u.first[1]))
    replayed = rec.replay()
    for node, val in zip(rec.nodes, replayed):
        assert np.array_equal(node.value, val)
    assert loss.index == len(rec) - 1


def test_backward_visits_each_node_once():
    calls = []
    rec = Recording()
    a = rec.parameter(1.5)

    def fwd(x):
        return 2 * x

    def vjp(g, out, x):
        calls.append(1)
        return (2 * g,)

    b = ad.apply_op("twice", fwd, vjp, a)
    loss = b * b + b  # b used twice
    parameter_gradient(rec, loss)
    assert len(calls) == 1


def _net_loss_grad(arch, flat, x):
    from dapinn.network import ParameterSet

    rec = Recording()
    w = ParameterSet(arch, flat).bind(rec)
    (u,) = forward(arch, w, [lift_input(x, 0, 1)])
    loss = u.d2(0, 0) * u.d2(0, 0)
    return float(loss.value), parameter_gradient(rec, loss)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**16), x=reals)
def test_uxx_loss_gradient_matches_finite_differences(seed, x):
    arch = MLPArchitecture(1, (6,), 1)
    params = init_glorot(arch, seed)
    params.flat += 0.1 * np.random.default_rng(seed).standard_normal(params.flat.size)
    _, g = _net_loss_grad(arch, params.flat, x)
    h = 1e-4
    fd = np.empty_like(g)
    for k in range(g.size):
        e = np.zeros_like(g)
        e[k] = h
        fd[k] = (_net_loss_grad(arch, params.flat + e, x)[0]
                 - _net_loss_grad(arch, params.flat - e, x)[0]) / (2 * h)
    assert np.linalg.norm(g - fd) / np.linalg.norm(fd) <= 1e-5


def test_value_loss_gradient_matches_classic_backprop():
    rng = np.random.default_rng(0)
    arch = MLPArchitecture(2, (7,), 1)
    params = init_glorot(arch, 4)
    x = rng.uniform(-1, 1, (5, 2))
    y = rng.uniform(-1, 1, 5)
    rec = Recording()
    w = params.bind(rec)
    ins = [lift_input(x[:, k], k, 2) for k in range(2)]
    (u,) = forward(arch, w, ins)
    loss = ad.reduce_mean(ad.square(u.value - y))
    g = parameter_gradient(rec, loss)

    # hand-written backprop on the value channel only
    (W1, b1), (W2, b2) = params.layers()
    a1 = x @ W1.T + b1
    h1 = np.tanh(a1)
    out = h1 @ W2.T + b2
    dout = 2 * (out[:, 0] - y)[:, None] / len(y)
    gW2 = dout.T @ h1
    gb2 = dout.sum(0)
    da1 = (dout @ W2) * (1 - h1**2)
    gW1 = da1.T @ x
    gb1 = da1.sum(0)
    classic = np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])
    assert np.max(np.abs(g - classic)) <= 1e-12 * np.max(np.abs(classic))


def test_network_value_matches_plain_evaluation():
    arch = MLPArchitecture(3, (8, 8), 1)
    params = init_glorot(arch, 11)
    x = np.random.default_rng(2).uniform(-1, 1, (20, 3))
    ins = [lift_input(x[:, k], k, 3) for k in range(3)]
    (u,) = forward(arch, params, ins)
    assert np.max(np.abs(u.value.value - evaluate_plain(arch, params, x)[:, 0])) <= 1e-15


@pytest.mark.parametrize("op", ["getitem", "stack", "concat", "contract", "matmul"])
def test_structural_op_gradients(op):
    rng = np.random.default_rng(5)
    base = rng.standard_normal((3, 4))
    coeff = rng.standard_normal((3, 4, 2))

    def build(v, rec=None):
        a = rec.parameter(v) if rec is not None else ad.constant(v)
        if op == "getitem":
            out = a[[0, 2, 0], 1:3]
        elif op == "stack":
            out = ad.stack([a, a * 2.0], axis=1)
        elif op == "concat":
            out = ad.concat([a, ad.sin(a)], axis=0)
        elif op == "contract":
            out = ad.contract(ad.reshape(a, (3, 4, 1)), coeff, axis=0)
        else:
            out = ad.matmul(a, ad.constant(coeff[:, :, 0].T))
        return ad.reduce_sum(ad.square(out) * 0.5 + out)

    rec = Recording()
    g = parameter_gradient(rec, build(base, rec)).reshape(base.shape)
    h = 1e-6
    fd = np.empty_like(base)
    for idx in np.ndindex(base.shape):
        e = np.zeros_like(base)
        e[idx] = h
        fd[idx] = (build(base + e).value - build(base - e).value) / (2 * h)
    assert np.allclose(g, fd, rtol=1e-6, atol=1e-7)
