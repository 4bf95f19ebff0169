import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dapinn.augmentation import (augment, augmented_dim, block_pairs,
                                 composite_derivatives, default_mask, parse_scheme)
from dapinn.autodiff import lift_input
from dapinn.errors import ConfigError, UsageError
from dapinn.expansions import EXPANSIONS, expanded_residual_equivalence, expansion_deviation
from dapinn.network import MLPArchitecture, forward, init_glorot
from dapinn.verify import composite_derivative_case


def test_replica_example():
    a = augment(parse_scheme("replica"), [0.7])
    assert a.tau.tolist() == [0.7, 0.7]
    assert a.jac.tolist() == [[1.0], [1.0]]
    assert np.all(a.second == 0)


def test_power2_example():
    a = augment(parse_scheme("power2"), [0.5])
    assert a.tau.tolist() == [0.5, 0.25]
    assert a.jac.tolist() == [[1.0], [1.0]]
    assert a.second.tolist() == [[0.0], [2.0]]


def test_fourier_example():
    a = augment(parse_scheme("fourier:T=6.283185307179586,n=1"), [np.pi / 2])
    np.testing.assert_allclose(a.tau, [np.pi / 2, 1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(a.jac[:, 0], [1.0, 0.0, -1.0], atol=1e-15)
    np.testing.assert_allclose(a.second[:, 0], [0.0, -1.0, 0.0], atol=1e-15)


def test_power2_ordering_in_2d():
    a = augment(parse_scheme("power2"), [0.3, 0.6])
    np.testing.assert_allclose(a.tau, [0.3, 0.09, 0.6, 0.36])
    assert a.owner == (0, 0, 1, 1)


def test_identity_jacobian_is_identity():
    a = augment(parse_scheme("identity"), [[0.1, 0.2, 0.3]])
    assert np.array_equal(a.jac[0], np.eye(3))
    assert np.all(a.second == 0)


@pytest.mark.parametrize("text", ["fourier:T=0", "fourier:T=-1,n=2", "fourier:n=0", "power4",
                                  "fourier:q=1", "spline"])
def test_bad_schemes_rejected(text):
    with pytest.raises(ConfigError):
        parse_scheme(text)


def test_fourier_without_period_rejected_at_augment():
    with pytest.raises(ConfigError):
        augment(parse_scheme("fourier"), [0.1])


def test_scheme_names_round_trip():
    for text in ["identity", "replica", "power2", "power3", "fourier:T=2.0,n=3"]:
        s = parse_scheme(text)
        assert parse_scheme(s.name) == s


@settings(max_examples=60, deadline=None)
@given(
    text=st.sampled_from(["identity", "replica", "power2", "power3", "fourier:T=2.0,n=1",
                          "fourier:T=1.5,n=3"]),
    mask=st.lists(st.booleans(), min_size=1, max_size=3),
)
def test_augmented_dim_matches_tau_length(text, mask):
    scheme = parse_scheme(text).with_defaults(mask=mask)
    d = len(mask)
    a = augment(scheme, np.zeros((2, d)) + 0.3)
    assert a.tau.shape == (2, augmented_dim(scheme, d))
    k = scheme.images()
    assert augmented_dim(scheme, d) == sum(k if m else 1 for m in mask)


def test_augmented_dim_formulas():
    assert augmented_dim(parse_scheme("identity"), 3) == 3
    assert augmented_dim(parse_scheme("replica"), 2) == 4
    assert augmented_dim(parse_scheme("power3"), 2) == 6
    assert augmented_dim(parse_scheme("fourier:T=1,n=2"), 2) == 10


def test_default_mask_leaves_time_alone():
    assert default_mask(1, True) == (True, False)
    scheme = parse_scheme("power3").with_defaults(mask=default_mask(1, True))
    a = augment(scheme, [0.5, 0.2])
    np.testing.assert_allclose(a.tau, [0.5, 0.25, 0.125, 0.2])


def test_cross_coordinate_second_derivatives_vanish():
    a = augment(parse_scheme("fourier:T=2,n=2"), np.random.default_rng(0).uniform(size=(4, 2)))
    for i, k in enumerate(a.owner):
        other = 1 - k
        assert np.all(a.jac[:, i, other] == 0) and np.all(a.second[:, i, other] == 0)


def test_mask_length_checked():
    with pytest.raises(UsageError):
        augment(parse_scheme("power2").with_defaults(mask=(True,)), [[0.1, 0.2]])


def test_replica_product_second_derivative():
    # N(tau1, tau2) = tau1 * tau2 on tau = (x, x): u = x^2, u_xx = N11 + 2 N12 + N22 = 2
    from dapinn.augmentation import chain_rule_coefficients
    from dapinn.network import ChannelLayout

    scheme = parse_scheme("replica")
    x = np.array([[0.37], [-1.2]])
    aug = augment(scheme, x)
    layout = ChannelLayout(2)
    t1 = lift_input(aug.tau[:, 0], 0, 2)
    t2 = lift_input(aug.tau[:, 1], 1, 2)
    N = t1 * t2
    y = np.stack([N.value.value, *[f.value for f in N.first],
                  *[N.second[p].value for p in layout.pairs]])
    M = chain_rule_coefficients(aug, layout)
    u_xx = np.einsum("cb,cb->b", y, M[:, :, 2])
    np.testing.assert_allclose(u_xx, [2.0, 2.0], atol=1e-15)
    assert N.d2(0, 1).value.tolist() == [1.0, 1.0]


def test_power2_tau2_network_second_derivative():
    # N(tau1, tau2) = tau2: only the 2 dN/dtau2 term survives
    from dapinn.augmentation import chain_rule_coefficients
    from dapinn.network import ChannelLayout

    aug = augment(parse_scheme("power2"), np.array([[0.4]]))
    layout = ChannelLayout(2)
    t2 = lift_input(aug.tau[:, 1], 1, 2)
    y = np.stack([t2.value.value, *[f.value for f in t2.first],
                  *[t2.second[p].value for p in layout.pairs]])
    u_xx = np.einsum("cb,cb->b", y, chain_rule_coefficients(aug, layout)[:, :, 2])
    assert u_xx.tolist() == [2.0]


@pytest.mark.parametrize("text", ["power3", "fourier:T=2,n=2"])
def test_composite_matches_finite_differences_random(text):
    rng = np.random.default_rng(42)
    worst = max(composite_derivative_case(rng, text) for _ in range(40))
    assert worst <= 1e-4


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_identity_coincides_with_direct_differentiation(seed):
    rng = np.random.default_rng(seed)
    arch = MLPArchitecture(2, (6, 5), 1)
    params = init_glorot(arch, seed)
    x = rng.uniform(-1, 1, (5, 2))
    cd = composite_derivatives(parse_scheme("identity"), arch, params, x)
    (u,) = forward(arch, params, [lift_input(x[:, k], k, 2) for k in range(2)])
    np.testing.assert_allclose(cd.u.value, u.value.value, rtol=0, atol=1e-15)
    for k in range(2):
        np.testing.assert_allclose(cd.du(k).value, u.first[k].value, rtol=0, atol=1e-14)
        np.testing.assert_allclose(cd.d2u(k).value, u.d2(k, k).value, rtol=0, atol=1e-14)


def test_block_pairs_equal_all_pairs():
    rng = np.random.default_rng(1)
    scheme = parse_scheme("power3")
    arch = MLPArchitecture(6, (5,), 1)
    params = init_glorot(arch, 2)
    x = rng.uniform(-1, 1, (4, 2))
    a = composite_derivatives(scheme, arch, params, x, pairs="block")
    b = composite_derivatives(scheme, arch, params, x, pairs="all")
    np.testing.assert_allclose(a.second.value, b.second.value, rtol=0, atol=1e-14)
    assert block_pairs((0, 0, 1)) == ((0, 0), (0, 1), (1, 1), (2, 2))


def test_input_width_mismatch():
    arch = MLPArchitecture(1, (4,), 1)
    with pytest.raises(UsageError):
        composite_derivatives(parse_scheme("power2"), arch, init_glorot(arch, 0), [[0.1]])


@pytest.mark.parametrize("eid", sorted(EXPANSIONS))
def test_expansion_equivalence(eid):
    assert expanded_residual_equivalence(eid, n_cases=100, seed=3) <= 1e-10


def test_expansion_check_detects_wrong_coefficient():
    # perturbing one printed coefficient must show up as a large deviation
    from dapinn import expansions

    exp = EXPANSIONS["power2-1d"]
    original = exp.kernel

    def wrong(tau, N):
        n, h = expansions._accessors(N)
        return h(1, 1) + 3 * tau[:, 0] * h(1, 2) + 4 * tau[:, 1] * h(2, 2) + 2 * n(2)

    arch = MLPArchitecture(2, (6,), 1)
    params = init_glorot(arch, 0)
    params.flat += 0.3
    object.__setattr__(exp, "kernel", wrong)
    try:
        dev = expansion_deviation("power2-1d", arch, params, np.array([[0.6], [0.8]]))
    finally:
        object.__setattr__(exp, "kernel", original)
    assert dev.max() > 1e-3


def test_unknown_expansion_id():
    with pytest.raises(UsageError):
        expanded_residual_equivalence("eq99")


def test_composite_is_parameter_differentiable():
    from dapinn import autodiff as ad

    arch = MLPArchitecture(2, (4,), 1)
    params = init_glorot(arch, 0)
    rec = ad.Recording()
    w = params.bind(rec)
    cd = composite_derivatives(parse_scheme("power2"), arch, w, np.array([[0.3], [0.5]]))
    g = ad.parameter_gradient(rec, ad.reduce_sum(cd.second))
    assert g.shape == params.flat.shape and np.any(g != 0)
