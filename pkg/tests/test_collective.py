import math

import numpy as np
import pytest

from phasedistill.collective import (ConditioningSpec, balanced_beamsplitter_transmittances,
                                     balanced_superposition_transmittances, build_interferometer,
                                     collective_variance_general, collective_variance_mc,
                                     collective_variance_x, conditional_variance_general,
                                     conditional_variance_x, dephased_variance_x, omega)
from phasedistill.fock import PhaseNoiseModel, SqueezedVacuumSpec
from phasedistill.phase_average import GAUSS_HERMITE, AccuracyError, IntegrationConfig

SV = SqueezedVacuumSpec(0.2, 2.0)


def superposition(N):
    return build_interferometer(balanced_superposition_transmittances(N))


def rot(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s], [s, c]])


def brute_conditional(phis, spec, angles, eta, sv):
    """Full 2N-mode covariance algebra: rotate inputs, interfere, rotate the
    measured modes, add detector loss, take the x block and condition."""
    N = spec.N
    sig = np.zeros((2 * N, 2 * N))
    for j, f in enumerate(phis):
        sig[2 * j:2 * j + 2, 2 * j:2 * j + 2] = rot(f) @ np.diag([sv.Vx, sv.Vp]) @ rot(f).T
    out = spec.S @ sig @ spec.S.T
    T = np.zeros((2 * N, 2 * N))
    for j, th in enumerate(list(angles) + [0.0]):
        T[2 * j:2 * j + 2, 2 * j:2 * j + 2] = rot(th).T
    aux = eta * T @ out @ T.T + 0.5 * (1 - eta) * np.eye(2 * N)
    sx = aux[::2, ::2]
    VN = 1.0 / np.linalg.inv(sx)[-1, -1]
    return VN, math.sqrt(VN / np.linalg.det(sx))


def test_superposition_transmittances():
    assert balanced_superposition_transmittances(2) == pytest.approx([1 / math.sqrt(2)])
    assert balanced_superposition_transmittances(4) == pytest.approx(
        [math.sqrt(1 / 2), math.sqrt(2 / 3), math.sqrt(3 / 4)])
    for N in (2, 3, 5):
        assert np.allclose(superposition(N).U[-1], 1 / math.sqrt(N), atol=1e-15)
    with pytest.raises(ValueError):
        balanced_superposition_transmittances(1)


def test_balanced_chain_coefficients():
    U = build_interferometer(balanced_beamsplitter_transmittances(3)).U
    assert U[-1] == pytest.approx([0.5, 0.5, 1 / math.sqrt(2)], abs=1e-15)
    for N in (2, 4, 6):
        row = build_interferometer(balanced_beamsplitter_transmittances(N)).U[-1]
        expected = [2 ** (-(N - 1) / 2)] + [2 ** (-(N - l + 1) / 2) for l in range(2, N + 1)]
        assert row == pytest.approx(expected, abs=1e-15)


def test_last_row_product_formula():
    rng = np.random.default_rng(3)
    t = rng.uniform(0.1, 0.95, size=4)
    U = build_interferometer(t).U
    r = np.concatenate([[1.0], np.sqrt(1 - t**2)])
    for l in range(5):
        assert U[-1, l] == pytest.approx(r[l] * np.prod(t[l:]), abs=1e-15)


@pytest.mark.parametrize("seed", range(4))
def test_orthogonal_and_symplectic(seed):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.05, 0.99, size=int(rng.integers(1, 6)))
    spec = build_interferometer(t)
    N = spec.N
    assert np.max(np.abs(spec.U @ spec.U.T - np.eye(N))) < 1e-12
    W = omega(N)
    assert np.max(np.abs(spec.S @ W @ spec.S.T - W)) < 1e-12


def test_interferometer_rejects_degenerate():
    for t in ([1.0], [0.0], []):
        with pytest.raises(ValueError):
            build_interferometer(t)
    with pytest.raises(ValueError):
        ConditioningSpec((0.0,), eta=0.0)


def test_conditional_variance_hand_values():
    spec = superposition(3)
    assert conditional_variance_x(np.zeros(3), spec, SV)[0] == pytest.approx(0.2)
    assert conditional_variance_x(np.full(3, math.pi / 2), spec, SV)[0] == pytest.approx(2.0)
    V, _ = conditional_variance_x([0.0, math.pi / 2], superposition(2), SV)
    assert V == pytest.approx(4 / 11, abs=1e-15)


@pytest.mark.parametrize("angles,eta", [((0.0, 0.0), 1.0), ((0.3, 1.1), 0.85),
                                        ((math.pi / 2, 0.0), 0.6)])
def test_general_matches_full_covariance_algebra(angles, eta):
    spec = build_interferometer([0.6, 0.8])
    rng = np.random.default_rng(11)
    phis = rng.normal(scale=0.7, size=(5, 3))
    V, w = conditional_variance_general(phis, spec, ConditioningSpec(angles, eta), SV)
    for i, p in enumerate(phis):
        bV, bw = brute_conditional(p, spec, angles, eta, SV)
        assert V[i] == pytest.approx(bV, abs=1e-12)
        assert w[i] == pytest.approx(bw, rel=1e-12)


def test_general_reduces_to_x_pointwise():
    spec = superposition(4)
    phis = np.random.default_rng(0).normal(scale=0.9, size=(50, 4))
    V1, w1 = conditional_variance_x(phis, spec, SV)
    V2, w2 = conditional_variance_general(phis, spec, ConditioningSpec.uniform(4), SV)
    assert np.max(np.abs(V1 - V2)) < 1e-12
    assert np.max(np.abs(w1 - w2) / w1) < 1e-12


def test_efficiency_is_continuous():
    spec = superposition(3)
    phis = np.array([0.2, -0.4, 0.7])
    etas = np.linspace(0.5, 1.0, 201)
    vals = [conditional_variance_general(phis, spec, ConditioningSpec((0, 0), e), SV)[0]
            for e in etas]
    assert np.max(np.abs(np.diff(vals))) < 5e-3
    assert vals[-1] == pytest.approx(conditional_variance_x(phis, spec, SV)[0], abs=1e-12)


def test_no_noise_gives_input_variance():
    for N in (2, 3, 4):
        assert collective_variance_x(superposition(N), SV, PhaseNoiseModel(0.0)) == 0.2


def test_reduction_chain_small_N():
    for N in (2, 3):
        for s in (0.1, 0.5, 1.0):
            noise = PhaseNoiseModel(s)
            x = collective_variance_x(superposition(N), SV, noise)
            g = collective_variance_general(superposition(N), ConditioningSpec.uniform(N), SV, noise)
            assert abs(x - g) < 1e-10


def test_output_bounds():
    for s in np.arange(0.1, 1.51, 0.2):
        noise = PhaseNoiseModel(float(s))
        for N in (2, 3):
            V = collective_variance_x(superposition(N), SV, noise)
            assert 0.2 <= V <= dephased_variance_x(SV, noise)


def test_known_two_copy_value():
    assert collective_variance_x(superposition(2), SV, PhaseNoiseModel(0.5)) == pytest.approx(
        0.403929847852718, abs=1e-10)


def strategy(angles, s):
    return collective_variance_general(superposition(3), ConditioningSpec(angles), SV,
                                       PhaseNoiseModel(s))


def test_p_conditioning_wins_for_weak_noise():
    assert strategy((math.pi / 2, math.pi / 2), 0.3) < strategy((0, 0), 0.3)


def test_x_conditioning_wins_for_strong_noise():
    assert strategy((0, 0), 1.2) < strategy((math.pi / 2, math.pi / 2), 1.2)


def test_mixed_strategy_never_best():
    for s in np.round(np.arange(0.1, 1.21, 0.1), 10):
        best = min(strategy((0, 0), s), strategy((math.pi / 2, math.pi / 2), s))
        assert strategy((0, math.pi / 2), s) >= best


def test_monte_carlo_is_seeded():
    spec = superposition(3)
    cond = ConditioningSpec.uniform(3)
    a = collective_variance_mc(spec, cond, SV, PhaseNoiseModel(0.5), 20_000, seed=5)
    b = collective_variance_mc(spec, cond, SV, PhaseNoiseModel(0.5), 20_000, seed=5)
    c = collective_variance_mc(spec, cond, SV, PhaseNoiseModel(0.5), 20_000, seed=6)
    assert a == b and a != c


def test_many_copies_fall_back_to_sampling():
    noise = PhaseNoiseModel(0.5)
    integ = IntegrationConfig(samples=200_000)
    v5 = collective_variance_x(superposition(5), SV, noise, integ)
    assert v5 == collective_variance_x(superposition(5), SV, noise, integ)
    v4 = collective_variance_x(superposition(4), SV, noise)
    assert 0.2 < v5 < v4


def test_unconverged_quadrature_raises():
    integ = IntegrationConfig(method=GAUSS_HERMITE, nodes=8)
    with pytest.raises(AccuracyError, match="node doubling"):
        collective_variance_x(superposition(2), SV, PhaseNoiseModel(1.2), integ)
