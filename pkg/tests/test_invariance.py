import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsgm import invariance as inv
from dsgm import objective
from dsgm.divergences import DivergenceSpec, FactorChoice, Form, Variant, plain_value
from dsgm.entropy import EntropyFamily
from dsgm.errors import DomainError, EvalError, Unsupported
from dsgm.gradcheck import fd_neg_grad, relative_error
from dsgm.invariance import FactorKind, InvarianceFactor

from conftest import INVARIANT_SPECS, NOMINAL_TS, rand_pair, spec_id

mp.mp.dps = 50
G = EntropyFamily.general(1.5, 0.5)
NOMINAL_KINDS = [k for k in FactorKind if k is not FactorKind.REFERENCE_SUM_RATIO]
INV_IDS = [spec_id(s) for s in INVARIANT_SPECS]


def golden_section(fun, lo, hi, tol):
    """Minimiser of a unimodal function on [lo, hi]."""
    invphi = (mp.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return (a + b) / 2


def _kind_divergence(kind, t, p, q, K):
    """Float divergence D(p || K q) (or the dual) used by the minimisation oracle."""
    form = {
        FactorKind.CSISZAR_TSALLIS_NOMINAL: Form.CSISZAR,
        FactorKind.CSISZAR_DUAL_TSALLIS_NOMINAL: Form.CSISZAR_DUAL,
        FactorKind.BREGMAN_TSALLIS_NOMINAL: Form.BREGMAN,
        FactorKind.BREGMAN_DUAL_TSALLIS_NOMINAL: Form.BREGMAN_DUAL,
    }[kind]
    return plain_value(EntropyFamily.tsallis(t), form, p, K * q)


class TestFactor:
    def test_reference(self):
        assert inv.factor(FactorKind.REFERENCE_SUM_RATIO, [2.0, 2.0], [1.0, 1.0]) == 2.0

    @pytest.mark.parametrize("kind", NOMINAL_KINDS, ids=lambda k: k.value)
    @pytest.mark.parametrize("t", NOMINAL_TS)
    def test_nominal_at_identity(self, kind, t):
        p = np.array([0.3, 1.2, 5.0, 8.0])
        assert abs(inv.factor(InvarianceFactor(kind, t), p, p) - 1.0) <= 1e-14

    def test_csiszar_nominal_golden_section(self):
        p, q = [mp.mpf(4), mp.mpf(1)], [mp.mpf(1), mp.mpf(1)]

        def div(K):  # Tsallis t=2 Csiszar: sum (p - K q)^2 / (K q)
            return mp.fsum((pi - K * qi) ** 2 / (K * qi) for pi, qi in zip(p, q))

        K_star = golden_section(div, mp.mpf("0.5"), mp.mpf(10), mp.mpf("1e-30"))
        assert float(K_star) == pytest.approx(math.sqrt(17 / 2), rel=1e-14)
        got = inv.factor(InvarianceFactor(FactorKind.CSISZAR_TSALLIS_NOMINAL, 2.0), [4, 1], [1, 1])
        assert got == pytest.approx(float(K_star), rel=1e-14)
        assert got == pytest.approx(2.91548, abs=5e-6)

    @pytest.mark.parametrize("kind", NOMINAL_KINDS, ids=lambda k: k.value)
    @pytest.mark.parametrize("t", [0.6, 1.7, 2.5])
    def test_nominal_is_argmin(self, kind, t):
        p, q = rand_pair(9, n=5)
        K0 = inv.factor(InvarianceFactor(kind, t), p, q)
        K_star = golden_section(lambda K: _kind_divergence(kind, t, p, q, K), K0 / 4, K0 * 4, 1e-10 * K0)
        assert K_star == pytest.approx(K0, rel=1e-6)

    @pytest.mark.parametrize(
        "kind", [FactorKind.CSISZAR_DUAL_TSALLIS_NOMINAL, FactorKind.BREGMAN_DUAL_TSALLIS_NOMINAL]
    )
    def test_dual_kinds_reject_t_one(self, kind):
        with pytest.raises(EvalError):
            inv.factor(InvarianceFactor(kind, 1.0), [1.0, 2.0], [2.0, 1.0])

    def test_direct_kinds_accept_t_one(self):
        p, q = [1.0, 3.0], [2.0, 1.0]
        for kind in (FactorKind.CSISZAR_TSALLIS_NOMINAL, FactorKind.BREGMAN_TSALLIS_NOMINAL):
            assert inv.factor(InvarianceFactor(kind, 1.0), p, q) == pytest.approx(4 / 3)

    def test_nominal_needs_t(self):
        with pytest.raises(DomainError):
            InvarianceFactor(FactorKind.BREGMAN_TSALLIS_NOMINAL)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            inv.factor(FactorKind.REFERENCE_SUM_RATIO, [1.0, 2.0], [1.0])

    @pytest.mark.parametrize("kind", list(FactorKind), ids=lambda k: k.value)
    @pytest.mark.parametrize("lam", [1e-3, 0.5, 1.0, 7.0, 1e3])
    def test_scaling_law(self, kind, lam):
        fac = InvarianceFactor(kind, None if kind is FactorKind.REFERENCE_SUM_RATIO else 1.7)
        p, q = rand_pair(4)
        assert inv.factor(fac, p, lam * q) * lam == pytest.approx(inv.factor(fac, p, q), rel=1e-12)

    @pytest.mark.parametrize("kind", list(FactorKind), ids=lambda k: k.value)
    def test_invariance_ode(self, kind):
        fac = InvarianceFactor(kind, None if kind is FactorKind.REFERENCE_SUM_RATIO else 0.7)
        p, q = rand_pair(6)
        K = inv.factor(fac, p, q)
        dK = -fd_neg_grad(lambda z: inv.factor(fac, p, z), q)
        assert abs(K + float(np.sum(q * dK))) <= 1e-6 * K


class TestStationarity:
    def test_csiszar_random(self):
        fac = InvarianceFactor(FactorKind.CSISZAR_TSALLIS_NOMINAL, 1.5)
        for seed in range(10):
            p, q = rand_pair(seed)
            scale = float(np.sum(p) + np.sum(q))
            assert abs(inv.nominal_stationarity_residual(fac, p, q)) <= 1e-9 * scale
            # independent check: central difference of D(p || K q) in K at K0
            K0 = inv.factor(fac, p, q)
            h = 1e-5 * K0
            d = _kind_divergence(fac.kind, 1.5, p, q, K0 + h) - _kind_divergence(fac.kind, 1.5, p, q, K0 - h)
            assert abs(d / (2 * h)) <= 1e-7 * scale

    def test_bregman_example(self):
        fac = InvarianceFactor(FactorKind.BREGMAN_TSALLIS_NOMINAL, 2.0)
        p, q = np.array([4.0, 1.0]), np.array([1.0, 1.0])
        K0 = inv.factor(fac, p, q)
        # d/dK sum (p - K q)^2 = -2 sum q (p - K q)
        analytic = -2 * float(np.sum(q * (p - K0 * q)))
        assert abs(analytic) <= 1e-10
        assert abs(inv.nominal_stationarity_residual(fac, p, q)) <= 1e-10

    @pytest.mark.parametrize("kind", NOMINAL_KINDS, ids=lambda k: k.value)
    def test_identity(self, kind):
        p = np.array([1.0, 2.0, 3.0])
        assert abs(inv.nominal_stationarity_residual(InvarianceFactor(kind, 1.8), p, p)) <= 1e-14

    def test_reference_unsupported(self):
        with pytest.raises(Unsupported):
            inv.nominal_stationarity_residual(InvarianceFactor(FactorKind.REFERENCE_SUM_RATIO), [1.0], [1.0])


class TestNormalize:
    def test_reconstruct(self):
        p, q = rand_pair(2)
        n = inv.normalize(p, q)
        assert n.p_bar.sum() == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(n.p_bar * n.sum_p, p, rtol=1e-14)
        np.testing.assert_allclose(n.q_bar * n.sum_q, q, rtol=1e-14)
        assert n.ratio == pytest.approx(p.sum() / q.sum())


class TestInvariantCsiszar:
    def test_identity(self):
        p = np.array([1.0, 2.0, 3.0])
        assert inv.invariant_csiszar_value(G, p, p) == 0.0

    @pytest.mark.parametrize("lam", [0.5, 3.0, 100.0])
    def test_scale(self, lam):
        p, q = np.array([1.0, 2.0, 3.0]), np.array([3.0, 1.0, 2.0])
        v = inv.invariant_csiszar_value(G, p, q)
        assert abs(inv.invariant_csiszar_value(G, p, lam * q) - v) <= 1e-12 * abs(v)

    def test_fd(self):
        p, q = np.array([1.0, 2.0, 3.0]), np.array([3.0, 1.0, 2.0])
        fd = fd_neg_grad(lambda z: inv.invariant_csiszar_value(G, p, z), q)
        assert relative_error(inv.invariant_csiszar_neg_grad(G, p, q), fd) <= 1e-6

    def test_closed_form_high_precision(self):
        a, b = mp.mpf(1.5), mp.mpf(0.5)
        p, q = [1, 2, 3], [3, 1, 2]
        P, Q = mp.mpf(sum(p)), mp.mpf(sum(q))
        pb = [mp.mpf(x) / P for x in p]
        qb = [mp.mpf(x) / Q for x in q]
        ref = P / (a - b) * (
            mp.fsum(x**a * y ** (1 - a) for x, y in zip(pb, qb))
            - mp.fsum(x**b * y ** (1 - b) for x, y in zip(pb, qb))
        )
        assert inv.invariant_csiszar_value(G, p, q) == pytest.approx(float(ref), rel=1e-13)

    def test_equals_plain_at_reference(self):
        p, q = rand_pair(3)
        K = p.sum() / q.sum()
        assert inv.invariant_csiszar_value(G, p, q) == pytest.approx(plain_value(G, Form.CSISZAR, p, K * q), rel=1e-13)


class TestNominalCsiszar:
    def test_identity(self):
        p = np.array([0.5, 2.0])
        assert abs(inv.invariant_csiszar_tsallis_nominal_value(1.5, p, p)) <= 1e-15

    @pytest.mark.parametrize("lam", [0.5, 3.0])
    def test_scale(self, lam):
        p, q = rand_pair(8)
        v = inv.invariant_csiszar_tsallis_nominal_value(0.7, p, q)
        assert abs(inv.invariant_csiszar_tsallis_nominal_value(0.7, p, lam * q) - v) <= 1e-12 * abs(v)

    def test_example_high_precision(self):
        K0 = mp.sqrt(mp.mpf(17) / 2)
        ref = -2 * (5 - K0 * 2)
        assert float(ref) == pytest.approx(1.66190, abs=5e-6)
        assert inv.invariant_csiszar_tsallis_nominal_value(2.0, [4, 1], [1, 1]) == pytest.approx(float(ref), rel=1e-14)

    @pytest.mark.parametrize("t", [0.4, 1.5, 2.5])
    def test_raw_variable_gradient(self, t):
        p, q = rand_pair(12)
        K0 = inv.factor(InvarianceFactor(FactorKind.CSISZAR_TSALLIS_NOMINAL, t), p, q)
        raw = K0 ** (1 - t) * p**t * q ** (-t) - K0
        got = inv.invariant_csiszar_tsallis_nominal_neg_grad(t, p, q)
        np.testing.assert_allclose(got, raw, rtol=1e-12, atol=1e-13 * np.max(np.abs(raw)))

    def test_t_one(self):
        with pytest.raises(EvalError):
            inv.invariant_csiszar_tsallis_nominal_value(1.0, [1.0, 2.0], [2.0, 1.0])


class TestInvariantBregman:
    def test_nominal_t2_high_precision(self):
        p, q = [4, 1, 2.5], [1, 3, 0.5]
        mpp, mpq = [mp.mpf(x) for x in p], [mp.mpf(x) for x in q]
        spq = mp.fsum(x * y for x, y in zip(mpp, mpq))
        sq2 = mp.fsum(y * y for y in mpq)
        sp2 = mp.fsum(x * x for x in mpp)
        # 1/(1-t) [(sum p q^{t-1})^t (sum q^t)^{1-t} - sum p^t] at t = 2
        ref = -(spq**2 / sq2 - sp2)
        got = inv.invariant_bregman_tsallis_nominal_value(2.0, p, q)
        assert got == pytest.approx(float(ref), rel=1e-14)
        # and it is the Bregman divergence at the nominal factor
        K0 = spq / sq2
        direct = mp.fsum((x - K0 * y) ** 2 for x, y in zip(mpp, mpq))
        assert got == pytest.approx(float(direct), rel=1e-13)

    def test_reference_matches_composition(self):
        p, q = rand_pair(5)
        K = p.sum() / q.sum()
        fam = EntropyFamily.kls(0.4, 0.2)
        assert inv.invariant_bregman_value(fam, p, q) == pytest.approx(
            plain_value(fam, Form.BREGMAN, p, K * q), rel=1e-13
        )

    def test_dual_matches_composition(self):
        p, q = rand_pair(6)
        K = p.sum() / q.sum()
        assert inv.invariant_bregman_dual_value(G, p, q) == pytest.approx(
            plain_value(G, Form.BREGMAN_DUAL, p, K * q), rel=1e-13
        )
        assert inv.invariant_csiszar_dual_value(G, p, q) == pytest.approx(
            plain_value(G, Form.CSISZAR_DUAL, p, K * q), rel=1e-13
        )

    def test_dual_nominal_values(self):
        p, q = rand_pair(7)
        t = 1.8
        K0 = inv.factor(InvarianceFactor(FactorKind.BREGMAN_DUAL_TSALLIS_NOMINAL, t), p, q)
        want = np.sum(p**t) - K0**t * np.sum(q**t)
        assert inv.invariant_bregman_dual_tsallis_nominal_value(t, p, q) == pytest.approx(want, rel=1e-12)
        K0 = inv.factor(InvarianceFactor(FactorKind.CSISZAR_DUAL_TSALLIS_NOMINAL, t), p, q)
        want = p.sum() - K0 * q.sum()
        assert inv.invariant_csiszar_dual_tsallis_nominal_value(t, p, q) == pytest.approx(want, rel=1e-12)

    def test_dual_nominal_simplified_gradient(self):
        p, q = rand_pair(8)
        t = 0.6
        K0 = inv.factor(InvarianceFactor(FactorKind.BREGMAN_DUAL_TSALLIS_NOMINAL, t), p, q)
        want = t / (t - 1) * K0 * (p ** (t - 1) - K0 ** (t - 1) * q ** (t - 1))
        np.testing.assert_allclose(inv.invariant_bregman_dual_tsallis_nominal_neg_grad(t, p, q), want, rtol=1e-11)


class TestAllInvariant:
    @pytest.mark.parametrize("spec", INVARIANT_SPECS, ids=INV_IDS)
    def test_fd(self, spec):
        for seed in range(5):
            p, q = rand_pair(seed)
            fd = fd_neg_grad(lambda z: objective.value(spec, p, z), q)
            assert relative_error(objective.neg_grad(spec, p, q), fd) <= 1e-6

    @pytest.mark.parametrize("spec", INVARIANT_SPECS, ids=INV_IDS)
    def test_scale_and_euler(self, spec):
        for seed in range(5):
            p, q = rand_pair(seed)
            v = objective.value(spec, p, q)
            for lam in (1e-3, 0.5, 1.0, 7.0, 1e3):
                assert abs(objective.value(spec, p, lam * q) - v) <= 1e-12 * abs(v)
            g = objective.neg_grad(spec, p, q)
            assert abs(float(q @ g)) <= 1e-10 * np.linalg.norm(g) * np.linalg.norm(q)

    @pytest.mark.parametrize("spec", INVARIANT_SPECS, ids=INV_IDS)
    def test_identity(self, spec):
        p = np.array([0.3, 1.0, 2.5, 7.0])
        assert abs(objective.value(spec, p, p)) <= 1e-12
        assert np.max(np.abs(objective.neg_grad(spec, p, p))) <= 1e-10

    @pytest.mark.parametrize("spec", INVARIANT_SPECS, ids=INV_IDS)
    def test_split(self, spec):
        for seed in range(10):
            p, q = rand_pair(seed)
            U, V = objective.neg_grad_split(spec, p, q)
            g = objective.neg_grad(spec, p, q)
            assert np.min(U) >= 0 and np.min(V) >= 0
            assert np.max(np.abs(U - V - g)) <= 1e-13 * max(1.0, np.max(U), np.max(V))

    @pytest.mark.parametrize("form", list(Form), ids=lambda f: f.value)
    @pytest.mark.parametrize("t", [0.5, 1.5, 2.5])
    def test_nominal_not_above_reference(self, form, t):
        fam = EntropyFamily.tsallis(t)
        nom = DivergenceSpec(fam, form, Variant.INVARIANT, FactorChoice.NOMINAL)
        ref = DivergenceSpec(fam, form, Variant.INVARIANT)
        rng = np.random.default_rng(21)
        for _ in range(100):
            p, q = rng.uniform(0.1, 10, (2, 6))
            vn, vr = objective.value(nom, p, q), objective.value(ref, p, q)
            assert vn <= vr + 1e-12 * abs(vr)

    def test_unsupported_variant(self):
        with pytest.raises(Unsupported):
            inv.invariant_value(DivergenceSpec(G), [1.0], [1.0])

    @pytest.mark.parametrize("form", list(Form), ids=lambda f: f.value)
    def test_nominal_values_refuse_t_one(self, form):
        spec = DivergenceSpec(EntropyFamily.tsallis(1.0), form, Variant.INVARIANT, FactorChoice.NOMINAL)
        with pytest.raises(EvalError):
            objective.value(spec, [1.0, 2.0], [2.0, 1.0])

    @settings(max_examples=60, deadline=None)
    @given(
        lam=st.floats(1e-3, 1e3),
        p=st.lists(st.floats(0.1, 10.0), min_size=4, max_size=4),
        q=st.lists(st.floats(0.1, 10.0), min_size=4, max_size=4),
        t=st.sampled_from([0.5, 1.5, 2.0]),
        form=st.sampled_from(list(Form)),
        factor=st.sampled_from(list(FactorChoice)),
    )
    def test_scale_invariance_property(self, lam, p, q, t, form, factor):
        spec = DivergenceSpec(EntropyFamily.tsallis(t), form, Variant.INVARIANT, factor)
        q = np.array(q)
        v = objective.value(spec, p, q)
        # values at rounding level (p proportional to q) only agree to eps * sum(p)^t
        floor = 1e-14 * sum(p) ** max(t, 1.0)
        assert abs(objective.value(spec, p, lam * q) - v) <= 1e-12 * abs(v) + floor


class TestTwoRoutes:
    """Normalized closed forms against the composed evaluation D(p || K q)."""

    @pytest.mark.parametrize("spec", INVARIANT_SPECS, ids=spec_id)
    def test_closed_form_agrees(self, spec):
        for seed in range(5):
            p, q = rand_pair(seed)
            a = inv.invariant_value(spec, p, q)
            b = inv.closed_form_value(spec, p, q)
            assert abs(a - b) <= 1e-12 * max(abs(a), float(np.sum(p)))

    def test_small_value_relative_accuracy(self):
        spec = DivergenceSpec(EntropyFamily.tsallis(1.5), Form.BREGMAN, Variant.INVARIANT, FactorChoice.NOMINAL)
        q = np.array([1.0, 2.0, 3.0, 4.0])
        p = 3.0 * q * (1 + 1e-5 * np.array([1.0, -1.0, 0.5, -0.25]))
        v = inv.invariant_value(spec, p, q)
        for lam in (1e-3, 7.0, 1e3):
            assert abs(inv.invariant_value(spec, p, lam * q) - v) <= 1e-9 * v
