import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scorediff.copula import CopulaFamily, CopulaSpec
from scorediff.fit import fit_univariate
from scorediff.regress import (
    AbilitySpec,
    Design,
    Family,
    InflationSpec,
    Kind,
    ModelParams,
    ModelStructure,
    TeamIndex,
    UnknownTeamError,
    home_advantage,
    inflation_prob,
    make_distribution,
    odds_strength_covariate,
    pack_parameters,
    predict_mean,
    unpack_parameters,
)
from scorediff.zdist import DiscLaplaceParams, DiscNormalParams, Skellam2Params, ZiSkellamParams

from synth import random_abilities, round_robin, team_names

TEAMS = team_names(5)


def spec(alpha=0.4):
    beta = {t: 0.1 * i for i, t in enumerate(TEAMS)}
    gamma = {t: -0.2 * i for i, t in enumerate(TEAMS)}
    return AbilitySpec(alpha, beta, gamma, TEAMS[0])


class TestAbilities:
    def test_baseline_pair(self):
        assert predict_mean(TEAMS[0], TEAMS[0], spec()) == 0.4

    def test_home_team(self):
        assert predict_mean(TEAMS[3], TEAMS[0], spec()) == pytest.approx(0.4 + 0.3)

    def test_away_team(self):
        assert predict_mean(TEAMS[0], TEAMS[2], spec()) == pytest.approx(0.4 - 0.4)

    def test_home_advantage(self):
        assert home_advantage(TEAMS[0], spec()) == 0.0
        s = AbilitySpec(0.0, {"a": 0.0, "b": 1.2}, {"a": 0.0, "b": 0.4}, "a")
        assert home_advantage("b", s) == pytest.approx(0.8)

    def test_unknown_team(self):
        with pytest.raises(UnknownTeamError):
            predict_mean("nobody", TEAMS[0], spec())
        with pytest.raises(UnknownTeamError):
            home_advantage("nobody", spec())

    def test_baseline_must_be_zero(self):
        with pytest.raises(ValueError):
            AbilitySpec(0.0, {"a": 1.0}, {"a": 0.0}, "a")


class TestInflation:
    def test_half(self):
        assert inflation_prob(np.zeros(2), InflationSpec(0.0, (0.0, 0.0))) == 0.5

    def test_intercept_only(self):
        p = inflation_prob([], InflationSpec(-2.1972))
        oracle = float(1 / (1 + mpmath.exp(mpmath.mpf("2.1972"))))
        assert p == pytest.approx(oracle, rel=1e-14)
        assert p == pytest.approx(0.1, abs=1e-4)

    def test_constant_round_trip(self):
        assert inflation_prob([], InflationSpec.constant(0.1)) == pytest.approx(0.1, rel=1e-14)
        assert inflation_prob([], InflationSpec.constant(0.0)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            inflation_prob([1.0, 2.0], InflationSpec(0.0, (1.0,)))

    def test_vectorized(self):
        z = np.array([[0.0], [1.0], [-1.0]])
        p = inflation_prob(z, InflationSpec(0.0, (2.0,)))
        np.testing.assert_allclose(p, 1 / (1 + np.exp(-np.array([0.0, 2.0, -2.0]))))

    def test_odds_covariate(self):
        assert odds_strength_covariate(3.0, 3.0, 3.0) == pytest.approx(0.0)
        assert odds_strength_covariate(1.2, 10, 12) > odds_strength_covariate(1.8, 4, 4)


class TestStructure:
    @pytest.mark.parametrize("kind,expected", [(Kind.BIV_A, 72), (Kind.BIV_B, 38), (Kind.BIV_C, 73)])
    def test_parameter_counts(self, kind, expected):
        assert ModelStructure(kind).n_params(18) == expected

    def test_univariate_count(self):
        assert ModelStructure().n_params(18) == 36
        assert ModelStructure(family=Family.ZI_SKELLAM).n_params(18) == 37
        assert ModelStructure(family=Family.ZI_SKELLAM, n_inflation_covariates=1).n_params(18) == 38

    def test_invalid_combinations(self):
        with pytest.raises(ValueError):
            ModelStructure(Kind.BIV_B, Family.ZI_SKELLAM)
        with pytest.raises(ValueError):
            ModelStructure(Kind.UNIVARIATE, copula=CopulaFamily.FRANK)
        with pytest.raises(ValueError):
            ModelStructure(Kind.BIV_A, copula=CopulaFamily.GUMBEL)

    def test_dict_round_trip(self):
        s = ModelStructure(Kind.BIV_C, Family.DISC_NORMAL, CopulaFamily.GUMBEL)
        assert ModelStructure.from_dict(s.to_dict()) == s

    def test_make_distribution(self):
        assert isinstance(make_distribution(Family.SKELLAM, 0.5, 15.0), Skellam2Params)
        assert isinstance(make_distribution(Family.ZI_SKELLAM, 0.5, 15.0, 0.1), ZiSkellamParams)
        assert isinstance(make_distribution(Family.DISC_NORMAL, 0.5, 15.0), DiscNormalParams)
        assert isinstance(make_distribution(Family.DISC_LAPLACE, 0.5, 2.0), DiscLaplaceParams)


STRUCTURES = [
    ModelStructure(),
    ModelStructure(family=Family.ZI_SKELLAM, n_inflation_covariates=2),
    ModelStructure(Kind.BIV_A, Family.DISC_LAPLACE),
    ModelStructure(Kind.BIV_B, Family.SKELLAM, CopulaFamily.FRANK),
    ModelStructure(Kind.BIV_C, Family.DISC_NORMAL, CopulaFamily.GUMBEL),
    ModelStructure(Kind.BIV_B, Family.SKELLAM, CopulaFamily.INDEPENDENCE),
]


class TestPacking:
    @pytest.mark.parametrize("structure", STRUCTURES, ids=lambda s: s.label)
    @given(data=st.data())
    @settings(max_examples=25, deadline=None)
    def test_round_trip(self, structure, data):
        index = TeamIndex(TEAMS)
        n = structure.n_params(len(index))
        vec = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n)))
        params = unpack_parameters(vec, structure, index)
        back = pack_parameters(structure, params, index)
        np.testing.assert_allclose(back, vec, rtol=1e-12, atol=1e-12)
        again = unpack_parameters(back, structure, index)
        assert again.scales == pytest.approx(params.scales)

    def test_layout(self):
        index = TeamIndex(["b", "a", "c"])
        s = AbilitySpec(0.5, {"a": 0.0, "b": 1.0, "c": 2.0}, {"a": 0.0, "b": -1.0, "c": -2.0}, "a")
        p = ModelParams((s,), (15.0,))
        vec = pack_parameters(ModelStructure(), p, index)
        np.testing.assert_allclose(vec, [0.5, 1.0, 2.0, -1.0, -2.0, math.log(15.0)])

    def test_gumbel_stored_shifted_log(self):
        index = TeamIndex(TEAMS)
        st_ = ModelStructure(Kind.BIV_B, copula=CopulaFamily.GUMBEL)
        vec = np.zeros(st_.n_params(len(index)))
        vec[-1] = math.log(2.0)
        assert unpack_parameters(vec, st_, index).copula == CopulaSpec("gumbel", 3.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            unpack_parameters(np.zeros(5), ModelStructure(), TeamIndex(TEAMS))


class TestDesign:
    def test_means_match_predict_mean(self):
        rng = np.random.default_rng(0)
        index = TeamIndex(TEAMS)
        s = random_abilities(rng, TEAMS)
        fixtures = round_robin(TEAMS)
        d = Design.from_pairs(index, [f[0] for f in fixtures], [f[1] for f in fixtures])
        block = pack_parameters(ModelStructure(), ModelParams((s,), (10.0,)), index)[:-1]
        np.testing.assert_allclose(d.means(block), [predict_mean(h, a, s) for h, a in fixtures])
        np.testing.assert_allclose(d.matrix() @ block, d.means(block))

    def test_block_gradient_is_transpose(self):
        index = TeamIndex(TEAMS)
        fixtures = round_robin(TEAMS)
        d = Design.from_pairs(index, [f[0] for f in fixtures], [f[1] for f in fixtures])
        g = np.random.default_rng(1).normal(size=len(fixtures))
        np.testing.assert_allclose(d.block_gradient(g), d.matrix().T @ g)


def test_baseline_choice_is_a_gauge():
    rng = np.random.default_rng(2)
    s = random_abilities(rng, TEAMS)
    rows = []
    for h, a in round_robin(TEAMS, legs=3):
        mu = predict_mean(h, a, s)
        rows.append((h, a, int(Skellam2Params(mu, 12.0).sample(rng))))
    f1 = fit_univariate(rows)
    f2 = fit_univariate(rows, baseline=TEAMS[3])
    assert f2.index.baseline == TEAMS[3]
    assert f1.loglik == pytest.approx(f2.loglik, abs=1e-8)
    for h, a in round_robin(TEAMS):
        assert f1.mean(h, a) == pytest.approx(f2.mean(h, a), abs=1e-5)
