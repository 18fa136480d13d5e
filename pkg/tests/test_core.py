import numpy as np
import pytest

from scorematch.core import (CmpParams, Dataset, TruncGaussParams,
                             cmp_param_names, pack_tg, tg_param_names,
                             unpack_tg)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("p_cov", [1, 2, 6])
def test_pack_unpack_round_trip(d, p_cov):
    rng = np.random.default_rng(1000 + 10 * d + p_cov)
    b = rng.normal(size=(d, p_cov))
    a = rng.normal(size=(d, d))
    lam = a + a.T
    theta = pack_tg(b, lam)
    assert theta.shape == (d * p_cov + d * (d + 1) // 2,)
    b2, lam2 = unpack_tg(theta, d, p_cov)
    assert np.array_equal(b2, b)
    assert np.array_equal(lam2, lam)
    # flat -> structured -> flat
    assert np.array_equal(pack_tg(b2, lam2), theta)


def test_pack_is_column_major_with_lower_vech():
    b = np.array([[1.0, -0.5], [0.4, 0.2]])
    lam = np.array([[20.0, 10.0], [10.0, 30.0]])
    theta = pack_tg(b, lam)
    # vec(B) walks columns first, then vech walks the lower triangle
    # column by column
    assert np.array_equal(theta, [1.0, 0.4, -0.5, 0.2, 20.0, 10.0, 30.0])


def test_unpack_symmetrizes_exactly():
    theta = np.array([0.0, 0.0, 2.0, 0.7, 3.0])
    _, lam = unpack_tg(theta, 2, 1)
    assert lam[0, 1] == lam[1, 0] == 0.7


def test_param_names_match_packing_order():
    assert tg_param_names(2, 2) == ["B11", "B21", "B12", "B22",
                                    "L11", "L21", "L22"]
    assert cmp_param_names(3) == ["beta1", "beta2", "beta3", "nu"]


def test_dataset_validation():
    x = np.ones((3, 2))
    ds = Dataset(x=x, y_count=np.array([0, 1, 2]))
    assert ds.n == 3 and ds.p_cov == 2

    with pytest.raises(ValueError, match="exactly one"):
        Dataset(x=x)
    with pytest.raises(ValueError, match="exactly one"):
        Dataset(x=x, y_cont=np.ones((3, 2)), y_count=np.array([0, 1, 2]))
    with pytest.raises(ValueError, match="2-d"):
        Dataset(x=np.ones(3), y_count=np.array([0, 1, 2]))
    with pytest.raises(ValueError, match="matching x rows"):
        Dataset(x=x, y_cont=np.ones((4, 2)))
    with pytest.raises(ValueError, match="nonnegative integers"):
        Dataset(x=x, y_count=np.array([0.0, 1.5, 2.0]))
    with pytest.raises(ValueError, match="nonnegative integers"):
        Dataset(x=x, y_count=np.array([0, -1, 2]))
    with pytest.raises(ValueError, match="NaN or Inf"):
        Dataset(x=x, y_cont=np.array([[1.0, np.nan]] * 3))
    with pytest.raises(ValueError, match="NaN or Inf"):
        Dataset(x=np.array([[1.0, np.inf]] * 3), y_count=np.array([0, 1, 2]))


def test_tg_params_validation():
    with pytest.raises(ValueError, match="symmetric"):
        TruncGaussParams(b=np.zeros((2, 1)),
                         lam=np.array([[1.0, 0.2], [0.1, 1.0]]))
    with pytest.raises(ValueError, match="square"):
        TruncGaussParams(b=np.zeros((2, 1)), lam=np.zeros((2, 3)))
    p = TruncGaussParams(b=np.zeros((2, 1)), lam=np.eye(2))
    assert p.d == 2
    assert np.array_equal(p.to_vector(), [0, 0, 1, 0, 1])


def test_cmp_params_validation():
    with pytest.raises(ValueError, match="nonnegative"):
        CmpParams(beta=np.zeros(2), nu=-0.1)
    p = CmpParams(beta=[0.1, -0.2], nu=0.5)
    assert np.array_equal(p.to_vector(), [0.1, -0.2, 0.5])
    q = CmpParams.from_vector(p.to_vector())
    assert np.array_equal(q.beta, p.beta) and q.nu == p.nu
