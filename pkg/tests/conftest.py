import numpy as np
import pytest

import sojourn as sj


@pytest.fixture(scope="session")
def bm_model():
    return sj.RationalJumpModel(mu=0.0, sigma=1.0).validate()


@pytest.fixture(scope="session")
def drifted_bm_model():
    return sj.RationalJumpModel(mu=1.0, sigma=np.sqrt(2.0)).validate()


@pytest.fixture(scope="session")
def kou_model():
    return sj.RationalJumpModel(
        mu=0.05, sigma=0.2,
        lambda_plus=2.0, up_components=(sj.JumpComponent(10.0, (1.0,)),),
        lambda_minus=3.0, down_components=(sj.JumpComponent(5.0, (1.0,)),),
    ).validate()


@pytest.fixture(scope="session")
def sn_model():
    return sj.RationalJumpModel(
        mu=0.0, sigma=1.0,
        lambda_minus=3.0, down_components=(sj.JumpComponent(5.0, (1.0,)),),
    ).validate()


@pytest.fixture(scope="session")
def erlang_model():
    # multiplicity-2 components exercise complex root pairs
    return sj.RationalJumpModel(
        mu=-0.1, sigma=0.4,
        lambda_plus=1.5, up_components=(sj.JumpComponent(6.0, (0.35, 0.4)), sj.JumpComponent(11.0, (0.25,))),
        lambda_minus=2.0, down_components=(sj.JumpComponent(4.0, (0.3, 0.7)),),
    ).validate()


@pytest.fixture(scope="session")
def bm_exponent(bm_model):
    return sj.build_exponent(bm_model)


@pytest.fixture(scope="session")
def kou_exponent(kou_model):
    return sj.build_exponent(kou_model)


@pytest.fixture(scope="session")
def sn_exponent(sn_model):
    return sj.build_exponent(sn_model)


@pytest.fixture(scope="session")
def erlang_exponent(erlang_model):
    return sj.build_exponent(erlang_model)


def random_model(rng: np.random.Generator) -> sj.RationalJumpModel:
    """A random valid model: positive-weight mixed-Erlang jumps both sides."""

    def side():
        if rng.random() < 0.25:
            return 0.0, ()
        n_comp = int(rng.integers(1, 3))
        rates = []
        while len(rates) < n_comp:
            r = float(np.exp(rng.uniform(np.log(1.5), np.log(12.0))))
            if all(abs(r - s) > 0.2 * max(r, s) for s in rates):
                rates.append(r)
        comps = []
        raw = rng.uniform(0.2, 1.0, size=n_comp)
        raw /= raw.sum()
        for r, mass in zip(rates, raw):
            mult = int(rng.integers(1, 3))
            w = rng.uniform(0.2, 1.0, size=mult)
            w = w / w.sum() * mass
            comps.append(sj.JumpComponent(rate=r, weights=tuple(w)))
        lam = float(rng.uniform(0.2, 3.0))
        return lam, tuple(comps)

    lam_up, up = side()
    lam_dn, dn = side()
    model = sj.RationalJumpModel(
        mu=float(rng.uniform(-1.0, 1.0)),
        sigma=float(rng.uniform(0.15, 1.2)),
        lambda_plus=lam_up, up_components=up,
        lambda_minus=lam_dn, down_components=dn,
    )
    return model.validate()


def random_sn_model(rng: np.random.Generator) -> sj.RationalJumpModel:
    n_comp = int(rng.integers(1, 3))
    rates = []
    while len(rates) < n_comp:
        r = float(np.exp(rng.uniform(np.log(1.5), np.log(10.0))))
        if all(abs(r - s) > 0.2 * max(r, s) for s in rates):
            rates.append(r)
    raw = rng.uniform(0.2, 1.0, size=n_comp)
    raw /= raw.sum()
    comps = []
    for r, mass in zip(rates, raw):
        mult = int(rng.integers(1, 3))
        w = rng.uniform(0.2, 1.0, size=mult)
        comps.append(sj.JumpComponent(rate=r, weights=tuple(w / w.sum() * mass)))
    model = sj.RationalJumpModel(
        mu=float(rng.uniform(-0.5, 0.5)),
        sigma=float(rng.uniform(0.3, 1.2)),
        lambda_minus=float(rng.uniform(0.3, 3.0)),
        down_components=tuple(comps),
    )
    return model.validate()
