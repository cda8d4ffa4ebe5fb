"""Smoke test for the Python bindings.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`
or `pip install` of a wheel from `maturin build -m crates/python/Cargo.toml`.
"""

from fractions import Fraction

import stochsand as ss


def main():
    model = ss.paper_triangle_ssm("1/4", "1/4", "1/2")
    assert model.n_sites == 2
    assert model.thresholds == [2, 2]
    assert model.dissipativity()["satisfied"]

    mu = [Fraction(1, 3), Fraction(2, 3)]
    result = ss.stationary(model, mu)
    pi = dict(zip(map(tuple, result["states"]), result["pi"]))
    assert pi == {(1, 2): Fraction(2, 9), (2, 1): Fraction(2, 9), (2, 2): Fraction(5, 9)}, pi
    assert result["period"] == 1

    states, p = ss.transition_matrix(model, mu)
    assert states == [[1, 1], [1, 2], [2, 1], [2, 2]]
    assert all(sum(row) == 1 for row in p)
    assert ss.commute_check(model)
    holds, _ = ss.mu_independence(model, [mu, ["1/2", "1/2"], ["7/8", "1/8"]])
    assert holds

    p1, p2 = ss.site_matrix(model, 1), ss.site_matrix(model, 2)
    mixed = [[mu[0] * a + mu[1] * b for a, b in zip(r1, r2)] for r1, r2 in zip(p1, p2)]
    assert mixed == p

    decks = [[[-1, 1], [-1, 1], [-2, 1]], [[1, -1], [1, -2], [0, -1]]]
    config, counters, log = ss.stabilize(model, [3, 2], decks=decks, policy="largest")
    assert config == [1, 2] and counters == [3, 2] and len(log) == 5

    assert ss.random_stabilize(model, [2, 2], seed=3) == [2, 2]

    sim = ss.simulate(model, 200_000, mu=mu, seed=7)
    exact = [pi.get(tuple(s), Fraction(0)) for s in sim["states"]]
    tv = ss.tv_distance(sim["frequencies"], [float(x) for x in exact])
    assert tv < 0.02, tv

    chain = ss.single_grain_path(3)
    assert chain.dissipativity()["layers"] == [[1], [2], [3]]
    assert ss.random_stabilize(chain, [4, 2, 5], seed=0) == [1, 1, 1]

    round_trip = ss.Model.from_json(model.to_json())
    assert round_trip.topplings() == model.topplings()

    try:
        ss.Model([[([-1], "1/2")]])
    except ValueError as e:
        assert "sum" in str(e).lower(), e
    else:
        raise AssertionError("invalid model accepted")

    print(f"python bindings ok (TV = {tv:.4f})")


if __name__ == "__main__":
    main()
