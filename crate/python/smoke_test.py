"""Quick check that the compiled extension imports and behaves."""

import math

import compnmf


def main():
    # U(1, 1, z) = e^z E1(z); at z = 1 that is e * 0.21938393439552...
    lu = compnmf.log_kummer_u(1.0, 1.0, 1.0)
    assert abs(lu - math.log(math.e * 0.21938393439552029)) < 1e-9, lu

    mu_star = compnmf.concentration_point(0.001, 10.0, 1.0)
    assert 4.4 < mu_star < 4.6, mu_star

    rows = compnmf.elbow_curve(100, [0.0, 10.0])
    assert rows[0][2] < 0.005
    assert abs(rows[1][2] - mu_star) / mu_star < 0.1

    assert abs(compnmf.cosine_similarity([1.0, 0.0], [1.0, 1.0]) - 2 ** -0.5) < 1e-12

    data = compnmf.simulate(30, tau=0.0, k_new=2, seed=3)
    assert len(data["counts"]) == 96 and len(data["counts"][0]) == 30
    assert len(data["labels"]) == 6

    res = compnmf.fit(data["counts"], iters=600, burnin=400, seed=1)
    print("K* =", res["K_star"], "chain", res["selected_chain"])
    assert 1 <= res["K_star"] <= 20

    try:
        compnmf.fit([[1, 2], [3]])
    except ValueError:
        pass
    else:
        raise AssertionError("ragged input accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
