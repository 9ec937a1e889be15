"""Smoke test for the kernel_contrast extension module.

Build and install first:  pip install -e crates/python --no-build-isolation
"""

import math

import kernel_contrast as kc


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    close(kc.k_sigmoid(math.log(3.0), 3.0), 0.5, 1e-12)
    close(kc.sigmoid(0.0), 0.5, 1e-15)

    data, t, h = kc.swiss_roll(200, 0.0, 1)
    assert len(data) == 200 and len(data[0]) == 3 and len(t) == 200
    g = kc.gram(data[:20], "gaussian", sigma2=4.0)
    assert kc.is_psd(g)

    emb, eig = kc.pca(data, 2)
    assert len(emb[0]) == 2 and eig[0] >= eig[1]
    assert len(kc.isomap(data, 2, k=10)) == 200
    assert len(kc.lle(data, 2, k=10)) == 200
    assert len(kc.laplacian_eigenmaps(data, 2, t=5.0, k=10)) == 200

    feats = kc.rff_features(data[:5], 100, sigma2=25.0, seed=3)
    assert len(feats[0]) == 200
    ny = kc.nystrom_features(data[:30], list(range(30)), 5, sigma2=25.0)
    assert len(ny) == 30 and len(ny[0]) == 5

    values, tables = kc.mercer([[3, 0, 0], [0, 2, 0], [0, 0, 1]], [1 / 3] * 3)
    close(values[0], 1.0, 1e-12)
    learned, cmp = kc.eigenfunctions([[3, 0, 0], [0, 2, 0], [0, 0, 1]], [1 / 3] * 3, 2)
    for eigenvalue, estimate, cosine, _gap in cmp:
        close(estimate, eigenvalue, 1e-6)
        assert cosine > 0.999

    proc = kc.PairProcess.blocks([2, 2], 0.0)
    assert len(proc) == 4
    value, assignment = proc.sparsest_partition(2)
    close(value, 0.0, 1e-12)
    assert assignment[0] == assignment[1] != assignment[2] == assignment[3]
    _, gap = proc.train_spectral(2)
    assert gap < 1e-3

    soft = kc.PairProcess.random(3, seed=2)
    _, tv, score_err = soft.train_infonce(3, max_iterations=5000)
    assert tv < 1e-2 and score_err < 1e-2

    tokens = "a b c a c b b a c c a b a a c b".split()
    _, _, err = kc.sgns(tokens, 3, k=2.0, window=2, max_iterations=100000)
    assert err < 1e-3

    try:
        kc.PairProcess(["a", "b"], [0.5, 0.5], [[1, 0], [0.2, 0.2]])
    except ValueError as e:
        assert "row 1" in str(e)
    else:
        raise AssertionError("non-stochastic augmentation accepted")

    print("kernel_contrast smoke test passed")


if __name__ == "__main__":
    main()
