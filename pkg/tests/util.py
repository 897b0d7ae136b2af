import numpy as np

from sbstack.chain import channel_sample, noise_sample, snr_to_sigma
from sbstack.constellation import ConstellationSpec
from sbstack.lattice import RealLatticeSystem, TriangularSystem, qr_reduce, realify_matrix


def mimo_trial(rng, m, n, q, snr_db):
    """Random SM transmission; returns (reduced system, sent point, generator, y)."""
    a = ConstellationSpec(q)
    x = a.from_shifted(rng.integers(0, a.side, 2 * m))
    h = realify_matrix(channel_sample(m, n, rng).entries)
    sigma2 = snr_to_sigma(snr_db, m, a.energy)
    y = h @ x + noise_sample(2 * n, sigma2, rng)
    return qr_reduce(RealLatticeSystem(h, y, sigma2)), x, h, y


def random_triangular(rng, n, scale=1.0):
    r = np.triu(rng.standard_normal((n, n)))
    r[np.diag_indices(n)] = np.abs(np.diag(r)) + 0.3
    z = rng.standard_normal(n) * scale
    return TriangularSystem(r, z, noise_var=0.5)


def mgs(a):
    """Modified Gram-Schmidt QR, used as an independent oracle."""
    a = np.array(a, dtype=float)
    m, n = a.shape
    q = a.copy()
    r = np.zeros((n, n))
    for k in range(n):
        r[k, k] = np.linalg.norm(q[:, k])
        q[:, k] /= r[k, k]
        for j in range(k + 1, n):
            r[k, j] = q[:, k] @ q[:, j]
            q[:, j] -= r[k, j] * q[:, k]
    return q, r
