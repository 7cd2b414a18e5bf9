"""Numpy implementation of the sampling kernels.

Counter layout (shared with the compiled core, and relied on for
reproducibility):

* ``uniform_block``: one counter per draw.
* ``normal_block``: counters ``2j`` and ``2j + 1`` feed one Box-Muller draw
  (cosine branch only).
* ``weak_measure``: spin ``i`` uses ``3i`` (branch), ``3i + 1`` and
  ``3i + 2`` (Box-Muller).
* ``strong_measure``: spin ``i`` uses counter ``i``.

Complex arithmetic is spelled out on real and imaginary parts so that the
compiled core can follow the same operation order.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / 9007199254740992.0


def _mix64(z):
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def splitmix_block(key, start, n):
    ctr = np.arange(n, dtype=np.uint64) + np.uint64(start + 1)
    with np.errstate(over="ignore"):
        return _mix64(np.uint64(key) + ctr * GOLDEN)


def uniform_block(key, start, n):
    return (splitmix_block(key, start, n) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def _box_muller(u1, u2):
    return np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(_TWO_PI * u2)


def normal_block(key, start, n):
    u = uniform_block(key, start, 2 * n)
    return _box_muller(u[0::2], u[1::2])


def eigvecs(nx, ny, nz):
    """Eigenvectors of n.sigma as real/imag parts.

    Returns ``(pu, pdr, pdi, mu, mdr, mdi)``: the +1 eigenvector is
    ``(pu, pdr + i pdi)`` and the -1 eigenvector ``(mu, mdr + i mdi)``; both
    up-amplitudes are real and non-negative.
    """
    nx, ny, nz = np.broadcast_arrays(np.asarray(nx, float), np.asarray(ny, float),
                                     np.asarray(nz, float))
    r = np.hypot(nx, ny)
    safe = r > 0.0
    rr = np.where(safe, r, 1.0)
    ph_r = np.where(safe, nx / rr, 1.0)
    ph_i = np.where(safe, ny / rr, 0.0)
    cp = np.sqrt(np.clip((1.0 + nz) * 0.5, 0.0, 1.0))
    cm = np.sqrt(np.clip((1.0 - nz) * 0.5, 0.0, 1.0))
    # ties: a zero up-amplitude gets down-amplitude +1
    pdr = np.where(cp == 0.0, 1.0, cm * ph_r)
    pdi = np.where(cp == 0.0, 0.0, cm * ph_i)
    mdr = np.where(cm == 0.0, 1.0, -(cp * ph_r))
    mdi = np.where(cm == 0.0, 0.0, -(cp * ph_i))
    return cp, pdr, pdi, cm, mdr, mdi


def _project(er, ei_r, ei_i, ur, ui, dr, di):
    # <e|psi> with e = (er, ei_r + i ei_i), er real
    re = er * ur + (ei_r * dr + ei_i * di)
    im = er * ui + (ei_r * di - ei_i * dr)
    return re, im


def weak_measure(up, down, axis, delta_p, key, start):
    up = np.asarray(up, dtype=complex)
    down = np.asarray(down, dtype=complex)
    n = up.shape[0]
    ur, ui, dr, di = up.real, up.imag, down.real, down.imag
    pu, pdr, pdi, mu, mdr, mdi = eigvecs(*axis)
    cpr, cpi = _project(pu, pdr, pdi, ur, ui, dr, di)
    cmr, cmi = _project(mu, mdr, mdi, ur, ui, dr, di)

    u = uniform_block(key, start, 3 * n)
    plus = u[0::3] < (cpr * cpr + cpi * cpi)
    p = np.where(plus, 1.0, -1.0) + delta_p * _box_muller(u[1::3], u[2::3])

    inv_var = 1.0 / (delta_p * delta_p)
    nonneg = p >= 0.0
    with np.errstate(over="ignore"):  # the overflowing branch is discarded
        wp = np.where(nonneg, 1.0, np.exp(p * inv_var))
        wm = np.where(nonneg, np.exp(-p * inv_var), 1.0)
    apr, api = cpr * wp, cpi * wp
    amr, ami = cmr * wm, cmi * wm
    # a+ * (pu, pd) + a- * (mu, md)
    nur = apr * pu + amr * mu
    nui = api * pu + ami * mu
    ndr = (apr * pdr - api * pdi) + (amr * mdr - ami * mdi)
    ndi = (apr * pdi + api * pdr) + (amr * mdi + ami * mdr)
    norm = np.sqrt((nur * nur + nui * nui) + (ndr * ndr + ndi * ndi))
    dead = norm == 0.0
    if dead.any():
        nur = np.where(dead, np.where(plus, pu, mu), nur)
        nui = np.where(dead, 0.0, nui)
        ndr = np.where(dead, np.where(plus, pdr, mdr), ndr)
        ndi = np.where(dead, np.where(plus, pdi, mdi), ndi)
        norm = np.where(dead, 1.0, norm)
    new_up = (nur / norm) + 1j * (nui / norm)
    new_down = (ndr / norm) + 1j * (ndi / norm)
    return p, new_up, new_down


def strong_measure(up, down, axes, key, start):
    up = np.asarray(up, dtype=complex)
    down = np.asarray(down, dtype=complex)
    axes = np.asarray(axes, dtype=float)
    n = up.shape[0]
    ur, ui, dr, di = up.real, up.imag, down.real, down.imag
    if axes.ndim == 1:
        nx, ny, nz = (np.full(n, c) for c in axes)
    else:
        nx, ny, nz = axes[:, 0], axes[:, 1], axes[:, 2]
    # Bloch vector of (u, d): (2 Re u*d, 2 Im u*d, |u|^2 - |d|^2)
    bx = 2.0 * (ur * dr + ui * di)
    by = 2.0 * (ur * di - ui * dr)
    bz = (ur * ur + ui * ui) - (dr * dr + di * di)
    prob_plus = 0.5 * (1.0 + ((nx * bx + ny * by) + nz * bz))
    plus = uniform_block(key, start, n) < prob_plus
    pu, pdr, pdi, mu, mdr, mdi = eigvecs(nx, ny, nz)
    outcomes = np.where(plus, 1, -1).astype(np.int8)
    new_up = np.where(plus, pu, mu) + 0j
    new_down = np.where(plus, pdr, mdr) + 1j * np.where(plus, pdi, mdi)
    return outcomes, new_up, new_down
