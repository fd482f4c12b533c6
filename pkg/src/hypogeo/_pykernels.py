"""Pure Python/numpy versions of the compiled kernels.

Same call signatures and return conventions as ``_ckernels``. The polynomial
product uses Kronecker substitution into a single Python integer, so it never
overflows and delegates the convolution to CPython's big-integer multiply.
"""

import numpy as np


def poly_mul_packed(keys_a, coefs_a, keys_b, coefs_b):
    ka = [int(k) for k in keys_a]
    kb = [int(k) for k in keys_b]
    ca = [int(c) for c in coefs_a]
    cb = [int(c) for c in coefs_b]
    if not ka or not kb:
        return np.empty(0, dtype=np.int64), []
    # |product coefficient| <= sum|a| * max|b|; one extra bit for the sign offset
    bound = sum(abs(c) for c in ca) * max(abs(c) for c in cb)
    bits = bound.bit_length() + 2
    bits = (bits + 7) // 8 * 8
    step = bits // 8
    A = _pack(ka, ca, step)
    B = _pack(kb, cb, step)
    P = A * B
    nkeys = max(ka) + max(kb) + 1
    half = 1 << (bits - 1)
    # shift every digit by `half` so the base-2**bits expansion has no borrows
    offset = int.from_bytes((bytes(step - 1) + b"\x80") * nkeys, "little")
    raw = (P + offset).to_bytes(step * nkeys, "little")
    keys = []
    coefs = []
    from_bytes = int.from_bytes
    for k in range(nkeys):
        d = from_bytes(raw[k * step:(k + 1) * step], "little") - half
        if d:
            keys.append(k)
            coefs.append(d)
    return np.asarray(keys, dtype=np.int64), coefs


def _pack(keys, coefs, step):
    size = step * (max(keys) + 1)
    pos = bytearray(size)
    neg = bytearray(size)
    for k, c in zip(keys, coefs):
        if c > 0:
            pos[k * step:(k + 1) * step] = c.to_bytes(step, "little")
        elif c < 0:
            neg[k * step:(k + 1) * step] = (-c).to_bytes(step, "little")
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def marching_squares(f, level):
    f = np.asarray(f, dtype=np.float64) - level
    v0 = f[:-1, :-1]
    v1 = f[1:, :-1]
    v2 = f[1:, 1:]
    v3 = f[:-1, 1:]
    code = ((v0 > 0).astype(np.int64) | ((v1 > 0) << 1) | ((v2 > 0) << 2)
            | ((v3 > 0) << 3))
    ci, cj = np.nonzero((code != 0) & (code != 15))
    if ci.size == 0:
        return np.empty((0, 4)), np.empty((0, 2), dtype=np.int64)
    c = code[ci, cj]
    vals = np.stack([v0[ci, cj], v1[ci, cj], v2[ci, cj], v3[ci, cj]], axis=1)
    px = np.empty((ci.size, 4))
    py = np.empty((ci.size, 4))
    for e in range(4):
        va = vals[:, e]
        vb = vals[:, (e + 1) % 4]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(va == vb, 0.5, va / (va - vb))
        if e == 0:
            px[:, e], py[:, e] = ci + t, cj
        elif e == 1:
            px[:, e], py[:, e] = ci + 1, cj + t
        elif e == 2:
            px[:, e], py[:, e] = ci + 1 - t, cj + 1
        else:
            px[:, e], py[:, e] = ci, cj + 1 - t

    segs = []
    cells = []
    for idx in range(ci.size):
        k = int(c[idx])
        if k == 5 or k == 10:
            center = vals[idx].mean()
            pairs = ((0, 1), (2, 3)) if (k == 5) == (center > 0) else ((3, 0), (1, 2))
        else:
            crossing = [e for e in range(4)
                        if ((k >> e) & 1) != ((k >> ((e + 1) % 4)) & 1)]
            pairs = ((crossing[0], crossing[1]),)
        for a, b in pairs:
            segs.append((px[idx, a], py[idx, a], px[idx, b], py[idx, b]))
            cells.append((ci[idx], cj[idx]))
    return np.asarray(segs, dtype=np.float64), np.asarray(cells, dtype=np.int64)
