#!/usr/bin/env python3
"""Independent scalar-loop oracle. Regenerates the golden files under
tests/data/ and prints the scalar golden values embedded in the C++ tests.

Deliberately written with plain triple loops (no vectorized shortcuts) so it
shares no code path with the library under test.
"""
import json
import math
import os
import struct

MASK = (1 << 64) - 1


def splitmix64_stream(seed):
    x = seed & MASK
    while True:
        x = (x + 0x9E3779B97F4A7C15) & MASK
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        z = z ^ (z >> 31)
        yield z


def to_unit(u):
    # top 53 bits -> [0,1) -> [-1,1)
    return (u >> 11) / float(1 << 53) * 2.0 - 1.0


def rng_fill(seed, h, w, c, f32=False):
    gen = splitmix64_stream(seed)
    data = []
    for _ in range(h * w * c):
        v = to_unit(next(gen))
        if f32:
            v = struct.unpack('<f', struct.pack('<f', v))[0]
        data.append(v)
    return h, w, c, data


def at(t, i, j, k):
    h, w, c, data = t
    return data[(i * w + j) * c + k]


def rng_weights(seed, out_c, in_c, kh, kw):
    gen = splitmix64_stream(seed)
    ws = [to_unit(next(gen)) for _ in range(out_c * in_c * kh * kw)]
    bs = [to_unit(next(gen)) for _ in range(out_c)]
    return out_c, in_c, kh, kw, ws, bs


def avg_pool_valid(t, k, d=1):
    h, w, c, data = t
    r = (k - 1) // 2
    out = [0.0] * (h * w * c)
    for i in range(h):
        for j in range(w):
            cnt = 0
            for a in range(k):
                for b in range(k):
                    ii = i + d * (a - r)
                    jj = j + d * (b - r)
                    if 0 <= ii < h and 0 <= jj < w:
                        cnt += 1
            for ch in range(c):
                s = 0.0
                for a in range(k):
                    for b in range(k):
                        ii = i + d * (a - r)
                        jj = j + d * (b - r)
                        if 0 <= ii < h and 0 <= jj < w:
                            s += at(t, ii, jj, ch)
                out[(i * w + j) * c + ch] = s / cnt
    return (h, w, c, out)


def conv2d(t, wt, dil):
    h, w, c, data = t
    out_c, in_c, kh, kw, ws, bs = wt
    assert in_c == c
    rh = (kh - 1) // 2
    rw = (kw - 1) // 2
    out = [0.0] * (h * w * out_c)
    for i in range(h):
        for j in range(w):
            for o in range(out_c):
                s = bs[o]
                for ci in range(in_c):
                    for a in range(kh):
                        for b in range(kw):
                            ii = i + dil * (a - rh)
                            jj = j + dil * (b - rw)
                            if 0 <= ii < h and 0 <= jj < w:
                                wv = ws[((o * in_c + ci) * kh + a) * kw + b]
                                s += wv * at(t, ii, jj, ci)
                out[(i * w + j) * out_c + o] = s
    return (h, w, out_c, out)


def global_avg(t):
    h, w, c, data = t
    return [sum(at(t, i, j, ch) for i in range(h) for j in range(w)) / (h * w)
            for ch in range(c)]


def bilinear(t, oh, ow):
    h, w, c, data = t
    out = [0.0] * (oh * ow * c)
    for i in range(oh):
        si = 0.0 if oh == 1 else i * (h - 1) / (oh - 1)
        i0 = min(int(math.floor(si)), h - 1)
        i1 = min(i0 + 1, h - 1)
        fi = si - i0
        for j in range(ow):
            sj = 0.0 if ow == 1 else j * (w - 1) / (ow - 1)
            j0 = min(int(math.floor(sj)), w - 1)
            j1 = min(j0 + 1, w - 1)
            fj = sj - j0
            for ch in range(c):
                v = (at(t, i0, j0, ch) * (1 - fi) * (1 - fj)
                     + at(t, i0, j1, ch) * (1 - fi) * fj
                     + at(t, i1, j0, ch) * fi * (1 - fj)
                     + at(t, i1, j1, ch) * fi * fj)
                out[(i * ow + j) * c + ch] = v
    return (oh, ow, c, out)


def concat(ts):
    h, w, _, _ = ts[0]
    c = sum(t[2] for t in ts)
    out = [0.0] * (h * w * c)
    for i in range(h):
        for j in range(w):
            off = 0
            for t in ts:
                for ch in range(t[2]):
                    out[(i * w + j) * c + off + ch] = at(t, i, j, ch)
                off += t[2]
    return (h, w, c, out)


def write_fmap(path, t, f32=False):
    h, w, c, data = t
    with open(path, 'wb') as f:
        f.write(b'VPFM')
        f.write(struct.pack('<I', 1))
        f.write(bytes([0 if f32 else 1, 0, 0, 0]))
        f.write(struct.pack('<III', h, w, c))
        fmt = '<f' if f32 else '<d'
        for v in data:
            f.write(struct.pack(fmt, v))


def checksum(t, seed):
    gen = splitmix64_stream(seed)
    return sum(v * to_unit(next(gen)) for v in t[3])


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    data_dir = os.path.join(here, '..', 'data')
    os.makedirs(data_dir, exist_ok=True)
    scalars = {}

    # first splitmix64 draw of seed 1, mapped to [-1,1)
    scalars['rng_seed1_first'] = to_unit(next(splitmix64_stream(1)))

    # pyramid_naive(rng_fill(seed=7, 16x16x2), k=3, L=2)
    x7 = rng_fill(7, 16, 16, 2)
    write_fmap(os.path.join(data_dir, 'pyramid_s7_l1.fmap'), avg_pool_valid(x7, 3))
    write_fmap(os.path.join(data_dir, 'pyramid_s7_l2.fmap'), avg_pool_valid(x7, 9))

    # global_avg_pool(rng_fill(seed=3, 8x8x4))
    scalars['gap_seed3'] = global_avg(rng_fill(3, 8, 8, 4))

    # conv2d golden: seeds 11 (input 5x5x3) / 12 (weights 2x3x3x3), dilation 2
    write_fmap(os.path.join(data_dir, 'conv_s11_s12_d2.fmap'),
               conv2d(rng_fill(11, 5, 5, 3), rng_weights(12, 2, 3, 3, 3), 2))

    # image_level_feature: X = rng(31, 6x6x3), W = rng_weights(32, 4x3x1x1)
    v = global_avg(rng_fill(31, 6, 6, 3))
    oc, ic, _, _, ws, bs = rng_weights(32, 4, 3, 1, 1)
    scalars['image_level_s31'] = [
        bs[o] + sum(ws[o * ic + ci] * v[ci] for ci in range(ic)) for o in range(oc)]

    # full pipeline: module_b (naive) on rng(41, 33x33x16), branch_out_c=8,
    # image-level branch, head proj 40->3, upsample x8 to 264x264, checksum
    x = rng_fill(41, 33, 33, 16)
    branches = []
    for idx, (pk, cd) in enumerate([(1, 1), (3, 3), (9, 9), (27, 27)]):
        pooled = x if pk == 1 else avg_pool_valid(x, pk)
        wt = rng_weights(100 + idx, 8, 16, 3, 3)
        branches.append(conv2d(pooled, wt, cd))
    y = concat(branches)
    vg = global_avg(x)
    oc, ic, _, _, ws, bs = rng_weights(200, 8, 16, 1, 1)
    yg_vec = [bs[o] + sum(ws[o * ic + ci] * vg[ci] for ci in range(ic))
              for o in range(oc)]
    yg = (33, 33, 8, [yg_vec[ch] for _ in range(33 * 33) for ch in range(8)])
    proj = rng_weights(300, 3, 40, 1, 1)
    logits = conv2d(concat([y, yg]), proj, 1)
    up = bilinear(logits, 264, 264)
    scalars['pipeline_s41_checksum'] = checksum(up, 999)

    with open(os.path.join(data_dir, 'golden_scalars.json'), 'w') as f:
        json.dump(scalars, f, indent=1)
    print(json.dumps(scalars, indent=1))


if __name__ == '__main__':
    main()
