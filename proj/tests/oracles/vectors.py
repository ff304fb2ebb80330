"""Independent reference values for the C++ unit tests.

Run with python3; prints every vector the tests freeze. Uses only hashlib,
struct, math and numpy, none of the C++ code.
"""
import hashlib
import math
import struct

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    z = (z + GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def stream_key(seed, a, b):
    return mix64(mix64(mix64(seed) ^ a) ^ b)


class SplitMix:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + GOLDEN) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def open_unit(self):
        return ((self.next() >> 11) + 0.5) * 2.0**-53

    def unit(self):
        return (self.next() >> 11) * 2.0**-53

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.unit()

    def normal(self):
        u1 = self.open_unit()
        u2 = self.unit()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def below(self, n):
        threshold = (-n) % n
        while True:
            x = self.next()
            if x >= threshold:
                return x % n


def sha(b):
    return hashlib.sha256(b).digest()


def u32(v):
    return struct.pack(">I", v)


def u64(v):
    return struct.pack(">Q", v)


def f64(v):
    return struct.pack(">d", v)


def params_bytes(seed, n_events, beam, cut, n_layers, configs):
    out = u64(seed) + u32(n_events) + f64(beam) + f64(cut) + u32(n_layers) + u32(len(configs))
    for i, (sigma, split) in enumerate(configs):
        out += u32(i) + f64(sigma) + f64(split)
    return out


ROOT = sha(b"root-authority")
ZERO = bytes(32)


def block_bytes(number, ts, prev, txs, winner, params, data_hash):
    out = u64(number) + u64(ts) + prev + u32(len(txs))
    for tx in txs:
        out += tx
    return out + winner + params + data_hash


def main():
    print("splitmix64(0) first three:", [hex(v) for v in (lambda r: [r.next(), r.next(), r.next()])(SplitMix(0))])
    print("stream_key(42, 1, 2):", hex(stream_key(42, 1, 2)))

    genesis = block_bytes(0, 0, ZERO, [], ROOT, params_bytes(0, 0, 0.0, 0.0, 0, []), ZERO)
    print("genesis size:", len(genesis))
    print("root address:", ROOT.hex())
    genesis_hash = sha(genesis)
    print("genesis hash:", genesis_hash.hex())
    print("work seed(zero prev, 1):", hex(int.from_bytes(sha(ZERO + u64(1))[:8], "big")))
    print("work seed(genesis, 1):", hex(int.from_bytes(sha(genesis_hash + u64(1))[:8], "big")))

    miner = sha(b"miner-0")
    key = sha(b"key-0")
    tag = sha(key + miner + ROOT + u64(5) + u64(0))
    print("auth tag(miner-0 -> root, 5, nonce 0, key sha('key-0')):", tag.hex())

    tx = miner + ROOT + u64(5) + u64(0) + tag
    params = params_bytes(7, 10, 10.0, 1.0, 6, [(0.02, 8.0)])
    b1 = block_bytes(1, 1000, genesis_hash, [tx], miner, params, sha(b"data"))
    print("block1 size:", len(b1), "hash:", sha(b1).hex())

    # generation and transport for seed 42, one config (sigma 0.02, split 8),
    # 3 events, beam 10, cut 1, 6 layers
    seed, beam, cut, layers, sigma, split = 42, 10.0, 1.0, 6, 0.02, 8.0
    prims = []
    for ev in range(3):
        r = SplitMix(stream_key(seed, (0 << 2) | 1, ev))
        count = 1 + r.next() % 3
        for _ in range(count):
            e = beam * -math.log(r.open_unit())
            s = r.uniform(-1.0, 1.0)
            prims.append((ev, e, s))
    print("primaries:")
    for p in prims:
        print("  ", p[0], repr(p[1]), repr(p[2]))

    steps = 0
    hits = []
    for ev in range(3):
        r = SplitMix(stream_key(seed, (0 << 2) | 2, ev))
        for pe, e0, s0 in [p for p in prims if p[0] == ev]:
            stack = [(e0, s0, 0)]
            while stack:
                e, s, start = stack.pop()
                for layer in range(start, layers):
                    if e < cut:
                        break
                    steps += 1
                    x = layer + 1.0
                    dep = 0.1 * e
                    hits.append((layer, s * x + sigma * r.normal(), dep))
                    e -= dep
                    if layer + 1 == layers:
                        break
                    if r.unit() < e / (e + split):
                        stack.append((0.5 * e, s + 0.05, layer + 1))
                        stack.append((0.5 * e, s - 0.05, layer + 1))
                        break
    print("transport steps:", steps, "hits:", len(hits))
    print("first hit:", hits[0][0], repr(hits[0][1]), repr(hits[0][2]))
    print("last hit:", hits[-1][0], repr(hits[-1][1]), repr(hits[-1][2]))
    print("sum u:", repr(math.fsum(h[1] for h in hits)), "sum e_dep:", repr(math.fsum(h[2] for h in hits)))

    # brute-force Monte Carlo of the branching process (numpy RNG, no
    # shared code): mean steps per primary, beam 10, cut 1, split 8, 6 layers
    rng = np.random.default_rng(20240521)
    n = 200_000
    totals = np.empty(n)
    energies = rng.exponential(beam, size=n)
    for t in range(n):
        stack = [(energies[t], 0)]
        count = 0
        while stack:
            e, start = stack.pop()
            for layer in range(start, layers):
                if e < cut:
                    break
                count += 1
                e *= 0.9
                if layer + 1 == layers:
                    break
                if rng.random() < e / (e + split):
                    stack.append((0.5 * e, layer + 1))
                    stack.append((0.5 * e, layer + 1))
                    break
        totals[t] = count
    print("MC steps/primary: mean %.6f se %.6f" % (totals.mean(), totals.std(ddof=1) / math.sqrt(n)))

    # step_count distribution for one primary of energy 8, cut 1, split 8,
    # 3 layers, 100000 trials
    rng = np.random.default_rng(7)
    n = 100_000
    counts = np.empty(n, dtype=int)
    for t in range(n):
        stack = [(8.0, 0)]
        count = 0
        while stack:
            e, start = stack.pop()
            for layer in range(start, 3):
                if e < 1.0:
                    break
                count += 1
                e *= 0.9
                if layer + 1 == 3:
                    break
                if rng.random() < e / (e + 8.0):
                    stack.append((0.5 * e, layer + 1))
                    stack.append((0.5 * e, layer + 1))
                    break
        counts[t] = count
    values, freq = np.unique(counts, return_counts=True)
    print("small transport: mean %.6f se %.6f" % (counts.mean(), counts.std(ddof=1) / math.sqrt(n)))
    print("small transport distribution:", {int(v): round(float(f) / n, 5) for v, f in zip(values, freq)})

    # least-squares state for u = 1.0, 2.1, 2.9 at x = 1, 2, 3
    design = np.array([[1.0, 1.0], [1.0, 2.0], [1.0, 3.0]])
    state, *_ = np.linalg.lstsq(design, np.array([1.0, 2.1, 2.9]), rcond=None)
    print("three point least squares: a %.15f b %.15f" % (state[0], state[1]))


if __name__ == "__main__":
    main()
