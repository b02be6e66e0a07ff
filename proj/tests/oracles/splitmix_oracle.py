#!/usr/bin/env python3
"""Independent re-implementation of the documented RNG and tweak draw order.

Prints the golden values frozen into tests/test_rng.cpp and
tests/test_tweak.cpp.
"""

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SPECIALS = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class SplitMix:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + GOLDEN) & MASK
        return mix64(self.state)

    def uniform01(self):
        return (self.next() >> 11) * 2.0 ** -53

    def below(self, n):
        if n <= 1:
            return 0
        threshold = ((1 << 64) - n) % n
        while True:
            r = self.next()
            if r >= threshold:
                return r % n

    def shuffle(self, items):
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & MASK
    return h


def fnv1a32(data):
    h = 2166136261
    for b in data:
        h = ((h ^ b) * 16777619) & 0xFFFFFFFF
    return h


def derive_tag(master, tag):
    return mix64(master ^ fnv1a64(tag.encode()))


def derive_index(master, i):
    return mix64((master + (i + 1) * GOLDEN) & MASK)


def tweak_once(word, p, q, f, g, rng):
    out = []
    for c in word:
        if "a" <= c <= "z":
            if rng.uniform01() < f:
                c = c.upper()
        elif "A" <= c <= "Z":
            if rng.uniform01() < g:
                c = c.lower()
        elif "0" <= c <= "9":
            if rng.uniform01() < q:
                pick = rng.below(9)
                if pick >= int(c):
                    pick += 1
                c = str(pick)
        elif c in SPECIALS:
            if rng.uniform01() < p:
                orig = SPECIALS.index(c)
                pick = rng.below(31)
                if pick >= orig:
                    pick += 1
                c = SPECIALS[pick]
        out.append(c)
    return "".join(out)


def main():
    r = SplitMix(42)
    print("next(42) x3:", ["0x%016x" % r.next() for _ in range(3)])
    print("fnv1a64('password') = 0x%016x" % fnv1a64(b"password"))
    print("fnv1a32('<pa') = %d" % fnv1a32(b"<pa"))
    print("derive(7,'split') = 0x%016x" % derive_tag(7, "split"))
    print("derive(7,3) = 0x%016x" % derive_index(7, 3))
    items = list(range(10))
    SplitMix(7).shuffle(items)
    print("shuffle(0..9, seed 7) =", items)
    rng = SplitMix(42)
    print("tweak_once('p@ss1', seed 42, p=q=f=0.5, g=0) =",
          repr(tweak_once("p@ss1", 0.5, 0.5, 0.5, 0.0, rng)))
    rng = SplitMix(42)
    seq = [tweak_once("p@ss1", 0.5, 0.5, 0.5, 0.0, rng) for _ in range(4)]
    print("four successive tweaks:", seq)


if __name__ == "__main__":
    main()
