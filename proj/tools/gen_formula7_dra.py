#!/usr/bin/env python3
"""Writes the Rabin automaton for the data-upload mission.

    F Up & (!Un U Up) & G(Ri -> F VD) & G(VD | RD -> X F Up)

States track two pending obligations (p1: a Risky visit still waiting for
ValuableData, p2: a data visit still waiting for a later Upload). Before the
first Upload a visit to Unsafe is fatal. After it, a three-valued counter
waits for "p1 clear" and then for "p2 discharged", and K is the state where
both have happened. p2 is discharged on a step that reads Up or starts with
nothing pending; its flag alone is not enough, because an Upload and a new
data visit on the same step keep it set while still meeting every deadline.
"""
import itertools
import sys

PROPS = ["VD", "RD", "Up", "Ri", "Un"]
SINK = 4


def pre(p1, p2):
    return 2 * p1 + p2


def post(p1, p2, c):
    return 5 + 3 * (2 * p1 + p2) + c


def flags(p1, p2, obs):
    n1 = (p1 or "Ri" in obs) and "VD" not in obs
    n2 = (p2 and "Up" not in obs) or "VD" in obs or "RD" in obs
    return int(n1), int(n2)


def counter(c, n1, discharged2):
    if c in (0, 2):
        if n1:
            return 0
        return 2 if discharged2 else 1
    return 2 if discharged2 else 1


def step(state, obs):
    if state == SINK:
        return SINK
    if state < SINK:
        p1, p2 = divmod(state, 2)
        n1, n2 = flags(p1, p2, obs)
        if "Up" in obs:
            return post(n1, n2, counter(0, n1, True))
        if "Un" in obs:
            return SINK
        return pre(n1, n2)
    p1, rest = divmod(state - 5, 6)
    p2, c = divmod(rest, 3)
    n1, n2 = flags(p1, p2, obs)
    return post(n1, n2, counter(c, n1, not p2 or "Up" in obs))


def main():
    out = sys.stdout if len(sys.argv) < 2 else open(sys.argv[1], "w")
    print("# F Up & (!Un U Up) & G(Ri -> F VD) & G(VD | RD -> X F Up)", file=out)
    print("# generated by tools/gen_formula7_dra.py", file=out)
    print("states 17", file=out)
    print("initial 0", file=out)
    print("props " + " ".join(PROPS), file=out)
    for s in range(17):
        for bits in itertools.product([0, 1], repeat=len(PROPS)):
            obs = [p for p, b in zip(PROPS, bits) if b]
            print(f"edge {s} {{{','.join(obs)}}} {step(s, obs)}", file=out)
    k = sorted(post(a, b, 2) for a in (0, 1) for b in (0, 1))
    print(f"pair L={{{SINK}}} K={{{','.join(map(str, k))}}}", file=out)


if __name__ == "__main__":
    main()
