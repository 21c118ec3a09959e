"""Independent reference models used to check the backends."""
from __future__ import annotations

from itertools import product


def klein_affine(word_letters, x: int, y: int):
    """Klein group acting freely on the plane: x(s, t) = (s + 1, -t),
    y(s, t) = (s, t + 1).  Elements are maps (s, t) -> (s + a, e t + b)."""
    a, e, b = 0, 1, 0
    for g, s in word_letters:
        # compose self o letter: apply letter first
        if g == x:
            la, le, lb = (1, -1, 0) if s > 0 else (-1, -1, 0)
        else:
            la, le, lb = (0, 1, s)
        a, e, b = a + la, e * le, e * lb + b
    return (a, e, b)


def mat_mul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


S = ((0, -1), (1, 0))
S_INV = ((0, 1), (-1, 0))
V = ((1, -1), (1, 0))
V_INV = ((0, 1), (-1, 1))


def trefoil_model(word_letters, u: int = 0):
    """Faithful model of <u, v | u^2 = v^3>: SL(2, Z) image with the
    abelianisation (u -> 3, v -> 2)."""
    M = ((1, 0), (0, 1))
    ab = 0
    for g, s in word_letters:
        if g == u:
            M = mat_mul(M, S if s > 0 else S_INV)
            ab += 3 * s
        else:
            M = mat_mul(M, V if s > 0 else V_INV)
            ab += 2 * s
    return (M, ab)


def model_ball(model, ngens: int, r: int) -> int:
    """Size of the Cayley ball computed in the model."""
    ident = model([])
    seen = {ident: ()}
    frontier = [()]
    for _ in range(r):
        nxt = []
        for w in frontier:
            for g, s in product(range(ngens), (1, -1)):
                w2 = w + ((g, s),)
                k = model(list(w2))
                if k not in seen:
                    seen[k] = w2
                    nxt.append(w2)
        frontier = nxt
    return len(seen)


def brute_force_cones(G, r: int) -> int:
    """Count sign assignments on B_r that satisfy the cone axioms inside the ball."""
    ball = G.ball(r)
    elems = ball.nontrivial()
    reps = []
    seen = set()
    for g in elems:
        if g in seen:
            continue
        gi = G.inv(g)
        seen.add(g)
        seen.add(gi)
        reps.append(g)
    count = 0
    for bits in product((1, -1), repeat=len(reps)):
        sign = {}
        for g, s in zip(reps, bits):
            sign[g] = s
            sign[G.inv(g)] = -s
        if any(sign[g] == sign[G.inv(g)] for g in elems):
            continue
        ok = True
        for g in elems:
            if sign[g] < 0:
                continue
            for h in elems:
                if sign[h] < 0:
                    continue
                gh = G.mul(g, h)
                if not gh.syl or (gh in ball and sign[gh] < 0):
                    ok = False
                    break
            if not ok:
                break
        count += ok
    return count
