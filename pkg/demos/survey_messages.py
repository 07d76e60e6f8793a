"""Watch survey messages settle on one neighborhood and drive a decision.

Each clause-to-variable survey carries a warning weight; each
variable-to-clause message splits its mass between "pushed toward the
clause", "pushed away", and "unconstrained".  A few rounds usually
settle the weights on a shallow ball.  The final per-variable fields
(W1, W0, Wstar) order the two bit choices; exact ties fall to a coin.

Complementing every clause sign swaps the two pushed components
everywhere, so the root decision flips bit for bit.  The last lines
check that on this neighborhood.
"""

import numpy as np

from naesat import (
    decide,
    draw_sp_init,
    random_neighborhood,
    run_surveys,
    sp_fields,
    sp_init,
    sp_iterate,
    swap_init,
)


def main() -> None:
    rng = np.random.default_rng(29)
    nb = random_neighborhood(rng, n=45, k=3, d=1.9, radius=4, reduce_frac=0.4)
    ball = nb.instance
    print(f"ball: {ball.n} variables, {ball.m} clauses, root is local x1")

    init = draw_sp_init(nb, rng)
    state = sp_init(nb, init)
    prev = None
    for t in range(1, 7):
        state = sp_iterate(state, nb)
        fields = sp_fields(state, nb)
        w1, w0, ws = fields[1]
        move = ""
        if prev is not None:
            delta = max(abs(a - b) for a, b in zip((w1, w0, ws), prev))
            move = f"  (max field move {delta:.2e})"
        prev = (w1, w0, ws)
        print(f"round {t}: root W1={w1:.4f} W0={w0:.4f} Wstar={ws:.4f}{move}")

    coin = float(rng.random())
    bit = decide(fields, 1, coin)
    print(f"decision at root: {bit}")

    mirror_fields = run_surveys(nb.complement(), swap_init(init), 6)
    flipped = decide(mirror_fields, 1, 1.0 - coin)
    print(f"decision on the complemented ball: {flipped} (flips: {flipped == 1 - bit})")


if __name__ == "__main__":
    main()
