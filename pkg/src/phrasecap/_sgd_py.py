"""Pure-numpy SGD epoch kernel (fallback when the compiled twin is absent).

Both kernels implement the identical update: one logistic-loss step per
(image, positive phrase) sample, N presampled negatives per positive, with
all gradients evaluated at the pre-step parameters.
"""

import numpy as np


def _softplus(z):
    # log(1 + e^z), stable for large |z|
    return np.logaddexp(0.0, z)


def sgd_epoch(x_rows, u, v, img_idx, pos_ids, neg_ids, lr):
    """Run one epoch of per-sample SGD updates in place. Returns total loss.

    x_rows: (images, n); u: (n, m); v: (m, C);
    img_idx, pos_ids: (steps,); neg_ids: (steps, N).
    """
    total = 0.0
    for t in range(len(img_idx)):
        x = x_rows[img_idx[t]]
        pos = pos_ids[t]
        negs = neg_ids[t]

        g = x @ u
        f_pos = g @ v[:, pos]
        f_neg = g @ v[:, negs]

        total += _softplus(-f_pos) + _softplus(f_neg).sum()

        # dL/df: positive -sigmoid(-f), negatives sigmoid(f)
        r_pos = -1.0 / (1.0 + np.exp(f_pos))
        r_neg = 1.0 / (1.0 + np.exp(-f_neg))

        dg = r_pos * v[:, pos] + v[:, negs] @ r_neg

        u -= lr * np.outer(x, dg)
        v[:, pos] -= lr * r_pos * g
        # negatives may repeat (sampling with replacement): accumulate per draw
        np.subtract.at(v.T, negs, lr * np.outer(r_neg, g))
    return total
