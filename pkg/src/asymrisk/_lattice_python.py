"""Pure-numpy lattice stepping kernels.

Reference implementation of the backward-step kernels. The compiled module
asymrisk._lattice_kernels mirrors these operation-for-operation and the two
must produce bit-identical arrays (a test asserts this), so any change here
has to be mirrored there.

Averages are computed as 0.25*((a+c)+(b+d)) rather than summing four terms
left to right: when the four children are equal this is exact in floating
point (doubling and quartering are exponent shifts), which is what makes
constant payoffs propagate bit-for-bit.
"""

import numpy as np

__all__ = ["step_2d", "step_1d"]


def step_2d(y_next, g1, g2, dt, sqrt_dt):
    """One backward step of the two-driver lattice.

    Parameters
    ----------
    y_next : (t+2, t+2) array
        Child layer; axis 0 indexes up-moves of the first driver.
    g1, g2 : float
        Quadratic driver weights for the two martingale components.
    dt, sqrt_dt : float
        Step size and its square root.

    Returns
    -------
    (y, z1, z2, z12) : arrays of shape (t+1, t+1)
        Parent layer values, then the two first-order coefficients and
        the mixed second-order coefficient of the child expansion.
    """
    a = y_next[:-1, :-1]
    b = y_next[1:, :-1]
    c = y_next[:-1, 1:]
    d = y_next[1:, 1:]
    s0 = a + c  # first driver down
    s1 = b + d  # first driver up
    e0 = a + b  # second driver down
    e1 = c + d  # second driver up
    q = 0.25 / sqrt_dt
    z1 = q * (s1 - s0)
    z2 = q * (e1 - e0)
    z12 = (0.25 / dt) * ((a + d) - (b + c))
    y = 0.25 * (s0 + s1) + (g1 * (z1 * z1) + g2 * (z2 * z2)) * dt
    return y, z1, z2, z12


def step_1d(y_next, g, dt, sqrt_dt):
    """One backward step of the single-driver lattice.

    y_next is the (t+2,) child layer; returns (y, z) of shape (t+1,).
    """
    lo = y_next[:-1]
    hi = y_next[1:]
    q = 0.5 / sqrt_dt
    z = q * (hi - lo)
    y = 0.5 * (lo + hi) + g * (z * z) * dt
    return y, z
