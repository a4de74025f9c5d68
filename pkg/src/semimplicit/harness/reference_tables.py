"""Published reference errors for the eight convergence tables.

Rows are ``(N, L2, L1, Linf)`` keyed by table id and scheme key (the
``gamma`` string for Rosenbrock tables, ``p`` for SI-PC BDF tables with
``mu = p``).  The reference norms are amplitude-normalised: a unit sine
has unit L1, L2 and Linf norm.  :data:`REFERENCE_SCALE` converts our
mean-value norms to that convention.
"""

from __future__ import annotations

import math
from typing import Dict, List, Tuple

from ..core import ConfigurationError

Row = Tuple[int, float, float, float]

# ours * scale ~ reference, per norm (L2, L1, Linf)
REFERENCE_SCALE = (math.sqrt(2.0), math.pi / 2.0, 1.0)

REFERENCE: Dict[str, Dict[object, List[Row]]] = {
    "R1": {
        "13/50": [
            (40, 5.7907e-04, 5.4529e-04, 9.1249e-04),
            (80, 8.8345e-05, 8.8124e-05, 1.1886e-04),
            (160, 1.2787e-05, 1.2933e-05, 1.4922e-05),
            (320, 1.8538e-06, 1.8808e-06, 2.0453e-06),
            (640, 2.4342e-07, 2.4629e-07, 2.6306e-07),
        ],
        "3/4": [
            (40, 3.8819e-03, 3.6931e-03, 5.2543e-03),
            (80, 7.9215e-04, 7.6735e-04, 1.0492e-03),
            (160, 1.4133e-04, 1.3994e-04, 1.7398e-04),
            (320, 2.4209e-05, 2.4271e-05, 2.8472e-05),
            (640, 3.7624e-06, 3.7299e-06, 4.4558e-06),
        ],
        "1-1/sqrt2": [
            (40, 6.1483e-04, 5.7829e-04, 9.7074e-04),
            (80, 9.6939e-05, 9.7006e-05, 1.2706e-04),
            (160, 1.4473e-05, 1.4714e-05, 1.6298e-05),
            (320, 2.163e-06, 2.1909e-06, 2.4405e-06),
            (640, 2.8932e-07, 2.9151e-07, 3.2393e-07),
        ],
    },
    "R2": {
        "3/10": [
            (80, 8.3717e-04, 7.4284e-04, 1.3899e-03),
            (160, 1.0634e-04, 9.289e-05, 2.6686e-04),
            (320, 1.3408e-05, 1.1537e-05, 4.4896e-05),
            (640, 1.6915e-06, 1.4397e-06, 7.3241e-06),
        ],
        "3/4": [
            (80, 8.4776e-04, 7.4989e-04, 1.4355e-03),
            (160, 1.0768e-04, 9.3767e-05, 2.7374e-04),
            (320, 1.3578e-05, 1.1653e-05, 4.5897e-05),
            (640, 1.7128e-06, 1.4538e-06, 7.4797e-06),
        ],
        "1-1/sqrt2": [
            (80, 8.3718e-04, 7.4284e-04, 1.3900e-03),
            (160, 1.0634e-04, 9.289e-05, 2.6686e-04),
            (320, 1.3408e-05, 1.1537e-05, 4.4896e-05),
            (640, 1.6915e-06, 1.4397e-06, 7.3242e-06),
        ],
    },
    "R2L10": {
        "3/10": [
            (80, 2.9585e-03, 2.7744e-03, 4.4434e-03),
            (160, 4.0981e-04, 3.240e-04, 7.5084e-04),
            (320, 5.7821e-05, 4.0098e-05, 1.7626e-04),
            (640, 7.3668e-06, 4.9762e-06, 2.3916e-05),
        ],
        "3/4": [
            (80, 3.0304e-03, 2.8452e-03, 4.5423e-03),
            (160, 4.1974e-04, 3.3414e-04, 7.6124e-04),
            (320, 5.9084e-05, 4.1481e-05, 1.7839e-04),
            (640, 7.5253e-06, 5.1517e-06, 2.4096e-05),
        ],
        "1-1/sqrt2": [
            (80, 2.9584e-03, 2.7743e-03, 4.4433e-03),
            (160, 4.0980e-04, 3.2398e-04, 7.5081e-04),
            (320, 5.7820e-05, 4.0096e-05, 1.7626e-04),
            (640, 7.3666e-06, 4.9760e-06, 2.3916e-05),
        ],
    },
    "R3": {
        "3/10": [
            (40, 2.4253e-03, 2.3884e-03, 2.7038e-03),
            (80, 3.1623e-04, 3.1654e-04, 3.3670e-04),
            (160, 4.1681e-05, 4.1714e-05, 4.3549e-05),
            (320, 5.3676e-06, 5.3466e-06, 5.7551e-06),
            (640, 6.8320e-07, 6.7657e-07, 7.6768e-07),
        ],
        "3/4": [
            (40, 2.1189e-02, 1.8986e-02, 2.8878e-02),
            (80, 3.3998e-03, 3.0674e-03, 5.1576e-03),
            (160, 4.6211e-04, 4.2009e-04, 6.8619e-04),
            (320, 5.6802e-05, 5.3937e-05, 8.0083e-05),
            (640, 7.1809e-06, 7.046e-06, 9.0132e-06),
        ],
        "1-1/sqrt2": [
            (40, 2.2745e-03, 2.2475e-03, 2.5267e-03),
            (80, 3.082e-04, 3.0777e-04, 3.3221e-04),
            (160, 4.1406e-05, 4.1176e-05, 4.3276e-05),
            (320, 5.3855e-06, 5.3251e-06, 5.9901e-06),
            (640, 6.8859e-07, 6.7672e-07, 7.9635e-07),
        ],
    },
    "M1": {
        2: [
            (40, 4.9945e-03, 4.8052e-03, 5.6425e-03),
            (80, 1.2655e-03, 1.2155e-03, 1.4290e-03),
            (160, 3.2178e-04, 3.0859e-04, 3.6369e-04),
            (320, 8.1720e-05, 7.8267e-05, 9.2704e-05),
        ],
        3: [
            (40, 5.1979e-04, 5.3682e-04, 4.7807e-04),
            (80, 6.3538e-05, 6.4531e-05, 6.2774e-05),
            (160, 7.9072e-06, 7.9777e-06, 8.1238e-06),
            (320, 9.8617e-07, 9.9384e-07, 1.0236e-06),
        ],
        4: [
            (40, 1.0994e-04, 1.0398e-04, 1.2210e-04),
            (80, 6.9958e-06, 6.5808e-06, 7.8412e-06),
            (160, 4.3934e-07, 4.1397e-07, 5.0557e-07),
            (320, 2.7497e-08, 2.5921e-08, 3.1928e-08),
        ],
    },
    "M2": {
        2: [
            (40, 4.7704e-02, 4.7454e-02, 5.2723e-02),
            (80, 1.3009e-02, 1.2740e-02, 1.5084e-02),
            (160, 3.3349e-03, 3.2462e-03, 3.9278e-03),
            (320, 8.4052e-04, 8.1573e-04, 9.9778e-04),
        ],
        3: [
            (40, 2.2582e-02, 2.2040e-02, 2.6428e-02),
            (80, 2.7192e-03, 2.6847e-03, 3.1086e-03),
            (160, 3.3292e-04, 3.2998e-04, 3.8601e-04),
            (320, 4.1807e-05, 4.1239e-05, 5.0343e-05),
        ],
        4: [
            (40, 1.0584e-02, 1.0858e-02, 1.0397e-02),
            (80, 7.2030e-04, 7.1663e-04, 7.9986e-04),
            (160, 4.6143e-05, 4.5104e-05, 5.2604e-05),
            (320, 2.8343e-06, 2.7773e-06, 3.1524e-06),
        ],
    },
    "M3": {
        2: [
            (40, 6.1589e-03, 5.5845e-03, 1.2083e-02),
            (80, 8.3338e-04, 7.3968e-04, 1.3829e-03),
            (160, 1.0540e-04, 9.1965e-05, 2.6687e-04),
            (320, 1.3140e-05, 1.1300e-05, 4.4219e-05),
        ],
        3: [
            (40, 6.1748e-03, 5.5947e-03, 1.2194e-02),
            (80, 8.3732e-04, 7.4289e-04, 1.3927e-03),
            (160, 1.0633e-04, 9.2869e-05, 2.6703e-04),
            (320, 1.3406e-05, 1.1534e-05, 4.4895e-05),
        ],
        4: [
            (40, 5.3594e-04, 4.2829e-04, 1.2219e-03),
            (80, 3.2804e-05, 2.5719e-05, 1.0037e-04),
            (160, 2.0451e-06, 1.6402e-06, 6.9656e-06),
            (320, 1.3039e-07, 1.0193e-07, 5.0042e-07),
        ],
    },
    "M4": {
        2: [
            (40, 4.1028e-03, 4.1125e-03, 4.0727e-03),
            (80, 1.0353e-03, 1.0377e-03, 1.0282e-03),
            (160, 2.6795e-04, 2.6849e-04, 2.6632e-04),
            (320, 6.7449e-05, 6.7583e-05, 6.7045e-05),
        ],
        3: [
            (40, 4.5862e-04, 4.5917e-04, 4.5693e-04),
            (80, 5.9486e-05, 5.9583e-05, 5.9193e-05),
            (160, 7.6394e-06, 7.6525e-06, 7.6002e-06),
            (320, 9.4389e-07, 9.4559e-07, 9.3887e-07),
        ],
        4: [
            (40, 3.5466e-05, 3.5876e-05, 3.4130e-05),
            (80, 2.8023e-06, 2.8302e-06, 2.7137e-06),
            (160, 1.8669e-07, 1.8835e-07, 1.8149e-07),
            (320, 1.2020e-08, 1.2124e-08, 1.1703e-08),
        ],
    },
}

TABLE_CASES = {
    "R1": "R1_convdiff",
    "R2": "R2_kdv",
    "R2L10": "R2_kdv_lambda10",
    "R3": "R3_biharmonic",
    "M1": "M1_diffusion",
    "M2": "M2_convdiff",
    "M3": "M3_kdv",
    "M4": "M4_biharmonic",
}
_BY_CASE = {v: k for k, v in TABLE_CASES.items()}


def table_id(name: str) -> str:
    """Accept a table id (``R1``) or a case id (``R1_convdiff``)."""
    if name in TABLE_CASES:
        return name
    if name in _BY_CASE:
        return _BY_CASE[name]
    raise ConfigurationError(f"unknown table {name!r}; choose from {sorted(TABLE_CASES)}")


def scheme_key(cfg) -> object:
    if cfg.integrator == "rosenbrock":
        return cfg.gamma
    return cfg.p


def reference_row(table: str, key, n: int):
    """``(L2, L1, Linf)`` in our norm convention, or ``None`` if unpublished."""
    rows = REFERENCE[table_id(table)].get(key, [])
    for rn, l2, l1, linf in rows:
        if rn == n:
            return tuple(v / s for v, s in zip((l2, l1, linf), REFERENCE_SCALE))
    return None


def reference_orders(table: str, key) -> Dict[int, float]:
    """L2 orders between consecutive published rows."""
    rows = REFERENCE[table_id(table)][key]
    return {b[0]: math.log2(a[1] / b[1]) for a, b in zip(rows, rows[1:])}
