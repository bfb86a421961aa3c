"""Rolling median matching the workbench semantics: centered window with
asymmetric shrinking at the boundaries."""

import numpy as np


def rolling_median(series, window: int) -> np.ndarray:
    if window % 2 == 0 or window < 1:
        raise ValueError("window must be odd and >= 1")
    series = np.asarray(series, dtype=float)
    if window > len(series):
        raise ValueError("window exceeds series length")
    half = window // 2
    n = len(series)
    return np.array([
        np.median(series[max(0, i - half): min(n, i + half + 1)])
        for i in range(n)
    ])
