"""Published goal boxes of the six benchmark systems, keyed by CSV columns.

Each entry: (state column name, center, half-width).  Used only for the
shaded bands in trajectory figures.
"""

import math

GOAL_BANDS = {
    "inverted_pendulum": [("state_0", 0.0, 0.1)],
    "pendulum": [("state_0", math.pi, 0.25), ("state_1", 0.0, 0.25)],
    "3wrobot_kin": [("state_0", 0.0, 1.0), ("state_1", 0.0, 1.0),
                    ("state_2", 0.0, 0.7)],
    "2tank": [("state_0", 0.4, 0.05), ("state_1", 0.4, 0.05)],
    "lunar_lander": [("state_1", 1.0, 0.05), ("state_2", 0.0, 0.05)],
    "omnibot": [("state_0", 0.0, 0.5), ("state_1", 0.0, 0.5)],
}
