"""Published local unitaries that turn two small clusters into EPR channels.

Entries printed as O(1e-16) or smaller are stored as exact zeros; the rest
carry the six significant digits they were published with. Node labels here
are 0-based (published labels minus one).
"""
import numpy as np

# 6-node 2x3 grid: Alice owns the top row (0, 1, 2), Bob the bottom row (3, 4, 5).
GRID6_PAIR = (0, 3)
GRID6_ALICE = (0, 1, 2)
GRID6_BOB = (3, 4, 5)
GRID6_U_A = np.array(
    [
        [-0.564055, 0.0, 0.564055],
        [0.250315, 0.0, 0.250315],
        [0.0, -0.277133, 0.0],
    ]
) + 1j * np.array(
    [
        [-0.426429, 0.0, 0.426429],
        [-0.661319, 0.0, -0.661319],
        [0.0, -0.960831, 0.0],
    ]
)
GRID6_U_B = np.array(
    [
        [-0.564055, 0.0, 0.564055],
        [-0.449914, 0.0, -0.449914],
        [0.0, -0.993175, 0.0],
    ]
) + 1j * np.array(
    [
        [0.426429, 0.0, -0.426429],
        [-0.545507, 0.0, -0.545507],
        [0.0, -0.116635, 0.0],
    ]
)

# complete graph on 6 nodes, channel between two of Alice's nodes.
FULL6_PAIR = (0, 1)
FULL6_ALICE = (0, 1, 2)
FULL6_BOB = (3, 4, 5)
FULL6_U_A = np.array(
    [
        [0.56149, -0.397134, -0.164356],
        [-0.56149, 0.397134, 0.164356],
        [0.408248, 0.408248, 0.408248],
    ]
) + 1j * np.array(
    [
        [-0.134394, -0.419068, 0.553462],
        [-0.134394, -0.419068, 0.553462],
        [-0.408248, -0.408248, -0.408248],
    ]
)
FULL6_U_B = np.array(
    [
        [0.447715, 0.293987, 0.104392],
        [0.436176, 0.614297, -0.472751],
        [0.124502, 0.361237, 0.860632],
    ]
) + 1j * np.array(
    [
        [-0.706639, 0.450256, -0.0124474],
        [0.201155, -0.408378, 0.0407497],
        [0.232375, -0.190305, 0.152002],
    ]
)

for _m in (GRID6_U_A, GRID6_U_B, FULL6_U_A, FULL6_U_B):
    _m.setflags(write=False)
del _m
