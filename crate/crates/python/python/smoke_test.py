"""Smoke test for the qubvp extension module: python python/smoke_test.py"""

import math

import qubvp


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


nodes = qubvp.grid_nodes(20, map="log", c=5.0)
assert len(nodes) == 21 and nodes[-1] == math.inf
close(nodes[19], 5 * math.log(20), 1e-12)
assert qubvp.grid_nodes(4, map="tan", c=1.0)[0] == -math.inf
close(qubvp.map_eval(0.5, map="alg", c=2.0), 2.0, 1e-15)
step, w_next, w_here = qubvp.stencil(20, 0)
close(w_next + w_here, 1.0, 1e-15)

fs = qubvp.solve("falkner-skan", 80)
assert fs.converged, fs
close(fs.reports["fpp0"], 1.232972, 5e-7)
assert len(fs.u) == 81 and len(fs.u[0]) == 3

pile = qubvp.solve("pile", 80, p1=1.0, p2=0.5, p3=0.5)
close(pile.reports["u0"], 1.421469, 5e-7)

try:
    qubvp.solve("falkner-skan", 1)
except ValueError:
    pass
else:
    raise AssertionError("N = 1 accepted")

sw = qubvp.sweep("falkner-skan", [20, 40, 80, 160, 320, 640, 1280])
close(sw["orders"]["fpp0"][1], 1.998825, 5e-7)
assert sw["orders"]["fpp0"][0] is None

cols = qubvp.extrapolate([40, 80, 160], [1.234124, 1.232972, 1.232684])
close(cols[-1][-1], 1.232588, 5e-7)
close(qubvp.observed_order(1.238724, 1.234124, 1.232589), 1.998825, 5e-7)
close(qubvp.richardson_error(1.234124, 1.232972, 2.0), -0.000384, 1e-15)

# u' = v, v' = u on [0, inf) with u(0) = 1, u(inf) = 0: u = exp(-x)
custom = qubvp.solve_custom(
    2,
    lambda x, u: [u[1], u[0]],
    lambda u0, uinf: [u0[0] - 1.0, uinf[0]],
    160,
    initial=lambda x: [1.0, -1.0],
    reports={"du0": (1, "origin")},
)
close(custom.reports["du0"], -1.0, 1e-3)


def broken(x, u):
    raise KeyError("boom")


try:
    qubvp.solve_custom(1, broken, lambda a, b: [a[0] - 1.0], 10)
except KeyError:
    pass
else:
    raise AssertionError("callback exception swallowed")

print("qubvp smoke test passed")
