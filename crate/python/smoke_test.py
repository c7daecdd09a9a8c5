#!/usr/bin/env python3
"""Import the compiled extension and spot-check every binding.

Build the module first:

    cargo build -p mixphase-py --release

The cdylib is copied next to a temp dir under the import name CPython
expects, so no install step is needed.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]


def load_module():
    for profile in ("release", "debug"):
        so = REPO / "target" / profile / "libmixphase_py.so"
        if so.exists():
            tmp = tempfile.mkdtemp(prefix="mixphase_py_")
            shutil.copy2(so, Path(tmp) / "mixphase_py.so")
            sys.path.insert(0, tmp)
            import mixphase_py

            return mixphase_py
    sys.exit("libmixphase_py.so not found; run: cargo build -p mixphase-py --release")


mp = load_module()
checks = 0


def close(got, want, tol, what):
    global checks
    if abs(got - want) > tol:
        sys.exit(f"FAIL {what}: got {got!r}, want {want!r} (tol {tol})")
    checks += 1


# Closed forms at their quantized and cold anchors.
ph, branch = mp.kitaev_theta_d(0.6, 1.0, 0.6, math.inf)
close(ph, -0.6, 1e-12, "wire cold phase")
assert branch == "center", branch
ph, branch = mp.kitaev_theta_d(0.6, 1.0, math.pi / 2, 1.0)
close(ph, -math.pi / 2, 0.0, "wire resonance")
ph, _ = mp.ssh_theta_d(1.0, math.inf, 1.2)
close(ph, 1.0, 1e-12, "chain cold phase")
ph, _ = mp.oscillator_theta_d(2.0 * math.pi, 0.7)
close(ph, math.pi, 1e-12, "oscillator half period")
close(mp.continuum_theta_d(1.0), -math.pi / 4, 1e-15, "continuum ratio 1")

# Numeric routes agree with the closed forms.
close(
    mp.oscillator_theta_d_numeric(1.3, 2.0),
    mp.oscillator_theta_d(1.3, 2.0)[0],
    1e-10,
    "oscillator trace sum",
)
wire = mp.TwoBandModel.kitaev(0.6, 1.0, 1.0)
close(wire.min_gap(), 0.8, 1e-12, "wire minimum gap")
close(
    wire.theta_d_numeric(1.0, 5.0),
    mp.kitaev_theta_d(0.6, 1.0, 0.6, 5.0)[0],
    1e-6,
    "wire quadrature vs closed form",
)
h0 = wire.hamiltonian(0.0)
close(h0[0][0].real, 0.4, 1e-12, "wire Hamiltonian at k=0")

# Thermal state of sigma_z: diagonal Gibbs weights.
sz = [[1 + 0j, 0j], [0j, -1 + 0j]]
rho = mp.thermal_state(sz, 1.5)
z = math.exp(-1.5) + math.exp(1.5)
close(rho[0][0].real, math.exp(-1.5) / z, 1e-12, "Gibbs weight up")
close(rho[1][1].real, math.exp(1.5) / z, 1e-12, "Gibbs weight down")
close(mp.fidelity(rho, rho), 1.0, 1e-12, "self fidelity")

# Lower band of the wire around the Brillouin circle carries phase pi.
def wire_ham(k, m=0.6):
    return [
        [complex(math.cos(k) - m, 0), complex(0, 1) * complex(math.sin(k), 0)],
        [complex(0, -1) * complex(math.sin(k), 0), complex(-(math.cos(k) - m), 0)],
    ]


# Lower eigenvector of [[a, ib], [-ib, -a]] with e = -hypot(a, b).
def lower_state(k, m=0.6):
    a = math.cos(k) - m
    b = math.sin(k)
    e = -math.hypot(a, b)
    v0 = complex(0, 1) * b
    v1 = complex(e - a, 0)
    n = math.sqrt(abs(v0) ** 2 + abs(v1) ** 2)
    return [v0 / n, v1 / n]


n = 400
states = [lower_state(2 * math.pi * j / n) for j in range(n)]
states.append(states[0])
close(abs(mp.berry_phase(states)), math.pi, 1e-9, "lower band phase")

# Mixed-state holonomy approaches the band phase in the cold limit.
eps = 2e-8
rhos = []
for j in range(n + 1):
    t = mp.thermal_state(wire_ham(2 * math.pi * (j % n) / n), 25.0)
    rhos.append(
        [
            [t[r][c] * (1 - eps) + (eps / 2 if r == c else 0) for c in range(2)]
            for r in range(2)
        ]
    )
theta_u = mp.uhlmann_phase(rhos)
close(abs(theta_u), math.pi, 2e-3, "cold holonomy phase")

# Witness: with rho = I/2 the anti-commutator is the generator itself.
rho_mix = [[0.5 + 0j, 0j], [0j, 0.5 + 0j]]
h_t = [[0.7j, 0.3j], [0.3j, 0.1j]]
rep = mp.incompatibility_witness(rho_mix, h_t)
close(rep["anticommutator_norm"], math.sqrt(0.68), 1e-12, "witness norm")
close(rep["trace_drift"], 0.8, 1e-12, "witness trace drift")
close(rep["max_abs_re_eigenvalue"], 0.0, 1e-9, "witness spectrum")

# Constant Hamiltonian: ground projector picks up -E0*tau.
h_const = [[1.0 + 0j, 0j], [0j, -0.5 + 0j]]
ground = [[0j, 0j], [0j, 1.0 + 0j]]
close(
    mp.dynamic_phase_quasistatic(ground, [h_const] * 64, 2.0),
    1.0,
    1e-9,
    "constant-path ground phase",
)

# Quarter turn under sigma_x swaps the populations of a diagonal state.
sx = [[0j, 1 + 0j], [1 + 0j, 0j]]
rho0 = [[0.7 + 0j, 0j], [0j, 0.3 + 0j]]
out = mp.von_neumann_evolve(rho0, [sx] * 400, math.pi / 2)
close(out[0][0].real, 0.3, 1e-8, "population swap")
close(sum(out[i][i] for i in range(2)).real, 1.0, 1e-12, "trace preserved")

# Validation errors arrive as ValueError with the original message.
try:
    mp.kitaev_theta_d(float("nan"), 1.0, 1.0, 1.0)
    sys.exit("FAIL: NaN mass accepted")
except ValueError:
    checks += 1
try:
    mp.uhlmann_phase([rho_mix])
    sys.exit("FAIL: two-sample loop accepted")
except ValueError:
    checks += 1

print(f"ok: {checks} checks passed")
