"""Discriminating two nonorthogonal qubit states, three ways.

Prepares |0> and |+>, then compares the classic strategies: minimum-error
(always answer, sometimes wrongly), unambiguous (never answer wrongly,
sometimes decline), and a fixed inconclusive rate in between.  The first two
have textbook closed forms, printed alongside for comparison.
"""

import math

import numpy as np

from qsdkit import (
    INCONCLUSIVE,
    ProblemSpec,
    joint_distribution,
    make_single_qubit_pair,
    outcome_stats,
    solve_scheme,
)

spec = ProblemSpec.from_states(make_single_qubit_pair())
overlap = 1.0 / math.sqrt(2.0)

print("Two states |0> and |+>, equal priors, overlap 1/sqrt(2).\n")

med = solve_scheme(spec, "med")
print(f"minimum error:  P_succ = {med.value:.6f}")
print(f"   closed form: (1 + sqrt(1 - |<a|b>|^2)) / 2 = "
      f"{0.5 * (1 + math.sqrt(1 - overlap ** 2)):.6f}")

uqsd = solve_scheme(spec, "uqsd")
print(f"\nunambiguous:    P_succ = {uqsd.value:.6f}")
print(f"   closed form: 1 - |<a|b>| = {1 - overlap:.6f}")
jd = joint_distribution(spec, uqsd.povm, 0.0)
print(f"   misidentification mass: {jd.entries[0, 1] + jd.entries[1, 0]:.2e}"
      " (zero by construction)")

print("\nfixed inconclusive rate, sweeping the rate:")
print(f"{'rate':>6} {'P_succ':>10} {'P_err':>10} {'P_inc':>10}")
for rate in (0.0, 0.2, 0.4, 0.6, 0.8):
    res = solve_scheme(spec, "frio", rate=rate)
    stats = outcome_stats(joint_distribution(spec, res.povm, 0.0))
    print(f"{rate:6.1f} {stats.p_succ:10.6f} {stats.p_err:10.6f} {stats.p_inc:10.6f}")

print("\nThe error mass shrinks toward zero as the inconclusive rate grows:")
print("the rate-0 row is the minimum-error point and the large-rate rows")
print("approach the unambiguous regime.")

res = solve_scheme(spec, "frio", rate=0.8)
inc = res.povm.element(INCONCLUSIVE)
print(f"\nInconclusive element at rate 0.8 (trace {np.trace(inc).real:.4f}):")
print(np.round(inc, 4))
