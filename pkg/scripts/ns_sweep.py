"""NS-gate and CNOT behaviour as the NS reflectivity is detuned.

For each R the script reports the three heralded NS amplitudes (without the
balancing loss), and the CNOT proportionality error and success probability
of the PPBS circuit with R_H = R and the balancing loss kept at its exact
value.
"""

import argparse
from pathlib import Path

import numpy as np

from klmcnot.analysis import csv_text, write_text
from klmcnot.gates import CNOT, build_klm_cnot_polarization, build_ns_simplified, ns_heralded_amplitudes
from klmcnot.measure import conditional_map, proportionality_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--from", dest="start", type=float, default=0.05)
    ap.add_argument("--to", dest="stop", type=float, default=0.7)
    ap.add_argument("--steps", type=int, default=66)
    ap.add_argument("--out", type=Path, default=Path("runs/ns_sweep.csv"))
    args = ap.parse_args()

    rows = []
    for R in np.linspace(args.start, args.stop, args.steps):
        a0, a1, a2 = ns_heralded_amplitudes(build_ns_simplified(R)).real
        b = build_klm_cnot_polarization(r_h=R)
        m = conditional_map(b.circuit, b.herald, b.encoding)
        alpha, dev = proportionality_check(m, CNOT)
        rows.append((R, a0, a1, a2, dev / abs(alpha), float(np.mean(m.success))))
    best = min(rows, key=lambda r: r[4])
    print(f"smallest relative CNOT deviation {best[4]:.2e} at R = {best[0]:.4f}")
    flip = next(r[0] for r in rows if r[3] > 0)
    print(f"two-photon amplitude turns positive at R ~ {flip:.3f}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_text(args.out, csv_text(["r", "amp0", "amp1", "amp2", "relative_deviation", "success_mean"], rows))


if __name__ == "__main__":
    main()
