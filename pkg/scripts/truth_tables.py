"""Simulate the three truth tables of the PPBS CNOT and fit the dephasing model.

    python scripts/truth_tables.py --overlap 0.9487 --trials 20000 --seed 7 --out runs/tables
"""

import argparse
from pathlib import Path

import numpy as np

from klmcnot.analysis import (
    dephasing_fit,
    fidelity_report,
    report_json,
    standard_tables,
    table_csv,
    write_text,
)
from klmcnot.gates import build_klm_cnot_polarization
from klmcnot.noise import OverlapSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="exact", choices=["exact", "rounded"])
    ap.add_argument("--overlap", type=float, default=1.0, help="signal-ancilla wavepacket overlap")
    ap.add_argument("--trials", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/truth_tables"))
    args = ap.parse_args()

    bundle = build_klm_cnot_polarization(args.preset)
    overlaps = None if args.overlap >= 1.0 else OverlapSpec.two_source(args.overlap)
    sims, ideals = standard_tables(bundle, overlaps=overlaps, trials=args.trials, seed=args.seed)

    args.out.mkdir(parents=True, exist_ok=True)
    np.set_printoptions(precision=3, suppress=True)
    for t in sims:
        write_text(args.out / f"truth_{t.in_basis}-{t.out_basis}.csv", table_csv(t))
        print(t.setting)
        print(t.probabilities)
    report = fidelity_report(sims, ideals, seed=args.seed)
    write_text(args.out / "report.json", report_json(report))
    chi = dephasing_fit(report.f_zz_zz, report.f_xx_xx, report.f_xz_yy)
    print(f"F_ZZ={report.f_zz_zz:.4f}  F_XX={report.f_xx_xx:.4f}  F_XZ->YY={report.f_xz_yy:.4f}")
    print(f"F_p={chi.f_p:.4f}  F_avg={report.f_avg:.4f}  eta_T={chi.eta_t:.4f}  eta_C={chi.eta_c:.4f}  eta_CT={chi.eta_ct:.4f}")


if __name__ == "__main__":
    main()
