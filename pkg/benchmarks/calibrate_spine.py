"""Calibration run behind the constants in ``maxbell.extremal``.

    python3 benchmarks/calibrate_spine.py [--max-depth 24]

Prints, for the power law with p=2, beta=0.5:
  * the ratio int (M phi)^2 / int (H g)^2 per depth and band fraction,
  * gap41, stability and |q_measured - q_predicted| (q=1.5) along the ladder,
  * the stability metric of the mismatched control family.
"""
import argparse

from maxbell import PowerLaw, extremal, spine_construct
from maxbell.extremal import SpineSpec, q_integral_track, stability_metric
from maxbell.hardy import powerlaw_lp_integral
from maxbell.maximal import lp_bound_gap
from maxbell.verify import ineq_41_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-depth", type=int, default=22)
    a = ap.parse_args()
    p, q, beta = 2.0, 1.5, 0.5
    g = PowerLaw.from_beta(1.0, beta)
    target = powerlaw_lp_integral(g, p) / (1 - g.alpha) ** p
    depths = range(4, a.max_depth + 1, 2)

    print("ratio int(M phi)^p / int(Hg)^p")
    print("depth " + " ".join(f"band={b:<6}" for b in (0.125, 0.25, 0.375, 0.5)))
    for d in depths:
        r = [lp_bound_gap(spine_construct(SpineSpec(g, 2, d, b)), p).components["maximal_p"] / target
             for b in (0.125, 0.25, 0.375, 0.5)]
        print(f"{d:5d} " + " ".join(f"{x:11.5f}" for x in r))

    print("\nmatched ladder (band=%.2f)" % extremal.DEFAULT_BAND)
    print("depth      gap41  stability  |q_meas-q_pred|  omega_drift")
    for d in depths:
        phi = spine_construct(SpineSpec(g, 2, d))
        (tr,) = q_integral_track([phi], q, beta)
        print(f"{d:5d} {ineq_41_report(phi, p, q, beta).gap:10.5f} {stability_metric(phi, beta, p):10.5f}"
              f" {abs(tr.measured - tr.predicted):16.5f} {tr.omega_drift:12.5f}")

    bc = extremal.CONTROL_BETA
    gc = PowerLaw.from_beta(1.0, bc)
    limit = (beta - bc) ** p * powerlaw_lp_integral(gc, p)
    print(f"\ncontrol family beta'={bc} measured at beta={beta}; limit {limit:.5f},"
          f" floor {extremal.CONTROL_STABILITY_FLOOR}")
    for d in depths:
        print(f"{d:5d} {stability_metric(spine_construct(SpineSpec(gc, 2, d)), beta, p):10.5f}")


if __name__ == "__main__":
    main()
