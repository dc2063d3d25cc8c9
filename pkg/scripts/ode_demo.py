"""Linear ODE systems X' = M X that agree on a kernel direction of their difference."""
import json

import numpy as np

from _common import outdir, parser, pyplot
from pdeident.classify import ode_commutant_pair, ode_twin, singular_commutant_params


def main():
    p = parser(__doc__, "ode_demo")
    p.add_argument("--b", type=float, default=-1.0, help="free commutant coordinate")
    args = p.parse_args()
    out = outdir(args.out)
    M1 = np.array([[2.0, 3.0], [1.0, 4.0]])
    a_choices = singular_commutant_params(M1, args.b)
    a = a_choices[0]
    M, X0 = ode_commutant_pair(M1, (a, args.b))
    t = np.linspace(0, 2, 201)
    x1, x2 = ode_twin(M1, M1 + M, X0, t)
    gap = float(np.max(np.abs(x1 - x2)))
    summary = {"M1": M1.tolist(), "M": M.tolist(), "X0": list(map(float, X0)),
               "a_choices": list(map(float, a_choices)), "max_gap": gap}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    np.savetxt(out / "trajectories.csv", np.column_stack([t, x1, x2]), delimiter=",",
               header="t,x1_1,x1_2,x2_1,x2_2", comments="")
    print(json.dumps(summary, indent=2))

    # a second, unmatched start shows the systems are otherwise different
    y1, y2 = ode_twin(M1, M1 + M, [1.0, 0.0], t)
    print(f"off-kernel start diverges by {np.max(np.abs(y1 - y2)):.3g}")
    if not args.no_plot:
        plt = pyplot()
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(t, x1, color="C0")
        ax.plot(t, x2, "--", color="C1")
        ax.set_xlabel("t")
        fig.tight_layout()
        fig.savefig(out / "ode_demo.png", dpi=150)


if __name__ == "__main__":
    main()
