"""Two diffusion-reaction models that produce the same solution from a first-mode start."""
import math

import numpy as np

from _common import outdir, parser, pyplot
from pdeident.classify import classify_pair, construct_nonidentifiable
from pdeident.operators import BoundaryCondition, OperatorParams
from pdeident.solve import EigenExpansionIC, Logistic, divergence_metric, fd_grid, fields_to_csv
from pdeident.solve import solve_linear_spectral, solve_nonlinear_fd


def main():
    args = parser(__doc__, "twin").parse_args()
    out = outdir(args.out)
    bc = BoundaryCondition.dirichlet()
    A1, A2 = OperatorParams(0.05, 0, 1.0), OperatorParams(0.15, 0, 1 + 0.1 * math.pi**2)
    res = classify_pair(A1, A2, bc)
    print("verdict:", res.verdict.value)
    print("closed form:", construct_nonidentifiable(A1, A2, bc).formula)

    x, t = np.linspace(0, 1, 101), np.linspace(0, 2, 21)
    ic = EigenExpansionIC((1.0,), bc)
    s1, s2 = (solve_linear_spectral(A, bc, ic, x, t) for A in (A1, A2))
    f1, f2 = (solve_nonlinear_fd(A.d, Logistic(A.c, 0.0), bc, np.sin(np.pi * fd_grid(bc, 101)), t, nx=101)
              for A in (A1, A2))
    print(f"spectral gap {divergence_metric(s1, s2):.2e}, FD gap {divergence_metric(f1, f2):.2e}")
    (out / "spectral.csv").write_text(fields_to_csv([s1, s2], ["u1", "u2"]))
    (out / "fd.csv").write_text(fields_to_csv([f1, f2], ["u1", "u2"]))

    if not args.no_plot:
        plt = pyplot()
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for k in range(0, t.size, 5):
            ax.plot(x, s1.values[k], color="C0")
            ax.plot(x, s2.values[k], "--", color="C1")
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.set_title("A1 solid, A2 dashed")
        fig.tight_layout()
        fig.savefig(out / "twin.png", dpi=150)
    print("wrote", out)


if __name__ == "__main__":
    main()
