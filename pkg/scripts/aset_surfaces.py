"""Surfaces c = lam_n(d, b) on which an auxiliary operator admits a matching mode."""
import csv

import numpy as np

from _common import outdir, parser, pyplot
from pdeident.classify import indistinguishable_set
from pdeident.operators import BoundaryCondition


def main():
    p = parser(__doc__, "aset")
    p.add_argument("--n-max", type=int, default=3)
    args = p.parse_args()
    out = outdir(args.out)
    d_grid = np.linspace(0.05, 1.0, 40)
    b_grid = np.linspace(-2.0, 2.0, 41)
    for kind in ("dirichlet", "neumann"):
        samples = indistinguishable_set(BoundaryCondition(kind), args.n_max, d_grid, b_grid)
        with open(out / f"aset_{kind}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "d", "b", "c", "positive"])
            for s in samples:
                w.writerow([s.n, repr(s.d), repr(s.b), repr(s.c), str(s.positive).lower()])
        n_pos = sorted({s.n for s in samples if s.positive})
        print(f"{kind}: {len(samples)} samples, positive modes only at n = {n_pos}")
        if not args.no_plot:
            plt = pyplot()
            fig = plt.figure(figsize=(5, 4))
            ax = fig.add_subplot(projection="3d")
            for n in sorted({s.n for s in samples}):
                pts = np.array([(s.d, s.b, s.c) for s in samples if s.n == n])
                ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], s=1, label=f"n={n}")
            ax.set_xlabel("d")
            ax.set_ylabel("b")
            ax.set_zlabel("c")
            ax.legend()
            fig.savefig(out / f"aset_{kind}.png", dpi=150)
    print("wrote", out)


if __name__ == "__main__":
    main()
