"""Randomised sweep of operator pairs: verdict counts, twin residuals and FD divergences."""
import csv
import time

import numpy as np

from _common import outdir, parser
from pdeident.classify import Verdict, classify_pair, construct_nonidentifiable, pde_residual
from pdeident.operators import BCKind, BoundaryCondition, OperatorParams, eigenpairs
from pdeident.solve import EigenExpansionIC, fd_grid, solve_linear_fd


def aux_lambda(d, b, bc, n):
    if bc.kind is BCKind.PERIODIC:
        return d * n * n
    pairs = eigenpairs(d, b, bc, n)
    return pairs[n if bc.kind is BCKind.NEUMANN else n - 1].lam


def random_pair(rng, bc):
    d1, b1, c1 = rng.uniform(0.01, 0.2), rng.uniform(-1, 1), rng.uniform(0, 3)
    kind = rng.integers(3)
    if kind == 2:
        return OperatorParams(d1, b1, c1), OperatorParams(rng.uniform(0.01, 0.2), rng.uniform(-1, 1),
                                                          rng.uniform(0, 3))
    if bc.kind is BCKind.PERIODIC:
        b1 = 0.0
    r = rng.uniform(0.2, 0.8)
    b2 = b1 * r if kind == 0 or bc.kind is BCKind.PERIODIC else b1 * r + rng.uniform(0.1, 0.5)
    lam = aux_lambda(d1 * (1 - r), b1 - b2, bc, int(rng.integers(1, 4)))
    return OperatorParams(d1, b1, c1), OperatorParams(d1 * r, b2, c1 - lam)


def main():
    p = parser(__doc__, "sweep")
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    out = outdir(args.out)
    rng = np.random.default_rng(args.seed)
    t = np.array([0.0, 1.0])
    for bc in (BoundaryCondition.dirichlet(), BoundaryCondition.neumann(),
               BoundaryCondition.robin(0.5), BoundaryCondition.periodic()):
        start = time.perf_counter()
        x = fd_grid(bc, 101)
        coeffs = (0.0, 1.0, 0.0, 1.0, 0.0) if bc.kind is BCKind.PERIODIC else (1.0, 1.0)
        u0 = EigenExpansionIC(coeffs, bc)(x)
        rows = []
        for _ in range(args.pairs):
            A1, A2 = random_pair(rng, bc)
            v = classify_pair(A1, A2, bc).verdict
            metric = float("nan")
            if v is Verdict.ANI:
                sol = construct_nonidentifiable(A1, A2, bc)
                metric = max(pde_residual(sol, A) for A in sol.params_pair)
            elif v is Verdict.R:
                f1, f2 = (solve_linear_fd(A, bc, u0, t, nx=101) for A in (A1, A2))
                metric = float(np.max(np.abs(f1.values[-1] - f2.values[-1])))
            rows.append([*A1.astuple(), *A2.astuple(), v.value, metric])
        with open(out / f"sweep_{bc.kind.value}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["d1", "b1", "c1", "d2", "b2", "c2", "verdict", "metric"])
            w.writerows(rows)
        by = {v: [r[-1] for r in rows if r[6] == v.value] for v in Verdict}
        print(f"{bc.kind.value}: ANI {len(by[Verdict.ANI])} max residual "
              f"{max(by[Verdict.ANI], default=0):.1e}; AI {len(by[Verdict.AI])}; R {len(by[Verdict.R])} "
              f"min divergence {min(by[Verdict.R], default=float('nan')):.2e}; "
              f"{time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
