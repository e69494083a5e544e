"""Recover the compatible connection of the trifocal plane metric at one point
and compare it with the closed form built from the rotational 1-form."""

import numpy as np

from fslab import connection as cn
from fslab import indicatrix as ind
from fslab import plane


def main(p=(0.5, 0.5)):
    m = plane.construction("trifocal-rot")
    p = np.asarray(p, dtype=float)
    tr = ind.trace_indicatrix(m, p)
    solve = cn.solve_constants(tr)
    built = cn.build_connection(m, p, solve)
    exact = plane.closed_form_connection(plane.rotational_form())(p[0], p[1])
    tor = cn.torsion_decompose(built.Gamma)
    print(f"period {tr.period:.6f}  k spread {solve.spread:.2e}  fiber spread {built.spread:.2e}")
    print("Gamma error against the closed form:", f"{np.max(np.abs(built.Gamma - exact)):.2e}")
    print("torsion form rho:", np.round(tor.rho, 9), "expected", np.array([p[1], -p[0]]))
    rep = cn.levi_civita_compare(m, None, p, Gamma=built.Gamma)
    print("averaged metric:\n", np.round(rep.gamma, 6))
    print(f"Levi-Civita identity {rep.identityResidual:.2e}  metricity {rep.metricityResidual:.2e}")


if __name__ == "__main__":
    main()
