"""Compare the Wagner scatter test on the trifocal plane metric and on a
Randers metric whose drift depends on position."""

import numpy as np

from fslab import connection as cn
from fslab.metrics import preset

POINTS = np.array([[0.5, -0.4, 0.2, 0.3, 0.7], [0.5, 0.3, -0.6, 1.0, -0.2]])


def main():
    for name in ("plane:trifocal-rot", "randers:0.3*u2*u2,0"):
        rep = cn.wagner_test(preset(name), POINTS)
        print(f"{name:22s} scatter {rep.scatterResidual:.2e}  pde {rep.pdeResidual:.2e}  -> {rep.verdict}")


if __name__ == "__main__":
    main()
