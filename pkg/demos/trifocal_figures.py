"""Draw the translated trifocal ellipses along the radial and circle paths.

Usage: python demos/trifocal_figures.py [outdir]
"""

import sys

import numpy as np

from fslab import plane


def main(outdir="demo-figures"):
    paths = plane.render_figures(outdir)
    for fr in plane.figure_frames():
        X = fr.focal_vector
        print(f"{fr.family:6s} t={fr.t:6.3f} base=({fr.base[0]:+.3f}, {fr.base[1]:+.3f}) focus=({X[0]:+.6f}, {X[1]:+.6f})")
    print(f"wrote {len(paths)} files to {outdir}")
    t = np.sqrt(np.pi / 2)
    tr = plane.translated_indicatrix(plane.trifocal_seed(), plane.rotational_form(), (t, t))
    print("quarter turn focal vector:", np.round(tr.focal_vector, 12))


if __name__ == "__main__":
    main(*sys.argv[1:])
