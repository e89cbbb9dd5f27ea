#!/usr/bin/env python3
"""Regenerates data/usgs_subset.csv, the bundled stand-in spectral library.

16 synthetic mineral-style reflectance curves on the 224-band 0.38-2.5 um
grid: a shared smooth continuum (mineral reflectances are strongly
correlated), per-material narrow absorption features carrying the identity,
and shared water bands near 1.4 and 1.9 um. Columns are normalized to a
common L2 norm calibrated so a 6-signature draw has lambda_max(A^T A) ~ 12.3,
which puts the step-size stability bound of the default synthetic scene near
the 0.165 reference value.

Deterministic; run from the repository root:
    python3 tools/make_library.py
"""

import numpy as np

BANDS = 224
MATERIALS = 16
WL_LO, WL_HI = 0.38, 2.5
COLUMN_NORM_SQ = 2.10  # ||a||^2 per signature after normalization
SEED = 20240801
MIN_PAIR_SAD = 0.12  # radians


def gaussian(x, center, width):
    return np.exp(-0.5 * ((x - center) / width) ** 2)


def make_curve(rng, wl):
    # shared continuum with mild per-material variation
    continuum = 0.55 + 0.25 / (1.0 + np.exp(-(wl - 1.05) / 0.35))
    continuum -= 0.15 * gaussian(wl, 2.25, 0.45)
    continuum *= 1.0 + rng.uniform(-0.1, 0.1) * (wl - 1.4) / 1.1
    continuum += rng.uniform(-0.06, 0.1) * gaussian(
        wl, rng.uniform(0.5, 2.2), rng.uniform(0.3, 0.8)
    )

    # narrow absorption features carry the identity
    absorption = np.ones_like(wl)
    for _ in range(rng.integers(4, 9)):
        center = rng.uniform(0.42, 2.45)
        width = rng.uniform(0.008, 0.05)
        depth = rng.uniform(0.3, 0.85)
        absorption *= 1.0 - depth * gaussian(wl, center, width)

    # shared water bands, varying depth
    for center, base_w in ((1.38, 0.035), (1.9, 0.05)):
        depth = rng.uniform(0.05, 0.35)
        absorption *= 1.0 - depth * gaussian(wl, center, base_w * rng.uniform(0.8, 1.4))

    return np.clip(continuum * absorption, 0.01, 1.2)


def sad(a, b):
    r = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return np.arccos(np.clip(r, -1.0, 1.0))


def main():
    rng = np.random.default_rng(SEED)
    wl = np.linspace(WL_LO, WL_HI, BANDS)

    curves = []
    while len(curves) < MATERIALS:
        candidate = make_curve(rng, wl)
        if all(sad(candidate, prev) >= MIN_PAIR_SAD for prev in curves):
            curves.append(candidate)
    spectra = np.column_stack(curves)
    spectra *= np.sqrt(COLUMN_NORM_SQ) / np.linalg.norm(spectra, axis=0, keepdims=True)

    names = [f"mat{i + 1:02d}" for i in range(MATERIALS)]
    with open("data/usgs_subset.csv", "w") as f:
        f.write("wavelength_um," + ",".join(names) + "\n")
        for r in range(BANDS):
            row = [f"{wl[r]:.17g}"] + [f"{spectra[r, j]:.17g}" for j in range(MATERIALS)]
            f.write(",".join(row) + "\n")

    lams = []
    for draw in range(20):
        idx = np.random.default_rng(draw).choice(MATERIALS, size=6, replace=False)
        A = spectra[:, idx]
        lams.append(np.linalg.eigvalsh(A.T @ A).max())
    lams = np.array(lams)
    print(f"lambda_max(A^T A) over 20 draws: min={lams.min():.3f} "
          f"mean={lams.mean():.3f} max={lams.max():.3f}")
    print(f"bound 2/(lam+0.2) range: [{2 / (lams.max() + 0.2):.4f}, "
          f"{2 / (lams.min() + 0.2):.4f}]")
    print(f"reflectance range: [{spectra.min():.4f}, {spectra.max():.4f}]")
    sads = [sad(spectra[:, i], spectra[:, j])
            for i in range(MATERIALS) for j in range(i + 1, MATERIALS)]
    print(f"pair SAD: min={np.min(sads):.3f} median={np.median(sads):.3f}")


if __name__ == "__main__":
    main()
