"""Numerical cutoffs shared by the kernel backends and the scalar solvers."""

# |det| below this fraction of the squared Frobenius norm counts as singular.
SINGULAR_RTOL = 1e-30

# coth(x): series below the small cutoff, exactly 1 above the large cutoff.
COTH_SERIES_CUTOFF = 1e-4
COTH_UNITY_CUTOFF = 20.0

# Per-source column order used everywhere a budget is tabulated.
SOURCE_ORDER = ("f_p", "f_s", "f_t", "v_se", "f_c")
